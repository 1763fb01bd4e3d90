import os
import subprocess
import sys

import pytest

from policyts.bench import (
    Aggregate,
    BenchmarkRecord,
    ConfigError,
    RunConfig,
    aggregate,
    records_to_csv,
    run_benchmark,
    sorted_expansion_series,
    summary_to_csv,
    with_workers_from_env,
)
from policyts.sokoban import parse_boxoban
from support import data_path


@pytest.fixture(scope="module")
def handcrafted_file():
    return data_path("handcrafted.txt")


@pytest.fixture(scope="module")
def small_levels():
    with open(data_path("levels_100.txt")) as fh:
        return parse_boxoban(fh.read())[:5]


def test_config_validation_rules():
    RunConfig(algorithm="lubyts", d_min=32, seeds=(1, 2)).validate()
    with pytest.raises(ConfigError):
        RunConfig(algorithm="quantum").validate()
    with pytest.raises(ConfigError):
        RunConfig(algorithm="levints", d_min=2).validate()
    with pytest.raises(ConfigError):
        RunConfig(algorithm="levints", depth_limit=10).validate()
    with pytest.raises(ConfigError):
        RunConfig(algorithm="multits").validate()  # needs depth_limit
    with pytest.raises(ConfigError):
        RunConfig(algorithm="levints", nsims=3).validate()
    with pytest.raises(ConfigError):
        RunConfig(algorithm="levints", seeds=(1, 2)).validate()
    with pytest.raises(ConfigError):
        RunConfig(algorithm="multits", depth_limit=5, seeds=(1, 1)).validate()
    with pytest.raises(ConfigError):
        RunConfig(algorithm="bfs-oracle", policy="bridge:foo").validate()
    with pytest.raises(ConfigError):
        RunConfig(algorithm="levints", policy="lookup:foo").validate()
    with pytest.raises(ConfigError):
        RunConfig(algorithm="levints", noise=1.5).validate()


def test_levints_uniform_solves_handcrafted(handcrafted_file):
    config = RunConfig(algorithm="levints", level_file=handcrafted_file)
    result = run_benchmark(config)
    by_id = {r.level_id: r for r in result.records}
    assert by_id["push1"].status == "solved"
    assert by_id["push1"].solution_length == 1
    assert by_id["push1"].expansions >= 1
    assert by_id["solved"].solution_length == 0
    assert by_id["deadcorner"].status == "exhausted"


def test_bfs_oracle_rows(handcrafted_file):
    config = RunConfig(algorithm="bfs-oracle", level_file=handcrafted_file)
    result = run_benchmark(config)
    by_id = {r.level_id: r for r in result.records}
    assert by_id["push1"].solution_length == 1
    assert by_id["tworoom"].solution_length == 3
    assert by_id["deadcorner"].status == "exhausted"


def test_multits_single_rollout_semantics(small_levels):
    config = RunConfig(algorithm="multits", nsims=1, depth_limit=200)
    result = run_benchmark(config, levels=small_levels)
    assert len(result.records) == len(small_levels)
    for record in result.records:
        # one sampled trajectory per level: at most cap+1 goal tests
        assert record.expansions <= 201


def test_records_deterministic_and_csv_byte_identical(small_levels):
    config = RunConfig(algorithm="lubyts", nsims=50, seeds=(1, 2, 3))
    a = run_benchmark(config, levels=small_levels)
    b = run_benchmark(config, levels=small_levels)
    strip = lambda r: (r.level_id, r.seed, r.status, r.expansions, r.solution_length)
    assert [strip(r) for r in a.records] == [strip(r) for r in b.records]
    assert records_to_csv(a.records) == records_to_csv(b.records)
    with_times = records_to_csv(a.records, include_wall_time=True)
    assert "wall_time" in with_times.splitlines()[0]


def test_worker_pool_preserves_record_order(small_levels):
    config = RunConfig(algorithm="lubyts", nsims=40, seeds=(1, 2))
    serial = run_benchmark(config, levels=small_levels)
    from dataclasses import replace

    parallel = run_benchmark(replace(config, workers=2), levels=small_levels)
    strip = lambda r: (r.level_id, r.seed, r.status, r.expansions)
    assert [strip(r) for r in serial.records] == [strip(r) for r in parallel.records]


def test_aggregate_recomputes_from_records():
    records = [
        BenchmarkRecord("0", 1, "solved", 10, 4, 0.0),
        BenchmarkRecord("1", 1, "budget_reached", 100, None, 0.0),
        BenchmarkRecord("0", 2, "solved", 20, 6, 0.0),
        BenchmarkRecord("1", 2, "solved", 30, 8, 0.0),
    ]
    agg = aggregate(records)
    assert agg.levels == 2
    assert agg.seeds == (1, 2)
    assert agg.solved_mean == 1.5
    assert agg.per_seed[0].total_expansions == 110
    assert agg.per_seed[1].total_expansions == 50
    assert agg.total_expansions_mean == 80
    assert agg.max_length == 8
    text = summary_to_csv(agg)
    assert "80" in text
    # aggregates always derive from the records they summarize
    assert aggregate(records[:2]).solved_mean == 1


def test_sorted_series_uses_one_seed(small_levels):
    config = RunConfig(algorithm="lubyts", nsims=30, seeds=(4, 5))
    result = run_benchmark(config, levels=small_levels)
    series = sorted_expansion_series(result.records)
    assert series == sorted(series)
    assert len(series) == len(small_levels)


def test_workers_env_default(monkeypatch):
    config = RunConfig(algorithm="levints")
    monkeypatch.setenv("POLICYTS_WORKERS", "3")
    assert with_workers_from_env(config).workers == 3
    monkeypatch.setenv("POLICYTS_WORKERS", "chaos")
    with pytest.raises(ConfigError):
        with_workers_from_env(config)


def _run_cli(*args: str):
    return subprocess.run(
        [sys.executable, "-m", "policyts.cli", *args],
        capture_output=True,
        text=True,
        timeout=300,
    )


def test_cli_run_writes_reports(tmp_path, handcrafted_file):
    out = tmp_path / "records.csv"
    summary = tmp_path / "summary.csv"
    series = tmp_path / "series.csv"
    figure = tmp_path / "expansions.png"
    proc = _run_cli(
        "run",
        "--algorithm", "levints",
        "--levels", handcrafted_file,
        "--budget", "50000",
        "--out", str(out),
        "--summary", str(summary),
        "--series", str(series),
        "--figure", str(figure),
    )
    assert proc.returncode == 0, proc.stderr
    assert "solver:" in proc.stdout
    header, *rows = out.read_text().splitlines()
    assert header == "level_id,seed,status,expansions,solution_length"
    assert len(rows) == 4
    assert summary.read_text().startswith("levels,")
    assert series.read_text().splitlines()[0] == "rank,expansions"
    assert figure.stat().st_size > 0


def test_cli_rejects_bad_config(handcrafted_file):
    proc = _run_cli(
        "run", "--algorithm", "levints", "--levels", handcrafted_file, "--nsims", "5"
    )
    assert proc.returncode == 2
    assert "nsims" in proc.stderr


def test_cli_rejects_missing_level_file():
    proc = _run_cli("run", "--algorithm", "levints", "--levels", "/no/such/file.txt")
    assert proc.returncode == 2


def test_cli_rejects_malformed_level_file(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("; broken\n###\n#x#\n###\n")
    proc = _run_cli("run", "--algorithm", "levints", "--levels", str(bad))
    assert proc.returncode == 2
    assert "unknown character" in proc.stderr


def test_cli_bridge_policy_spec(tmp_path, handcrafted_file):
    from pathlib import Path

    server = Path(__file__).parent / "servers" / "uniform_server.py"
    out = tmp_path / "records.csv"
    proc = _run_cli(
        "run",
        "--algorithm", "levints",
        "--levels", handcrafted_file,
        "--policy", f"bridge:{sys.executable} {server}",
        "--budget", "20000",
        "--out", str(out),
    )
    assert proc.returncode == 0, proc.stderr
    rows = out.read_text().splitlines()[1:]
    # the uniform server must reproduce the in-process uniform runs
    native = run_benchmark(
        RunConfig(algorithm="levints", level_file=handcrafted_file, budget=20000)
    )
    bridged = {r.split(",")[0]: r for r in rows}
    for record in native.records:
        expect = (
            f"{record.level_id},{record.seed},{record.status},{record.expansions},"
            f"{'' if record.solution_length is None else record.solution_length}"
        )
        assert bridged[record.level_id] == expect


def test_cli_plot_overlays_record_files(tmp_path, handcrafted_file):
    rec_a = tmp_path / "a.csv"
    rec_b = tmp_path / "b.csv"
    for path, algorithm in ((rec_a, "levints"), (rec_b, "bfs-oracle")):
        proc = _run_cli(
            "run", "--algorithm", algorithm, "--levels", handcrafted_file,
            "--budget", "50000", "--out", str(path),
        )
        assert proc.returncode == 0, proc.stderr
    figure = tmp_path / "compare.png"
    proc = _run_cli(
        "plot",
        "--records", f"levin={rec_a}",
        "--records", f"breadth-first={rec_b}",
        "--out", str(figure),
    )
    assert proc.returncode == 0, proc.stderr
    assert figure.stat().st_size > 0
