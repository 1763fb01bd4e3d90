"""Benchmark runner: per-level solver runs, aggregation, delimited output.

A benchmark is a solver configuration applied to every level of a
boxoban file, once per seed.  Records are deterministic given the
configuration and seeds, and aggregates are always recomputed from the
records rather than stored.  Level runs are independent, so they can be
dispatched to a process pool; records are emitted in level order
regardless of completion order.
"""

from __future__ import annotations

import csv
import io
import os
import statistics
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from . import sokoban
from .bridge import bridge_policy
from .core import Policy, SearchReport, SearchStatus
from .levin import greedy_prob_ts, levin_ts
from .luby import luby_ts, multi_ts
from .mixing import bayes_mix, local_mix_fixed
from .policies import UniformPolicy
from .sokoban import SokobanDomain, SokobanLevel, parse_boxoban

ALGORITHMS = ("levints", "lubyts", "multits", "greedy", "bfs-oracle")
RANDOMIZED = ("lubyts", "multits")

#: expansion budget applied to uniform-policy runs when none is given;
#: keeps an unguided search on a hard level from running unbounded
DEFAULT_UNIFORM_BUDGET = 100_000

WORKERS_ENV_VAR = "POLICYTS_WORKERS"


class ConfigError(ValueError):
    """A RunConfig combines parameters that do not belong together."""


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a benchmark run."""

    algorithm: str
    level_file: str = ""
    policy: str = "uniform"  # "uniform" or "bridge:<command line>"
    nsims: int | None = None
    d_min: int | None = None
    depth_limit: int | None = None
    budget: int | None = None
    time_limit: float | None = None
    seeds: tuple[int, ...] = (0,)
    noise: float = 0.0
    bayes_uniform: float | None = None
    workers: int = 1

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; pick from {ALGORITHMS}")
        randomized = self.algorithm in RANDOMIZED
        if self.d_min is not None and self.algorithm != "lubyts":
            raise ConfigError("d_min only applies to lubyts")
        if self.depth_limit is not None and self.algorithm != "multits":
            raise ConfigError("depth_limit only applies to multits")
        if self.algorithm == "multits" and self.depth_limit is None:
            raise ConfigError("multits requires depth_limit")
        if self.nsims is not None and not randomized:
            raise ConfigError("nsims only applies to lubyts/multits")
        if len(self.seeds) != len(set(self.seeds)):
            raise ConfigError("seeds must be distinct")
        if len(self.seeds) > 1 and not randomized:
            raise ConfigError(f"{self.algorithm} is deterministic; use a single seed")
        if not 0.0 <= self.noise <= 1.0:
            raise ConfigError("noise must lie in [0, 1]")
        if self.bayes_uniform is not None and not 0.0 < self.bayes_uniform < 1.0:
            raise ConfigError("bayes_uniform prior must lie in (0, 1)")
        if self.algorithm == "bfs-oracle" and self.policy != "uniform":
            raise ConfigError("bfs-oracle ignores the policy; leave it at 'uniform'")
        if not self.policy == "uniform" and not self.policy.startswith("bridge:"):
            raise ConfigError(f"unknown policy spec {self.policy!r}")

    def effective_budget(self) -> int | None:
        if self.budget is not None:
            return self.budget
        if self.policy == "uniform" and self.algorithm in ("levints", "greedy"):
            return DEFAULT_UNIFORM_BUDGET
        return self.budget


@dataclass(frozen=True)
class BenchmarkRecord:
    level_id: str
    seed: int
    status: str
    expansions: int
    solution_length: int | None
    wall_time: float


@dataclass
class BenchmarkResult:
    config: RunConfig
    records: list[BenchmarkRecord] = field(default_factory=list)


def _make_policy(config: RunConfig, domain: SokobanDomain) -> tuple[Policy, Callable[[], None]]:
    """Builds the configured policy; returns it with a cleanup callback."""
    closers: list[Callable[[], None]] = []
    if config.policy == "uniform":
        base: Policy = UniformPolicy(domain)
    else:
        command = config.policy[len("bridge:"):]
        bridged = bridge_policy(
            command, domain.render, expected_action_count=domain.action_count
        )
        closers.append(bridged.close)
        base = bridged
    policy = base
    if config.noise > 0.0:
        policy = local_mix_fixed(UniformPolicy(domain), policy, config.noise)
    if config.bayes_uniform is not None:
        policy = bayes_mix(
            [policy, UniformPolicy(domain)],
            [config.bayes_uniform, 1.0 - config.bayes_uniform],
        )

    def close() -> None:
        for closer in closers:
            closer()

    return policy, close


def _bfs_record(level: SokobanLevel, budget: int | None) -> tuple[str, int, int | None]:
    """Breadth-first baseline row: (status, dequeued nodes, optimal length)."""
    domain = SokobanDomain(level)
    start = domain.initial_state
    if domain.is_goal(start):
        return (SearchStatus.SOLVED.value, 1, 0)
    limit = budget if budget is not None else 1_000_000
    visited = {domain.state_key(start)}
    queue = deque([(start, 0)])
    dequeued = 0
    while queue:
        if dequeued >= limit:
            return (SearchStatus.BUDGET_REACHED.value, dequeued, None)
        dequeued += 1
        state, depth = queue.popleft()
        for action in range(4):
            child = domain.transition(state, action)
            key = domain.state_key(child)
            if key in visited:
                continue
            visited.add(key)
            if domain.is_goal(child):
                return (SearchStatus.SOLVED.value, dequeued, depth + 1)
            queue.append((child, depth + 1))
    return (SearchStatus.EXHAUSTED.value, dequeued, None)


def run_level(config: RunConfig, level: SokobanLevel, seed: int) -> BenchmarkRecord:
    """One (level, seed) cell of the benchmark grid."""
    budget = config.effective_budget()
    if config.algorithm == "bfs-oracle":
        status, expansions, length = _bfs_record(level, budget)
        return BenchmarkRecord(level.level_id, seed, status, expansions, length, 0.0)
    domain = SokobanDomain(level)
    policy, close = _make_policy(config, domain)
    try:
        report: SearchReport
        if config.algorithm == "levints":
            report = levin_ts(domain, policy, budget, time_limit=config.time_limit)
        elif config.algorithm == "greedy":
            report = greedy_prob_ts(domain, policy, budget, time_limit=config.time_limit)
        elif config.algorithm == "multits":
            report = multi_ts(
                domain,
                policy,
                config.nsims,
                config.depth_limit,
                seed,
                budget=budget,
                time_limit=config.time_limit,
            )
        else:
            report = luby_ts(
                domain,
                policy,
                config.nsims,
                config.d_min if config.d_min is not None else 1,
                seed,
                budget=budget,
                time_limit=config.time_limit,
            )
    finally:
        close()
    return BenchmarkRecord(
        level_id=level.level_id,
        seed=seed,
        status=report.status.value,
        expansions=report.expansions,
        solution_length=report.solution_length,
        wall_time=report.wall_time,
    )


def _run_task(payload: tuple[RunConfig, str, int]) -> BenchmarkRecord:
    config, level_text, seed = payload
    level = parse_boxoban(level_text)[0]
    try:
        return run_level(config, level, seed)
    except Exception as exc:  # recorded, not fatal: other levels keep running
        return BenchmarkRecord(level.level_id, seed, f"error: {exc}", 0, None, 0.0)


def run_benchmark(
    config: RunConfig, levels: Sequence[SokobanLevel] | None = None
) -> BenchmarkResult:
    """Run the configured solver over every (level, seed) pair.

    Levels come from ``config.level_file`` unless passed directly.  A
    level file that fails to parse aborts before any search runs;
    per-level search errors become records with an ``error:`` status.
    """
    config.validate()
    if levels is None:
        with open(config.level_file, "r", encoding="utf-8") as fh:
            levels = parse_boxoban(fh.read())
    tasks = [
        (config, sokoban.serialize_level(level), seed)
        for level in levels
        for seed in config.seeds
    ]
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        records = [_run_task(task) for task in tasks]
    return BenchmarkResult(config=config, records=records)


# -- aggregation -----------------------------------------------------------


@dataclass(frozen=True)
class SeedAggregate:
    seed: int
    solved: int
    total_expansions: int


@dataclass(frozen=True)
class Aggregate:
    """Summary recomputed from records (never cached alongside them)."""

    levels: int
    seeds: tuple[int, ...]
    solved_mean: float
    solved_std: float
    avg_length_mean: float | None
    max_length: int | None
    total_expansions_mean: float
    total_expansions_std: float
    per_seed: tuple[SeedAggregate, ...]


def aggregate(records: Sequence[BenchmarkRecord]) -> Aggregate:
    seeds = tuple(sorted({r.seed for r in records}))
    level_ids = {r.level_id for r in records}
    per_seed = []
    for seed in seeds:
        rows = [r for r in records if r.seed == seed]
        per_seed.append(
            SeedAggregate(
                seed=seed,
                solved=sum(1 for r in rows if r.status == "solved"),
                total_expansions=sum(r.expansions for r in rows),
            )
        )
    lengths = [
        r.solution_length
        for r in records
        if r.status == "solved" and r.solution_length is not None
    ]
    solved_counts = [s.solved for s in per_seed]
    totals = [s.total_expansions for s in per_seed]
    return Aggregate(
        levels=len(level_ids),
        seeds=seeds,
        solved_mean=statistics.mean(solved_counts),
        solved_std=statistics.stdev(solved_counts) if len(per_seed) > 1 else 0.0,
        avg_length_mean=statistics.mean(lengths) if lengths else None,
        max_length=max(lengths) if lengths else None,
        total_expansions_mean=statistics.mean(totals),
        total_expansions_std=statistics.stdev(totals) if len(per_seed) > 1 else 0.0,
        per_seed=tuple(per_seed),
    )


def sorted_expansion_series(
    records: Sequence[BenchmarkRecord], seed: int | None = None
) -> list[int]:
    """Per-level expansions sorted ascending (easiest level first).

    For randomized solvers one seed is chosen (the smallest by default),
    matching the convention of showing a typical run per solver.
    """
    seeds = sorted({r.seed for r in records})
    if not seeds:
        return []
    chosen = seeds[0] if seed is None else seed
    return sorted(r.expansions for r in records if r.seed == chosen)


# -- delimited output -------------------------------------------------------

RECORD_FIELDS = ("level_id", "seed", "status", "expansions", "solution_length")


def records_to_csv(
    records: Sequence[BenchmarkRecord], *, include_wall_time: bool = False
) -> str:
    """CSV text for the records, one row per (level, seed).

    Wall times are excluded by default so identical configurations and
    seeds produce byte-identical files; pass ``include_wall_time=True``
    for profiling output.
    """
    buf = io.StringIO()
    fields = RECORD_FIELDS + (("wall_time",) if include_wall_time else ())
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in records:
        row: list = [
            r.level_id,
            r.seed,
            r.status,
            r.expansions,
            "" if r.solution_length is None else r.solution_length,
        ]
        if include_wall_time:
            row.append(f"{r.wall_time:.6f}")
        writer.writerow(row)
    return buf.getvalue()


def summary_to_csv(agg: Aggregate) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["levels", "seeds", "solved_mean", "solved_std", "avg_length", "max_length",
         "total_expansions_mean", "total_expansions_std"]
    )
    writer.writerow(
        [
            agg.levels,
            " ".join(str(s) for s in agg.seeds),
            f"{agg.solved_mean:g}",
            f"{agg.solved_std:g}",
            "" if agg.avg_length_mean is None else f"{agg.avg_length_mean:.1f}",
            "" if agg.max_length is None else agg.max_length,
            f"{agg.total_expansions_mean:g}",
            f"{agg.total_expansions_std:g}",
        ]
    )
    return buf.getvalue()


def format_summary(config: RunConfig, agg: Aggregate) -> str:
    """Human-readable recap in the style of a solver comparison row."""
    name = config.algorithm
    if config.algorithm == "lubyts":
        name = f"lubyts({config.nsims or 'inf'}, {config.d_min or 1})"
    elif config.algorithm == "multits":
        name = f"multits({config.nsims or 'inf'}, {config.depth_limit})"
    if config.noise:
        name += f" +{config.noise:g} noise"
    lines = [
        f"solver:            {name}",
        f"levels:            {agg.levels}",
        f"seeds:             {', '.join(str(s) for s in agg.seeds)}",
        f"solved:            {agg.solved_mean:g}"
        + (f" ± {agg.solved_std:.1f}" if len(agg.seeds) > 1 else ""),
        f"avg length:        "
        + ("-" if agg.avg_length_mean is None else f"{agg.avg_length_mean:.1f}"),
        f"max length:        " + ("-" if agg.max_length is None else str(agg.max_length)),
        f"total expansions:  {agg.total_expansions_mean:,.0f}"
        + (f" ± {agg.total_expansions_std:,.0f}" if len(agg.seeds) > 1 else ""),
    ]
    return "\n".join(lines)


def with_workers_from_env(config: RunConfig) -> RunConfig:
    """Apply the WORKERS environment default when the config leaves it at 1."""
    if config.workers != 1:
        return config
    raw = os.environ.get(WORKERS_ENV_VAR)
    if not raw:
        return config
    try:
        workers = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV_VAR} must be an integer, got {raw!r}") from exc
    return replace(config, workers=max(1, workers))
