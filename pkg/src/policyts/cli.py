"""Command-line benchmark runner.

``policyts run`` executes one solver configuration over a boxoban level
file, prints a summary, and optionally writes per-record CSV, a summary
CSV, a sorted-expansions series CSV, and a figure.  ``policyts plot``
overlays the series of previously written record files.

Exit status is 0 on completion and 2 on configuration or level-file
errors; individual level failures are recorded in the output instead of
aborting the run.
"""

from __future__ import annotations

import argparse
import csv
import sys

from .bench import (
    ALGORITHMS,
    BenchmarkRecord,
    ConfigError,
    RunConfig,
    aggregate,
    format_summary,
    records_to_csv,
    run_benchmark,
    sorted_expansion_series,
    summary_to_csv,
    with_workers_from_env,
)
from .plots import save_expansion_series_figure
from .sokoban import SokobanParseError


def _parse_seeds(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in raw.split(",") if part != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers: {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="policyts",
        description="Policy-guided tree search benchmarks on Sokoban levels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one solver over a level file")
    run.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    run.add_argument("--levels", required=True, help="boxoban level file")
    run.add_argument(
        "--policy",
        default="uniform",
        help="'uniform' or 'bridge:<command line>' for an external policy server",
    )
    run.add_argument("--nsims", type=int, default=None, help="number of sampled runs")
    run.add_argument("--d-min", type=int, default=None, help="restart schedule scale (lubyts)")
    run.add_argument("--depth-limit", type=int, default=None, help="rollout cap (multits)")
    run.add_argument("--budget", type=int, default=None, help="max expansions per level")
    run.add_argument(
        "--time-limit", type=float, default=None, help="wall-clock seconds per level"
    )
    run.add_argument("--seeds", type=_parse_seeds, default=(0,), help="e.g. 1,2,3,4,5")
    run.add_argument(
        "--noise",
        type=float,
        default=0.0,
        help="mix this share of the uniform policy into every step",
    )
    run.add_argument(
        "--bayes-uniform",
        type=float,
        default=None,
        help="prior weight of the base policy in a Bayes mix with uniform",
    )
    run.add_argument("--workers", type=int, default=1, help="parallel level runs")
    run.add_argument("--out", default=None, help="write per-record CSV here")
    run.add_argument("--summary", default=None, help="write aggregate CSV here")
    run.add_argument("--series", default=None, help="write sorted expansion series CSV here")
    run.add_argument("--figure", default=None, help="render the series figure to this file")
    run.add_argument(
        "--timings", action="store_true", help="include wall times in the record CSV"
    )

    plot = sub.add_parser("plot", help="overlay series from record CSV files")
    plot.add_argument(
        "--records",
        action="append",
        required=True,
        metavar="LABEL=PATH",
        help="record CSV with a legend label; repeatable",
    )
    plot.add_argument("--out", required=True, help="figure output path")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = RunConfig(
        algorithm=args.algorithm,
        level_file=args.levels,
        policy=args.policy,
        nsims=args.nsims,
        d_min=args.d_min,
        depth_limit=args.depth_limit,
        budget=args.budget,
        time_limit=args.time_limit,
        seeds=tuple(args.seeds),
        noise=args.noise,
        bayes_uniform=args.bayes_uniform,
        workers=args.workers,
    )
    try:
        config = with_workers_from_env(config)
        config.validate()
        result = run_benchmark(config)
    except (ConfigError, SokobanParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    agg = aggregate(result.records)
    print(format_summary(config, agg))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(records_to_csv(result.records, include_wall_time=args.timings))
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            fh.write(summary_to_csv(agg))
    if args.series or args.figure:
        series = sorted_expansion_series(result.records)
        if args.series:
            with open(args.series, "w", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["rank", "expansions"])
                for rank, value in enumerate(series, start=1):
                    writer.writerow([rank, value])
        if args.figure:
            save_expansion_series_figure({args.algorithm: series}, args.figure)
    return 0


def _read_record_expansions(path: str) -> list[int]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [BenchmarkRecord(
            level_id=row["level_id"],
            seed=int(row["seed"]),
            status=row["status"],
            expansions=int(row["expansions"]),
            solution_length=int(row["solution_length"]) if row["solution_length"] else None,
            wall_time=float(row.get("wall_time") or 0.0),
        ) for row in reader]
    return sorted_expansion_series(rows)


def _cmd_plot(args: argparse.Namespace) -> int:
    series: dict[str, list[int]] = {}
    try:
        for spec in args.records:
            label, _, path = spec.partition("=")
            if not path:
                label, path = path or spec, spec
            series[label] = _read_record_expansions(path)
        save_expansion_series_figure(series, args.out)
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_plot(args)


if __name__ == "__main__":
    sys.exit(main())
