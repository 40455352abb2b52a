"""Command line entry points.

Subcommands:
  run        full leave-one-station-out experiment from a JSON config
  synth      write a synthetic station CSV shaped like the bundled fixtures
  eval       agreement metrics for an observed,predicted CSV
  woa-bench  optimizer runs on named test functions with convergence traces

Exit codes: 0 success, 2 configuration/usage error, 3 data error,
4 runtime failure (partial outputs are left in place).
"""

from __future__ import annotations

import argparse
import csv
import statistics
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .benchmarks import BENCHMARKS
from .dataset import DataError, gilan_frame, write_station_csv
from .experiment import ConfigError, ExperimentConfig, run_experiment, write_outputs
from .metrics import (METRIC_COLUMNS, PredictionPair, metric_report,
                      report_csv_row, report_json_dict)
from .woa import Bounds, WoaConfig, woa_optimize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="windwoa",
                                     description="Wind speed prediction experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full experiment")
    run.add_argument("--config", help="JSON config file (or a previous run's manifest.json)")
    run.add_argument("--seed", type=int, default=None, help="override the master seed")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--jobs", type=int, default=1, help="parallel task workers")
    run.set_defaults(handler=_cmd_run)

    synth = sub.add_parser("synth", help="generate a synthetic station CSV")
    synth.add_argument("--rows", type=int, default=3600)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--sd-fraction", type=float, default=0.5,
                       help="marginal standard deviation as a fraction of the station mean")
    synth.add_argument("--out", required=True, help="CSV file to write")
    synth.set_defaults(handler=_cmd_synth)

    evaluate = sub.add_parser("eval", help="metrics for an observed,predicted CSV")
    evaluate.add_argument("file", help="CSV with columns observed,predicted")
    evaluate.add_argument("--json", action="store_true", help="print JSON instead of CSV")
    evaluate.set_defaults(handler=_cmd_eval)

    bench = sub.add_parser("woa-bench", help="optimizer benchmark runs")
    bench.add_argument("function", choices=sorted(BENCHMARKS))
    bench.add_argument("--dim", type=int, default=10)
    bench.add_argument("--iters", type=int, default=500)
    bench.add_argument("--pop", type=int, default=30)
    bench.add_argument("--seeds", type=int, default=10, help="number of seeded runs (0..n-1)")
    bench.add_argument("--bound", type=float, default=None,
                       help="half-width of the search cube (default per function)")
    bench.add_argument("--out", default=None, help="directory for convergence trace CSVs")
    bench.set_defaults(handler=_cmd_bench)

    return parser


def _cmd_run(args) -> int:
    config = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    result = run_experiment(config, jobs=args.jobs)
    paths = write_outputs(result, args.out)
    for task_result in result.results:
        record = task_result.selected
        if record is None:
            print(f"task {task_result.task.target_station}: failed")
            continue
        baseline = record.baseline_testing.rmse if record.baseline_testing else None
        hybrid = record.hybrid_testing.rmse if record.hybrid_testing else None
        print(f"task {task_result.task.target_station}: "
              f"{record.baseline_id} test RMSE {_fmt(baseline)}, "
              f"{record.hybrid_id} test RMSE {_fmt(hybrid)} "
              f"(repetition {record.repetition})")
    wins, total = result.hybrid_wins()
    print(f"hybrid test RMSE <= baseline on {wins}/{total} tasks")
    print(f"wrote {paths['report']}, {paths['records']}, {paths['manifest']}, {paths['plots']}/")
    return EXIT_OK


def _fmt(value) -> str:
    return "undefined" if value is None else f"{value:.4f}"


def _cmd_synth(args) -> int:
    if args.rows < 2:
        raise ConfigError("--rows must be >= 2")
    frame = gilan_frame(args.rows, args.seed, sd_fraction=args.sd_fraction)
    write_station_csv(frame, args.out)
    print(f"wrote {args.out} ({frame.n_rows} rows x {len(frame.stations)} stations)")
    return EXIT_OK


def _cmd_eval(args) -> int:
    path = Path(args.file)
    try:
        with path.open(newline="") as handle:
            rows = list(csv.reader(handle))
    except FileNotFoundError:
        raise DataError(f"file not found: {path}") from None
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [cell.strip().lower() for cell in rows[0]]
    if header[:2] != ["observed", "predicted"]:
        raise DataError(f"{path}: expected header observed,predicted")
    try:
        observed = [float(row[0]) for row in rows[1:] if row]
        predicted = [float(row[1]) for row in rows[1:] if row]
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: malformed row: {exc}") from None
    if not observed:
        raise DataError(f"{path}: no data rows")
    report = metric_report(PredictionPair(np.asarray(observed), np.asarray(predicted)))
    if args.json:
        import json
        print(json.dumps(report_json_dict(report), indent=2))
    else:
        print(",".join(METRIC_COLUMNS))
        print(",".join(report_csv_row(report)))
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.dim < 1 or args.iters < 1 or args.pop < 2 or args.seeds < 1:
        raise ConfigError("woa-bench needs dim >= 1, iters >= 1, pop >= 2, seeds >= 1")
    objective, default_bound = BENCHMARKS[args.function]
    bound = args.bound if args.bound is not None else default_bound
    outdir = None
    if args.out is not None:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
    bests = []
    for seed in range(args.seeds):
        config = WoaConfig(bounds=Bounds.cube(args.dim, -bound, bound),
                           population_size=args.pop, max_iterations=args.iters, seed=seed)
        trace = None if outdir is None else outdir / f"{args.function}_seed{seed}.csv"
        result = woa_optimize(config, objective, trace_path=trace)
        bests.append(result.best_fitness)
        print(f"seed {seed}: best {result.best_fitness:.6e}")
    print(f"{args.function} d={args.dim} pop={args.pop} iters={args.iters}: "
          f"median best {statistics.median(bests):.6e} over {args.seeds} seeds")
    if outdir is not None:
        print(f"traces in {outdir}/")
    return EXIT_OK


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - map anything else to the runtime code
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(cli_main())
