"""Command-line entry point: ``convprims {verify,bench,tune,report}``.

Exit status is 0 on success, 1 when verification or measurement fails and
2 for usage or I/O errors.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

import numba

from . import bench, report, selector, verify
from .algorithms import Algorithm
from .autotune import autotune

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FAULT_ENV = "CONVPRIMS_VERIFY_FAULT"


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _algorithms(text: str) -> list[Algorithm]:
    try:
        return [Algorithm.parse(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--batch", type=_positive, default=1)
    common.add_argument("--reps", type=_positive, default=bench.DEFAULT_REPS)
    common.add_argument("--warmups", type=_non_negative, default=bench.DEFAULT_WARMUPS)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--algorithms", type=_algorithms, default=None,
                        help="comma-separated subset, e.g. winograd,im2col")
    common.add_argument("--configs", help="config file, one 'K S H W Cin Cout' per line")
    common.add_argument("--output", help="write here instead of stdout")
    common.add_argument("--threads", type=_positive, default=os.cpu_count() or 1)
    common.add_argument("--format", choices=["csv", "markdown", "plot"], default=None)

    parser = argparse.ArgumentParser(prog="convprims", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="check every algorithm against the oracle")
    sub.add_parser("bench", parents=[common], help="time algorithms on convolution configs")
    sub.add_parser("tune", parents=[common], help="autotune and write a selector table")
    rep = sub.add_parser("report", parents=[common], help="convert a bench CSV to markdown or plot data")
    rep.add_argument("csv", nargs="?", default="-", help="bench CSV (default: stdin)")
    return parser


def _set_threads(n: int) -> None:
    numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as e:
            raise UsageError(f"cannot write {path}: {e.strerror}") from None
    else:
        sys.stdout.write(text)


def _load_configs(args) -> list[bench.ConvConfig]:
    if not args.configs:
        return bench.resnet50_configs(args.batch)
    try:
        return bench.read_configs(args.configs, args.batch)
    except OSError as e:
        raise UsageError(f"cannot read {args.configs}: {e.strerror}") from None
    except bench.ConfigFormatError as e:
        raise UsageError(f"{args.configs}: {e}") from None


def cmd_verify(args) -> int:
    _set_threads(1)
    fault = os.environ.get(FAULT_ENV)
    result = verify.run_verify(args.algorithms, seed=args.seed,
                               fault=Algorithm.parse(fault) if fault else None,
                               log=lambda msg: print(msg, file=sys.stderr))
    print(f"{result.checks} checks against the direct oracle")
    for alg in Algorithm:
        if alg in result.worst:
            tol = verify.tolerance(alg)
            status = "ok" if result.worst[alg] <= tol else "FAIL"
            print(f"{alg.value:<17} worst relative error {result.worst[alg]:.3e} (tolerance {tol:.0e}) {status}")
    if not result.ok:
        print(f"{len(result.failures)} check(s) exceeded tolerance", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_bench(args) -> int:
    _set_threads(args.threads)
    configs = _load_configs(args)
    fmt = report.ReportFormat(args.format or "csv")

    def progress(r):
        print(f"{r.config.label:<28} {r.algorithm.value:<17} {r.gflops:8.2f} gflops", file=sys.stderr)

    try:
        results = bench.run_suite(configs, args.algorithms, args.reps, args.warmups, args.seed, progress)
    except bench.BenchResourceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    _emit(report.write_report(results, fmt).decode("utf-8"), args.output)
    winners = bench.fastest_by_config(results)
    if winners:
        finding = "reproduced" if bench.no_single_winner(results) else "NOT reproduced"
        print(f"no single fastest algorithm across configs: {finding} "
              f"(winners: {', '.join(sorted({a.value for a in winners.values()}))})", file=sys.stderr)
    return EXIT_OK


def cmd_tune(args) -> int:
    _set_threads(1)
    configs = _load_configs(args)
    result = autotune(configs, args.reps, args.seed, args.warmups, args.algorithms)
    _emit(selector.format_table(result.table), args.output)
    out = sys.stdout if args.output else sys.stderr
    for msg in result.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    wins = result.win_counts()
    for alg in Algorithm:
        print(f"{alg.value:<17} wins {wins.get(alg, 0)}", file=out)
    return EXIT_FAIL if any("no algorithm" in w for w in result.warnings) else EXIT_OK


def cmd_report(args) -> int:
    try:
        if args.csv == "-":
            data = sys.stdin.read()
        else:
            with open(args.csv, encoding="utf-8") as fh:
                data = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {args.csv}: {e.strerror}") from None
    try:
        results = report.read_report(data)
    except report.ReportSchemaError as e:
        raise UsageError(f"{args.csv}: {e}") from None
    except (ValueError, KeyError) as e:
        raise UsageError(f"{args.csv}: malformed row: {e}") from None
    fmt = args.format or "markdown"
    if fmt == "plot":
        text = report.plot_series(results)
    else:
        text = report.write_report(results, report.ReportFormat(fmt)).decode("utf-8")
    _emit(text, args.output)
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "bench": cmd_bench, "tune": cmd_tune, "report": cmd_report}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.format == "plot" and args.command != "report":
        print("error: --format plot is only valid for 'report'", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
