"""Rendering benchmark results: CSV, Markdown and per-algorithm plot series."""
from __future__ import annotations

import csv
import enum
import io
from typing import Iterable

from .algorithms import Algorithm
from .bench import BenchResult, ConvConfig

CSV_COLUMNS = ("label", "window", "stride", "rows", "cols", "cin", "cout", "batch",
               "algorithm", "reps", "best_ns", "mean_ns", "flops", "gflops")


class ReportFormat(enum.Enum):
    CSV = "csv"
    MARKDOWN = "markdown"


class ReportSchemaError(ValueError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"missing column {column!r}")


def _row(r: BenchResult) -> list:
    return [r.config.label, *r.config.tuple, r.config.batch, r.algorithm.value, r.reps,
            r.best_time_ns, repr(float(r.mean_time_ns)), r.flops, repr(r.gflops)]


def to_csv(results: Iterable[BenchResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in results:
        writer.writerow(_row(r))
    return buf.getvalue()


def _table(header: list[str], rows: list[list[str]], right: set[int]) -> str:
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]

    def fmt(cells):
        out = [str(c).rjust(w) if i in right else str(c).ljust(w)
               for i, (c, w) in enumerate(zip(cells, widths))]
        return "| " + " | ".join(out) + " |"

    rule = ["-" * (w - 1) + ":" if i in right else "-" * w for i, w in enumerate(widths)]
    lines = [fmt(header), "| " + " | ".join(rule) + " |"] + [fmt(r) for r in rows]
    return "\n".join(lines) + "\n"


def to_markdown(results: Iterable[BenchResult]) -> str:
    header = ["label", "batch", "algorithm", "reps", "best ms", "mean ms", "gflops"]
    rows = [[r.config.label, str(r.config.batch), r.algorithm.value, str(r.reps),
             f"{r.best_time_ns / 1e6:.3f}", f"{r.mean_time_ns / 1e6:.3f}", f"{r.gflops:.2f}"]
            for r in results]
    return _table(header, rows, right={1, 3, 4, 5, 6})


def write_report(results: Iterable[BenchResult], format: ReportFormat = ReportFormat.CSV) -> bytes:
    """Render results in input order; CSV carries full precision, Markdown 2-decimal gflops."""
    results = list(results)
    text = to_csv(results) if ReportFormat(format) is ReportFormat.CSV else to_markdown(results)
    return text.encode("utf-8")


def read_report(data: bytes | str) -> list[BenchResult]:
    """Parse CSV emitted by :func:`write_report`.

    ``gflops`` is checked for presence but recomputed from flops and time.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.DictReader(io.StringIO(data))
    header = reader.fieldnames or []
    for column in CSV_COLUMNS:
        if column not in header:
            raise ReportSchemaError(column)
    results = []
    for rec in reader:
        config = ConvConfig.from_tuple(
            int(rec["window"]), int(rec["stride"]), int(rec["rows"]), int(rec["cols"]),
            int(rec["cin"]), int(rec["cout"]), batch=int(rec["batch"]), label=rec["label"])
        results.append(BenchResult(config, Algorithm.parse(rec["algorithm"]), int(rec["reps"]), 0,
                                   int(rec["best_ns"]), float(rec["mean_ns"]), int(rec["flops"])))
    return results


def require_columns(data: bytes | str, columns: Iterable[str]) -> None:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    header = next(csv.reader(io.StringIO(data)), [])
    for column in columns:
        if column not in header:
            raise ReportSchemaError(column)


def plot_series(results: Iterable[BenchResult]) -> str:
    """Pivot to one CSV row per config label and one gflops column per algorithm.

    Labels and algorithms keep first-appearance order; missing pairs are empty.
    """
    labels: dict[str, dict[Algorithm, float]] = {}
    algs: list[Algorithm] = []
    for r in results:
        labels.setdefault(r.config.label, {})[r.algorithm] = r.gflops
        if r.algorithm not in algs:
            algs.append(r.algorithm)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", *(a.value for a in algs)])
    for label, by_alg in labels.items():
        writer.writerow([label, *(f"{by_alg[a]:.4f}" if a in by_alg else "" for a in algs)])
    return buf.getvalue()
