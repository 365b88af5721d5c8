"""Algorithm selection tables.

A table is an ordered list of ``(predicate, ranking)`` rules plus a default
ranking.  Resolution takes the first rule whose predicate matches, returns
the first algorithm in its ranking that supports the parameters, and
otherwise falls back to the default ranking.

Tables serialize to a line-oriented text format::

    # window stride rows cols in_features out_features : ranking
    3 1 56 56 64 64 : winograd,tiled,im2col
    1 1 * * * * : matmul,tiled
    default : tiled,im2col,direct

``*`` matches any value in that position.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .algorithms import (  # noqa: F401  (re-exported)
    DEFAULT_TILE,
    Algorithm,
    TileConfig,
    compatible_algorithms,
    convolve,
    supports,
)
from .gemm import DEFAULT_BLOCKING, GemmBlocking
from .tensor import ConvParams

UNIVERSAL = frozenset({Algorithm.DIRECT, Algorithm.NAIVE_VECTORIZED, Algorithm.IM2COL})
_FIELDS = ("window", "stride", "rows", "cols", "in_features", "out_features")


class TableFormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class ParamMatch:
    """Predicate on the (window, stride, rows, cols, in, out) tuple; ``None`` fields match anything.

    Windows and strides must be square to match a non-wildcard field.
    """

    window: Optional[int] = None
    stride: Optional[int] = None
    rows: Optional[int] = None
    cols: Optional[int] = None
    in_features: Optional[int] = None
    out_features: Optional[int] = None

    @classmethod
    def exact(cls, params: ConvParams) -> "ParamMatch":
        if params.window_rows != params.window_cols or params.stride_rows != params.stride_cols:
            raise ValueError("exact-match rules need square windows and strides")
        return cls(params.window_rows, params.stride_rows, params.input.rows, params.input.cols,
                   params.input.channels, params.features)

    def __call__(self, params: ConvParams) -> bool:
        actual = (
            params.window_rows if params.window_rows == params.window_cols else None,
            params.stride_rows if params.stride_rows == params.stride_cols else None,
            params.input.rows, params.input.cols, params.input.channels, params.features,
        )
        return all(want is None or want == got for want, got in zip(self.key, actual))

    @property
    def key(self) -> tuple:
        return tuple(getattr(self, f) for f in _FIELDS)


Predicate = Callable[[ConvParams], bool]


@dataclass(frozen=True)
class SelectorTable:
    rules: tuple = ()
    default: tuple = (Algorithm.TILED, Algorithm.IM2COL, Algorithm.NAIVE_VECTORIZED, Algorithm.DIRECT)

    def __post_init__(self):
        rules = tuple((pred, tuple(ranking)) for pred, ranking in self.rules)
        object.__setattr__(self, "rules", rules)
        object.__setattr__(self, "default", tuple(self.default))
        for _, ranking in rules:
            if not ranking:
                raise ValueError("rule rankings must name at least one algorithm")
            _check_ranking(ranking)
        _check_ranking(self.default)
        if not UNIVERSAL.intersection(self.default):
            raise ValueError("default ranking must contain direct, naive_vectorized or im2col")

    def resolve(self, params: ConvParams) -> Algorithm:
        return select(self, params)


def _check_ranking(ranking: Sequence[Algorithm]) -> None:
    if not all(isinstance(a, Algorithm) for a in ranking):
        raise TypeError(f"ranking entries must be Algorithm members: {ranking!r}")
    if len(set(ranking)) != len(ranking):
        raise ValueError(f"ranking repeats an algorithm: {[a.value for a in ranking]}")


def select(table: SelectorTable, params: ConvParams) -> Algorithm:
    for predicate, ranking in table.rules:
        if predicate(params):
            for alg in ranking:
                if supports(alg, params):
                    return alg
            break
    for alg in table.default:
        if supports(alg, params):
            return alg
    raise AssertionError("default ranking lost its universal algorithm")  # pragma: no cover


# Manual defaults: tiled kernels for 1x1 windows, Winograd for unstrided 3x3.
DEFAULT_TABLE = SelectorTable(
    rules=(
        (ParamMatch(window=1, stride=1), (Algorithm.TILED, Algorithm.MATMUL, Algorithm.IM2COL)),
        (ParamMatch(window=3, stride=1), (Algorithm.WINOGRAD, Algorithm.TILED, Algorithm.IM2COL)),
    ),
)


def conv2d(input, filter, params: ConvParams, algorithm: Optional[Algorithm] = None,
           table: SelectorTable = DEFAULT_TABLE, tile: TileConfig = DEFAULT_TILE,
           blocking: GemmBlocking = DEFAULT_BLOCKING):
    """Convolve with ``algorithm``, or with whatever ``table`` selects for ``params``."""
    if algorithm is None:
        algorithm = select(table, params)
    return convolve(algorithm, input, filter, params, tile, blocking)


# --------------------------------------------------------------------------
# text format

def _format_ranking(ranking) -> str:
    return ",".join(a.value for a in ranking)


def _parse_ranking(text: str, line: int) -> tuple:
    names = [t for t in text.split(",") if t.strip()]
    if not names:
        raise TableFormatError("empty ranking", line)
    try:
        return tuple(Algorithm.parse(t) for t in names)
    except ValueError as e:
        raise TableFormatError(str(e), line) from None


def format_table(table: SelectorTable) -> str:
    lines = ["# window stride rows cols in_features out_features : ranking"]
    for predicate, ranking in table.rules:
        if not isinstance(predicate, ParamMatch):
            raise ValueError(f"cannot serialize predicate {predicate!r}; only ParamMatch rules are writable")
        key = " ".join("*" if v is None else str(v) for v in predicate.key)
        lines.append(f"{key} : {_format_ranking(ranking)}")
    lines.append(f"default : {_format_ranking(table.default)}")
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> SelectorTable:
    rules = []
    default = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if default is not None:
            raise TableFormatError("rules after the default line", lineno)
        lhs, sep, rhs = body.partition(":")
        if not sep:
            raise TableFormatError(f"missing ':' in {raw.strip()!r}", lineno)
        ranking = _parse_ranking(rhs, lineno)
        lhs = lhs.strip()
        if lhs == "default":
            default = ranking
            continue
        fields = lhs.split()
        if len(fields) != len(_FIELDS):
            raise TableFormatError(f"expected {len(_FIELDS)} fields before ':', got {len(fields)}", lineno)
        try:
            values = [None if f == "*" else int(f) for f in fields]
        except ValueError:
            raise TableFormatError(f"non-integer field in {lhs!r}", lineno) from None
        if any(v is not None and v < 1 for v in values):
            raise TableFormatError("fields must be positive", lineno)
        rules.append((ParamMatch(*values), ranking))
    if default is None:
        raise TableFormatError("missing 'default : ...' line")
    try:
        return SelectorTable(tuple(rules), default)
    except (ValueError, TypeError) as e:
        raise TableFormatError(str(e)) from None


def write_table(table: SelectorTable, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_table(table))


def read_table(path: str | os.PathLike) -> SelectorTable:
    with open(path, encoding="utf-8") as fh:
        return parse_table(fh.read())
