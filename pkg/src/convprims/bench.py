"""Benchmark harness: convolution configs, best-of-N timing and gigaflops.

Gigaflops are always normalized by the direct-convolution flop count
(:func:`convprims.tensor.flop_count`, 2 flops per multiply-accumulate),
whatever algorithm ran.  An algorithm doing less arithmetic, like Winograd,
therefore shows up as a higher rate.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Optional, Sequence

import numpy as np

from .algorithms import DEFAULT_TILE, Algorithm, TileConfig, compatible_algorithms, convolve, supports
from .gemm import DEFAULT_BLOCKING, GemmBlocking
from .tensor import ConvParams, IncompatibleAlgorithmError, flop_count, random_tensor

DEFAULT_REPS = 10
DEFAULT_WARMUPS = 2


class ConfigFormatError(ValueError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class BenchResourceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConvConfig:
    label: str
    params: ConvParams

    @classmethod
    def from_tuple(cls, window: int, stride: int, rows: int, cols: int, in_features: int,
                   out_features: int, batch: int = 1, label: Optional[str] = None) -> "ConvConfig":
        params = ConvParams.square(window, stride, rows, cols, in_features, out_features, batch=batch)
        return cls(label or default_label(params), params)

    @property
    def tuple(self) -> tuple[int, int, int, int, int, int]:
        """(window, stride, rows, cols, in_features, out_features)."""
        p = self.params
        return (p.window_rows, p.stride_rows, p.input.rows, p.input.cols, p.input.channels, p.features)

    @property
    def batch(self) -> int:
        return self.params.input.batch


def default_label(params: ConvParams) -> str:
    return (f"{params.window_rows}x{params.window_cols}/{params.stride_rows} "
            f"{params.input.rows}x{params.input.cols} {params.input.channels}->{params.features}")


# --------------------------------------------------------------------------
# config files: "window stride rows cols in_features out_features" per line

def parse_configs(text: str, batch: int = 1) -> list[ConvConfig]:
    configs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        fields = body.split()
        if len(fields) != 6:
            raise ConfigFormatError(f"expected 6 fields (K S H W Cin Cout), got {len(fields)}: {body!r}", lineno)
        try:
            values = [int(f) for f in fields]
        except ValueError:
            raise ConfigFormatError(f"non-integer field in {body!r}", lineno) from None
        try:
            configs.append(ConvConfig.from_tuple(*values, batch=batch))
        except ValueError as e:
            raise ConfigFormatError(str(e), lineno) from None
    return configs


def format_configs(configs: Iterable[ConvConfig]) -> str:
    lines = ["# window stride rows cols in_features out_features"]
    lines += [" ".join(str(v) for v in c.tuple) for c in configs]
    return "\n".join(lines) + "\n"


def read_configs(path: str | os.PathLike, batch: int = 1) -> list[ConvConfig]:
    with open(path, encoding="utf-8") as fh:
        return parse_configs(fh.read(), batch)


def resnet50_configs(batch: int = 1) -> list[ConvConfig]:
    """The 26 distinct convolution shapes of ResNet-50 (see data/resnet50_convs.txt)."""
    if batch < 1:
        raise ValueError("batch must be >= 1")
    text = resources.files("convprims").joinpath("data/resnet50_convs.txt").read_text(encoding="utf-8")
    return parse_configs(text, batch)


# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BenchResult:
    config: ConvConfig
    algorithm: Algorithm
    reps: int
    warmups: int
    best_time_ns: int
    mean_time_ns: float
    flops: int

    @property
    def best_time_seconds(self) -> float:
        return self.best_time_ns * 1e-9

    @property
    def gflops(self) -> float:
        # flops / (ns * 1e-9) / 1e9 == flops / ns
        return self.flops / self.best_time_ns


def bench_inputs(params: ConvParams, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic (input, filter) pair for ``params``."""
    return random_tensor(params.input, seed), random_tensor(params.filter_shape, seed + 1)


def run_bench(config: ConvConfig, alg: Algorithm, reps: int = DEFAULT_REPS,
              warmups: int = DEFAULT_WARMUPS, seed: int = 0, tile: TileConfig = DEFAULT_TILE,
              blocking: GemmBlocking = DEFAULT_BLOCKING, kernel=None) -> BenchResult:
    """Time ``alg`` on ``config``: ``warmups`` untimed runs, then ``reps`` timed ones.

    ``kernel`` replaces the algorithm's implementation (same signature as
    :func:`convprims.algorithms.convolve` minus the first argument); used to
    exercise the harness with synthetic kernels.
    """
    params = config.params
    if not supports(alg, params):
        raise IncompatibleAlgorithmError(f"{alg.value} is not compatible with {config.label}")
    if reps < 1 or warmups < 0:
        raise ValueError("reps must be >= 1 and warmups >= 0")
    try:
        x, w = bench_inputs(params, seed)
    except MemoryError as e:
        raise BenchResourceError(f"cannot allocate inputs for {config.label}") from e
    if kernel is None:
        def kernel(x, w, p, tile, blocking):
            return convolve(alg, x, w, p, tile, blocking)

    for _ in range(warmups):
        kernel(x, w, params, tile, blocking)
    times = []
    for _ in range(reps):
        start = time.perf_counter_ns()
        kernel(x, w, params, tile, blocking)
        # a zero reading on a coarse clock would make gflops infinite
        times.append(max(time.perf_counter_ns() - start, 1))
    return BenchResult(config, alg, reps, warmups, min(times), sum(times) / len(times),
                       flop_count(params))


def run_suite(configs: Sequence[ConvConfig], algorithms: Optional[Iterable[Algorithm]] = None,
              reps: int = DEFAULT_REPS, warmups: int = DEFAULT_WARMUPS, seed: int = 0,
              progress=None) -> list[BenchResult]:
    """Benchmark every compatible requested algorithm on every config, serially."""
    wanted = list(Algorithm) if algorithms is None else list(algorithms)
    results = []
    for config in configs:
        for alg in compatible_algorithms(config.params):
            if alg not in wanted:
                continue
            result = run_bench(config, alg, reps, warmups, seed)
            if progress is not None:
                progress(result)
            results.append(result)
    return results


def fastest_by_config(results: Iterable[BenchResult]) -> dict[str, Algorithm]:
    """Winner per config label, over configs with at least two measured algorithms."""
    grouped: dict[str, list[BenchResult]] = {}
    for r in results:
        grouped.setdefault(r.config.label, []).append(r)
    return {
        label: min(rs, key=lambda r: (r.best_time_ns, r.algorithm.order)).algorithm
        for label, rs in grouped.items()
        if len({r.algorithm for r in rs}) >= 2
    }


def no_single_winner(results: Iterable[BenchResult]) -> bool:
    """True when different configs are won by different algorithms."""
    return len(set(fastest_by_config(results).values())) > 1

