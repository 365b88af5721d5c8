"""Tensor shapes, convolution parameters and shape/flop algebra.

Tensors are plain ``numpy.ndarray`` objects of dtype ``float32`` laid out
NHWC (batch, rows, cols, channels) and C-contiguous, so the flat buffer
index of ``(n, h, w, c)`` is ``((n*H + h)*W + w)*C + c``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

DTYPE = np.float32
INDEX_MAX = np.iinfo(np.int64).max
RELATIVE_EPS = 1e-6


class InvalidParamsError(ValueError):
    pass


class ShapeMismatchError(ValueError):
    pass


class IncompatibleAlgorithmError(ValueError):
    pass


def _checked_product(*factors: int) -> int:
    total = 1
    for f in factors:
        total *= f
        if total > INDEX_MAX:
            raise OverflowError(f"product of {factors} exceeds int64")
    return total


class Shape4D(NamedTuple):
    batch: int
    rows: int
    cols: int
    channels: int

    def validate(self) -> "Shape4D":
        for name, v in zip(self._fields, self):
            if int(v) != v or v < 1:
                raise InvalidParamsError(f"{name} must be a positive integer, got {v!r}")
        return self

    @property
    def element_count(self) -> int:
        return _checked_product(*self)

    def linear_index(self, n: int, h: int, w: int, c: int) -> int:
        return ((n * self.rows + h) * self.cols + w) * self.channels + c

    def unravel(self, index: int) -> tuple[int, int, int, int]:
        index, c = divmod(index, self.channels)
        index, w = divmod(index, self.cols)
        n, h = divmod(index, self.rows)
        return n, h, w, c


class Padding(enum.Enum):
    SAME = "same"
    VALID = "valid"


@dataclass(frozen=True)
class ConvParams:
    """Geometry of one 2-D convolution.

    ``input`` is the NHWC input shape; ``features`` the output channel count.
    """

    window_rows: int
    window_cols: int
    stride_rows: int
    stride_cols: int
    padding: Padding
    input: Shape4D
    features: int

    def __post_init__(self):
        object.__setattr__(self, "input", Shape4D(*self.input).validate())
        object.__setattr__(self, "padding", Padding(self.padding))
        for name in ("window_rows", "window_cols", "stride_rows", "stride_cols", "features"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InvalidParamsError(f"{name} must be a positive integer, got {v!r}")
        if self.padding is Padding.VALID and (
            self.window_rows > self.input.rows or self.window_cols > self.input.cols
        ):
            raise InvalidParamsError(
                f"valid padding needs window {self.window_rows}x{self.window_cols} "
                f"<= input {self.input.rows}x{self.input.cols}"
            )

    @classmethod
    def square(cls, window: int, stride: int, rows: int, cols: int, in_features: int,
               out_features: int, batch: int = 1, padding: Padding = Padding.SAME) -> "ConvParams":
        """Build params from the (window, stride, rows, cols, in, out) tuple order."""
        return cls(window, window, stride, stride, padding,
                   Shape4D(batch, rows, cols, in_features), out_features)

    @property
    def filter_shape(self) -> tuple[int, int, int, int]:
        return (self.window_rows, self.window_cols, self.input.channels, self.features)

    def with_batch(self, batch: int) -> "ConvParams":
        return ConvParams(self.window_rows, self.window_cols, self.stride_rows,
                          self.stride_cols, self.padding,
                          self.input._replace(batch=batch), self.features)


def _out_extent(size: int, window: int, stride: int, padding: Padding) -> int:
    if padding is Padding.SAME:
        return -(-size // stride)
    return (size - window) // stride + 1


def output_shape(params: ConvParams) -> Shape4D:
    inp = params.input
    return Shape4D(
        inp.batch,
        _out_extent(inp.rows, params.window_rows, params.stride_rows, params.padding),
        _out_extent(inp.cols, params.window_cols, params.stride_cols, params.padding),
        params.features,
    )


def pad_before(params: ConvParams) -> tuple[int, int]:
    """Leading (rows, cols) zero padding; trailing padding takes the odd remainder."""
    if params.padding is Padding.VALID:
        return 0, 0
    out = output_shape(params)
    total_r = max((out.rows - 1) * params.stride_rows + params.window_rows - params.input.rows, 0)
    total_c = max((out.cols - 1) * params.stride_cols + params.window_cols - params.input.cols, 0)
    return total_r // 2, total_c // 2


def flop_count(params: ConvParams) -> int:
    """Direct-convolution flops, counting a multiply-accumulate as 2."""
    out = output_shape(params)
    return _checked_product(2, out.batch, out.rows, out.cols, params.window_rows,
                            params.window_cols, params.input.channels, params.features)


def empty(shape) -> np.ndarray:
    shape = Shape4D(*shape).validate()
    if shape.element_count > INDEX_MAX // 4:
        raise OverflowError(f"tensor {shape} too large to allocate")
    return np.zeros(shape, dtype=DTYPE)


def fill_random(tensor: np.ndarray, seed: int) -> np.ndarray:
    """Fill ``tensor`` in place with uniform values in [-1, 1] and return it.

    The contents depend only on ``(seed, tensor.shape)``.
    """
    rng = np.random.default_rng(seed)
    tensor[...] = rng.uniform(-1.0, 1.0, size=tensor.shape)
    return tensor


def random_tensor(shape, seed: int) -> np.ndarray:
    return fill_random(np.empty(tuple(shape), dtype=DTYPE), seed)


def as_tensor(array, shape=None) -> np.ndarray:
    t = np.ascontiguousarray(array, dtype=DTYPE)
    if t.ndim != 4:
        raise ShapeMismatchError(f"expected a 4-D NHWC tensor, got ndim={t.ndim}")
    if shape is not None and t.shape != tuple(shape):
        raise ShapeMismatchError(f"expected shape {tuple(shape)}, got {t.shape}")
    return t


def max_relative_error(a, b) -> float:
    """Max over elements of ``|a-b| / max(|a|, |b|, 1e-6)``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), RELATIVE_EPS)
    return float(np.max(np.abs(a - b) / denom))
