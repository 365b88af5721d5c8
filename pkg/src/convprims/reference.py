"""Direct convolution: the scalar oracle and the per-position vectorized kernel."""
from __future__ import annotations

import numba
import numpy as np

from .tensor import DTYPE, ConvParams, ShapeMismatchError, as_tensor, output_shape, pad_before


def check_operands(input, filter, params: ConvParams) -> tuple[np.ndarray, np.ndarray]:
    """Coerce to contiguous float32 and check shapes against ``params``.

    The filter layout is (window_rows, window_cols, in_channels, features).
    """
    x = as_tensor(input, params.input)
    w = np.ascontiguousarray(filter, dtype=DTYPE)
    if w.shape != params.filter_shape:
        raise ShapeMismatchError(f"filter shape {w.shape} != expected {params.filter_shape}")
    return x, w


def _geometry(params: ConvParams):
    out = output_shape(params)
    pr, pc = pad_before(params)
    return out, (params.stride_rows, params.stride_cols, pr, pc)


@numba.njit(cache=True)
def _direct(x, w, out_rows, out_cols, sr, sc, pr, pc):
    n_, h_, w_, c_ = x.shape
    kh_, kw_, _, f_ = w.shape
    y = np.empty((n_, out_rows, out_cols, f_), dtype=np.float32)
    for n in range(n_):
        for ho in range(out_rows):
            for wo in range(out_cols):
                for f in range(f_):
                    s = 0.0
                    for kh in range(kh_):
                        hi = ho * sr + kh - pr
                        if hi < 0 or hi >= h_:
                            continue
                        for kw in range(kw_):
                            wi = wo * sc + kw - pc
                            if wi < 0 or wi >= w_:
                                continue
                            for c in range(c_):
                                s += np.float64(x[n, hi, wi, c]) * np.float64(w[kh, kw, c, f])
                    y[n, ho, wo, f] = s
    return y


def conv2d_ref(input, filter, params: ConvParams) -> np.ndarray:
    """Serial direct convolution, accumulated in float64 and rounded once.

    This is the oracle every other algorithm is checked against; it is
    deliberately a plain loop nest with no reassociation tricks.
    """
    x, w = check_operands(input, filter, params)
    out, geo = _geometry(params)
    return _direct(x, w, out.rows, out.cols, *geo)


@numba.njit(cache=True, parallel=True)
def _per_position(x, w, out_rows, out_cols, sr, sc, pr, pc):
    n_, h_, w_, c_ = x.shape
    kh_, kw_, _, f_ = w.shape
    y = np.empty((n_, out_rows, out_cols, f_), dtype=np.float32)
    positions = n_ * out_rows * out_cols
    for pos in numba.prange(positions):
        n = pos // (out_rows * out_cols)
        ho = (pos // out_cols) % out_rows
        wo = pos % out_cols
        acc = np.zeros(f_, dtype=np.float64)
        for kh in range(kh_):
            hi = ho * sr + kh - pr
            if hi < 0 or hi >= h_:
                continue
            for kw in range(kw_):
                wi = wo * sc + kw - pc
                if wi < 0 or wi >= w_:
                    continue
                for c in range(c_):
                    v = np.float64(x[n, hi, wi, c])
                    for f in range(f_):
                        acc[f] += v * w[kh, kw, c, f]
        for f in range(f_):
            y[n, ho, wo, f] = acc[f]
    return y


def conv2d_naive_vectorized(input, filter, params: ConvParams) -> np.ndarray:
    """One work item per output position, each producing the full feature vector."""
    x, w = check_operands(input, filter, params)
    out, geo = _geometry(params)
    return _per_position(x, w, out.rows, out.cols, *geo)
