"""Max and average pooling over NHWC tensors.

Windows that overhang the border under Same padding only see in-bounds
elements: max ignores the overhang, average divides by the in-bounds count.
"""
from __future__ import annotations

import numba
import numpy as np

from .tensor import ConvParams, Padding, as_tensor, output_shape, pad_before


def _pool_params(input: np.ndarray, window, stride, padding) -> ConvParams:
    kr, kc = (window, window) if np.isscalar(window) else window
    sr, sc = (stride, stride) if np.isscalar(stride) else stride
    return ConvParams(kr, kc, sr, sc, Padding(padding), input.shape, input.shape[3])


@numba.njit(cache=True, parallel=True)
def _pool(x, out_rows, out_cols, kr, kc, sr, sc, pr, pc, use_max):
    n_, h_, w_, c_ = x.shape
    y = np.empty((n_, out_rows, out_cols, c_), dtype=np.float32)
    for pos in numba.prange(n_ * out_rows):
        n = pos // out_rows
        ho = pos % out_rows
        h0 = max(ho * sr - pr, 0)
        h1 = min(ho * sr - pr + kr, h_)
        for wo in range(out_cols):
            w0 = max(wo * sc - pc, 0)
            w1 = min(wo * sc - pc + kc, w_)
            count = (h1 - h0) * (w1 - w0)
            for c in range(c_):
                if use_max:
                    m = x[n, h0, w0, c]
                    for hi in range(h0, h1):
                        for wi in range(w0, w1):
                            if x[n, hi, wi, c] > m:
                                m = x[n, hi, wi, c]
                    y[n, ho, wo, c] = m
                else:
                    s = 0.0
                    for hi in range(h0, h1):
                        for wi in range(w0, w1):
                            s += x[n, hi, wi, c]
                    y[n, ho, wo, c] = s / count
    return y


def _run(input, window, stride, padding, use_max: bool) -> np.ndarray:
    x = as_tensor(input)
    params = _pool_params(x, window, stride, padding)
    out = output_shape(params)
    pr, pc = pad_before(params)
    return _pool(x, out.rows, out.cols, params.window_rows, params.window_cols,
                 params.stride_rows, params.stride_cols, pr, pc, use_max)


def max_pool2d(input, window, stride, padding=Padding.VALID) -> np.ndarray:
    """Per-channel maximum over each window.

    ``window`` and ``stride`` are ints or (rows, cols) pairs.  Raises
    :class:`InvalidParamsError` for a Valid window larger than the input.
    """
    return _run(input, window, stride, padding, True)


def avg_pool2d(input, window, stride, padding=Padding.VALID) -> np.ndarray:
    """Per-channel mean over the in-bounds part of each window."""
    return _run(input, window, stride, padding, False)
