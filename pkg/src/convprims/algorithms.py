"""The interchangeable convolution algorithms.

Every algorithm computes the same function as :func:`conv2d_ref`; they differ
in loop structure, memory traffic and arithmetic count.  All of them
accumulate in float64 and round to float32 once per output element.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numba
import numpy as np

from .gemm import DEFAULT_BLOCKING, GemmBlocking, gemm_blocked_f64, gemm_blocked_into
from .reference import check_operands, conv2d_naive_vectorized, conv2d_ref
from .tensor import (
    DTYPE,
    ConvParams,
    IncompatibleAlgorithmError,
    as_tensor,
    output_shape,
    pad_before,
)


class Algorithm(enum.Enum):
    # declaration order doubles as the tie-break order when ranking
    DIRECT = "direct"
    NAIVE_VECTORIZED = "naive_vectorized"
    TILED = "tiled"
    IM2COL = "im2col"
    MATMUL = "matmul"
    WINOGRAD = "winograd"

    @classmethod
    def parse(cls, name: str) -> "Algorithm":
        try:
            return cls(name.strip().lower().replace("-", "_"))
        except ValueError:
            known = ", ".join(a.value for a in cls)
            raise ValueError(f"unknown algorithm {name!r} (known: {known})") from None

    @property
    def order(self) -> int:
        return list(Algorithm).index(self)


TILED_WINDOWS = (1, 3, 5)
TILED_STRIDES = (1, 2)


def supports(alg: Algorithm, params: ConvParams) -> bool:
    kr, kc = params.window_rows, params.window_cols
    sr, sc = params.stride_rows, params.stride_cols
    if alg is Algorithm.MATMUL:
        return kr == kc == 1 and sr == sc == 1
    if alg is Algorithm.WINOGRAD:
        return kr == kc == 3 and sr == sc == 1
    if alg is Algorithm.TILED:
        return kr in TILED_WINDOWS and kc in TILED_WINDOWS and sr in TILED_STRIDES and sc in TILED_STRIDES
    return True


def compatible_algorithms(params: ConvParams) -> list[Algorithm]:
    return [a for a in Algorithm if supports(a, params)]


def _require(alg: Algorithm, params: ConvParams) -> None:
    if not supports(alg, params):
        raise IncompatibleAlgorithmError(
            f"{alg.value} does not support window {params.window_rows}x{params.window_cols} "
            f"stride {params.stride_rows}x{params.stride_cols}"
        )


# --------------------------------------------------------------------------
# tiled direct convolution

@dataclass(frozen=True)
class TileConfig:
    tile_rows: int = 4
    tile_cols: int = 4
    feature_block: int = 64

    def __post_init__(self):
        if min(self.tile_rows, self.tile_cols, self.feature_block) < 1:
            raise ValueError("tile extents must be >= 1")


DEFAULT_TILE = TileConfig()


@numba.njit(cache=True, parallel=True)
def _tiled(x, w, out_rows, out_cols, sr, sc, pr, pc, tr, tc, fb):
    n_, h_, w_, c_ = x.shape
    kh_, kw_, _, f_ = w.shape
    y = np.empty((n_, out_rows, out_cols, f_), dtype=np.float32)
    tiles_r = (out_rows + tr - 1) // tr
    tiles_c = (out_cols + tc - 1) // tc
    fblocks = (f_ + fb - 1) // fb
    tasks = n_ * tiles_r * tiles_c * fblocks
    for task in numba.prange(tasks):
        fblk = task % fblocks
        rest = task // fblocks
        tcol = rest % tiles_c
        rest //= tiles_c
        trow = rest % tiles_r
        n = rest // tiles_r
        ho0 = trow * tr
        wo0 = tcol * tc
        f0 = fblk * fb
        rows = min(tr, out_rows - ho0)
        cols = min(tc, out_cols - wo0)
        feats = min(fb, f_ - f0)
        acc = np.zeros((tr * tc, fb), dtype=np.float64)
        for kh in range(kh_):
            for kw in range(kw_):
                for i in range(rows):
                    hi = (ho0 + i) * sr + kh - pr
                    if hi < 0 or hi >= h_:
                        continue
                    for j in range(cols):
                        wi = (wo0 + j) * sc + kw - pc
                        if wi < 0 or wi >= w_:
                            continue
                        t = i * tc + j
                        for c in range(c_):
                            v = np.float64(x[n, hi, wi, c])
                            wrow = w[kh, kw, c, f0:f0 + feats]
                            for f in range(feats):
                                acc[t, f] += v * wrow[f]
        for i in range(rows):
            for j in range(cols):
                for f in range(feats):
                    y[n, ho0 + i, wo0 + j, f0 + f] = acc[i * tc + j, f]
    return y


def conv2d_tiled(input, filter, params: ConvParams, tile: TileConfig = DEFAULT_TILE) -> np.ndarray:
    """Direct convolution computing a ``tile_rows x tile_cols x feature_block``
    block of outputs per task, accumulating the block locally.

    Partial tiles at the image and feature edges are clipped, never padded
    in memory.
    """
    _require(Algorithm.TILED, params)
    x, w = check_operands(input, filter, params)
    out = output_shape(params)
    pr, pc = pad_before(params)
    return _tiled(x, w, out.rows, out.cols, params.stride_rows, params.stride_cols, pr, pc,
                  tile.tile_rows, tile.tile_cols, tile.feature_block)


# --------------------------------------------------------------------------
# im2col lowering and the 1x1 fast path

def _padded(x: np.ndarray, params: ConvParams, rows_needed: int, cols_needed: int,
            dtype=DTYPE) -> np.ndarray:
    """Copy ``x`` into a zero buffer offset by the leading padding."""
    pr, pc = pad_before(params)
    n, h, w, c = x.shape
    xp = np.zeros((n, max(rows_needed, pr + h), max(cols_needed, pc + w), c), dtype=dtype)
    xp[:, pr:pr + h, pc:pc + w, :] = x
    return xp


def im2col(input, params: ConvParams) -> np.ndarray:
    """Lower ``input`` to a (N*Ho*Wo) x (Kh*Kw*C) patch matrix.

    Row ``r`` holds the receptive field of output position ``r`` (NHW
    order), columns ordered (kh, kw, c); out-of-bounds taps are zero.
    """
    x = as_tensor(input, params.input)
    out = output_shape(params)
    kh_, kw_, sr, sc = params.window_rows, params.window_cols, params.stride_rows, params.stride_cols
    xp = _padded(x, params, (out.rows - 1) * sr + kh_, (out.cols - 1) * sc + kw_)
    cols = np.empty((out.batch, out.rows, out.cols, kh_, kw_, x.shape[3]), dtype=DTYPE)
    for kh in range(kh_):
        for kw in range(kw_):
            cols[:, :, :, kh, kw, :] = xp[:, kh:kh + (out.rows - 1) * sr + 1:sr,
                                          kw:kw + (out.cols - 1) * sc + 1:sc, :]
    return cols.reshape(out.batch * out.rows * out.cols, kh_ * kw_ * x.shape[3])


def conv2d_im2col(input, filter, params: ConvParams,
                  blocking: GemmBlocking = DEFAULT_BLOCKING) -> np.ndarray:
    x, w = check_operands(input, filter, params)
    patches = im2col(x, params)
    y = gemm_blocked_f64(patches, w.reshape(-1, params.features), blocking)
    return y.astype(DTYPE).reshape(output_shape(params))


def conv2d_matmul(input, filter, params: ConvParams,
                  blocking: GemmBlocking = DEFAULT_BLOCKING) -> np.ndarray:
    """1x1 stride-1 convolution as a single GEMM on the NHWC buffer viewed as (N*H*W) x C."""
    _require(Algorithm.MATMUL, params)
    x, w = check_operands(input, filter, params)
    n, h, wd, c = x.shape
    y = gemm_blocked_f64(x.reshape(n * h * wd, c), w.reshape(c, params.features), blocking)
    return y.astype(DTYPE).reshape(n, h, wd, params.features)


# --------------------------------------------------------------------------
# Winograd F(2x2, 3x3)

WINOGRAD_BT = np.array([[1, 0, -1, 0],
                        [0, 1, 1, 0],
                        [0, -1, 1, 0],
                        [0, 1, 0, -1]], dtype=np.float64)
WINOGRAD_G = np.array([[1.0, 0.0, 0.0],
                       [0.5, 0.5, 0.5],
                       [0.5, -0.5, 0.5],
                       [0.0, 0.0, 1.0]], dtype=np.float64)
WINOGRAD_AT = np.array([[1, 1, 1, 0],
                        [0, 1, -1, -1]], dtype=np.float64)
WINOGRAD_TILE = 4
WINOGRAD_OUT = 2


def winograd_filter_transform(filter: np.ndarray) -> np.ndarray:
    """(3, 3, C, F) filter -> (4, 4, C, F) transformed filter, ``G g G^T``."""
    g = np.asarray(filter, dtype=np.float64)
    gg = np.tensordot(WINOGRAD_G, g, axes=(1, 0))          # (4, 3, C, F)
    u = np.tensordot(gg, WINOGRAD_G, axes=(1, 1))           # (4, C, F, 4)
    return np.moveaxis(u, 3, 1)


def winograd_input_transform(tiles: np.ndarray) -> np.ndarray:
    """(..., 4, 4) input tiles -> ``B^T d B`` (matrix form, for reference and tests)."""
    return WINOGRAD_BT @ tiles @ WINOGRAD_BT.T


def winograd_output_transform(m: np.ndarray) -> np.ndarray:
    """(..., 4, 4) products -> (..., 2, 2) outputs, ``A^T m A`` (matrix form)."""
    return WINOGRAD_AT @ m @ WINOGRAD_AT.T


def winograd_tiles(params: ConvParams) -> tuple[int, int]:
    out = output_shape(params)
    return -(-out.rows // WINOGRAD_OUT), -(-out.cols // WINOGRAD_OUT)


# The kernels below expand the 0/+-1 matrices B^T and A^T into adds and
# subtracts; the matrix forms above are the reference they are tested against.

@numba.njit(cache=True, parallel=True)
def _input_transform(x, pr, pc, tiles_r, tiles_c):
    n_, h_, w_, c_ = x.shape
    per_image = tiles_r * tiles_c
    v = np.empty((16, n_ * per_image, c_), dtype=np.float64)
    for t in numba.prange(n_ * per_image):
        n = t // per_image
        h0 = 2 * ((t // tiles_c) % tiles_r) - pr
        w0 = 2 * (t % tiles_c) - pc
        d = np.zeros((4, 4, c_), dtype=np.float64)
        for i in range(4):
            hi = h0 + i
            if hi < 0 or hi >= h_:
                continue
            for j in range(4):
                wi = w0 + j
                if wi < 0 or wi >= w_:
                    continue
                for c in range(c_):
                    d[i, j, c] = x[n, hi, wi, c]
        # rows: B^T d
        r = np.empty((4, 4, c_), dtype=np.float64)
        for j in range(4):
            for c in range(c_):
                r[0, j, c] = d[0, j, c] - d[2, j, c]
                r[1, j, c] = d[1, j, c] + d[2, j, c]
                r[2, j, c] = d[2, j, c] - d[1, j, c]
                r[3, j, c] = d[1, j, c] - d[3, j, c]
        # columns: (B^T d) B
        for i in range(4):
            for c in range(c_):
                v[4 * i + 0, t, c] = r[i, 0, c] - r[i, 2, c]
                v[4 * i + 1, t, c] = r[i, 1, c] + r[i, 2, c]
                v[4 * i + 2, t, c] = r[i, 2, c] - r[i, 1, c]
                v[4 * i + 3, t, c] = r[i, 1, c] - r[i, 3, c]
    return v


@numba.njit(cache=True, parallel=True)
def _output_transform(m, n_, out_rows, out_cols, tiles_r, tiles_c):
    f_ = m.shape[2]
    per_image = tiles_r * tiles_c
    y = np.empty((n_, out_rows, out_cols, f_), dtype=np.float32)
    for t in numba.prange(n_ * per_image):
        n = t // per_image
        ho = 2 * ((t // tiles_c) % tiles_r)
        wo = 2 * (t % tiles_c)
        # columns: m A, then rows: A^T (m A)
        s = np.empty((4, 2, f_), dtype=np.float64)
        for i in range(4):
            for f in range(f_):
                s[i, 0, f] = m[4 * i, t, f] + m[4 * i + 1, t, f] + m[4 * i + 2, t, f]
                s[i, 1, f] = m[4 * i + 1, t, f] - m[4 * i + 2, t, f] - m[4 * i + 3, t, f]
        for b in range(2):
            if wo + b >= out_cols:
                continue
            for f in range(f_):
                y[n, ho, wo + b, f] = s[0, b, f] + s[1, b, f] + s[2, b, f]
            if ho + 1 < out_rows:
                for f in range(f_):
                    y[n, ho + 1, wo + b, f] = s[1, b, f] - s[2, b, f] - s[3, b, f]
    return y


def conv2d_winograd(input, filter, params: ConvParams,
                    blocking: GemmBlocking = DEFAULT_BLOCKING) -> np.ndarray:
    """F(2x2, 3x3) minimal-filtering convolution.

    Overlapping 4x4 input tiles (step 2) are transformed, multiplied against
    the transformed filter as 16 independent (tiles x C) @ (C x F) GEMMs, and
    mapped back to 2x2 output tiles.  An odd output extent is covered by one
    extra tile whose surplus row/column is discarded.  Transforms and
    products are carried in float64.
    """
    _require(Algorithm.WINOGRAD, params)
    x, w = check_operands(input, filter, params)
    out = output_shape(params)
    tr, tc = winograd_tiles(params)
    pr, pc = pad_before(params)
    v = _input_transform(x, pr, pc, tr, tc)
    u = np.ascontiguousarray(winograd_filter_transform(w)).reshape(16, *w.shape[2:])
    m = np.zeros((16, v.shape[1], params.features), dtype=np.float64)
    for k in range(16):
        gemm_blocked_into(v[k], u[k], m[k], blocking.mc, blocking.nc, blocking.kc,
                          blocking.mr, blocking.nr)
    return _output_transform(m, out.batch, out.rows, out.cols, tr, tc)


# --------------------------------------------------------------------------

def multiply_count(alg: Algorithm, params: ConvParams) -> int:
    """Real multiplications in the algorithm's main stage.

    Direct-family algorithms count one multiply per window tap (padding taps
    included).  Winograd counts only the element-wise products of the GEMM
    stage; see :func:`winograd_transform_multiplies` for the rest.
    """
    _require(alg, params)
    c, f = params.input.channels, params.features
    if alg is Algorithm.WINOGRAD:
        tr, tc = winograd_tiles(params)
        return params.input.batch * tr * tc * WINOGRAD_TILE * WINOGRAD_TILE * c * f
    out = output_shape(params)
    return out.batch * out.rows * out.cols * params.window_rows * params.window_cols * c * f


def winograd_transform_multiplies(params: ConvParams) -> dict[str, int]:
    """Multiplications spent in the Winograd transforms.

    The input and output transforms use only 0/+-1 coefficients.  The filter
    transform scales by 1/2 in two of the four ``G`` rows: 2 per column of
    ``G g`` and 2 per row of ``(G g) G^T``, i.e. 6 + 8 per (c, f) pair.
    """
    _require(Algorithm.WINOGRAD, params)
    pairs = params.input.channels * params.features
    return {"input": 0, "filter": 14 * pairs, "output": 0}


_DISPATCH = {
    Algorithm.DIRECT: lambda x, w, p, tile, blocking: conv2d_ref(x, w, p),
    Algorithm.NAIVE_VECTORIZED: lambda x, w, p, tile, blocking: conv2d_naive_vectorized(x, w, p),
    Algorithm.TILED: lambda x, w, p, tile, blocking: conv2d_tiled(x, w, p, tile),
    Algorithm.IM2COL: lambda x, w, p, tile, blocking: conv2d_im2col(x, w, p, blocking),
    Algorithm.MATMUL: lambda x, w, p, tile, blocking: conv2d_matmul(x, w, p, blocking),
    Algorithm.WINOGRAD: lambda x, w, p, tile, blocking: conv2d_winograd(x, w, p, blocking),
}


def convolve(alg: Algorithm, input, filter, params: ConvParams, tile: TileConfig = DEFAULT_TILE,
             blocking: GemmBlocking = DEFAULT_BLOCKING) -> np.ndarray:
    """Run one named algorithm, raising if it cannot handle ``params``."""
    _require(alg, params)
    return _DISPATCH[alg](input, filter, params, tile, blocking)
