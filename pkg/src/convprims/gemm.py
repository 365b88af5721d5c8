"""Matrix multiplication: a float64 oracle and a cache-blocked kernel.

Matrices are 2-D row-major ``float32`` arrays.  Both routines accumulate in
float64 and round once when storing the result.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .tensor import DTYPE, ShapeMismatchError


@dataclass(frozen=True)
class GemmBlocking:
    """Cache-block (mc, nc, kc) and register-tile (mr, nr) extents."""

    mc: int = 64
    nc: int = 256
    kc: int = 256
    mr: int = 4
    nr: int = 64

    def __post_init__(self):
        for name in ("mc", "nc", "kc", "mr", "nr"):
            if getattr(self, name) < 1:
                raise ValueError(f"blocking {name} must be >= 1")
        if self.mr > self.mc or self.nr > self.nc:
            raise ValueError("register tile must fit inside the cache block (mr <= mc, nr <= nc)")


DEFAULT_BLOCKING = GemmBlocking()


def _check_operands(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeMismatchError(f"gemm operands must be 2-D, got {a.ndim}-D and {b.ndim}-D")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"inner dimensions differ: {a.shape} x {b.shape}")
    return a, b


def gemm_naive(a, b) -> np.ndarray:
    a, b = _check_operands(a, b)
    return (a.astype(np.float64) @ b.astype(np.float64)).astype(DTYPE)


@numba.njit(cache=True, nogil=True)
def _micro_tile(a, bq, c, i0, j0, pc, kb, mr, nr):
    # one nr-wide accumulator vector per tile row; bq (kb x nr) stays hot across rows
    for i in range(mr):
        acc = np.zeros(nr, dtype=np.float64)
        for p in range(kb):
            av = np.float64(a[i0 + i, pc + p])
            for j in range(nr):
                acc[j] += av * np.float64(bq[p, j])
        for j in range(nr):
            c[i0 + i, j0 + j] += acc[j]


@numba.njit(cache=True, nogil=True)
def _edge(a, b, c, i0, i1, j0, j1, pc, kb):
    for i in range(i0, i1):
        for j in range(j0, j1):
            s = 0.0
            for p in range(kb):
                s += np.float64(a[i, pc + p]) * np.float64(b[pc + p, j])
            c[i, j] += s


@numba.njit(cache=True, parallel=True)
def gemm_blocked_into(a, b, c, mc, nc, kc, mr, nr):
    """Accumulate blocked ``a @ b`` into the float64 array ``c``.

    Operands may be float32 or float64; B is packed into (kc x nr)
    micro-panels in its own dtype and widened on load.  Rows and columns
    left over after whole mr x nr tiles go through a scalar cleanup loop.
    Every element sums its k-blocks in ascending order, so the result only
    depends on ``kc``.
    """
    m, k = a.shape
    n = b.shape[1]
    n_mblocks = (m + mc - 1) // mc
    for jc in range(0, n, nc):
        nb = min(nc, n - jc)
        npan = nb // nr
        nb_full = npan * nr
        for pc in range(0, k, kc):
            kb = min(kc, k - pc)
            bp = np.empty((npan, kb, nr), dtype=b.dtype)
            for q in range(npan):
                for p in range(kb):
                    for j in range(nr):
                        bp[q, p, j] = b[pc + p, jc + q * nr + j]
            # row panels of c are disjoint, so blocks run independently
            for blk in numba.prange(n_mblocks):
                ic = blk * mc
                mb = min(mc, m - ic)
                mb_full = mb - mb % mr
                for q in range(npan):
                    for ir in range(0, mb_full, mr):
                        _micro_tile(a, bp[q], c, ic + ir, jc + q * nr, pc, kb, mr, nr)
                _edge(a, b, c, ic + mb_full, ic + mb, jc, jc + nb, pc, kb)
                _edge(a, b, c, ic, ic + mb_full, jc + nb_full, jc + nb, pc, kb)


def gemm_blocked_f64(a, b, blocking: GemmBlocking = None) -> np.ndarray:
    """Blocked ``a @ b`` into a fresh float64 array."""
    blocking = blocking or DEFAULT_BLOCKING
    c = np.zeros((a.shape[0], b.shape[1]), dtype=np.float64)
    gemm_blocked_into(a, b, c, *_extents(blocking))
    return c


def _extents(blocking: GemmBlocking) -> tuple[int, int, int, int, int]:
    return blocking.mc, blocking.nc, blocking.kc, blocking.mr, blocking.nr


def gemm_blocked(a, b, blocking: GemmBlocking = DEFAULT_BLOCKING) -> np.ndarray:
    a, b = _check_operands(a, b)
    c = gemm_blocked_f64(np.ascontiguousarray(a, dtype=DTYPE), np.ascontiguousarray(b, dtype=DTYPE),
                         blocking)
    return c.astype(DTYPE)
