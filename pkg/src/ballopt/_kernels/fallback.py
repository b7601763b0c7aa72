"""Pure-NumPy implementations of the hot kernels.

Same contracts as the compiled versions in ``_core.pyx``; selected at import
time when the extension is unavailable (or when BALLOPT_PURE_PYTHON is set).
"""

from __future__ import annotations

import numpy as np

_BIG = 1e30


def _relax_along_row(row: np.ndarray, a: float) -> np.ndarray:
    """Both in-row chamfer recurrences d[i] = min(d[i], d[i+-1] + a).

    The sequential recurrence with updated predecessors equals a running
    minimum of d[k] - k*a (resp. + k*a), so it vectorizes with accumulate.
    """
    idx = np.arange(row.shape[0]) * a
    west = np.minimum.accumulate(row - idx) + idx
    east = np.minimum.accumulate((west + idx)[::-1])[::-1] - idx
    return np.minimum(west, east)


def chamfer_distance(mask: np.ndarray, h: float) -> np.ndarray:
    """Two-pass 3x3 chamfer distance to the complement of ``mask``, in length units."""
    mask = np.asarray(mask, dtype=bool)
    squeeze = mask.ndim == 1
    if squeeze:
        mask = mask.reshape(1, -1)
    ny, nx = mask.shape
    a, b = h, np.sqrt(2.0) * h
    d = np.where(mask, _BIG, 0.0)

    def pull(prev: np.ndarray) -> np.ndarray:
        cand = prev + a
        cand[1:] = np.minimum(cand[1:], prev[:-1] + b)
        cand[:-1] = np.minimum(cand[:-1], prev[1:] + b)
        return cand

    for j in range(ny):  # forward raster sweep
        if j > 0:
            d[j] = np.minimum(d[j], pull(d[j - 1]))
        d[j] = _relax_along_row(d[j], a)
    for j in range(ny - 2, -1, -1):  # backward raster sweep
        d[j] = np.minimum(d[j], pull(d[j + 1]))
        d[j] = _relax_along_row(d[j], a)

    d = np.where(mask, d, 0.0)
    return d[0] if squeeze else d


def banded_ldl_neg_count(ab: np.ndarray, tiny: float = 1e-300) -> int:
    """Negative-pivot count of the LDL^T factorization of a symmetric banded
    matrix in lower-banded storage ``ab[k, j] = A[j+k, j]``.

    No pivoting: valid for inertia counting by Sylvester's law whenever the
    leading minors are nonzero; near-zero pivots are nudged by ``tiny``, which
    perturbs the tested shift negligibly.  The trailing rank-1 updates act on
    a rolling dense window, one outer product per column.
    """
    ab = np.asarray(ab, dtype=float)
    bw = ab.shape[0] - 1
    n = ab.shape[1]
    if bw == 0:
        return int(np.sum(ab[0] < 0))
    neg = 0
    W = np.zeros((bw + 1, bw + 1))
    for j in range(n):
        m = min(bw, n - 1 - j)
        d = ab[0, j] + W[0, 0]
        if abs(d) < tiny:
            d = tiny if d >= 0 else -tiny
        if d < 0:
            neg += 1
        if m > 0:
            col = ab[1:m + 1, j] + W[1:m + 1, 0]
            W[1:m + 1, 1:m + 1] -= np.outer(col, col) / d
        W[:-1, :-1] = W[1:, 1:].copy()
        W[-1, :] = 0.0
        W[:, -1] = 0.0
    return neg
