# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: chamfer distance sweeps and banded LDL^T pivot counts.

Contracts match ``ballopt._kernels.fallback``; the dispatcher in
``ballopt._kernels`` picks whichever is importable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


def chamfer_distance(mask, double h):
    """Two-pass 3x3 chamfer distance to the complement of ``mask``, in length units."""
    m = np.asarray(mask, dtype=bool)
    squeeze = m.ndim == 1
    if squeeze:
        m = m.reshape(1, -1)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, cast=True] mk = np.ascontiguousarray(m, dtype=np.uint8)
    cdef Py_ssize_t ny = mk.shape[0], nx = mk.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] d = np.where(m, 1e30, 0.0)
    cdef double a = h, b = sqrt(2.0) * h
    cdef Py_ssize_t i, j
    cdef double v

    for j in range(ny):
        for i in range(nx):
            v = d[j, i]
            if j > 0:
                if d[j - 1, i] + a < v: v = d[j - 1, i] + a
                if i > 0 and d[j - 1, i - 1] + b < v: v = d[j - 1, i - 1] + b
                if i < nx - 1 and d[j - 1, i + 1] + b < v: v = d[j - 1, i + 1] + b
            if i > 0 and d[j, i - 1] + a < v: v = d[j, i - 1] + a
            d[j, i] = v
        for i in range(nx - 2, -1, -1):
            if d[j, i + 1] + a < d[j, i]: d[j, i] = d[j, i + 1] + a
    for j in range(ny - 1, -1, -1):
        for i in range(nx - 1, -1, -1):
            v = d[j, i]
            if j < ny - 1:
                if d[j + 1, i] + a < v: v = d[j + 1, i] + a
                if i > 0 and d[j + 1, i - 1] + b < v: v = d[j + 1, i - 1] + b
                if i < nx - 1 and d[j + 1, i + 1] + b < v: v = d[j + 1, i + 1] + b
            if i < nx - 1 and d[j, i + 1] + a < v: v = d[j, i + 1] + a
            d[j, i] = v
        for i in range(1, nx):
            if d[j, i - 1] + a < d[j, i]: d[j, i] = d[j, i - 1] + a

    out = np.where(m, np.asarray(d), 0.0)
    return out[0] if squeeze else out


def banded_ldl_neg_count(ab, double tiny=1e-300):
    """Negative-pivot count of the no-pivoting LDL^T of a symmetric banded
    matrix in lower-banded storage ``ab[k, j] = A[j+k, j]``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] w = np.array(ab, dtype=np.float64, order='C')
    cdef Py_ssize_t bw = w.shape[0] - 1, n = w.shape[1]
    cdef Py_ssize_t j, p, q, m
    cdef double d, lp
    cdef int neg = 0
    if bw == 0:
        for j in range(n):
            if w[0, j] < 0: neg += 1
        return neg
    for j in range(n):
        d = w[0, j]
        if fabs(d) < tiny:
            d = tiny if d >= 0 else -tiny
        if d < 0:
            neg += 1
        m = bw if bw < n - 1 - j else n - 1 - j
        # A[j+p, j+q] -= A[j+p, j] * A[j+q, j] / d lives at w[p-q, j+q]
        for q in range(1, m + 1):
            lp = w[q, j] / d
            for p in range(q, m + 1):
                w[p - q, j + q] -= lp * w[p, j]
    return neg
