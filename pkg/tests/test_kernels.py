"""Compiled kernels against the NumPy fallback and dense oracles."""

import numpy as np
import pytest

from ballopt import _kernels as K
from ballopt._kernels import fallback as F


def random_mask(rng, shape):
    m = rng.random(shape) < 0.65
    m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = False
    return m


def test_chamfer_impls_agree():
    rng = np.random.default_rng(11)
    for shape in [(20, 33), (64, 64), (7, 90)]:
        mask = random_mask(rng, shape)
        a = K.chamfer_distance(mask, 0.05)
        b = F.chamfer_distance(mask, 0.05)
        assert np.allclose(a, b, atol=1e-12)


def test_chamfer_exact_on_strip():
    # a full-width strip of interior rows: distance is the row offset
    mask = np.zeros((12, 40), dtype=bool)
    mask[3:9, :] = True
    d = F.chamfer_distance(mask, 1.0)
    for j in range(3, 9):
        expect = min(j - 2, 9 - j)
        assert np.allclose(d[j, 5:-5], expect)


def test_chamfer_1d():
    mask = np.zeros(30, dtype=bool)
    mask[5:20] = True
    d = K.chamfer_distance(mask, 0.5)
    assert d[5] == pytest.approx(0.5)
    assert d[12] == pytest.approx(0.5 * min(12 - 4, 20 - 12))


def test_banded_neg_count_matches_dense():
    rng = np.random.default_rng(5)
    for n, bw in [(40, 3), (60, 7), (25, 24)]:
        ab = np.zeros((bw + 1, n))
        ab[0] = rng.normal(size=n) * 2
        for k in range(1, bw + 1):
            ab[k, : n - k] = rng.normal(size=n - k) * 0.4
        dense = np.zeros((n, n))
        for k in range(bw + 1):
            for j in range(n - k):
                dense[j + k, j] = dense[j, j + k] = ab[k, j]
        expect = int(np.sum(np.linalg.eigvalsh(dense) < 0))
        assert K.banded_ldl_neg_count(ab) == expect
        assert F.banded_ldl_neg_count(ab) == expect


def test_banded_tridiagonal_sturm():
    # classic 1D Dirichlet Laplacian minus a shift: count = #eigenvalues < shift
    n = 50
    h = 1.0 / (n + 1)
    eigs = np.array([4 / h**2 * np.sin(0.5 * np.pi * k * h) ** 2 for k in range(1, n + 1)])
    for shift_idx in (0, 3, 10):
        shift = 0.5 * (eigs[shift_idx] + eigs[shift_idx + 1]) if shift_idx + 1 < n else eigs[-1]
        ab = np.zeros((2, n))
        ab[0] = 2.0 / h**2 - shift
        ab[1, : n - 1] = -1.0 / h**2
        assert K.banded_ldl_neg_count(ab) == shift_idx + 1


def test_dispatch_flag_present():
    assert isinstance(K.COMPILED, bool)
