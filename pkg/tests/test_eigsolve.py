"""Eigensolver: classical spectra, shooting oracle, inertia certificates,
screened-Poisson maximum principle, bathtub rearrangement."""

import math

import numpy as np
import pytest

from ballopt import eigsolve as E
from ballopt import geometry as G


def const_weight(dom):
    return E.WeightField(values=np.where(dom.interior_mask, 1.0, 0.0),
                         provenance="constant", m_bar=1.0, m_under=1.0)


@pytest.fixture(scope="module")
def square_64():
    return G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 64)


def test_1d_dirichlet_spectrum():
    dom = G.build_domain(G.Interval(0, 1), 1 / 128)
    lam = E.principal_eigenvalue(E.assemble(dom), const_weight(dom)).lam
    assert lam == pytest.approx(math.pi ** 2, rel=1e-3)


def test_2d_square_spectrum(square_64):
    lam = E.principal_eigenvalue(E.assemble(square_64), const_weight(square_64)).lam
    assert lam == pytest.approx(2 * math.pi ** 2, rel=2e-3)


def test_disk_spectrum_first_j0_zero():
    from ballopt.bessel import first_j_zero

    dom = G.build_domain(G.Disk((0, 0), 1.0), 1 / 128)
    lam = E.principal_eigenvalue(E.assemble(dom), const_weight(dom)).lam
    assert lam == pytest.approx(first_j_zero(0.0) ** 2, rel=1e-2)


def _shooting_lambda(L, r, tol=1e-13):
    """1D oracle: interval (-L, L), favorable (-r, r), equal unit weights.

    Even solution: cos(a x) inside, sinh(b (L - |x|)) outside; C1 matching
    gives a tan(a r) = b coth(b (L - r)) with a = b = sqrt(lambda).
    """
    def f(lam):
        s = math.sqrt(lam)
        return s * math.tan(s * r) - s / math.tanh(s * (L - r))

    lo, hi = 1e-6, (0.5 * math.pi / r) ** 2 * 0.999999
    while f(lo) > 0:
        lo *= 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * hi:
            break
    return 0.5 * (lo + hi)


def test_1d_indefinite_matches_shooting():
    L, r = 1.0, 0.3
    dom = G.build_domain(G.Interval(-L, L), 1 / 512)
    ball = E.BallSpec(center=(0.0,), eps=2 * r, dim=1)
    weight = E.rasterize_weight(dom, ball, 1.0, 1.0)
    lam = E.principal_eigenvalue(E.assemble(dom), weight, polish=True).lam
    oracle = _shooting_lambda(L, r)
    assert lam == pytest.approx(oracle, rel=1e-3)


def test_rayleigh_consistency(square_64):
    op = E.assemble(square_64)
    ball = E.BallSpec(center=(0.4, 0.6), eps=0.05, dim=2)
    weight = E.rasterize_weight(square_64, ball, 3.0, 1.0)
    res = E.principal_eigenvalue(op, weight, polish=True)
    rq = E.rayleigh_quotient(op, weight, res.u)
    assert rq == pytest.approx(res.lam, rel=1e-8)
    assert res.residual <= 1e-8
    assert res.positivity_ok
    # L2 normalization
    assert (res.u ** 2).sum() * square_64.h ** 2 == pytest.approx(1.0, rel=1e-12)


def test_eigenvalue_weight_scaling(square_64):
    op = E.assemble(square_64)
    ball = E.BallSpec(center=(0.5, 0.5), eps=0.05, dim=2)
    w1 = E.rasterize_weight(square_64, ball, 2.0, 1.0)
    w3 = E.WeightField(values=3.0 * w1.values, provenance="scaled", m_bar=6.0, m_under=3.0)
    lam1 = E.principal_eigenvalue(op, w1, polish=True).lam
    lam3 = E.principal_eigenvalue(op, w3, polish=True).lam
    assert lam3 == pytest.approx(lam1 / 3.0, rel=1e-8)


def test_domain_monotonicity():
    ball = E.BallSpec(center=(0.5, 0.5), eps=0.05, dim=2)
    lams = []
    for side in (1.0, 1.5):
        dom = G.build_domain(G.Rectangle((0, 0), (side, side)), 1 / 48)
        weight = E.rasterize_weight(dom, ball, 2.0, 1.0)
        lams.append(E.principal_eigenvalue(E.assemble(dom), weight).lam)
    assert lams[1] <= lams[0] * (1 + 1e-10)


def test_weight_monotonicity(square_64):
    op = E.assemble(square_64)
    ball = E.BallSpec(center=(0.5, 0.5), eps=0.05, dim=2)
    lams = [E.principal_eigenvalue(op, E.rasterize_weight(square_64, ball, mb, 1.0)).lam
            for mb in (2.0, 3.0, 5.0)]
    assert lams[1] <= lams[0] and lams[2] <= lams[1]


def test_mesh_convergence_second_order():
    # meshes start where the ball is resolved (r/h >= 5); below that the
    # rasterized weight is too lumpy for the asymptotic rate
    for m_bar in (1.0, 4.0):
        lams = []
        for h in (1 / 32, 1 / 64, 1 / 128):
            dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), h)
            ball = E.BallSpec(center=(0.5, 0.5), eps=0.08, dim=2)
            weight = E.rasterize_weight(dom, ball, m_bar, 1.0)
            lams.append(E.principal_eigenvalue(E.assemble(dom), weight, polish=True).lam)
        ratio = (lams[0] - lams[1]) / (lams[1] - lams[2])
        assert 3.0 <= ratio <= 5.5, (m_bar, lams)


def test_lanczos_matches_inertia_bisection():
    rng = np.random.default_rng(7)
    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 24)
    op = E.assemble(dom)
    for _ in range(5):
        c = 0.25 + 0.5 * rng.random(2)
        eps = 0.02 + 0.06 * rng.random()
        m_bar = 1.0 + 4.0 * rng.random()
        ball = E.BallSpec(center=tuple(c), eps=eps, dim=2)
        weight = E.rasterize_weight(dom, ball, m_bar, 1.0)
        res = E.principal_eigenvalue(op, weight, polish=True, certify=True)
        lam_b = E.principal_eigenvalue_bisection(dom, weight,
                                                 (0.5 * res.lam, 1.5 * res.lam))
        assert lam_b == pytest.approx(res.lam, rel=1e-6)
        assert res.certified


def test_no_positive_part_raises(square_64):
    w = E.WeightField(values=np.where(square_64.interior_mask, -1.0, 0.0),
                      provenance="hostile", m_bar=1.0, m_under=1.0)
    with pytest.raises(ValueError, match="no positive"):
        E.principal_eigenvalue(E.assemble(square_64), w)


def test_ball_not_contained_raises(square_64):
    ball = E.BallSpec(center=(0.05, 0.05), eps=0.1, dim=2)
    with pytest.raises(ValueError, match="not contained"):
        E.rasterize_weight(square_64, ball, 1.0, 1.0)


def test_weight_mass_bookkeeping(square_64):
    ball = E.BallSpec(center=(0.5, 0.5), eps=0.07, dim=2)
    for mode in ("exact", "subsample"):
        wf = E.rasterize_weight(square_64, ball, 2.0, 1.0, mode=mode)
        h2 = square_64.h ** 2
        total = wf.values.sum() * h2
        expect = 2.0 * 0.07 - 1.0 * (square_64.discrete_volume() - 0.07)
        tol = 2 * 2.0 * h2 if mode == "exact" else 0.01
        assert abs(total - expect) <= tol, mode
        assert wf.values.min() >= -1.0 - 1e-12
        assert wf.values.max() <= 2.0 + 1e-12
    # favorable-set mass is exact for the closed-form fractions
    frac = E.ball_cell_fractions(square_64, (0.5, 0.5), ball.radius)
    h2 = square_64.h ** 2
    assert frac.sum() * h2 == pytest.approx(0.07, abs=1e-12)
    # and within one cell of the measure for cells carrying positive weight
    wf = E.rasterize_weight(square_64, ball, 2.0, 1.0)
    fav = (frac * h2)[wf.values > 0].sum()
    assert abs(fav - 0.07) <= h2 + 2 * math.pi * ball.radius * square_64.h * 0.5


def test_single_cell_ball(square_64):
    h = square_64.h
    eps = h * h  # smallest resolvable ball
    ball = E.BallSpec(center=(0.5, 0.5), eps=eps, dim=2)
    wf = E.rasterize_weight(square_64, ball, 1.0, 1.0)
    assert (wf.values > 0).sum() >= 1
    assert np.maximum(wf.values, 0).sum() * h * h <= eps * 1.5 + h * h


def test_shifted_center_changes_rim_cells_only(square_64):
    ball1 = E.BallSpec(center=(0.5, 0.5), eps=0.05, dim=2)
    ball2 = E.BallSpec(center=(0.5 + square_64.h, 0.5), eps=0.05, dim=2)
    w1 = E.rasterize_weight(square_64, ball1, 2.0, 1.0)
    w2 = E.rasterize_weight(square_64, ball2, 2.0, 1.0)
    changed = np.sum(np.abs(w1.values - w2.values) > 1e-12)
    rim = 2 * math.pi * ball1.radius / square_64.h
    assert changed <= 4 * rim


def test_helmholtz_maximum_principle(square_64):
    v = E.solve_helmholtz(square_64, 3.0, np.zeros_like(square_64.dist), 1.0)
    inside = square_64.interior_mask
    assert v[inside].min() > 0.0
    assert v[inside].max() < 1.0


def test_helmholtz_1d_cosh_closed_form():
    errs = []
    for h in (1 / 64, 1 / 128):
        dom = G.build_domain(G.Interval(0, 1), h)
        c = 4.0
        v = E.solve_helmholtz(dom, c, np.zeros_like(dom.dist), 1.0)
        x = dom.node_coords()[:, 0]
        exact = np.cosh(math.sqrt(c) * (x - 0.5)) / math.cosh(math.sqrt(c) * 0.5)
        errs.append(np.abs(v - exact)[dom.interior_mask].max())
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.3)


def test_helmholtz_requires_positive_screening(square_64):
    with pytest.raises(ValueError, match="positive"):
        E.solve_helmholtz(square_64, 0.0, np.zeros_like(square_64.dist), 1.0)


def test_bathtub_constant_ties():
    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 8)
    u = np.where(dom.interior_mask, 1.0, 0.0)
    eps = 3 * dom.h ** 2
    wf = E.bathtub_rearrangement(dom, u, eps, 2.0, 1.0)
    taken = np.flatnonzero(wf.values.ravel() == 2.0)
    interior = np.flatnonzero(dom.interior_mask.ravel())
    assert np.array_equal(taken, interior[:3])  # lexicographically first cells
    obj = E.weighted_mass(dom, wf, u)
    expect = 2.0 * eps - 1.0 * (dom.discrete_volume() - eps)
    assert obj == pytest.approx(expect, rel=1e-12)


def test_bathtub_small_exhaustive():
    import itertools

    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 5)
    rng = np.random.default_rng(3)
    u = np.where(dom.interior_mask, rng.random(dom.interior_mask.shape), 0.0)
    h2 = dom.h ** 2
    eps = 3 * h2
    wf = E.bathtub_rearrangement(dom, u, eps, 2.0, 1.0)
    obj = E.weighted_mass(dom, wf, u)
    u2 = (u ** 2).ravel()[dom.interior_mask.ravel()]
    best = max(sum(u2[list(c)]) for c in itertools.combinations(range(len(u2)), 3))
    brute = (2.0 + 1.0) * best * h2 - 1.0 * float((u ** 2).sum()) * h2
    assert obj == pytest.approx(brute, rel=1e-12)
