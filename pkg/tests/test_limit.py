"""Limit problem: matching roots, profile shape, normalization, constants."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from ballopt import limit as L

# Closed-form solution for N=1, equal unit weights, interface at 1/2:
# w(r) = A cos(pi r / 2) inside, A cos(pi/4) e^{pi/4} e^{-pi r/2} outside,
# with A^2 = 2 pi / (pi + 4) after L2 normalization.
A1D = math.sqrt(2 * math.pi / (math.pi + 4))


@pytest.fixture(scope="module")
def sol_1d():
    return L.solve_limit(L.WeightParams(dim=1, m_bar=1.0, m_under=1.0))


@pytest.fixture(scope="module")
def sol_2d():
    return L.solve_limit(L.WeightParams(dim=2, m_bar=1.0, m_under=1.0))


def test_default_rho_is_measure_one_radius():
    assert L.WeightParams(dim=1, m_bar=1, m_under=1).rho == pytest.approx(0.5)
    assert L.WeightParams(dim=2, m_bar=1, m_under=1).rho == pytest.approx(1 / math.sqrt(math.pi))


def test_lambda0_closed_form_1d(sol_1d):
    assert sol_1d.lambda0 == pytest.approx(math.pi ** 2 / 4, abs=1e-10)


def test_lambda0_tan_reduction_m4():
    lam = L.solve_lambda0(L.WeightParams(dim=1, m_bar=4.0, m_under=1.0, rho=0.5))
    assert math.tan(math.sqrt(lam)) == pytest.approx(0.5, abs=1e-10)


def test_matching_residual_signs(sol_1d):
    p = sol_1d.params
    lo, hi = L.matching_bracket(p)
    assert L.matching_residual(lo, p) < 0
    assert L.matching_residual(0.999 * hi / 0.999, p) > 1e3
    with pytest.raises(ValueError, match="outside principal branch"):
        L.matching_residual(1.2 * hi, p)


def test_w_profile_1d_closed_form(sol_1d):
    rs = np.array([0.0, 0.2, 0.45])
    expect = A1D * np.cos(math.pi * rs / 2)
    assert np.allclose(L.eval_w(rs, sol_1d), expect, atol=1e-12)
    rs_out = np.array([0.6, 1.0, 3.0])
    expect_out = A1D * math.cos(math.pi / 4) * math.exp(math.pi / 4) \
        * np.exp(-math.pi * rs_out / 2)
    assert np.allclose(L.eval_w(rs_out, sol_1d), expect_out, atol=1e-12)


def test_w_at_zero_finite_with_zero_slope(sol_2d):
    assert np.isfinite(L.eval_w(0.0, sol_2d))
    assert L.eval_w_deriv(0.0, sol_2d) == 0.0


def test_w_c1_at_interface(sol_2d):
    # one-sided branch values exactly at the interface
    from ballopt.bessel import bessel_j, bessel_k

    rho, nu = sol_2d.params.rho, sol_2d.nu
    a, b = sol_2d.a, sol_2d.b
    w_in = sol_2d.coef_inner * rho ** (-nu) * bessel_j(nu, a * rho)
    w_out = sol_2d.coef_outer * rho ** (-nu) * bessel_k(nu, b * rho)
    s_in = -sol_2d.coef_inner * a * rho ** (-nu) * bessel_j(nu + 1, a * rho)
    s_out = -sol_2d.coef_outer * b * rho ** (-nu) * bessel_k(nu + 1, b * rho)
    assert abs(w_in - w_out) < 1e-10
    assert abs(s_in - s_out) < 1e-9


def test_w_strictly_decreasing(sol_2d):
    rs = np.linspace(0.0, 6.0, 400)
    w = L.eval_w(rs, sol_2d)
    assert np.all(np.diff(w) < 0)
    assert np.all(w > 0)


def test_w_tail_shape_2d(sol_2d):
    # w(r) sqrt(r) e^{+br} plateaus once the K asymptotics dominate
    rs = np.linspace(10.0, 20.0, 50)
    plateau = L.eval_w(rs, sol_2d) * np.sqrt(rs) * np.exp(sol_2d.b * rs)
    assert plateau.max() / plateau.min() - 1 < 0.02


def test_w_log_slope(sol_2d):
    # w'/w -> -sqrt(lambda0 m_under); the K-asymptotics approach the limit
    # like 1/(2 b r), so the radius must keep that correction under the tol
    r = 60.0
    ratio = L.eval_w_deriv(r, sol_2d) / L.eval_w(r, sol_2d)
    assert ratio == pytest.approx(-sol_2d.b, rel=5e-3)


def test_normalization_independent_quadrature(sol_2d):
    val, _ = quad(lambda r: L.eval_w(r, sol_2d) ** 2 * r, 0.0, 40.0,
                  epsabs=1e-12, limit=300)
    assert 2 * math.pi * val == pytest.approx(1.0, abs=1e-8)
    assert L.w_l2_norm_squared(sol_2d) == pytest.approx(1.0, abs=1e-10)


def test_normalization_scale_invariance():
    # doubling the pre-normalization coefficient changes nothing
    sol = L.solve_limit(L.WeightParams(dim=2, m_bar=3.0, m_under=1.0))
    again = L.solve_limit(L.WeightParams(dim=2, m_bar=3.0, m_under=1.0))
    assert sol.coef_inner == pytest.approx(again.coef_inner, rel=1e-14)
    assert sol.coef_outer == pytest.approx(again.coef_outer, rel=1e-14)


def test_1d_norm_closed_form(sol_1d):
    assert sol_1d.coef_inner * math.sqrt(2 / (math.pi * sol_1d.a)) == pytest.approx(
        A1D, rel=1e-12)


def test_v0_properties(sol_2d):
    assert L.eval_V0(0.0, sol_2d) == pytest.approx(1.0, abs=1e-12)
    rs = np.linspace(0.0, 5.0, 100)
    v = L.eval_V0(rs, sol_2d)
    assert np.all(v >= 1.0 - 1e-12)
    assert np.all(np.diff(v) > 0)


def test_v0_satisfies_ode(sol_2d):
    # radial finite differences of -V'' - V'/r + lambda0 m V at a few radii;
    # residual measured relative to the term size (V0 grows like cosh)
    b2 = sol_2d.b ** 2
    h = 1e-4
    for r in (0.5, 1.0, 2.0):
        vm, v0, vp = (L.eval_V0(r - h, sol_2d), L.eval_V0(r, sol_2d),
                      L.eval_V0(r + h, sol_2d))
        lap = (vp - 2 * v0 + vm) / h ** 2 + (vp - vm) / (2 * h * r)
        assert abs(-lap + b2 * v0) / (b2 * v0) < 1e-6


def test_v0_cosh_1d(sol_1d):
    rs = np.linspace(0.0, 2.0, 50)
    assert np.allclose(L.eval_V0(rs, sol_1d), np.cosh(sol_1d.b * rs), atol=1e-12)


def test_w_satisfies_radial_ode(sol_2d):
    lam = sol_2d.lambda0
    h = 1e-4
    for r, m in ((0.3, sol_2d.params.m_bar), (2.0, -sol_2d.params.m_under)):
        wm, w0, wp = (L.eval_w(r - h, sol_2d), L.eval_w(r, sol_2d),
                      L.eval_w(r + h, sol_2d))
        lap = (wp - 2 * w0 + wm) / h ** 2 + (wp - wm) / (2 * h * r)
        assert abs(lap + lam * m * w0) < 1e-6


def test_rayleigh_identity(sol_2d):
    # multiply the equation by w and integrate: int |grad w|^2 = lambda0 int m0 w^2
    grad2 = L.grad_w_norm_squared(sol_2d)
    assert sol_2d.m0_w2 == pytest.approx(grad2 / sol_2d.lambda0, abs=1e-8)


def test_gamma_positive_and_1d_closed_form(sol_1d, sol_2d):
    assert sol_2d.gamma > 0
    # elementary antiderivative of cos(pi r/2) cosh(pi r/2) on [0, 1/2]
    a = math.pi / 2
    integral = (math.cos(a * 0.5) * math.sinh(a * 0.5)
                + math.sin(a * 0.5) * math.cosh(a * 0.5)) / (2 * a)
    gamma_expect = sol_1d.lambda0 * 2.0 * 2.0 * A1D * integral
    assert sol_1d.gamma == pytest.approx(gamma_expect, rel=1e-10)
    assert sol_1d.phi == pytest.approx(2 * gamma_expect / (math.pi / (math.pi + 4)),
                                       rel=1e-9)
    assert sol_1d.expansion_coefficient == pytest.approx(sol_1d.phi / 2, rel=1e-14)


@pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
def test_weight_scaling_law(c):
    base = L.solve_lambda0(L.WeightParams(dim=2, m_bar=2.0, m_under=1.0))
    scaled = L.solve_lambda0(L.WeightParams(dim=2, m_bar=2.0 * c, m_under=1.0 * c))
    assert scaled == pytest.approx(base / c, rel=1e-10)


def test_radius_scaling_law():
    p = L.WeightParams(dim=2, m_bar=1.0, m_under=1.0)
    base = L.solve_lambda0(p)
    halfed = L.solve_lambda0(L.WeightParams(dim=2, m_bar=1.0, m_under=1.0, rho=2 * p.rho))
    assert halfed == pytest.approx(base / 4, rel=1e-10)


def test_lambda0_monotone_in_m_bar():
    lams = [L.solve_lambda0(L.WeightParams(dim=2, m_bar=m, m_under=1.0))
            for m in (1.0, 2.0, 5.0, 10.0)]
    assert all(b < a for a, b in zip(lams, lams[1:]))
