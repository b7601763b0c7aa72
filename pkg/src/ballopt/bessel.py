"""Bessel functions J, I, K for the orders needed by the radial limit problem.

The limit profile is oscillatory (J) inside the favorable ball and decaying
(K) outside, at order ``nu = N/2 - 1``; the C1 matching and the Lommel norm
identities additionally need orders ``nu - 1`` and ``nu + 1``.  Supported
orders are therefore the half-integers -3/2, -1/2, 1/2, 3/2 (closed
trigonometric/exponential forms) and the integers 0, 1 (power series plus
asymptotic expansions).

All evaluators accept scalars or arrays and are pure functions.
"""

from __future__ import annotations

import numpy as np

EULER_GAMMA = np.euler_gamma

# Orders the limit problem itself uses (nu = N/2 - 1 for N in {1, 2, 3}).
PRINCIPAL_ORDERS = (-0.5, 0.0, 0.5)
# Orders reachable through the +-1 recurrences used for derivatives/matching.
SUPPORTED_ORDERS = (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5)

_SERIES_TOL = 1e-12
# Power series for J0/J1 stays below 1e-12 cancellation error up to here;
# beyond it the Hankel expansion's optimal truncation is below 1e-12 as well.
_J_SWITCH = 12.0
# K0/K1: ascending series cancels like e^{2x}; asymptotic series bottoms out
# near e^{-2x}.  Neither reaches 1e-10 on [4, 12], so that window is evaluated
# from the cosh integral representation with fixed Gauss-Legendre nodes.
_K_SERIES_MAX = 4.0
_K_ASYMPT_MIN = 12.0


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _check_order(nu: float) -> float:
    for v in SUPPORTED_ORDERS:
        if abs(nu - v) < 1e-12:
            return v
    raise ValueError(f"unsupported Bessel order {nu!r}; supported: {SUPPORTED_ORDERS}")


# ---------------------------------------------------------------------------
# J: Bessel functions of the first kind
# ---------------------------------------------------------------------------

def _j_series(n: int, x: np.ndarray) -> np.ndarray:
    """Ascending power series for integer order n in {0, 1}."""
    q = 0.25 * x * x
    if n == 0:
        term = np.ones_like(x)
    else:
        term = 0.5 * x
    total = term.copy()
    for k in range(1, 60):
        term = -term * q / (k * (k + n))
        total += term
        if np.all(np.abs(term) <= _SERIES_TOL * (np.abs(total) + 1e-300)):
            break
    return total


def _hankel_pq(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """P and Q sums of the large-argument (Hankel) expansion, optimally truncated."""
    mu = 4.0 * nu * nu
    inv8x = 1.0 / (8.0 * x)
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    k = 0
    prev = np.inf
    while k < 40:
        term = term * (mu - (2 * k + 1) ** 2) * inv8x / (k + 1)
        mag = float(np.max(np.abs(term))) if term.size else 0.0
        if mag >= prev:  # asymptotic series started diverging
            break
        if k % 2 == 0:
            q += term if k % 4 == 0 else -term
        else:
            p += -term if k % 4 == 1 else term
        prev = mag
        if mag < 1e-17:
            break
        k += 1
    return p, q


def _j_integer(n: int, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    small = x < _J_SWITCH
    if small.any():
        out[small] = _j_series(n, x[small])
    if (~small).any():
        xl = x[~small]
        p, q = _hankel_pq(float(n), xl)
        chi = xl - (0.5 * n + 0.25) * np.pi
        out[~small] = np.sqrt(2.0 / (np.pi * xl)) * (p * np.cos(chi) - q * np.sin(chi))
    return out


def _j_half(nu: float, x: np.ndarray) -> np.ndarray:
    # Closed trigonometric forms; limits at x=0 handled by the caller.
    with np.errstate(divide="ignore", invalid="ignore"):
        amp = np.sqrt(2.0 / (np.pi * x))
        if nu == 0.5:
            val = amp * np.sin(x)
        elif nu == -0.5:
            val = amp * np.cos(x)
        elif nu == 1.5:
            val = amp * (np.sin(x) / x - np.cos(x))
        else:  # nu == -1.5
            val = amp * (-np.cos(x) / x - np.sin(x))
    return val


def bessel_j(nu: float, x) -> np.ndarray | float:
    """J_nu(x) for x >= 0.

    Half-integer orders use closed trigonometric forms; integer orders use
    the power series below the switchover and the Hankel expansion beyond.
    """
    nu = _check_order(nu)
    arr, scalar = _as_array(x)
    if np.any(arr < 0):
        raise ValueError("bessel_j requires x >= 0")
    if nu == int(nu):
        out = _j_integer(int(abs(nu)), arr)
        if nu < 0 and int(abs(nu)) % 2 == 1:
            out = -out
    else:
        out = _j_half(nu, arr)
        zero = arr == 0.0
        if zero.any():
            out = np.where(zero, 0.0 if nu > 0 else np.inf, out)
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# I: modified Bessel functions of the first kind
# ---------------------------------------------------------------------------

def _i_series(n: int, x: np.ndarray) -> np.ndarray:
    # All terms positive: no cancellation, valid on the whole range used here.
    q = 0.25 * x * x
    term = np.ones_like(x) if n == 0 else 0.5 * x
    total = term.copy()
    for k in range(1, 200):
        term = term * q / (k * (k + n))
        total += term
        if np.all(term <= _SERIES_TOL * total):
            break
    return total


def bessel_i(nu: float, x) -> np.ndarray | float:
    """I_nu(x) for x >= 0 (positive and increasing for the orders used)."""
    nu = _check_order(nu)
    arr, scalar = _as_array(x)
    if np.any(arr < 0):
        raise ValueError("bessel_i requires x >= 0")
    if nu == int(nu):
        out = _i_series(int(abs(nu)), arr)  # I_{-n} = I_n
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            amp = np.sqrt(2.0 / (np.pi * arr))
            if nu == 0.5:
                out = amp * np.sinh(arr)
            elif nu == -0.5:
                out = amp * np.cosh(arr)
            elif nu == 1.5:
                out = amp * (np.cosh(arr) - np.sinh(arr) / arr)
            else:  # nu == -1.5
                out = amp * (np.sinh(arr) - np.cosh(arr) / arr)
        zero = arr == 0.0
        if zero.any():
            out = np.where(zero, 0.0 if nu > 0 else np.inf, out)
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# K: modified Bessel functions of the second kind (scaled variant provided)
# ---------------------------------------------------------------------------

def _k_series_scaled(n: int, x: np.ndarray) -> np.ndarray:
    """e^x K_n(x) for n in {0, 1} from the ascending series (x <= _K_SERIES_MAX)."""
    q = 0.25 * x * x
    lg = np.log(0.5 * x)
    if n == 0:
        term = np.ones_like(x)
        total = -(lg + EULER_GAMMA) * term
        hk = 0.0
        for k in range(1, 60):
            term = term * q / (k * k)
            hk += 1.0 / k
            add = term * (hk - lg - EULER_GAMMA)
            total += add
            if np.all(np.abs(add) <= _SERIES_TOL * np.abs(total)):
                break
        return np.exp(x) * total
    # n == 1, A&S 9.6.11
    i1 = _i_series(1, x)
    term = 0.5 * x  # (x/2) (k=0 term of the sum with 1/(k!(k+1)!))
    psi_sum = 1.0 - 2.0 * EULER_GAMMA  # psi(1) + psi(2)
    total = 1.0 / x + lg * i1 - 0.25 * x * psi_sum * np.ones_like(x)
    term_k = np.ones_like(x)
    for k in range(1, 60):
        term_k = term_k * q / (k * (k + 1))
        psi_sum += 1.0 / k + 1.0 / (k + 1)
        add = -0.25 * x * term_k * psi_sum
        total += add
        if np.all(np.abs(add) <= _SERIES_TOL * np.abs(total)):
            break
    return np.exp(x) * total


def _k_asympt_scaled(nu: float, x: np.ndarray) -> np.ndarray:
    """e^x K_nu(x) from the large-argument expansion, optimally truncated."""
    mu = 4.0 * nu * nu
    total = np.ones_like(x)
    term = np.ones_like(x)
    prev = np.inf
    for k in range(1, 40):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        mag = float(np.max(np.abs(term))) if term.size else 0.0
        if mag >= prev:
            break
        total += term
        prev = mag
        if mag < 1e-17:
            break
    return np.sqrt(np.pi / (2.0 * x)) * total


_GL_NODES_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _k_integral_scaled(nu: float, x: np.ndarray) -> np.ndarray:
    """e^x K_nu(x) = int_0^inf e^{-x(cosh t - 1)} cosh(nu t) dt by Gauss-Legendre.

    Bridges the mid-range where neither the ascending nor the asymptotic
    series reaches the accuracy target.
    """
    npts = 192
    if npts not in _GL_NODES_CACHE:
        _GL_NODES_CACHE[npts] = np.polynomial.legendre.leggauss(npts)
    t, w = _GL_NODES_CACHE[npts]
    out = np.empty_like(x)
    for i, xi in np.ndenumerate(x):
        T = np.arccosh(1.0 + 45.0 / xi)
        tt = 0.5 * T * (t + 1.0)
        ww = 0.5 * T * w
        out[i] = np.sum(ww * np.exp(-xi * (np.cosh(tt) - 1.0)) * np.cosh(nu * tt))
    return out


def bessel_k_scaled(nu: float, x) -> np.ndarray | float:
    """e^x K_nu(x); safe for large x where K itself underflows."""
    nu = _check_order(nu)
    arr, scalar = _as_array(x)
    if np.any(arr <= 0):
        raise ValueError("singular argument: K requires x > 0")
    anu = abs(nu)  # K_{-nu} = K_nu
    if anu == 0.5:
        out = np.sqrt(np.pi / (2.0 * arr))
    elif anu == 1.5:
        out = np.sqrt(np.pi / (2.0 * arr)) * (1.0 + 1.0 / arr)
    else:
        n = int(anu)
        out = np.empty_like(arr)
        lo = arr <= _K_SERIES_MAX
        hi = arr >= _K_ASYMPT_MIN
        mid = ~(lo | hi)
        if lo.any():
            out[lo] = _k_series_scaled(n, arr[lo])
        if hi.any():
            out[hi] = _k_asympt_scaled(float(n), arr[hi])
        if mid.any():
            out[mid] = _k_integral_scaled(float(n), arr[mid])
    return float(out) if scalar else out


def bessel_k(nu: float, x) -> np.ndarray | float:
    """K_nu(x) for x > 0 (positive and decreasing)."""
    arr, scalar = _as_array(x)
    if np.any(arr <= 0):
        raise ValueError("singular argument: K requires x > 0")
    out = bessel_k_scaled(nu, arr) * np.exp(-arr)
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# Derivatives via the standard +-1 recurrences
# ---------------------------------------------------------------------------

def bessel_deriv(kind: str, nu: float, x) -> np.ndarray | float:
    """d/dx of J, I or K at order nu.

    Uses d/dx[x^-nu J_nu] = -x^-nu J_{nu+1} and its I/K analogues, i.e.
    Z_nu'(x) = (nu/x) Z_nu(x) -+ Z_{nu+1}(x).
    """
    nu = _check_order(nu)
    _check_order(nu + 1.0)
    arr, scalar = _as_array(x)
    if kind == "j":
        if np.any(arr < 0):
            raise ValueError("bessel_j requires x >= 0")
        zero = arr == 0.0
        safe = np.where(zero, 1.0, arr)
        out = (nu / safe) * bessel_j(nu, safe) - bessel_j(nu + 1.0, safe)
        if zero.any():
            if nu == 0.0:
                out = np.where(zero, 0.0, out)
            elif nu == 1.0:
                out = np.where(zero, 0.5, out)
            else:
                out = np.where(zero, np.nan, out)
    elif kind == "i":
        if np.any(arr < 0):
            raise ValueError("bessel_i requires x >= 0")
        zero = arr == 0.0
        safe = np.where(zero, 1.0, arr)
        out = (nu / safe) * bessel_i(nu, safe) + bessel_i(nu + 1.0, safe)
        if zero.any():
            if nu == 0.0:
                out = np.where(zero, 0.0, out)
            elif nu == 1.0:
                out = np.where(zero, 0.5, out)
            else:
                out = np.where(zero, np.nan, out)
    elif kind == "k":
        out = (nu / arr) * bessel_k(nu, arr) - bessel_k(nu + 1.0, arr)
    else:
        raise ValueError(f"kind must be 'j', 'i' or 'k', got {kind!r}")
    return float(out) if scalar else out


def first_j_zero(nu: float, tol: float = 1e-14) -> float:
    """First positive zero j_{nu,1} of J_nu, by bisection on the evaluator."""
    nu = _check_order(nu)
    if nu == -0.5:
        return 0.5 * np.pi
    if nu == 0.5:
        return np.pi
    lo, hi = 1e-8, 1.0
    flo = bessel_j(nu, lo)
    while bessel_j(nu, hi) * flo > 0:
        hi += 0.5
        if hi > 30:
            raise RuntimeError("no sign change located for first J zero")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if bessel_j(nu, mid) * flo > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)
