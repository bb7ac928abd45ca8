"""Reference computations that share no code with the production solvers.

They are slow and narrow on purpose: adaptive ODE integration with
root bracketing by sign scans, and direct high-precision transcriptions of
closed formulas.  Tests and the acceptance checks compare against them.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

_RTOL = 1e-11
_ATOL = 1e-13


def _bracketed_roots(f, lo, hi, count, n_scan=400):
    """First ``count`` sign changes of ``f`` on a uniform scan of ``[lo, hi]``, refined by brentq."""
    xs = np.linspace(lo, hi, n_scan + 1)
    vals = [f(x) for x in xs]
    roots = []
    for a, b, fa, fb in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(f, a, b, xtol=1e-14, rtol=1e-15))
        if len(roots) == count:
            return roots
    raise RuntimeError(f"found only {len(roots)} roots in [{lo}, {hi}]")


# ------------------------------------------------------------------------------
# 1D model: -phi'' + V phi = lam rho phi on [-D/2, D/2]
# ------------------------------------------------------------------------------

def model_end_value(lam, D, rho, V, parity):
    """``phi(D/2)`` for the even (parity 0) or odd (parity 1) solution, normalised at 0."""
    y0 = [1.0, 0.0] if parity == 0 else [0.0, 1.0]

    def rhs(s, y):
        return [y[1], (V(s) - lam * rho(s)) * y[0]]

    sol = solve_ivp(rhs, (0.0, D / 2), y0, method="DOP853", rtol=_RTOL, atol=_ATOL)
    return sol.y[0, -1]


def model_eigenvalues(D, sigma=0.0, C=1.0, V=0.0, lam_max=None):
    """``(lam1, lam2)`` of the model with ``rho = sigma s^2/2 + C`` and constant ``V``."""
    rho = lambda s: sigma * s * s / 2 + C
    Vf = lambda s: V
    rmin = C
    if lam_max is None:
        lam_max = (4 * math.pi ** 2 / D ** 2 + V) / rmin * 1.5 + 1.0
    l1 = _bracketed_roots(lambda l: model_end_value(l, D, rho, Vf, 0), 1e-12, lam_max, 1)[0]
    l2 = _bracketed_roots(lambda l: model_end_value(l, D, rho, Vf, 1), 1e-12, lam_max, 1)[0]
    return l1, l2


# ------------------------------------------------------------------------------
# hyperbolic disk: radial separation in geodesic polar coordinates
# ------------------------------------------------------------------------------

def _radial_end(lam, s_R, m):
    """Value at ``s_R`` of the regular solution of ``u'' + coth(s) u' - m^2 u / sinh^2 s + lam u = 0``."""
    s0 = 1e-4
    # Frobenius start: u ~ s^m (1 + c s^2)
    if m == 0:
        c = -lam / 4
        u0, du0 = 1 + c * s0 ** 2, 2 * c * s0
    else:
        u0, du0 = s0 ** m, m * s0 ** (m - 1)

    def rhs(s, y):
        sh = math.sinh(s)
        return [y[1], -math.cosh(s) / sh * y[1] + (m * m / (sh * sh) - lam) * y[0]]

    sol = solve_ivp(rhs, (s0, s_R), [u0, du0], method="DOP853", rtol=_RTOL, atol=1e-16)
    return sol.y[0, -1]


def hyperbolic_disk_eigenvalues(R_E: float):
    """``(lam1, lam2)`` of the hyperbolic Laplacian on the disk-model ball of chart radius ``R_E``.

    ``lam1`` is the first radial mode (m = 0) and ``lam2`` the first m = 1
    mode, which is the second Dirichlet eigenvalue of a geodesic disk.
    """
    s_R = 2 * math.atanh(R_E)
    hi = (5.2 / s_R) ** 2 * 2 + 1.0
    l1 = _bracketed_roots(lambda l: _radial_end(l, s_R, 0), 1e-6, hi, 1)[0]
    l2 = _bracketed_roots(lambda l: _radial_end(l, s_R, 1), 1e-6, hi * 2, 1)[0]
    return l1, l2


# ------------------------------------------------------------------------------
# closed formulas at high precision
# ------------------------------------------------------------------------------

def explicit_bound_mp(N, D, C_N=1, dps=80):
    """Explicit horoconvex bound, transcribed term by term."""
    with mpmath.workdps(dps):
        N, D, C_N = mpmath.mpf(N), mpmath.mpf(D), mpmath.mpf(C_N)
        pi = mpmath.pi
        q = mpmath.sqrt(D / 2 + 1) - 1
        hess = 1 + 2 * N / (N + 1) * mpmath.sinh(D) ** 2
        lam_up = mpmath.mpf("0.25") + pi ** 2 / q ** 4 + (N * N - 1) * pi ** 4 / (12 * q ** 6)
        R = -(pi ** 2) * min(1, 4 / (D * D)) + 3 * min(4, D * D) * hess ** 4 * lam_up
        prefactor = pi ** 2 / (min(4, D * D / 2) * hess ** 2)
        val = prefactor * mpmath.exp(-C_N * min(1, D / 2) * mpmath.sqrt(max(R, 0)))
        return +val, +R


def asymptotic_bound_mp(N, D, dps=80):
    with mpmath.workdps(dps):
        N, D = mpmath.mpf(N), mpmath.mpf(D)
        e = (N - 1) * D * D * (1 + 2 * mpmath.exp(2 * D)) ** 2
        return +(mpmath.pi ** 2 * (N - 1) ** 2 * D * D / 16 * mpmath.exp(-e))
