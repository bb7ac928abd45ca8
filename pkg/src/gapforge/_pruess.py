"""Piecewise-constant coefficient (Pruess) propagation in log/Prüfer form.

The model equation ``-u'' + V(s) u = lam * rho(s) u`` is approximated on a
mesh by freezing ``w = V - lam*rho`` at cell midpoints.  Each cell is then
propagated exactly, so the discrete problem keeps the Sturm oscillation
structure of the continuous one.  The state is stored as a unit vector
``(p, q)`` together with a log-amplitude ``ell`` so that solutions growing
like ``exp(1e8)`` are still representable.

Everything here is low level and works on flat float arrays; the public
wrappers live in :mod:`gapforge.model1d`.
"""
import math

import numpy as np
from numba import njit

_BIG = 20.0  # above this value of 2*kappa*h exponentials are factored out


@njit(cache=True)
def _cell_coeffs(w, h):
    """Return (logscale, C, S, wS) for one cell of width ``h``.

    The true propagator is ``exp(logscale) * [[C, S], [wS, C]]``.
    """
    if w > 0.0:
        k = math.sqrt(w)
        y = k * h
        if 2.0 * y > _BIG:
            e = math.exp(-2.0 * y)
            return y, 0.5 * (1.0 + e), 0.5 * (1.0 - e) / k, 0.5 * k * (1.0 - e)
        if y < 1e-4:
            y2 = y * y
            sh = h * (1.0 + y2 / 6.0 + y2 * y2 / 120.0)
        else:
            sh = math.sinh(y) / k
        return 0.0, math.cosh(y), sh, w * sh
    elif w < 0.0:
        om = math.sqrt(-w)
        y = om * h
        if y < 1e-4:
            y2 = y * y
            sn = h * (1.0 - y2 / 6.0 + y2 * y2 / 120.0)
        else:
            sn = math.sin(y) / om
        return 0.0, math.cos(y), sn, w * sn
    return 0.0, 1.0, h, 0.0


@njit(cache=True)
def _wrap(a):
    """Map an angle difference into (-pi, pi]."""
    while a <= -math.pi:
        a += 2.0 * math.pi
    while a > math.pi:
        a -= 2.0 * math.pi
    return a


@njit(cache=True)
def prufer_end(h, rho, v, lam, theta0):
    """Unwrapped Prüfer angle ``atan2(u, u')`` at the right end.

    ``theta0`` fixes the initial state ``u = sin(theta0), u' = cos(theta0)``.
    The result is continuous and increasing in ``lam``; the k-th eigenvalue
    of the half problem with a Dirichlet right end solves
    ``prufer_end(...) = k*pi``.
    """
    theta = theta0
    n = h.shape[0]
    for i in range(n):
        w = v[i] - lam * rho[i]
        hi = h[i]
        if w < 0.0:
            om = math.sqrt(-w)
            m0 = math.floor(theta / math.pi)
            tr = theta - m0 * math.pi
            phi = m0 * math.pi + math.atan2(om * math.sin(tr), math.cos(tr))
            if phi < m0 * math.pi:
                phi += math.pi
            phi += om * hi
            m1 = math.floor(phi / math.pi)
            pr = phi - m1 * math.pi
            tr1 = math.atan2(math.sin(pr), om * math.cos(pr))
            if tr1 < 0.0:
                tr1 += math.pi
            theta = m1 * math.pi + tr1
        else:
            p = math.sin(theta)
            q = math.cos(theta)
            _, c, s, ws = _cell_coeffs(w, hi)
            p1 = c * p + s * q
            q1 = ws * p + c * q
            theta = theta + _wrap(math.atan2(p1, q1) - math.atan2(p, q))
    return theta


@njit(cache=True)
def trace(h, rho, v, lam, p0, q0):
    """Propagate ``(u, u')`` and return node states.

    Returns arrays ``p, q, ell`` of length ``len(h) + 1`` with
    ``(u, u') = exp(ell) * (p, q)`` and ``p**2 + q**2 = 1``.
    """
    n = h.shape[0]
    P = np.empty(n + 1)
    Q = np.empty(n + 1)
    ell = np.empty(n + 1)
    nrm = math.hypot(p0, q0)
    P[0] = p0 / nrm
    Q[0] = q0 / nrm
    ell[0] = math.log(nrm)
    for i in range(n):
        w = v[i] - lam * rho[i]
        ls, c, s, ws = _cell_coeffs(w, h[i])
        p1 = c * P[i] + s * Q[i]
        q1 = ws * P[i] + c * Q[i]
        nrm = math.hypot(p1, q1)
        P[i + 1] = p1 / nrm
        Q[i + 1] = q1 / nrm
        ell[i + 1] = ell[i] + ls + math.log(nrm)
    return P, Q, ell


@njit(cache=True)
def _cell_moments(w, h):
    """Integrals of C*C, C*S and S*S over one cell, with a common log scale."""
    if w > 0.0:
        k = math.sqrt(w)
        x = 2.0 * k * h
        if x > _BIG:
            e = math.exp(-x)
            icc = 0.5 * h * (e + (1.0 - e * e) / (2.0 * x))
            ics = 0.5 * h * h * ((1.0 - e) / x) ** 2
            iss = 2.0 * h ** 3 * (0.5 * (1.0 - e * e) - x * e) / x ** 3
            return x, icc, ics, iss
        if x < 1e-3:
            x2 = x * x
            shx = 1.0 + x2 / 6.0 + x2 * x2 / 120.0
            f = 1.0 / 6.0 + x2 / 120.0 + x2 * x2 / 5040.0
        else:
            shx = math.sinh(x) / x
            f = (math.sinh(x) - x) / x ** 3
        y = 0.5 * x
        if y < 1e-3:
            shy = 1.0 + y * y / 6.0
        else:
            shy = math.sinh(y) / y
        return 0.0, 0.5 * h * (1.0 + shx), 0.5 * h * h * shy * shy, 2.0 * h ** 3 * f
    elif w < 0.0:
        om = math.sqrt(-w)
        x = 2.0 * om * h
        if x < 1e-3:
            x2 = x * x
            snx = 1.0 - x2 / 6.0 + x2 * x2 / 120.0
            g = 1.0 / 6.0 - x2 / 120.0 + x2 * x2 / 5040.0
        else:
            snx = math.sin(x) / x
            g = (x - math.sin(x)) / x ** 3
        y = 0.5 * x
        if y < 1e-3:
            sny = 1.0 - y * y / 6.0
        else:
            sny = math.sin(y) / y
        return 0.0, 0.5 * h * (1.0 + snx), 0.5 * h * h * sny * sny, 2.0 * h ** 3 * g
    return 0.0, h, 0.5 * h * h, h ** 3 / 3.0


@njit(cache=True)
def log_overlap(h, rho, v, lam, Pa, Qa, La, Pb, Qb, Lb):
    """Signed log of ``int rho * ua * ub`` for two traces at the same ``lam``.

    Returns ``(log|I|, sign(I))``.  Each cell is integrated exactly for the
    piecewise-constant coefficient, so only the midpoint freezing of ``rho``
    contributes discretisation error.
    """
    n = h.shape[0]
    m = -np.inf
    acc = 0.0
    for i in range(n):
        w = v[i] - lam * rho[i]
        ls, icc, ics, iss = _cell_moments(w, h[i])
        val = rho[i] * (Pa[i] * Pb[i] * icc
                        + (Pa[i] * Qb[i] + Qa[i] * Pb[i]) * ics
                        + Qa[i] * Qb[i] * iss)
        if val == 0.0:
            continue
        lt = La[i] + Lb[i] + ls
        if lt > m:
            acc = acc * math.exp(m - lt) + val
            m = lt
        else:
            acc += val * math.exp(lt - m)
    if acc == 0.0:
        return -np.inf, 0.0
    sgn = 1.0 if acc > 0.0 else -1.0
    return m + math.log(abs(acc)), sgn
