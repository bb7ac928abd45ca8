"""One-dimensional comparison model.

The model problem is the weighted Dirichlet problem

.. math::

    -\\varphi'' + \\bar V \\varphi = \\bar\\lambda \\bar\\rho \\varphi
    \\quad\\text{on } [-D/2, D/2], \\qquad \\varphi(\\pm D/2) = 0,

with even ``rho_bar > 0`` and even ``V_bar``.  Two solvers are provided:

* :func:`solve_1d` -- second-order finite differences on a uniform grid,
  returning eigenfunction samples.  This is the reference solver for
  moderate parameters.
* :func:`shoot_1d` -- exact propagation of a piecewise-constant
  coefficient approximation in log/Prüfer form.  It resolves gaps that are
  far below double-precision resolution of the eigenvalues themselves
  (the horoconvex moduli produce gaps like ``exp(-1e5)``), by computing the
  gap from a Wronskian identity instead of a difference of eigenvalues.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from . import _pruess
from .errors import ConvergenceError, PreconditionError


# --------------------------------------------------------------------------
# the modulus
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Modulus1D:
    """Weight and potential of the 1D model on ``[-D/2, D/2]``.

    Either ``rho(s) = sigma*s**2/2 + C`` (the default form), or an even
    profile given by samples ``rho_samples`` on ``s_samples`` in
    ``[0, D/2]``.  The potential is the constant ``V`` unless ``V_samples``
    is given on the same abscissae.
    """

    D: float
    sigma: float = 0.0
    C: float = 1.0
    V: float = 0.0
    s_samples: Optional[np.ndarray] = None
    rho_samples: Optional[np.ndarray] = None
    V_samples: Optional[np.ndarray] = None
    _splines: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not (self.D > 0 and math.isfinite(self.D)):
            raise PreconditionError(f"interval length must be positive, got {self.D}")
        if self.rho_samples is None and self.V_samples is None:
            if self.sigma < 0:
                raise PreconditionError("sigma must be >= 0")
            if self.C <= 0:
                raise PreconditionError("C must be > 0")
            return
        if self.s_samples is None:
            raise PreconditionError("sampled profiles need s_samples")
        s = np.asarray(self.s_samples, dtype=float)
        if s[0] != 0.0 or abs(s[-1] - self.D / 2) > 1e-12 * self.D or np.any(np.diff(s) <= 0):
            raise PreconditionError("s_samples must increase from 0 to D/2")
        for name in ("rho", "V"):
            vals = getattr(self, name + "_samples")
            if vals is None:
                continue
            vals = np.asarray(vals, dtype=float)
            if vals.shape != s.shape:
                raise PreconditionError(f"{name}_samples has the wrong length")
            # clamped slope at 0 keeps the even extension C^1
            self._splines[name] = CubicSpline(s, vals, bc_type=((1, 0.0), "not-a-knot"))
        if self.rho_samples is not None and np.min(self.rho_samples) <= 0:
            raise PreconditionError("rho must be positive")

    # constructors -----------------------------------------------------
    @classmethod
    def quadratic(cls, D, sigma=0.0, C=1.0, V=0.0):
        return cls(D=float(D), sigma=float(sigma), C=float(C), V=float(V))

    @classmethod
    def sampled(cls, D, s, rho=None, V=None, sigma=0.0, C=1.0, V_const=0.0):
        s = np.asarray(s, dtype=float)
        return cls(D=float(D), sigma=sigma, C=C, V=V_const, s_samples=s,
                   rho_samples=None if rho is None else np.asarray(rho, float),
                   V_samples=None if V is None else np.asarray(V, float))

    # evaluation -------------------------------------------------------
    @property
    def half_length(self) -> float:
        return self.D / 2

    @property
    def is_quadratic(self) -> bool:
        return self.rho_samples is None

    @property
    def constant_V(self) -> bool:
        return self.V_samples is None

    def rho(self, s):
        a = np.abs(np.asarray(s, dtype=float))
        if "rho" in self._splines:
            return self._splines["rho"](a)
        return 0.5 * self.sigma * a * a + self.C

    def rho_prime(self, s):
        s = np.asarray(s, dtype=float)
        if "rho" in self._splines:
            return np.sign(s) * self._splines["rho"](np.abs(s), 1)
        return self.sigma * s

    def Vbar(self, s):
        a = np.abs(np.asarray(s, dtype=float))
        if "V" in self._splines:
            return self._splines["V"](a)
        return np.full_like(a, self.V)

    def _dense(self, name):
        s = np.linspace(0.0, self.half_length, 2049)
        return self.rho(s) if name == "rho" else self.Vbar(s)

    def rho_bounds(self):
        if self.is_quadratic:
            return self.C, 0.5 * self.sigma * self.half_length ** 2 + self.C
        r = self._dense("rho")
        return float(r.min()), float(r.max())

    def V_bounds(self):
        if self.constant_V:
            return self.V, self.V
        v = self._dense("V")
        return float(v.min()), float(v.max())

    def with_V(self, V):
        """Same weight, new constant potential."""
        return Modulus1D(D=self.D, sigma=self.sigma, C=self.C, V=float(V),
                         s_samples=self.s_samples, rho_samples=self.rho_samples)

    def describe(self) -> dict:
        d = {"D": self.D}
        if self.is_quadratic:
            d.update(rho="quadratic", sigma=self.sigma, C=self.C)
        else:
            d.update(rho="sampled", n_samples=int(len(self.s_samples)))
        if self.constant_V:
            d["V"] = self.V
        else:
            d["V"] = "sampled"
        return d


# --------------------------------------------------------------------------
# bracket and closed form
# --------------------------------------------------------------------------

def eigenvalue_bracket(m: Modulus1D, k: int):
    """Rayleigh-quotient bracket for the k-th Dirichlet eigenvalue of the model."""
    if k < 1:
        raise PreconditionError("k must be >= 1")
    rmin, rmax = m.rho_bounds()
    vmin, vmax = m.V_bounds()
    base = k * k * math.pi ** 2 / m.D ** 2
    if vmin < -base:
        raise PreconditionError("min V must be >= -k^2 pi^2 / D^2")
    return (base + vmin) / rmax, (base + vmax) / rmin


def closed_form_gap_bound(m: Modulus1D) -> float:
    """Closed-form lower bound for the model gap (requires V >= 0)."""
    rmin, rmax = m.rho_bounds()
    vmin, vmax = m.V_bounds()
    if vmin < 0:
        raise PreconditionError("closed-form gap bound needs V >= 0")
    return 3 * math.pi ** 2 / m.D ** 2 * rmin / rmax ** 2 - (vmax / rmin - vmin / rmax)


# --------------------------------------------------------------------------
# finite differences
# --------------------------------------------------------------------------

@dataclass(eq=False)
class Spectrum1D:
    """Two lowest Dirichlet eigenpairs of the model on a uniform grid.

    ``phi1``/``phi2`` are samples at the interior nodes ``s`` normalised by
    ``sum(rho * phi**2) * h = 1``; ``phi1 > 0`` and ``phi2`` is positive
    for ``s > 0``.
    """

    modulus: Modulus1D
    s: np.ndarray
    h: float
    lam1: float
    lam2: float
    phi1: np.ndarray
    phi2: np.ndarray
    residuals: tuple
    lam1_rich: Optional[float] = None
    lam2_rich: Optional[float] = None
    refined: Optional["Spectrum1D"] = None

    @property
    def n(self) -> int:
        return len(self.s)

    @property
    def gap(self) -> float:
        return self.lam2 - self.lam1

    @property
    def gap_rich(self) -> float:
        if self.lam1_rich is None:
            return self.gap
        return self.lam2_rich - self.lam1_rich

    def best(self):
        """(lam1, lam2, gap) using extrapolated values when available."""
        if self.lam1_rich is None:
            return self.lam1, self.lam2, self.gap
        return self.lam1_rich, self.lam2_rich, self.gap_rich


def _fd_single(m: Modulus1D, n: int) -> Spectrum1D:
    D = m.D
    h = D / (n + 1)
    s = -D / 2 + h * np.arange(1, n + 1)
    rho = m.rho(s)
    V = m.Vbar(s)
    # B^{-1/2} A B^{-1/2} with A = tridiag(-1, 2, -1)/h^2 + diag(V)
    w = 1.0 / np.sqrt(rho)
    diag = (2.0 / h ** 2 + V) * w * w
    off = -(1.0 / h ** 2) * w[:-1] * w[1:]
    vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, 1))
    lam1, lam2 = float(vals[0]), float(vals[1])
    phis = []
    res = []
    for j in range(2):
        u = vecs[:, j] * w
        u /= math.sqrt(h * np.sum(rho * u * u))
        phis.append(u)
        Au = (2 * u - np.r_[0.0, u[:-1]] - np.r_[u[1:], 0.0]) / h ** 2 + V * u
        res.append(float(np.linalg.norm(Au - vals[j] * rho * u) / np.linalg.norm(u)))
    phi1, phi2 = phis
    if phi1[n // 2] < 0:
        phi1 = -phi1
    if np.sum(phi2[s > 0]) < 0:
        phi2 = -phi2
    diag_info = {"n": n, "h": h, "lam1": lam1, "lam2": lam2, "residuals": res}
    if not lam1 < lam2:
        raise ConvergenceError("eigenvalues not separated at this resolution "
                               "(gap below grid resolution, use shoot_1d)", diag_info)
    if np.any(phi1 <= 0):
        raise ConvergenceError("first eigenvector changes sign; the gap is below "
                               "what this grid resolves (use shoot_1d)", diag_info)
    nz = phi2[np.abs(phi2) > 1e-12 * np.abs(phi2).max()]
    if np.count_nonzero(np.diff(np.sign(nz))) != 1:
        raise ConvergenceError("second eigenvector does not have exactly one sign "
                               "change", diag_info)
    return Spectrum1D(m, s, h, lam1, lam2, phi1, phi2, tuple(res))


def solve_1d(m: Modulus1D, n: int = 400, extrapolate: bool = True) -> Spectrum1D:
    """Finite-difference eigenpairs of the 1D model.

    Parameters
    ----------
    m : Modulus1D
    n : int
        Number of interior nodes (``h = D/(n+1)``), at least 32.
    extrapolate : bool
        If true a second solve with ``2n+1`` interior nodes (spacing exactly
        ``h/2``) is made and Richardson-extrapolated eigenvalues are stored.

    Raises
    ------
    ConvergenceError
        If the computed pairs violate ordering or nodal structure, which
        happens when the gap is below the grid resolution.
    """
    if n < 32:
        raise PreconditionError("n must be >= 32")
    sp = _fd_single(m, n)
    if extrapolate:
        fine = _fd_single(m, 2 * n + 1)
        sp.refined = fine
        sp.lam1_rich = (4 * fine.lam1 - sp.lam1) / 3
        sp.lam2_rich = (4 * fine.lam2 - sp.lam2) / 3
    return sp


def _psi_fd(sp: Spectrum1D):
    phi = np.r_[0.0, sp.phi1, 0.0]
    psi = (phi[2:] - phi[:-2]) / (2 * sp.h * sp.phi1)
    return 0.5 * (psi - psi[::-1])


def log_derivative_psi(sp: Spectrum1D, extrapolate: bool = True):
    """Centered-difference samples of ``psi = (log phi1)'``.

    Returns ``(s, psi)`` at the interior nodes.  Values are made exactly odd
    by antisymmetrisation, so ``psi(0) = 0``.  With ``extrapolate`` and a
    refined spectrum available, the two grids are combined by Richardson
    extrapolation at the common nodes.  Values within ``2h`` of the ends are
    returned but should not be trusted (see :func:`interior_mask`).
    """
    psi = _psi_fd(sp)
    if extrapolate and sp.refined is not None:
        pf = _psi_fd(sp.refined)[1::2]
        psi = (4 * pf - psi) / 3
    return sp.s.copy(), psi


def interior_mask(sp: Spectrum1D, margin: float = 2.0):
    """Nodes with ``|s| <= D/2 - margin*h``."""
    return np.abs(sp.s) <= sp.modulus.half_length - margin * sp.h + 1e-14 * sp.modulus.D


def _neumann_single(sp: Spectrum1D) -> float:
    phi = sp.phi1
    h = sp.h
    mass = phi * phi * h
    pm = (0.5 * (phi[:-1] + phi[1:])) ** 2 / h
    diag = np.r_[pm, 0.0] + np.r_[0.0, pm]
    # generalized problem K w = mu M w, symmetrized with M^{-1/2}
    w = 1.0 / np.sqrt(mass)
    vals = eigh_tridiagonal(diag * w * w, -pm * w[:-1] * w[1:], eigvals_only=True,
                            select="i", select_range=(0, 1))
    if abs(vals[0]) > 1e-6 * abs(vals[1]):
        raise ConvergenceError("Neumann problem lost its zero mode",
                               {"mu0": float(vals[0]), "mu1": float(vals[1])})
    return float(vals[1])


def neumann_ratio_eigen(sp: Spectrum1D) -> float:
    """First nontrivial eigenvalue of ``(phi1^2 w')' = -mu phi1^2 w`` with Neumann ends.

    Uses the spectrum's refined grid for Richardson extrapolation when
    available.
    """
    mu = _neumann_single(sp)
    if sp.refined is not None:
        mu = (4 * _neumann_single(sp.refined) - mu) / 3
    return mu


def riccati_compare(m: Modulus1D, L: float, n: int = 400, tol: float = 1e-6,
                    enforce: bool = True):
    """Compare ``psi`` of the weighted model with the flat profile on length ``L``.

    Returns ``(holds, max_violation)`` where ``max_violation`` is the largest
    value of ``psi - psi_L`` on ``0 <= s <= D/2 - 2h`` (negative means the
    comparison holds with room to spare).  Both functions are odd, so on the
    negative half the inequality is reversed; comparing on ``s >= 0`` is the
    same as comparing ``s*psi <= s*psi_L`` on the whole interval.
    """
    vmin, vmax = m.V_bounds()
    if vmin != 0.0 or vmax != 0.0:
        raise PreconditionError("the Riccati comparison needs V = 0")
    rmin, rmax = m.rho_bounds()
    Lmin = math.sqrt(rmax / rmin) * m.D
    if enforce and L < Lmin * (1 - 1e-12):
        raise PreconditionError(f"L = {L} is below the threshold {Lmin}")
    sp = solve_1d(m, n)
    s, psi = log_derivative_psi(sp)
    mask = interior_mask(sp) & (s >= 0)
    psiL = -(math.pi / L) * np.tan(math.pi * s[mask] / L)
    viol = float(np.max(psi[mask] - psiL))
    return viol <= tol, viol


# --------------------------------------------------------------------------
# log-space shooting
# --------------------------------------------------------------------------

@dataclass(eq=False)
class ShotSpectrum:
    """Result of :func:`shoot_1d`.

    ``log_gap`` is always finite for a valid modulus; ``gap`` is
    ``exp(log_gap)`` and may underflow to zero.  ``branch`` records how
    the gap was obtained: ``"difference"`` (``lam2 - lam1``) when the two
    eigenvalues are separated by many ulps, ``"wronskian"`` otherwise.
    ``s`` is the half-interval mesh on ``[0, D/2]``; ``psi`` and ``Phi``
    are sampled there (``psi`` diverges at the right end, where the last
    entry is ``-inf``).
    """

    modulus: Modulus1D
    lam1: float
    lam2: float
    log_gap: float
    branch: str
    n: int
    s: np.ndarray
    psi: np.ndarray
    Phi: np.ndarray
    raw: dict

    @property
    def gap(self) -> float:
        return math.exp(self.log_gap) if self.log_gap > -745 else 0.0

    def psi_at(self, s):
        """Interpolated odd extension of ``psi``."""
        s = np.asarray(s, dtype=float)
        return np.sign(s) * np.interp(np.abs(s), self.s[:-1], self.psi[:-1])

    def Phi_at(self, s):
        s = np.asarray(s, dtype=float)
        return np.sign(s) * np.interp(np.abs(s), self.s, self.Phi)


_DIFF_THRESHOLD = 1e-7


def _mesh(a, n, grading):
    t = np.linspace(0.0, 1.0, n + 1)
    s = a * (1.0 - (1.0 - t) ** grading)
    s[-1] = a
    return s


def _coeffs(m, s):
    sm = 0.5 * (s[1:] + s[:-1])
    return np.diff(s), np.ascontiguousarray(m.rho(sm), dtype=float), \
        np.ascontiguousarray(m.Vbar(sm), dtype=float)


def _root(h, rho, v, theta0, lo, hi, hint=None):
    f = lambda lam: _pruess.prufer_end(h, rho, v, lam, theta0) - math.pi
    if hint is not None:
        # the root on a refined mesh moves by O(h^2); try a tight bracket first
        d = 1e-5 * max(abs(hint), 1.0)
        a, b = max(lo, hint - d), min(hi, hint + d)
        fa, fb = f(a), f(b)
        if fa < 0 < fb:
            return brentq(f, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    flo, fhi = f(lo), f(hi)
    for _ in range(200):
        if flo < 0:
            break
        lo = lo - max(1.0, abs(lo))
        flo = f(lo)
    for _ in range(200):
        if fhi > 0:
            break
        hi = hi + max(1.0, abs(hi))
        fhi = f(hi)
    if not (flo < 0 < fhi):
        raise ConvergenceError("could not bracket eigenvalue", {"lo": lo, "hi": hi})
    if flo == 0:
        return lo
    return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _shoot_level(m, n, grading, hints=(None, None)):
    a = m.half_length
    s = _mesh(a, n, grading)
    h, rho, v = _coeffs(m, s)
    lo1, hi1 = eigenvalue_bracket(m, 1)
    lo2, hi2 = eigenvalue_bracket(m, 2)
    pad = 1e-9
    lam1 = _root(h, rho, v, math.pi / 2, lo1 * (1 - pad) - pad, hi1 * (1 + pad) + pad, hints[0])
    lam2 = _root(h, rho, v, 0.0, max(lam1, lo2 * (1 - pad) - pad), hi2 * (1 + pad) + pad,
                 hints[1] if hints[1] is not None else lam1)
    return s, h, rho, v, lam1, lam2


def _log_gap_wronskian(h, rho, v, lam):
    Pn, Qn, Ln = _pruess.trace(h, rho, v, lam, 1.0, 0.0)
    Pd, Qd, Ld = _pruess.trace(h, rho, v, lam, 0.0, 1.0)
    lo, sgn = _pruess.log_overlap(h, rho, v, lam, Pn, Qn, Ln, Pd, Qd, Ld)
    if sgn <= 0:
        raise ConvergenceError("nonpositive overlap in the Wronskian identity",
                               {"lam": lam, "log_overlap": lo})
    # phi_N(0) = 1, phi_D'(0) = 1, so gap = 1 / int_0^a rho phi_N phi_D
    return -lo


def shoot_1d(m: Modulus1D, n: int = 4000, grading: float = 2.0,
             extrapolate: bool = True) -> ShotSpectrum:
    """Two lowest eigenvalues and the gap of the model by log-space shooting.

    The even/odd symmetry reduces the problem to ``[0, D/2]``: the first
    eigenfunction starts with ``u'(0) = 0``, the second with ``u(0) = 0``.
    Each eigenvalue solves ``theta(D/2) = pi`` for the Prüfer angle.  The
    mesh ``s = a(1 - (1 - t)**grading)`` clusters nodes near the Dirichlet
    end where the eigenfunctions have a boundary layer in the strongly
    weighted cases.

    When ``lam2 - lam1`` is smaller than ``1e-7 * lam2`` the gap is taken
    from the identity ``gap = phi_D'(0) phi_N(0) / int_0^{D/2} rho phi_N phi_D``
    evaluated with both solutions at ``lam1``; its relative error is of
    order ``gap / (lam3 - lam1)``, i.e. negligible exactly where the
    difference is unusable.

    Richardson extrapolation over meshes with ``n`` and ``2n`` cells is
    applied to both eigenvalues and to the log-gap.
    """
    if n < 16:
        raise PreconditionError("n must be >= 16")
    levels = [n, 2 * n] if extrapolate else [n]
    out = []
    for k in levels:
        hints = (out[-1][4], out[-1][5]) if out else (None, None)
        out.append(_shoot_level(m, k, grading, hints))
    s, h, rho, v, lam1, lam2 = out[-1]
    rel = (lam2 - lam1) / max(abs(lam2), 1.0)
    branch = "difference" if rel > _DIFF_THRESHOLD else "wronskian"
    logs = []
    for (_, hk, rk, vk, l1, l2) in out:
        if branch == "difference":
            logs.append(math.log(l2 - l1))
        else:
            logs.append(_log_gap_wronskian(hk, rk, vk, l1))
    if extrapolate:
        lam1_r = (4 * out[1][4] - out[0][4]) / 3
        lam2_r = (4 * out[1][5] - out[0][5]) / 3
        if branch == "difference":
            gap_r = (4 * (out[1][5] - out[1][4]) - (out[0][5] - out[0][4])) / 3
            log_gap = math.log(gap_r) if gap_r > 0 else logs[-1]
        else:
            log_gap = (4 * logs[1] - logs[0]) / 3
    else:
        lam1_r, lam2_r, log_gap = lam1, lam2, logs[0]

    # eigenfunction data on the finest mesh
    Pn, Qn, Ln = _pruess.trace(h, rho, v, lam1, 1.0, 0.0)
    Pd, Qd, Ld = _pruess.trace(h, rho, v, lam2, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        psi = Qn / Pn
    psi[-1] = -np.inf
    # L2(rho) normalisation over the full interval (factor 2 from symmetry)
    nn, _ = _pruess.log_overlap(h, rho, v, lam1, Pn, Qn, Ln, Pn, Qn, Ln)
    nd, _ = _pruess.log_overlap(h, rho, v, lam2, Pd, Qd, Ld, Pd, Qd, Ld)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        Phi = np.exp((Ld - 0.5 * nd) - (Ln - 0.5 * nn)) * Pd / Pn
    Phi[0] = 0.0
    # at the Dirichlet end both vanish; use the ratio of derivatives
    Phi[-1] = math.exp((Ld[-1] - 0.5 * nd) - (Ln[-1] - 0.5 * nn)) * Qd[-1] / Qn[-1]
    raw = {"levels": levels, "lam1": [o[4] for o in out], "lam2": [o[5] for o in out],
           "log_gap": logs, "grading": grading}
    return ShotSpectrum(m, lam1_r, lam2_r, log_gap, branch, levels[-1], s, psi, Phi, raw)


def first_eigenvalue(m: Modulus1D, n: int = 4000, grading: float = 2.0,
                     extrapolate: bool = True) -> float:
    """Only the first model eigenvalue, by log-space shooting."""
    vals = []
    for k in ([n, 2 * n] if extrapolate else [n]):
        s = _mesh(m.half_length, k, grading)
        h, rho, v = _coeffs(m, s)
        lo, hi = eigenvalue_bracket(m, 1)
        vals.append(_root(h, rho, v, math.pi / 2, lo * (1 - 1e-9) - 1e-9, hi * (1 + 1e-9) + 1e-9,
                          vals[-1] if vals else None))
    if extrapolate:
        return (4 * vals[1] - vals[0]) / 3
    return vals[0]
