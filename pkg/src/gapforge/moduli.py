"""Moduli (rho_bar, V_bar) and the closed-form gap-bound pipelines.

Every pipeline returns a :class:`GapBoundReport` holding all intermediates.
The final bound is ``(min rho_bar / max rho) * Gamma_bar - correction`` and
can be recomputed from the stored fields (:meth:`GapBoundReport.recompute`).
Gaps and bounds of the horoconvex pipeline are astronomically small, so the
report also carries natural logarithms (``log_gap_bar``, ``log_bound``);
``bound`` itself may underflow to ``0.0`` while ``log_bound`` stays finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

import mpmath
import numpy as np
from scipy.special import jn_zeros

from .conformal import ConformalFactor, metric_hessian_eigs, scalar_curvature
from .domains import (Domain, circumradius_RE, euclidean_diameter, inradius_from_diameter,
                      one_minus_RE2, sphere_diameter)
from .errors import ConvergenceError, PreconditionError
from .geometry import cs_K, tn_K
from .model1d import Modulus1D, closed_form_gap_bound, first_eigenvalue, shoot_1d

DEFAULT_C_GRID = 32


# ------------------------------------------------------------------------------
# report
# ------------------------------------------------------------------------------

@dataclass
class GapBoundReport:
    """All intermediates of a gap-bound pipeline.

    Field order is the serialisation order.
    """

    pipeline: str
    branch: str
    N: int
    inputs: dict = field(default_factory=dict)
    D: Optional[float] = None
    D_H: Optional[float] = None
    D_E: Optional[float] = None
    R_E: Optional[float] = None
    r_in: Optional[float] = None
    lambda1_upper: Optional[float] = None
    lambda1_source: Optional[str] = None
    lambda_bar0: Optional[float] = None
    lambda_bar1: Optional[float] = None
    C: Optional[float] = None
    sigma: Optional[float] = None
    V_bar: Optional[float] = None
    min_rho_bar: Optional[float] = None
    max_rho_bar: Optional[float] = None
    min_rho: Optional[float] = None
    max_rho: Optional[float] = None
    gap_bar: Optional[float] = None
    log_gap_bar: Optional[float] = None
    gap_bar_source: Optional[str] = None
    osc_R: Optional[float] = None
    correction: float = 0.0
    bound: Optional[float] = None
    log_bound: Optional[float] = None
    flags: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def vacuous(self) -> bool:
        """True when the pipeline produced no strictly positive bound."""
        return not self.positive

    @property
    def positive(self) -> bool:
        """True when the bound is a strictly positive number (possibly below float range)."""
        if self.bound is None:
            return False
        if self.correction == 0.0 and self.log_bound is not None:
            return math.isfinite(self.log_bound)
        return self.bound > 0

    def recompute(self):
        """``(bound, log_bound)`` rebuilt from the stored intermediates."""
        if self.min_rho_bar is None or self.max_rho is None or self.log_gap_bar is None:
            return None, None
        log_main = math.log(self.min_rho_bar) - math.log(self.max_rho) + self.log_gap_bar
        main = math.exp(log_main) if log_main > -745 else 0.0
        if self.correction == 0.0:
            return main, log_main
        b = main - self.correction
        return b, (math.log(b) if b > 0 else None)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            out[f.name] = getattr(self, f.name)
        out["positive"] = self.positive
        return out


def _finish(rep: GapBoundReport) -> GapBoundReport:
    rep.bound, rep.log_bound = rep.recompute()
    rep.flags["positive"] = rep.positive
    return rep


# ------------------------------------------------------------------------------
# conditions
# ------------------------------------------------------------------------------

def check_conditions(m: Modulus1D, K: float, lam_bar: float, lam1: float,
                     rho_bounds=None, V_bounds=None, n: int = 513) -> dict:
    """Side conditions of the main comparison theorem.

    ``condition2`` holds iff ``[rho_bar cs_K^2]' (lam_bar - lam1) >= 0`` at
    all samples of ``[0, D/2]``.  For ``K > 0`` the flags ``rho_bar_le_min_rho``
    and ``V_bar_ge_max_V`` are also reported when the bounds are given.
    """
    s = np.linspace(0.0, m.half_length, n)
    if K > 0 and m.half_length >= math.pi / (2 * math.sqrt(K)):
        s = s[s < math.pi / (2 * math.sqrt(K))]
    c = cs_K(K, s)
    sK = math.sqrt(K)
    dc2 = -2 * c * sK * np.sin(sK * s) if K > 0 else np.zeros_like(s)
    deriv = m.rho_prime(s) * c * c + m.rho(s) * dc2
    prod = deriv * (lam_bar - lam1)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(deriv))) * abs(lam_bar - lam1))
    flags = {"condition2": bool(np.all(prod >= -tol))}
    signs = np.sign(np.where(np.abs(deriv) <= 1e-14 * max(1.0, np.abs(deriv).max()), 0.0, deriv))
    changes = np.flatnonzero(np.diff(signs[signs != 0]) != 0)
    flags["derivative_sign_changes"] = int(len(changes))
    flags["derivative_sign_first"] = int(signs[signs != 0][0]) if np.any(signs != 0) else 0
    if K > 0:
        if rho_bounds is not None:
            flags["rho_bar_le_min_rho"] = bool(m.rho_bounds()[1] <= rho_bounds[0] * (1 + 1e-12))
        if V_bounds is not None:
            flags["V_bar_ge_max_V"] = bool(m.V_bounds()[0] >= V_bounds[1] - 1e-12)
    return flags


# ------------------------------------------------------------------------------
# shared V_bar construction
# ------------------------------------------------------------------------------

def _c_grid(max_rho, C, n_grid):
    if C is None or C == "auto":
        return list(max_rho * np.logspace(-2, 2, n_grid))
    return [float(C)]


def _model_for(D, sigma, C, lam1_up, n):
    """Build (rho_bar, V_bar), solve it, and return the pieces."""
    m0 = Modulus1D.quadratic(D, sigma=sigma, C=C)
    lam0 = first_eigenvalue(m0, n=n)
    max_rb = m0.rho_bounds()[1]
    V = max(0.0, max_rb * (lam1_up - lam0))
    m = m0.with_V(V)
    sh = shoot_1d(m, n=n)
    log_gap = sh.log_gap
    source = "shooting-" + sh.branch
    cf = closed_form_gap_bound(m)
    if cf > 0 and math.log(cf) > log_gap:
        log_gap = math.log(cf)
        source = "closed-form-floor"
    return m, lam0, V, sh, log_gap, source


def _fill_model(rep: GapBoundReport, D, sigma, max_rho, lam1_up, C, n, n_grid):
    """Common tail of the non-concave pipelines: choose C, solve the model."""
    best = None
    tried = []
    for c in _c_grid(max_rho, C, n_grid):
        m, lam0, V, sh, log_gap, source = _model_for(D, sigma, c, lam1_up, n)
        score = math.log(c) - math.log(max_rho) + log_gap
        tried.append((c, score))
        if best is None or score > best[0]:
            best = (score, c, m, lam0, V, sh, log_gap, source)
    score, c, m, lam0, V, sh, log_gap, source = best
    rep.C = c
    rep.sigma = sigma
    rep.V_bar = V
    rep.lambda_bar0 = lam0
    rep.lambda_bar1 = sh.lam1
    rep.min_rho_bar, rep.max_rho_bar = m.rho_bounds()
    rep.log_gap_bar = log_gap
    rep.gap_bar = math.exp(log_gap) if log_gap > -745 else 0.0
    rep.gap_bar_source = source
    rep.extra["C_candidates"] = len(tried)
    rep.extra["log_bound_by_C"] = [[float(a), float(b)] for a, b in tried] if len(tried) > 1 else []
    # V_bar makes lambda_bar >= lambda1_up by the eigenvalue shift bound; verify
    ok = sh.lam1 >= lam1_up * (1 - 1e-9) - 1e-12
    rep.flags["lambda_bar_ge_lambda1"] = bool(ok)
    rep.flags.update(check_conditions(m, 0.0, sh.lam1, lam1_up))
    rep.flags["gap_bar_positive"] = bool(math.isfinite(log_gap))
    if not ok:
        raise ConvergenceError("model eigenvalue fell below the lambda_1 bound",
                               {"lambda_bar": sh.lam1, "lambda1_upper": lam1_up})
    return m


# ------------------------------------------------------------------------------
# horoconvex pipeline
# ------------------------------------------------------------------------------

def savo_upper_bound(N: int, r: float) -> float:
    """Upper bound for the weighted first eigenvalue of a horoconvex domain.

    Savo's ball bound ``(N-1)^2/4 + pi^2/r^2 + (N^2-1) pi^4/(12 r^3)`` minus
    the conformal shift ``N(N-2)/4``, with ``r`` the inradius.
    """
    return 0.25 + math.pi ** 2 / r ** 2 + (N * N - 1) * math.pi ** 4 / (12 * r ** 3)


def horoconvex_gap_bound(N: int, D_H: float, C="auto", n: int = 2000,
                         n_grid: int = DEFAULT_C_GRID, D_E: Optional[float] = None) -> GapBoundReport:
    """Gap lower bound for horoconvex domains of hyperbolic diameter ``D_H``.

    Parameters
    ----------
    N : int
        Dimension, >= 2.
    D_H : float
        Hyperbolic diameter.
    C : float or "auto"
        Free constant of ``rho_bar = sigma s^2/2 + C``; ``"auto"`` maximises
        the bound over ``n_grid`` log-spaced values in ``[1e-2, 1e2] * max rho``.
    n : int
        Cells of the shooting mesh (Richardson uses ``n`` and ``2n``).
    D_E : float, optional
        Exact chart diameter.  Defaults to ``D_H/2``.
    """
    if N < 2:
        raise PreconditionError("N must be >= 2")
    if not D_H > 0:
        raise PreconditionError("D_H must be positive")
    rep = GapBoundReport("horoconvex", "quadratic-modulus", N,
                         inputs={"N": N, "D_H": D_H, "C": C, "n": n, "n_grid": n_grid})
    rep.D_H = D_H
    rep.D_E = D_H / 2 if D_E is None else float(D_E)
    rep.D = rep.D_E
    R_E, chain_ok = circumradius_RE(N, D_H)
    rep.R_E = R_E
    rep.flags["circumradius_chain"] = chain_ok
    q = one_minus_RE2(N, D_H)
    rep.max_rho = 4.0 / q ** 2
    sigma = rep.max_rho ** 2 * (1 + 5 * R_E ** 2)
    rep.r_in = inradius_from_diameter(D_H)
    rep.lambda1_upper = savo_upper_bound(N, rep.r_in)
    rep.lambda1_source = "inradius-ball-bound"
    _fill_model(rep, rep.D_E, sigma, rep.max_rho, rep.lambda1_upper, C, n, n_grid)
    return _finish(rep)


def _sweep_point(args):
    N, D_H, C, n = args
    try:
        return horoconvex_gap_bound(N, D_H, C=C, n=n)
    except (ConvergenceError, PreconditionError) as exc:
        rep = GapBoundReport("horoconvex", "failed", N, inputs={"N": N, "D_H": D_H, "C": C, "n": n})
        rep.D_H = D_H
        rep.flags["error"] = str(exc)
        rep.flags["positive"] = False
        return rep


def horoconvex_sweep(dims, diams, C="auto", n: int = 500, threads: Optional[int] = None) -> list:
    """:func:`horoconvex_gap_bound` over the grid ``dims x diams``, in row-major order.

    ``threads`` caps the worker processes (default: the ``GAPFORGE_THREADS``
    environment variable, else 1).  Results do not depend on the worker count.
    A point whose solve fails yields a report with branch ``"failed"``.
    """
    jobs = [(int(N), float(D), C, n) for N in dims for D in diams]
    if threads is None:
        threads = thread_cap()
    if threads <= 1 or len(jobs) < 2:
        return [_sweep_point(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as ex:
        return list(ex.map(_sweep_point, jobs, chunksize=max(1, len(jobs) // (4 * threads))))


def thread_cap() -> int:
    """Worker cap from ``GAPFORGE_THREADS`` (default 1; invalid values are ignored)."""
    import os
    try:
        return max(1, int(os.environ.get("GAPFORGE_THREADS", "1")))
    except ValueError:
        return 1


# ------------------------------------------------------------------------------
# closed-form evaluators (50-digit arithmetic)
# ------------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosedFormValue:
    """A positive number that may lie far outside double range.

    ``mp`` is the 50-digit value, ``log`` its natural log as a float and
    ``value`` the nearest double (``0.0`` on underflow).
    """

    mp: mpmath.mpf
    aux: dict = field(default_factory=dict)

    @property
    def log(self) -> float:
        return float(mpmath.log(self.mp))

    @property
    def value(self) -> float:
        return float(self.mp)

    def __str__(self):
        return mpmath.nstr(self.mp, 17)


_DPS = 50


def _dps_for(exponent) -> int:
    """Precision keeping 50 significant digits in ``exp(-x)`` for ``|x|`` up to ``exponent``."""
    return _DPS + 5 + max(0, int(mpmath.ceil(mpmath.log10(abs(exponent) + 1))))


def explicit_horoconvex_bound(N: int, D: float, C_N: float = 1.0) -> ClosedFormValue:
    """Explicit horoconvex gap bound and the Hessian quantity ``R(N, D)``.

    ``aux`` holds ``R`` (a 50-digit ``mpf``) and ``R_clamped``.
    """
    if N < 2 or not D > 0 or not C_N > 0:
        raise PreconditionError("need N >= 2, D > 0, C_N > 0")
    with mpmath.workdps(_DPS):
        # generous size of the exponent C_N sqrt(R)
        D_ = mpmath.mpf(D)
        est = C_N * 4 * N * (1 + mpmath.sinh(D_) ** 2) ** 2 * (1 + 1 / (-1 + mpmath.sqrt(D_ / 2 + 1)) ** 3)
    with mpmath.workdps(_dps_for(est)):
        N_ = mpmath.mpf(N)
        D_ = mpmath.mpf(D)
        pi2 = mpmath.pi ** 2
        a = 1 + 2 * N_ / (N_ + 1) * mpmath.sinh(D_) ** 2
        w = -1 + mpmath.sqrt(D_ / 2 + 1)
        lam = mpmath.mpf(1) / 4 + pi2 / w ** 4 + (N_ ** 2 - 1) * mpmath.pi ** 4 / (12 * w ** 6)
        R = -pi2 * min(mpmath.mpf(1), 4 / D_ ** 2) + 3 * min(mpmath.mpf(4), D_ ** 2) * a ** 4 * lam
        Rc = max(R, mpmath.mpf(0))
        val = pi2 / (min(mpmath.mpf(4), D_ ** 2 / 2) * a ** 2) \
            * mpmath.exp(-mpmath.mpf(C_N) * min(mpmath.mpf(1), D_ / 2) * mpmath.sqrt(Rc))
        return ClosedFormValue(+val, {"R": +R, "R_clamped": bool(R < 0), "C_N": C_N})


def asymptotic_horoconvex_bound(N: int, D: float) -> ClosedFormValue:
    """Large-diameter form ``pi^2 (N-1)^2 D^2/16 exp(-(N-1) D^2 (1 + 2 e^{2D})^2)``.

    ``aux['valid']`` is set when ``D >= 4N`` (the regime ``D >> N``).
    """
    if not D > 0:
        raise PreconditionError("D must be positive")
    with mpmath.workdps(_DPS):
        est = (N - 1) * mpmath.mpf(D) ** 2 * (1 + 2 * mpmath.exp(2 * mpmath.mpf(D))) ** 2
    with mpmath.workdps(_dps_for(est)):
        N_ = mpmath.mpf(N)
        D_ = mpmath.mpf(D)
        val = mpmath.pi ** 2 * (N_ - 1) ** 2 * D_ ** 2 / 16 \
            * mpmath.exp(-(N_ - 1) * D_ ** 2 * (1 + 2 * mpmath.exp(2 * D_)) ** 2)
        return ClosedFormValue(+val, {"valid": bool(D >= 4 * N and N > 2)})


# ------------------------------------------------------------------------------
# sampling helpers for domain-based pipelines
# ------------------------------------------------------------------------------

def sample_domain(dom: Domain, n: int = 41):
    """Grid points of the closed domain (tensor grid clipped to the domain, plus boundary)."""
    lo, hi = dom.bbox()
    axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dom.dim)
    pts = mesh[dom.contains(mesh)]
    if dom.dim == 2:
        pts = np.vstack([pts, dom.boundary_samples(8 * n)])
    elif dom.kind == "rectangle":
        pts = np.vstack([pts, dom.corner_points()])
    return pts


def euclidean_inradius(dom: Domain) -> float:
    if dom.kind == "rectangle":
        return float(dom.half_widths.min())
    if dom.kind == "ball":
        return dom.radius
    # Chebyshev centre of the polygon
    from scipy.optimize import linprog

    n, b = dom._halfplanes()
    A = np.column_stack([n, np.ones(len(n))])
    res = linprog([0, 0, -1], A_ub=A, b_ub=b, bounds=[(None, None)] * 2 + [(0, None)])
    return float(res.x[2])


def inscribed_ball_lambda1(N: int, r_in: float, min_rho: float) -> float:
    """``(j_{N/2-1,1} / r_in)^2 / min rho``: Dirichlet eigenvalue of the inscribed ball."""
    from scipy.special import jv
    from scipy.optimize import brentq

    nu = N / 2 - 1
    if float(nu).is_integer():
        j = float(jn_zeros(int(nu), 1)[0])
    else:
        j = brentq(lambda x: jv(nu, x), max(nu, 0.5), nu + 5.0)
    return (j / r_in) ** 2 / min_rho


def _osc_R(cf, N, pts):
    if N == 2:
        return 0.0
    R = scalar_curvature(cf, N, cf.base_space(N), pts)
    return float(np.max(R) - np.min(R))


def _lambda1_for(dom, cf, N, lam1_source, lam1_user, min_rho, h):
    if lam1_source == "user":
        if lam1_user is None:
            raise PreconditionError("lambda1_source='user' needs lambda1")
        return float(lam1_user), "user"
    if lam1_source == "computed":
        if N != 2 or dom.dim != 2:
            raise PreconditionError("computed lambda_1 is only available in 2D; "
                                    "pass lambda1_source='user' with a bound")
        from .eigsolve import solve_weighted_2d

        res = solve_weighted_2d(dom, cf.exp2phi, None, h=h)
        return float(res.best()[0]), "eigsolve"
    if lam1_source == "fallback":
        return inscribed_ball_lambda1(N, euclidean_inradius(dom), min_rho), "inscribed-ball-fallback"
    raise PreconditionError(f"unknown lambda1 source {lam1_source!r}")


def conformally_flat_bound(cf: ConformalFactor, dom: Domain, N: int, lambda1_source="fallback",
                           lambda1=None, C="auto", n: int = 2000, n_grid: int = DEFAULT_C_GRID,
                           samples: int = 41, h: float = 1 / 64) -> GapBoundReport:
    """Gap bound on a Euclidean-convex domain of ``(R^N, exp(2 phi) g_E)``.

    ``lambda1_source`` is ``"computed"`` (2D eigensolve of the weighted
    problem), ``"user"`` (value of ``lambda1``) or ``"fallback"`` (Dirichlet
    eigenvalue of the inscribed Euclidean ball divided by ``min rho``).
    """
    if dom.dim != N:
        raise PreconditionError("domain dimension does not match N")
    pts = sample_domain(dom, samples)
    rho = cf.exp2phi(pts)
    H = cf.hess_exp2phi(pts)
    sig = float(np.max(np.linalg.eigvalsh(H)[..., -1]))
    sigma = max(0.0, sig)
    D = euclidean_diameter(dom)
    rep = GapBoundReport("conformally-flat", "", N,
                         inputs={"factor": cf.kind, "domain": dom.describe(), "N": N,
                                 "lambda1_source": lambda1_source, "C": C})
    rep.D = rep.D_E = D
    rep.min_rho, rep.max_rho = float(rho.min()), float(rho.max())
    rep.sigma = sigma
    rep.osc_R = _osc_R(cf, N, pts)
    rep.correction = (N - 2) / (4 * (N - 1)) * rep.osc_R
    rep.extra["D_metric_upper"] = math.sqrt(rep.max_rho) * D
    rep.extra["largest_hessian_eigenvalue"] = sig
    if sigma <= 0.0:
        rep.branch = "concave"
        rep.C = rep.min_rho
        rep.V_bar = 0.0
        rep.min_rho_bar = rep.max_rho_bar = rep.min_rho
        g = 3 * math.pi ** 2 / (D * D * rep.min_rho)
        rep.gap_bar, rep.log_gap_bar, rep.gap_bar_source = g, math.log(g), "analytic-constant-weight"
        rep.flags["condition2"] = True
        rep.extra["literal_concave_formula"] = rep.min_rho / rep.max_rho * 3 * math.pi ** 2 / D ** 2 \
            - rep.correction
        return _finish(rep)
    rep.branch = "quadratic-modulus"
    lam1, src = _lambda1_for(dom, cf, N, lambda1_source, lambda1, rep.min_rho, h)
    rep.lambda1_upper, rep.lambda1_source = lam1, src
    _fill_model(rep, D, sigma, rep.max_rho, lam1, C, n, n_grid)
    return _finish(rep)


def s1xsn_modulus(N: int, dom: Domain, lambda1_source="fallback", lambda1=None, C=None,
                  n: int = 2000, n_grid: int = DEFAULT_C_GRID, samples: int = 41,
                  h: float = 1 / 64) -> GapBoundReport:
    """Bound for domains in ``R^N \\ {0}`` with ``rho = 1/r^2`` (the S^1 x S^{N-1} cover).

    ``sigma = 6 / (inf r)^4`` and by default ``C = inf 1/r^2``.  The scalar
    curvature is constant so there is no oscillation term.
    """
    if dom.dim != N:
        raise PreconditionError("domain dimension does not match N")
    pts = sample_domain(dom, samples)
    r = np.linalg.norm(pts, axis=1)
    if dom.contains(np.zeros(N)) or r.min() <= 0:
        raise PreconditionError("domain touches the puncture at the origin")
    rmin = float(r.min())
    rmax = float(r.max())
    cf = ConformalFactor.inverse_square()
    rep = GapBoundReport("s1xsn", "quadratic-modulus", N,
                         inputs={"domain": dom.describe(), "N": N, "lambda1_source": lambda1_source,
                                 "C": C})
    rep.D = rep.D_E = euclidean_diameter(dom)
    rep.min_rho, rep.max_rho = 1 / rmax ** 2, 1 / rmin ** 2
    rep.osc_R = 0.0
    sigma = 6 / rmin ** 4
    lam1, src = _lambda1_for(dom, cf, N, lambda1_source, lambda1, rep.min_rho, h)
    rep.lambda1_upper, rep.lambda1_source = lam1, src
    _fill_model(rep, rep.D, sigma, rep.max_rho, lam1, rep.min_rho if C is None else C, n, n_grid)
    return _finish(rep)


def sphere_deformation_bound(cf: ConformalFactor, dom: Domain, N: int, K: float,
                             small_horoconvex: bool = False, R_grid=None,
                             samples: int = 41) -> GapBoundReport:
    """Gap bound for conformal deformations of the round sphere of curvature K.

    With ``small_horoconvex`` the factor is the hyperbolic-over-sphere factor
    of radius ``R = 1/sqrt(K)`` and R is searched over ``R_grid`` for the
    first admissible value with the best bound; ``cf`` and ``K`` are then
    ignored.
    """
    if small_horoconvex:
        grid = np.linspace(0.05, 0.95, 19) if R_grid is None else np.asarray(R_grid, float)
        best = None
        attempts = []
        for R in grid:
            try:
                rep = sphere_deformation_bound(ConformalFactor.sphere_stereo(R), dom, N, 1 / R ** 2,
                                               samples=samples)
            except PreconditionError:
                continue
            attempts.append([float(R), rep.bound])
            if rep.bound is not None and (best is None or rep.bound > best.bound):
                best = rep
        if best is None:
            rep = GapBoundReport("sphere-deformation", "small-horoconvex", N,
                                 inputs={"domain": dom.describe(), "N": N})
            rep.flags.update(side_conditions=False, positive=False)
            rep.extra["R_attempts"] = attempts
            return rep
        best.branch = "small-horoconvex"
        best.extra["R_attempts"] = attempts
        return best

    if cf.base_K <= 0 or abs(cf.base_K - K) > 1e-12 * K:
        raise PreconditionError("factor must be based on the sphere of curvature K")
    rep = GapBoundReport("sphere-deformation", "theorem", N,
                         inputs={"factor": cf.kind, "R": cf.R, "K": K, "domain": dom.describe(), "N": N})
    if dom.chart not in ("sphere-stereographic", "poincare-disk"):
        raise PreconditionError("domain must be given in the stereographic chart")
    chart_dom = dom if dom.chart == "sphere-stereographic" else \
        Domain(dom.kind, "sphere-stereographic", dom.center, dom.half_widths, dom.radius, dom.vertices)
    pts = sample_domain(dom, samples)
    if cf.kind == "sphere-stereo-radius-R" and np.any(np.linalg.norm(pts, axis=1) >= cf.R):
        raise PreconditionError("domain must lie in the ball of radius R")
    rho = cf.exp2phi(pts)
    base = ConformalFactor.sphere_chart(K)
    eigs = np.array([metric_hessian_eigs(base, lambda p: cf.grad_exp2phi(p), lambda p: cf.hess_exp2phi(p), p)[-1]
                     for p in pts])
    sigma = max(0.0, float(eigs.max()))
    D = sphere_diameter(chart_dom, K)
    min_rho, max_rho = float(rho.min()), float(rho.max())
    C = min_rho - sigma * D * D / 8
    rep.D, rep.sigma, rep.min_rho, rep.max_rho, rep.C = D, sigma, min_rho, max_rho, C
    rep.extra["D_metric_upper"] = math.sqrt(max_rho) * D
    if C <= 0:
        rep.flags.update(side_conditions=False, C_positive=False, positive=False)
        return rep
    m = Modulus1D.quadratic(D, sigma=sigma, C=C)
    s = np.linspace(0.0, D / 2, 401)
    if math.sqrt(K) * D / 2 >= math.pi / 2:
        rep.flags.update(side_conditions=False, positive=False)
        return rep
    c1 = bool(m.rho_bounds()[1] <= min_rho * (1 + 1e-12))
    c2 = bool(np.all(m.rho_prime(s) <= 2 * tn_K(K, s) * m.rho(s) + 1e-12))
    rep.min_rho_bar, rep.max_rho_bar = m.rho_bounds()
    rep.flags.update(C_positive=True, rho_bar_le_min_rho=c1, rho_bar_prime_le_2tn_rho_bar=c2,
                     side_conditions=c1 and c2)
    if not (c1 and c2):
        rep.flags["positive"] = False
        return rep
    rep.osc_R = 0.0 if N == 2 else float(np.ptp(scalar_curvature(cf, N, cf.base_space(N), pts)))
    osc_inv = float(np.ptp(1 / rho))
    rep.correction = (N - 2) / (4 * (N - 1)) * rep.osc_R + N * (N - 2) / 4 * osc_inv
    rep.extra["osc_inverse_rho"] = osc_inv
    lead = C ** 3 / (min_rho * max_rho ** 2) * 3 * math.pi ** 2 / D ** 2
    rep.bound = lead - rep.correction
    rep.log_bound = math.log(rep.bound) if rep.bound > 0 else None
    Dg = rep.extra["D_metric_upper"]
    rep.extra["bound_with_metric_diameter"] = C ** 3 / (min_rho * max_rho ** 2) * 3 * math.pi ** 2 / Dg ** 2 \
        - rep.correction
    rep.flags["positive"] = rep.bound > 0
    rep.gap_bar_source = "theorem-formula"
    return rep
