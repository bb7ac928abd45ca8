"""Finite-difference solver for ``-Lap u + V u = lam rho u`` on 2D chart domains.

The grid is uniform with spacing ``h`` and anchored at the lower corner of
the domain's bounding box, so rectangles are exactly grid aligned and the
five-point operator is symmetric.  Curved or slanted boundaries use
Shortley-Weller arms (the distance to the boundary along each grid line),
which keeps second-order accuracy but makes the matrix non-symmetric.
Both cases are solved by ARPACK in shift-invert mode with a shift below
the spectrum.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import RectBivariateSpline

from .domains import Domain
from .errors import ConvergenceError, PreconditionError
from .geometry import tn_K


@dataclass
class EigenResult2D:
    """Two lowest eigenpairs on the finest grid plus extrapolated eigenvalues.

    ``u1`` and ``u2`` hold interior-node values normalised so that
    ``h^2 sum rho u^2 = 1``; ``u1 > 0``.
    """

    domain: Domain
    h: float
    x: np.ndarray
    y: np.ndarray
    interior: np.ndarray          # (n_int, 2) integer grid indices
    points: np.ndarray            # (n_int, 2) coordinates
    lam1: float
    lam2: float
    lam1_rich: Optional[float]
    lam2_rich: Optional[float]
    u1: np.ndarray
    u2: np.ndarray
    residuals: tuple
    boundary: str
    levels: dict = field(default_factory=dict)
    rho_values: Optional[np.ndarray] = None
    V_values: Optional[np.ndarray] = None

    @property
    def gap(self) -> float:
        return self.lam2 - self.lam1

    @property
    def gap_rich(self) -> Optional[float]:
        if self.lam1_rich is None:
            return None
        return self.lam2_rich - self.lam1_rich

    def best(self):
        """``(lam1, lam2, gap)``, extrapolated when available."""
        if self.lam1_rich is not None:
            return self.lam1_rich, self.lam2_rich, self.gap_rich
        return self.lam1, self.lam2, self.gap

    def grid_values(self, which: int = 1) -> np.ndarray:
        """Eigenfunction on the full tensor grid, zero off the interior nodes."""
        U = np.zeros((len(self.x), len(self.y)))
        U[self.interior[:, 0], self.interior[:, 1]] = self.u1 if which == 1 else self.u2
        return U

    def interpolator(self, which: int = 1) -> RectBivariateSpline:
        """Bicubic interpolant of ``u1`` or ``u2``; differentiate it for gradients."""
        return RectBivariateSpline(self.x, self.y, self.grid_values(which), kx=3, ky=3, s=0)

    def to_csv(self, path) -> None:
        """Write ``x, y, u1, u2`` rows for the interior nodes."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "u1", "u2"])
            for (px, py), a, b in zip(self.points, self.u1, self.u2):
                w.writerow([repr(float(px)), repr(float(py)), repr(float(a)), repr(float(b))])


def _field(f, pts, default):
    if f is None:
        return np.full(len(pts), default)
    if callable(f):
        return np.asarray(f(pts), dtype=float).reshape(len(pts))
    return np.full(len(pts), float(f))


def _grid(dom: Domain, h: float):
    lo, hi = dom.bbox()
    n = np.floor((hi - lo) / h + 1e-9).astype(int)
    x = lo[0] + h * np.arange(n[0] + 1)
    y = lo[1] + h * np.arange(n[1] + 1)
    aligned = dom.kind == "rectangle" and np.allclose(lo + n * h, hi, rtol=0, atol=1e-10 * h)
    return x, y, aligned


def _assemble(dom: Domain, h: float, rho, V):
    """Sparse operator ``A`` (Laplacian plus V), weights, and grid bookkeeping."""
    x, y, aligned = _grid(dom, h)
    X, Y = np.meshgrid(x, y, indexing="ij")
    P = np.column_stack([X.ravel(), Y.ravel()])
    tol = 1e-10 * h
    inside = dom.signed_distance_lower(P) > tol
    idx = -np.ones(P.shape[0], dtype=np.int64)
    n_int = int(inside.sum())
    idx[inside] = np.arange(n_int)
    idx = idx.reshape(X.shape)
    I, J = np.nonzero(idx >= 0)
    order = np.argsort(idx[I, J])
    I, J = I[order], J[order]
    pts = np.column_stack([x[I], y[J]])

    rows, cols, vals = [], [], []
    diag = np.zeros(n_int)
    for axis, (di, dj) in enumerate(((1, 0), (0, 1))):
        arms = []
        for sgn in (1, -1):
            ii, jj = I + sgn * di, J + sgn * dj
            ok = (ii >= 0) & (ii < len(x)) & (jj >= 0) & (jj < len(y))
            nb = np.full(n_int, -1, dtype=np.int64)
            nb[ok] = idx[ii[ok], jj[ok]]
            arm = np.full(n_int, h)
            out = nb < 0
            if np.any(out):
                arm[out] = np.minimum(dom.ray_exit(pts[out], axis, sgn), h)
            arm = np.maximum(arm, 1e-3 * h)   # nodes hugging the boundary
            arms.append((nb, arm))
        (nbp, ap), (nbm, am) = arms
        # Shortley-Weller: -u'' ~ 2/(ap+am) [ (u0-up)/ap + (u0-um)/am ]
        c = 2.0 / (ap + am)
        diag += c * (1 / ap + 1 / am)
        for nb, a in ((nbp, ap), (nbm, am)):
            m = nb >= 0
            rows.append(np.arange(n_int)[m])
            cols.append(nb[m])
            vals.append(-(c / a)[m])
    rw = _field(rho, pts, 1.0)
    if np.any(rw <= 0):
        raise PreconditionError("rho must be positive on the domain")
    Vv = _field(V, pts, 0.0)
    rows.append(np.arange(n_int))
    cols.append(np.arange(n_int))
    vals.append(diag + Vv)
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n_int, n_int))
    return A, rw, Vv, x, y, np.column_stack([I, J]), pts, aligned


def _solve_level(dom, h, rho, V, k=2):
    A, rw, Vv, x, y, interior, pts, aligned = _assemble(dom, h, rho, V)
    n = A.shape[0]
    if n < k + 2:
        raise PreconditionError("grid too coarse for this domain")
    shift = float(np.min(Vv / rw)) - 1.0
    if aligned:
        s = 1 / np.sqrt(rw)
        S = sp.diags(s) @ A @ sp.diags(s)
        S = (S + S.T) * 0.5
        w, Z = spla.eigsh(S.tocsc(), k=k, sigma=shift, which="LM", tol=1e-13)
        U = Z * s[:, None]
    else:
        C = sp.diags(1 / rw) @ A
        w, U = spla.eigs(C.tocsc(), k=k, sigma=shift, which="LM", tol=1e-13)
        if np.max(np.abs(w.imag)) > 1e-8 * np.max(np.abs(w.real)):
            raise ConvergenceError("complex eigenvalues from the Shortley-Weller operator",
                                   {"eigenvalues": w.tolist()})
        w, U = w.real, U.real
    order = np.argsort(w)
    w, U = w[order], U[:, order]
    for j in range(k):
        nrm = math.sqrt(h * h * np.sum(rw * U[:, j] ** 2))
        U[:, j] /= nrm
        if U[np.argmax(np.abs(U[:, j])), j] < 0:
            U[:, j] *= -1
    res = tuple(float(np.linalg.norm(A @ U[:, j] - w[j] * rw * U[:, j])
                      / (abs(w[j]) * np.linalg.norm(rw * U[:, j]))) for j in range(k))
    return w, U, res, x, y, interior, pts, aligned, rw, Vv


def solve_weighted_2d(dom: Domain, rho=None, V=None, h: float = 1 / 64,
                      extrapolate: bool = True) -> EigenResult2D:
    """Two lowest eigenpairs of ``-Lap u + V u = lam rho u`` with Dirichlet data.

    Parameters
    ----------
    dom : Domain
        Convex 2D domain (chart coordinates).
    rho, V : callable, float or None
        Weight (default 1) and potential (default 0); callables take an
        ``(n, 2)`` array of points.
    h : float
        Grid spacing of the coarse level.  With ``extrapolate`` the grid
        ``h/2`` is solved as well and the eigenvalues are combined as
        ``(4 lam(h/2) - lam(h)) / 3``.

    Raises
    ------
    PreconditionError
        If fewer than 10 nodes fit across the narrowest width.
    ConvergenceError
        If the invariants ``lam1 < lam2``, ``u1 > 0`` or the residual check fail.
    """
    if dom.dim != 2:
        raise PreconditionError("the 2D solver needs a 2D domain")
    if dom.min_width() / h < 10:
        raise PreconditionError(f"grid too coarse: fewer than 10 nodes across the domain (h={h})")
    hs = [h, h / 2] if extrapolate else [h]
    levels = {}
    out = None
    for hk in hs:
        out = _solve_level(dom, hk, rho, V)
        levels[hk] = (float(out[0][0]), float(out[0][1]))
    w, U, res, x, y, interior, pts, aligned, rw, Vv = out
    u1 = U[:, 0]
    interior_u = u1[dom.signed_distance_lower(pts) > 1.5 * hs[-1]]
    if not (w[0] < w[1]) or np.any(interior_u <= 0):
        raise ConvergenceError("eigen-invariants violated", {"lam": w.tolist()})
    if max(res) > 1e-8:
        raise ConvergenceError("residual check failed", {"residuals": res})
    u1 = np.maximum(u1, 0.0)
    if extrapolate:
        (a1, a2), (b1, b2) = levels[hs[0]], levels[hs[1]]
        l1r, l2r = (4 * b1 - a1) / 3, (4 * b2 - a2) / 3
    else:
        l1r = l2r = None
    return EigenResult2D(dom, hs[-1], x, y, interior, pts, float(w[0]), float(w[1]), l1r, l2r,
                         u1, U[:, 1].copy(), res, "aligned" if aligned else "shortley-weller",
                         {str(k): v for k, v in levels.items()}, rw, Vv)


def poincare_weight(p):
    """``rho = 4 / (1 - |x|^2)^2``, the disk-model conformal weight."""
    p = np.asarray(p, dtype=float)
    return 4.0 / (1.0 - np.sum(p * p, axis=-1)) ** 2


def hyperbolic_ball_gap(R_E: float, h: Optional[float] = None, extrapolate: bool = True,
                        return_result: bool = False):
    """``(lam1, lam2, gap)`` of the hyperbolic disk with chart radius ``R_E`` (N = 2).

    In two dimensions the hyperbolic Laplacian is the weighted Euclidean
    problem with ``rho = 4/(1-r^2)^2`` and no potential.
    """
    if not 0 < R_E < 1:
        raise PreconditionError("chart radius must lie in (0, 1)")
    if h is None:
        h = 2 * R_E / 64
    res = solve_weighted_2d(Domain.ball([0.0, 0.0], R_E, chart="poincare-disk"), poincare_weight, None, h,
                            extrapolate=extrapolate)
    out = res.best()
    return (out, res) if return_result else out


# ------------------------------------------------------------------------------
# log-concavity audit
# ------------------------------------------------------------------------------

@dataclass
class AuditResult:
    max_violation: float      # max of F - bound (<= 0 means no violation)
    n_pairs: int
    n_violations: int
    tol: float
    worst_pair: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return self.n_violations == 0


def log_concavity_audit(res: EigenResult2D, modulus, K: float = 0.0, pairs: int = 10_000,
                        N: int = 2, margin: float = 3.0, tol: float = 1e-4, seed: int = 0,
                        min_sep: float = 4.0) -> AuditResult:
    """Check ``F_{grad v}(x, y) <= 2 psi_bar(d/2) + (N-1) tn_K(d/2)`` for ``v = log u1``.

    ``modulus`` is any object with ``psi_at(s)`` (e.g. a
    :class:`~gapforge.model1d.ShotSpectrum`).  Pairs are drawn uniformly
    among interior points at distance at least ``margin*h`` from the
    boundary and at least ``min_sep*h`` apart; distances are Euclidean in
    the chart (the flat connection of the weighted problem).
    """
    rng = np.random.default_rng(seed)
    dom = res.domain
    h = res.h
    spl = res.interpolator(1)
    lo, hi = dom.bbox()
    Xs, Ys = [], []
    got = 0
    while got < pairs:
        q = lo + (hi - lo) * rng.random((8 * pairs, 2))
        q = q[dom.signed_distance_lower(q) >= margin * h]
        k = len(q) // 2
        A, B = q[:k], q[k:2 * k]
        keep = np.linalg.norm(B - A, axis=1) >= min_sep * h
        Xs.append(A[keep])
        Ys.append(B[keep])
        got += int(keep.sum())
    X = np.vstack(Xs)[:pairs]
    Y = np.vstack(Ys)[:pairs]
    d = np.linalg.norm(Y - X, axis=1)
    e = (Y - X) / d[:, None]

    def grad_log(P):
        u = spl.ev(P[:, 0], P[:, 1])
        gx = spl.ev(P[:, 0], P[:, 1], dx=1)
        gy = spl.ev(P[:, 0], P[:, 1], dy=1)
        return np.column_stack([gx, gy]) / u[:, None]

    F = np.sum(grad_log(Y) * e, axis=1) - np.sum(grad_log(X) * e, axis=1)
    bound = 2 * np.asarray(modulus.psi_at(d / 2)) + (N - 1) * (tn_K(K, d / 2) if K > 0 else 0.0)
    slack = F - bound
    worst = int(np.argmax(slack))
    return AuditResult(float(slack[worst]), int(len(d)), int(np.sum(slack > tol)), tol,
                       (X[worst].tolist(), Y[worst].tolist()))


# ------------------------------------------------------------------------------
# Neumann-type equation for w = u2/u1
# ------------------------------------------------------------------------------

def ratio_equation_residual(res: EigenResult2D, collar: float = 3.0,
                            collar_abs: Optional[float] = None) -> float:
    """Max interior residual of ``Lap w + 2 grad log u1 . grad w + gap rho w = 0``.

    ``w = u2/u1``.  Derivatives are central differences on the grid and
    only nodes at least ``collar*h`` (or ``collar_abs``) inside the domain
    enter.  The value is relative to ``gap * max |rho w|`` over the same
    nodes.
    """
    h = res.h
    depth = collar * h if collar_abs is None else collar_abs
    U1, U2 = res.grid_values(1), res.grid_values(2)
    R = np.zeros_like(U1)
    R[res.interior[:, 0], res.interior[:, 1]] = res.rho_values
    X, Y = np.meshgrid(res.x, res.y, indexing="ij")
    P = np.column_stack([X.ravel(), Y.ravel()])
    deep = (res.domain.signed_distance_lower(P) >= depth).reshape(X.shape)[1:-1, 1:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        W = U2 / U1
        L1 = np.log(U1)
    c = (slice(1, -1), slice(1, -1))
    lap = (W[2:, 1:-1] + W[:-2, 1:-1] + W[1:-1, 2:] + W[1:-1, :-2] - 4 * W[c]) / h ** 2
    wx = (W[2:, 1:-1] - W[:-2, 1:-1]) / (2 * h)
    wy = (W[1:-1, 2:] - W[1:-1, :-2]) / (2 * h)
    lx = (L1[2:, 1:-1] - L1[:-2, 1:-1]) / (2 * h)
    ly = (L1[1:-1, 2:] - L1[1:-1, :-2]) / (2 * h)
    rw = R[c] * W[c]
    r = lap + 2 * (lx * wx + ly * wy) + res.gap * rw
    return float(np.max(np.abs(r[deep])) / (res.gap * np.max(np.abs(rw[deep]))))


# ------------------------------------------------------------------------------
# appendix rectangles
# ------------------------------------------------------------------------------

def height_bounds(L: float, r: float) -> dict:
    """Hyperbolic heights of the collapsing rectangle ``[-L, L] x [-r, r]``.

    The vertical hyperbolic distance across the rectangle at abscissa ``x``
    is ``2 arcsinh(2r / (1 - x^2 - r^2))``.  ``side`` is its minimum over
    ``L/2 <= |x| <= L`` and ``neck`` its maximum over ``|x| <= L/4``.
    ``side_literal`` is the shorter expression ``arcsinh(r/(4-L^2-4r^2))``,
    without the factor 8 inside the arcsinh and the overall factor 2; it is
    kept only so the two forms can be compared.
    """
    side = 2 * math.asinh(8 * r / (4 - L * L - 4 * r * r))
    neck = 2 * math.asinh(32 * r / (16 - L * L - 16 * r * r))
    side_literal = math.asinh(r / (4 - L * L - 4 * r * r))
    neck_literal = math.asinh(32 * r / (16 - L * L - 16 * r * r))
    return {"side": side, "neck": neck, "ratio": side / neck,
            "side_literal": side_literal, "neck_literal": neck_literal,
            "ratio_literal": side_literal / neck_literal,
            "ratio_limit": (16 - L * L) / (16 - 4 * L * L)}


# ------------------------------------------------------------------------------
# gaps far below double resolution on x-symmetric rectangles
# ------------------------------------------------------------------------------

@dataclass
class SymmetricGap:
    """Gap of an x-symmetric rectangle computed from the discrete Green identity."""

    lam_even: float
    lam_odd: float
    log_gap: float
    h: float
    match_column: int
    levels: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return math.exp(self.log_gap) if self.log_gap > -745 else 0.0


def _blocks(L, r, rho, h):
    n = int(round(L / h))
    ny = int(round(2 * r / h)) - 1
    if abs(n * h - L) > 1e-9 * h or abs((ny + 1) * h - 2 * r) > 1e-9 * h:
        raise PreconditionError("h must divide both L and 2r")
    if ny < 9:
        raise PreconditionError("grid too coarse: fewer than 10 nodes across the domain")
    xs = h * np.arange(n)                       # columns 0..n-1 (column n is the boundary)
    ys = -r + h * np.arange(1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    R = _field(rho, np.column_stack([X.ravel(), Y.ravel()]), 1.0).reshape(X.shape)
    Ty = 4 * np.eye(ny) - np.eye(ny, k=1) - np.eye(ny, k=-1)
    return xs, ys, R, Ty


def _chol_inv(M):
    """Inverse of a symmetric positive definite block (raises if not definite)."""
    c = np.linalg.cholesky(M)
    ci = np.linalg.inv(c)
    return ci.T @ ci


def _sweeps(lam, R, Ty, h, j, parity):
    """Forward pivots from the centre up to column j and backward pivots down to j+1."""
    m = R.shape[0] - 1
    D = lambda i: Ty - lam * h * h * np.diag(R[i])
    start = 0 if parity == "even" else 1
    Pinv = {}
    P = D(start) / 2 if parity == "even" else D(start)
    for i in range(start, j):
        Pinv[i] = _chol_inv(P)
        P = D(i + 1) - Pinv[i]
    Qinv = {}
    Q = D(m)
    for i in range(m, j + 1, -1):
        Qinv[i] = _chol_inv(Q)
        Q = D(i - 1) - Qinv[i]
    Qinv[j + 1] = _chol_inv(Q)
    Z = P - Qinv[j + 1]
    return Z, Pinv, Qinv, start


def _interface_min(lam, R, Ty, h, j, parity):
    Z = _sweeps(lam, R, Ty, h, j, parity)[0]
    return float(np.linalg.eigvalsh((Z + Z.T) / 2)[0])


def _logvec_solution(lam, R, Ty, h, j, parity):
    Z, Pinv, Qinv, start = _sweeps(lam, R, Ty, h, j, parity)
    w, V = np.linalg.eigh((Z + Z.T) / 2)
    v = V[:, 0]
    if v.sum() < 0:
        v = -v
    m = R.shape[0] - 1
    units = {j: v}
    logs = {j: 0.0}
    for i in range(j - 1, start - 1, -1):
        z = Pinv[i] @ units[i + 1]
        nz = np.linalg.norm(z)
        units[i], logs[i] = z / nz, logs[i + 1] + math.log(nz)
    for i in range(j + 1, m + 1):
        z = Qinv[i] @ units[i - 1]
        nz = np.linalg.norm(z)
        units[i], logs[i] = z / nz, logs[i - 1] + math.log(nz)
    return units, logs


def _bracket_root(f, lam0, rel=1e-7):
    from scipy.optimize import brentq

    d = rel * abs(lam0)
    lo, hi = lam0 - d, lam0 + d
    for _ in range(60):
        flo, fhi = f(lo), f(hi)
        if flo > 0 > fhi:
            return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
        if flo <= 0:
            lo -= d
        if fhi >= 0:
            hi += d
        d *= 2
    raise ConvergenceError("could not bracket the interface eigenvalue", {"lam0": lam0})


def _sym_gap_level(L, r, rho, h):
    xs, ys, R, Ty = _blocks(L, r, rho, h)
    dom = Domain.rectangle([0.0, 0.0], [L, r])
    ref = _solve_level(dom, h, rho, None)
    lam0 = float(ref[0][0])
    pts, u1 = ref[6], ref[1][:, 0]
    right = pts[:, 0] > 0
    xpk = pts[right][np.argmax(np.abs(u1[right])), 0]
    j = int(round(xpk / h))
    j = min(max(j, 2), R.shape[0] - 2)
    lams, sols = {}, {}
    for parity in ("even", "odd"):
        f = lambda lam, p=parity: _interface_min(lam, R, Ty, h, j, p)
        lams[parity] = _bracket_root(f, lam0)
        sols[parity] = _logvec_solution(lams[parity], R, Ty, h, j, parity)
    (uu, lu), (wu, lw) = sols["even"], sols["odd"]
    m = R.shape[0] - 1
    num = lu[0] + lw[1] + math.log(float(uu[0] @ wu[1]))
    terms = np.array([lu[i] + lw[i] for i in range(1, m + 1)])
    dots = np.array([float(np.sum(R[i] * uu[i] * wu[i])) for i in range(1, m + 1)])
    if np.any(dots <= 0):
        raise ConvergenceError("even and odd solutions disagree in sign on the half domain", {})
    top = terms.max()
    den = 2 * math.log(h) + top + math.log(float(np.sum(dots * np.exp(terms - top))))
    return lams["even"], lams["odd"], num - den, j


def symmetric_rectangle_gap(L: float, r: float, rho, h: float, extrapolate: bool = True) -> SymmetricGap:
    """Gap of ``-Lap u = lam rho u`` on ``[-L, L] x [-r, r]`` for ``rho`` even in x.

    The first eigenfunction is even in ``x`` and the second odd, and on
    collapsing rectangles they differ by an amount far below the resolution
    of double-precision eigenvalues.  Both are computed at their own
    eigenvalue by block elimination (from the centre outwards and from the
    Dirichlet end inwards, matched at the column where ``u1`` peaks, so both
    partial problems are positive definite) and back substitution in
    log scale.  The gap then follows from the exact discrete identity::

        gap = <u_0, w_1> / (h^2 sum_{i >= 1} <rho_i u_i, w_i>)

    with ``u`` even, ``w`` odd and column 0 on the symmetry axis.
    """
    hs = [h, h / 2] if extrapolate else [h]
    levels = {}
    for hk in hs:
        levels[hk] = _sym_gap_level(L, r, rho, hk)
    le, lo, lg, j = levels[hs[-1]]
    if extrapolate:
        lg = (4 * levels[hs[1]][2] - levels[hs[0]][2]) / 3
        le = (4 * levels[hs[1]][0] - levels[hs[0]][0]) / 3
        lo = (4 * levels[hs[1]][1] - levels[hs[0]][1]) / 3
    return SymmetricGap(le, lo, lg, hs[-1], j, {str(k): v[:3] for k, v in levels.items()})


@dataclass
class CollapseRow:
    r: float
    h: float
    lam1: float
    gap: float
    log_gap: float
    control_gap: float
    heights: dict


def euclidean_rectangle_gap(L: float, r: float) -> float:
    """Exact Dirichlet gap of ``[-L, L] x [-r, r]`` with ``rho = 1``."""
    # lam_jk = pi^2 (j^2/(2L)^2 + k^2/(2r)^2); the gap is the cheaper of j=2 or k=2
    return 3 * math.pi ** 2 / (4 * max(L, r) ** 2)


def appendix_collapse(L: float = 0.8, r_list=(0.2, 0.1, 0.05, 0.025), cells: int = 16,
                      extrapolate: bool = True):
    """Weighted gaps of the collapsing disk-model rectangles ``[-L, L] x [-r, r]``.

    Each rectangle is solved with ``h = 2r / cells`` (and ``h/2`` when
    extrapolating) using :func:`symmetric_rectangle_gap`.  The control
    column is the exact gap for ``rho = 1``.
    """
    if not 0 < L < 1:
        raise PreconditionError("L must lie in (0, 1)")
    rows = []
    for r in r_list:
        if not r > 0 or L * L + r * r >= 1:
            raise PreconditionError(f"rectangle with r={r} leaves the unit disk")
        h = 2 * r / cells
        g = symmetric_rectangle_gap(L, r, poincare_weight, h, extrapolate)
        rows.append(CollapseRow(float(r), h, g.lam_even, g.gap, g.log_gap,
                                euclidean_rectangle_gap(L, r), height_bounds(L, r)))
    return rows
