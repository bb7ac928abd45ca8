"""Mirror-coupled diffusions and Monte Carlo audits of the half-distance process.

Both particles follow ``dX = sqrt(2) dB + 2 grad v(X) dt`` (plus the optional
attraction ``2 alpha tn_K(xi) gamma'``), realised on the model space by a
geodesic Euler-Maruyama step.  The noise of ``Y`` is the mirror image of the
noise of ``X``: parallel transport along the connecting geodesic followed by
reflection of the geodesic direction.  On constant-curvature spaces the
transport is explicit, so no frame bundle is needed.

On the sphere the tangent noise is the orthogonal projection of an ambient
Gaussian in ``R^{N+1}``, which is a standard Gaussian on ``T_X``.

Random numbers come from counter-based streams (numpy's Philox) keyed by
the master seed, the step and the sub-step, and indexed by trajectory, so
trajectory ``i`` sees the same noise however the active set evolves.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .domains import Domain
from .errors import PreconditionError
from .geometry import SpaceForm, tn_K

MAX_HALVINGS = 12


@dataclass
class DiffusionConfig:
    """Parameters of a coupled simulation.

    ``grad_v`` maps an ``(M, n)`` array of model points to model vectors
    (projected onto the tangent space automatically on the sphere);
    ``None`` means ``v = 0``.  ``x0`` and ``y0`` are chart points, either a
    single point or one per trajectory.
    """

    space: SpaceForm
    domain: Domain
    x0: np.ndarray
    y0: np.ndarray
    grad_v: Optional[Callable] = None
    alpha: int = 0
    dt: float = 1e-3
    T_max: float = 1.0
    M: int = 1000
    seed: int = 0
    eps_couple: Optional[float] = None
    max_halvings: int = MAX_HALVINGS
    checkpoints: Sequence[float] = ()
    record_increments: bool = False
    track_merged: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise PreconditionError("dt must be positive")
        if self.alpha not in (0, 1):
            raise PreconditionError("alpha must be 0 or 1")
        floor = 2 * math.sqrt(2 * self.dt)
        if self.eps_couple is None:
            self.eps_couple = floor
        elif self.eps_couple < floor * (1 - 1e-12):
            raise PreconditionError(f"eps_couple must be at least 2 sqrt(2 dt) = {floor:.3g}")
        self.x0 = np.asarray(self.x0, dtype=float)
        self.y0 = np.asarray(self.y0, dtype=float)

    @property
    def n_steps(self) -> int:
        return int(round(self.T_max / self.dt))


@dataclass
class TrajectoryStats:
    """Outcome of :func:`simulate_coupled`.

    ``tau`` is the coupling time (``T_max`` when censored); ``xi_at`` holds
    the half-distance at each checkpoint (``nan`` for excluded trajectories).
    """

    tau: np.ndarray
    censored: np.ndarray
    excluded: np.ndarray
    checkpoints: np.ndarray
    xi_at: np.ndarray
    xi0: np.ndarray
    inc_xi: np.ndarray
    inc_dxi: np.ndarray
    inc_F: np.ndarray
    substeps: int
    exits_rejected: int
    dt: float
    merged_separations: float = 0.0
    merged_exits: int = 0

    @property
    def n_excluded(self) -> int:
        return int(self.excluded.sum())

    @property
    def coupled_fraction(self) -> float:
        ok = ~self.excluded
        return float(np.mean(~self.censored[ok])) if ok.any() else float("nan")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trajectory", "tau", "censored", "excluded"])
            for i, (t, c, e) in enumerate(zip(self.tau, self.censored, self.excluded)):
                w.writerow([i, repr(float(t)), int(c), int(e)])


# ------------------------------------------------------------------------------
# noise
# ------------------------------------------------------------------------------

def noise_block(seed: int, step: int, sub: int, M: int, dim: int) -> np.ndarray:
    """Standard normals of shape ``(M, dim)``; row ``i`` belongs to trajectory ``i``."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, (step << 14) | sub], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key)).standard_normal((M, dim))


# ------------------------------------------------------------------------------
# drift fields
# ------------------------------------------------------------------------------

def eigen_drift(res, band: float = 2.0) -> Callable:
    """``grad log u1`` from a 2D eigen-solve, usable as ``DiffusionConfig.grad_v``.

    Away from the boundary the bicubic interpolant of ``u1`` is
    differentiated.  Within ``band * h`` of the boundary, where the
    interpolant loses relative accuracy, the leading Dirichlet asymptotics
    ``u1 ~ c dist`` are used instead: ``grad log u1 ~ grad dist / dist``.
    """
    spl = res.interpolator(1)
    dom = res.domain
    h = res.h
    eps = 1e-7

    def grad(P):
        P = np.asarray(P, dtype=float)
        dist = dom.signed_distance_lower(P)
        out = np.empty_like(P)
        far = dist >= band * h
        if far.any():
            q = P[far]
            u = spl.ev(q[:, 0], q[:, 1])
            out[far] = np.column_stack([spl.ev(q[:, 0], q[:, 1], dx=1),
                                        spl.ev(q[:, 0], q[:, 1], dy=1)]) / u[:, None]
        near = ~far
        if near.any():
            q = P[near]
            g = np.column_stack([
                (dom.signed_distance_lower(q + [eps, 0]) - dom.signed_distance_lower(q - [eps, 0])) / (2 * eps),
                (dom.signed_distance_lower(q + [0, eps]) - dom.signed_distance_lower(q - [0, eps])) / (2 * eps)])
            out[near] = g / np.maximum(dist[near], 1e-300)[:, None]
        return out

    return grad


# ------------------------------------------------------------------------------
# simulation
# ------------------------------------------------------------------------------

class _Sim:
    def __init__(self, cfg: DiffusionConfig):
        self.cfg = cfg
        self.sp = cfg.space
        self.dim = self.sp.model_dim

    def inside(self, P):
        x = self.sp.to_chart(P) if self.sp.is_sphere else P
        return self.cfg.domain.signed_distance_lower(x) > 0

    def grad(self, P):
        if self.cfg.grad_v is None:
            return np.zeros_like(P)
        return self.sp.project_tangent(P, self.cfg.grad_v(P))

    def geometry(self, X, Y):
        d, tX, tY = self.sp.unit_tangents(X, Y)
        return np.asarray(d), tX, tY

    def F(self, X, Y, tX, tY):
        return np.sum(self.grad(Y) * tY, axis=1) - np.sum(self.grad(X) * tX, axis=1)

    def propose(self, X, Y, dt, G):
        """One geodesic Euler-Maruyama step of the coupled pair with ambient noise G."""
        sp = self.sp
        cfg = self.cfg
        d, tX, tY = self.geometry(X, Y)
        dBx = sp.project_tangent(X, G)
        dBy = sp.mirror(X, Y, dBx)
        att = 0.0
        if cfg.alpha and sp.is_sphere:
            att = 2 * cfg.alpha * tn_K(sp.K, d / 2)[:, None]
        s = math.sqrt(2 * dt)
        Xn = sp.exp(X, s * dBx + (2 * self.grad(X) + att * tX) * dt)
        Yn = sp.exp(Y, s * dBy + (2 * self.grad(Y) - att * tY) * dt)
        return Xn, Yn

    def propose_single(self, X, dt, G):
        sp = self.sp
        return sp.exp(X, math.sqrt(2 * dt) * sp.project_tangent(X, G) + 2 * self.grad(X) * dt)

    def advance(self, ids, X, Y, dt, step, sub, depth, stat, single=False):
        """Advance rows ``ids`` by ``dt``; returns the rows that ran out of halvings."""
        cfg = self.cfg
        G = noise_block(cfg.seed, step, sub, cfg.M, self.dim)[ids]
        if single:
            Xn = self.propose_single(X[ids], dt, G)
            ok = self.inside(Xn)
            Yn = Xn
        else:
            Xn, Yn = self.propose(X[ids], Y[ids], dt, G)
            ok = self.inside(Xn) & self.inside(Yn)
        good = ids[ok]
        X[good] = Xn[ok]
        Y[good] = Yn[ok]
        bad = ids[~ok]
        if bad.size == 0:
            return bad
        stat["rejected"] += int(bad.size)
        if depth >= cfg.max_halvings:
            return bad
        stat["substeps"] += int(bad.size)
        lost1 = self.advance(bad, X, Y, dt / 2, step, 2 * sub + 1, depth + 1, stat, single)
        rest = np.setdiff1d(bad, lost1, assume_unique=True)
        lost2 = self.advance(rest, X, Y, dt / 2, step, 2 * sub + 2, depth + 1, stat, single) \
            if rest.size else rest
        return np.concatenate([lost1, lost2])


def simulate_coupled(cfg: DiffusionConfig) -> TrajectoryStats:
    """Run ``cfg.M`` mirror-coupled pairs up to ``T_max`` or coupling.

    A pair couples when ``d(X, Y) < eps_couple``; from then on it is a
    single particle and ``xi = 0``.  Steps that would leave the domain are
    redone as two half steps, recursively up to ``max_halvings`` times;
    pairs that still exit are excluded from all statistics.
    """
    sp = cfg.space
    sim = _Sim(cfg)
    M = cfg.M
    x0 = np.broadcast_to(cfg.x0, (M, sp.N))
    y0 = np.broadcast_to(cfg.y0, (M, sp.N))
    if not (np.all(cfg.domain.signed_distance_lower(x0) > 0)
            and np.all(cfg.domain.signed_distance_lower(y0) > 0)):
        raise PreconditionError("starting points must be interior")
    X = sp.to_model(x0).copy()
    Y = sp.to_model(y0).copy()
    d0 = np.asarray(sp.distance(X, Y))
    n = cfg.n_steps
    cps = np.asarray(sorted(cfg.checkpoints), dtype=float)
    cp_steps = np.round(cps / cfg.dt).astype(int)
    xi_at = np.full((M, len(cps)), np.nan)
    for k in np.flatnonzero(cp_steps == 0):
        xi_at[:, k] = d0 / 2
    tau = np.full(M, float(cfg.T_max))
    censored = np.ones(M, dtype=bool)
    excluded = np.zeros(M, dtype=bool)
    coupled0 = d0 < cfg.eps_couple
    tau[coupled0] = 0.0
    censored[coupled0] = False
    active = np.flatnonzero(~coupled0)
    merged = np.flatnonzero(coupled0)
    stat = {"rejected": 0, "substeps": 0}
    inc = ([], [], [])
    merged_exits = 0
    for step in range(n):
        if active.size == 0 and not (cfg.track_merged and merged.size):
            break
        if active.size:
            Xa, Ya = X[active], Y[active]
            d_before, tX, tY = sim.geometry(Xa, Ya)
            F_before = sim.F(Xa, Ya, tX, tY) if cfg.record_increments else None
            lost = sim.advance(active, X, Y, cfg.dt, step, 0, 0, stat)
            if lost.size:
                excluded[lost] = True
            keep = ~np.isin(active, lost)
            d_after = np.asarray(sp.distance(X[active], Y[active]))
            if cfg.record_increments:
                inc[0].append(d_before[keep] / 2)
                inc[1].append((d_after[keep] - d_before[keep]) / 2)
                inc[2].append(F_before[keep])
            now = active[keep]
            dn = d_after[keep]
            hit = dn < cfg.eps_couple
            c = now[hit]
            tau[c] = (step + 1) * cfg.dt
            censored[c] = False
            Y[c] = X[c]
            active = now[~hit]
            merged = np.concatenate([merged, c])
        if cfg.track_merged and merged.size:
            lost = sim.advance(merged, X, Y, cfg.dt, step, 0, 0, stat, single=True)
            merged_exits += int(lost.size)
        for k in np.flatnonzero(cp_steps == step + 1):
            xi_at[:, k] = 0.0
            xi_at[active, k] = np.asarray(sp.distance(X[active], Y[active])) / 2
    xi_at[excluded] = np.nan
    sep = float(np.max(sp.distance(X[merged], Y[merged]))) if merged.size else 0.0
    cat = lambda a: np.concatenate(a) if a else np.empty(0)
    return TrajectoryStats(tau, censored, excluded, cps, xi_at, d0 / 2, cat(inc[0]), cat(inc[1]),
                           cat(inc[2]), stat["substeps"], stat["rejected"], cfg.dt, sep, merged_exits)


# ------------------------------------------------------------------------------
# audits
# ------------------------------------------------------------------------------

@dataclass
class DriftReport:
    bins: list               # rows (xi_mid, n, mean_rate, predicted, z)
    worst_z: float
    slope: float
    slope_se: float
    intercept: float
    qv_rate: float           # E[(dxi)^2] / dt, 2 for the sqrt(2) diffusion coefficient
    n_used: int
    curvature_gain: float = float("nan")
    curvature_gain_se: float = float("nan")


def predicted_xi_drift(cfg: DiffusionConfig, xi, F):
    """``-(N - 1 + 2 alpha) tn_K(xi) + F``."""
    N, K = cfg.space.N, cfg.space.K
    curv = (N - 1 + 2 * cfg.alpha) * (tn_K(K, xi) if K > 0 else 0.0)
    return -curv + F


def drift_audit(stats: TrajectoryStats, cfg: DiffusionConfig, n_bins: int = 10,
                min_per_bin: int = 200, xi_min: Optional[float] = None) -> DriftReport:
    """Binned comparison of ``E[dxi]/dt`` with the predicted drift, plus a slope fit.

    Increments starting below ``xi_min`` (default ``eps_couple``) are
    dropped: there the discrete half-distance is reflected at 0 and its
    mean increment is biased upwards.  The slope is the least-squares slope
    of ``dxi/dt + curvature term`` against ``xi``, i.e. of the ``F`` part.
    When the curvature term is present, ``curvature_gain`` is the fitted
    multiple of it found in ``dxi/dt - F`` (1 when the prediction holds).
    """
    if stats.inc_xi.size == 0:
        raise PreconditionError("no increments were recorded")
    lo = cfg.eps_couple if xi_min is None else xi_min
    m = stats.inc_xi >= lo
    xi, dxi, F = stats.inc_xi[m], stats.inc_dxi[m], stats.inc_F[m]
    if xi.size < min_per_bin:
        raise PreconditionError("insufficient samples for the drift audit")
    dt = stats.dt
    rate = dxi / dt
    pred = predicted_xi_drift(cfg, xi, F)
    edges = np.quantile(xi, np.linspace(0, 1, n_bins + 1))
    rows = []
    worst = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (xi >= a) & (xi <= b)
        k = int(sel.sum())
        if k < min_per_bin:
            raise PreconditionError(f"bin [{a:.3g}, {b:.3g}] has only {k} samples (< {min_per_bin})")
        mu = float(rate[sel].mean())
        se = float(rate[sel].std(ddof=1) / math.sqrt(k))
        pr = float(pred[sel].mean())
        z = (mu - pr) / se
        worst = max(worst, abs(z))
        rows.append(((a + b) / 2, k, mu, pr, z))
    y = rate - (pred - F)
    A = np.column_stack([xi, np.ones_like(xi)])
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    s2 = float(resid @ resid) / (len(y) - 2)
    cov = s2 * np.linalg.inv(A.T @ A)
    qv = float(np.mean(dxi ** 2) / dt)
    gain = gain_se = float("nan")
    curv = pred - F
    if np.any(curv != 0):
        # least-squares scale c in  rate - F ~ c * curvature term
        yc = rate - F
        cc = float(curv @ curv)
        gain = float(yc @ curv) / cc
        r = yc - gain * curv
        gain_se = math.sqrt(float(r @ r) / (len(r) - 1) / cc)
    return DriftReport(rows, float(worst), float(coef[0]), float(math.sqrt(cov[0, 0])), float(coef[1]),
                       qv, int(len(xi)), gain, gain_se)


@dataclass
class DecayRow:
    t: float
    mean: float
    se: float
    envelope: float
    ok: bool


@dataclass
class DecayReport:
    rate: float
    phi0: float
    rows: list
    n_used: int

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)


def phi_decay_audit(cfg: DiffusionConfig, spectrum, audit=None, require_audit: bool = True,
                    stats: Optional[TrajectoryStats] = None) -> DecayReport:
    """Check ``E Phi(xi_t) <= exp(-min rho_bar Gamma_bar t) Phi(xi_0)`` at ``cfg.checkpoints``.

    ``spectrum`` is a :class:`~gapforge.model1d.ShotSpectrum` providing
    ``Phi_at``.  A checkpoint passes when ``mean - 3 SE <= envelope``.  The
    comparison presumes that the model is a valid log-concavity modulus;
    pass the :class:`~gapforge.eigsolve.AuditResult` of that check as
    ``audit`` (required unless ``require_audit`` is false).
    """
    if cfg.alpha != 0:
        raise PreconditionError("the decay comparison uses alpha = 0")
    if require_audit and (audit is None or not audit.ok):
        raise PreconditionError("log-concavity audit missing or failed; refusing the decay audit")
    if not len(cfg.checkpoints):
        raise PreconditionError("no checkpoints requested")
    if stats is None:
        stats = simulate_coupled(cfg)
    rate = spectrum.modulus.rho_bounds()[0] * spectrum.gap
    ok = ~stats.excluded
    xi0 = stats.xi0[ok]
    phi0 = float(np.mean(spectrum.Phi_at(xi0)))
    rows = []
    for k, t in enumerate(stats.checkpoints):
        vals = np.asarray(spectrum.Phi_at(stats.xi_at[ok, k]))
        mu = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
        env = math.exp(-rate * t) * phi0
        rows.append(DecayRow(float(t), mu, se, env, mu - 3 * se <= env * (1 + 1e-12)))
    return DecayReport(float(rate), phi0, rows, int(ok.sum()))
