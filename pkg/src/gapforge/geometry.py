"""Constant-curvature model spaces: trig-K functions, geodesics, frames.

Points are handled in two coordinate systems:

* the *chart*: ``R^N`` for the Euclidean and Poincaré-disk charts, the
  stereographic plane for spheres;
* the *model*: ``R^N`` again for flat space, and the round sphere of
  radius ``1/sqrt(K)`` embedded in ``R^{N+1}`` for ``K > 0``.

Geodesics, parallel transport and the mirror map are closed-form in model
coordinates.  Tangent vectors returned by this module are model vectors.
For the sphere they can be pushed to the chart with :meth:`SpaceForm.push_to_chart`.

The Poincaré-disk chart is a flat chart.  Two-point and diffusion code only
ever sees its Euclidean base geometry.  The hyperbolic distance is exposed
separately for measurement (:func:`hyperbolic_distance`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, PreconditionError

CHARTS = ("euclidean", "sphere-stereographic", "poincare-disk")


def trig_K(K, s):
    """Return ``(cs_K(s), sn_K(s), tn_K(s))``.

    ``cs_K = cos(sqrt(K) s)``, ``sn_K = sin(sqrt(K) s)/sqrt(K)`` (``= s`` at
    ``K = 0``), ``tn_K = sqrt(K) tan(sqrt(K) s)``.

    Raises
    ------
    PreconditionError
        If ``K < 0`` or, for ``K > 0``, ``|s| >= pi/(2 sqrt(K))``.
    """
    return cs_K(K, s), sn_K(K, s), tn_K(K, s)


def cs_K(K, s):
    if K < 0:
        raise PreconditionError("curvature must be >= 0")
    s = np.asarray(s, dtype=float)
    if K == 0:
        return np.ones_like(s)[()]
    return np.cos(math.sqrt(K) * s)[()]


def sn_K(K, s):
    if K < 0:
        raise PreconditionError("curvature must be >= 0")
    s = np.asarray(s, dtype=float)
    if K == 0:
        return s.copy()[()]
    k = math.sqrt(K)
    return (np.sin(k * s) / k)[()]


def tn_K(K, s):
    if K < 0:
        raise PreconditionError("curvature must be >= 0")
    s = np.asarray(s, dtype=float)
    if K == 0:
        return np.zeros_like(s)[()]
    k = math.sqrt(K)
    if np.any(np.abs(s) * k >= math.pi / 2):
        raise PreconditionError("tn_K is undefined at |s| >= pi/(2 sqrt K)")
    return (k * np.tan(k * s))[()]


def hyperbolic_distance(x, y):
    """Distance in the Poincaré ball model with metric ``4/(1-|x|^2)^2 g_E``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx = np.sum(x * x, axis=-1)
    ny = np.sum(y * y, axis=-1)
    if np.any(nx >= 1) or np.any(ny >= 1):
        raise GeometryError("point outside the unit ball")
    d2 = np.sum((x - y) ** 2, axis=-1)
    # arccosh(1 + z) = log1p(z + sqrt(z (z + 2))) keeps accuracy for small z
    z = 2 * d2 / ((1 - nx) * (1 - ny))
    return np.log1p(z + np.sqrt(z * (z + 2)))


def _complete_basis(fixed):
    """Orthonormal columns spanning the complement of the columns of ``fixed``."""
    n = fixed.shape[0]
    M = np.hstack([fixed, np.eye(n)])
    Q, _ = np.linalg.qr(M)
    k = fixed.shape[1]
    # fix signs so that the result is deterministic
    Q = Q[:, :n]
    for j in range(n):
        i = np.argmax(np.abs(Q[:, j]))
        if Q[i, j] < 0:
            Q[:, j] = -Q[:, j]
    return Q[:, k:]


@dataclass(frozen=True)
class SpaceForm:
    """Simply connected space of constant curvature ``K``, seen through a chart.

    For ``chart='poincare-disk'`` the curvature must be 0: the chart carries
    the flat base geometry.
    """

    N: int
    K: float = 0.0
    chart: str = "euclidean"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise PreconditionError("dimension must be an integer >= 2")
        if self.chart not in CHARTS:
            raise PreconditionError(f"unknown chart {self.chart!r}")
        if self.K < 0:
            raise PreconditionError("K must be >= 0; hyperbolic space is reached "
                                    "through the poincare-disk chart")
        if self.chart == "sphere-stereographic" and self.K <= 0:
            raise PreconditionError("sphere chart needs K > 0")
        if self.chart != "sphere-stereographic" and self.K != 0:
            raise PreconditionError("flat charts need K = 0")

    @property
    def is_sphere(self) -> bool:
        return self.K > 0

    @property
    def radius(self) -> float:
        return 1.0 / math.sqrt(self.K) if self.K > 0 else math.inf

    @property
    def model_dim(self) -> int:
        return self.N + 1 if self.is_sphere else self.N

    @property
    def scalar_curvature(self) -> float:
        return self.N * (self.N - 1) * self.K

    # chart <-> model ----------------------------------------------------
    def to_model(self, x):
        x = np.asarray(x, dtype=float)
        if self.chart == "poincare-disk" and np.any(np.sum(x * x, axis=-1) >= 1):
            raise GeometryError("point outside the Poincaré chart")
        if not self.is_sphere:
            return x.copy()
        R = self.radius
        r2 = np.sum(x * x, axis=-1, keepdims=True)
        den = r2 + R * R
        return np.concatenate([2 * R * R * x / den, R * (r2 - R * R) / den], axis=-1)

    def to_chart(self, P):
        P = np.asarray(P, dtype=float)
        if not self.is_sphere:
            return P.copy()
        R = self.radius
        den = R - P[..., -1:]
        if np.any(den <= 0):
            raise GeometryError("north pole has no stereographic image")
        return R * P[..., :-1] / den

    def jacobian(self, x):
        """Derivative of :meth:`to_model` at chart point ``x`` (shape model x N)."""
        x = np.asarray(x, dtype=float)
        if not self.is_sphere:
            return np.eye(self.N)
        R = self.radius
        r2 = float(x @ x)
        den = r2 + R * R
        J = np.empty((self.N + 1, self.N))
        J[:-1] = 2 * R * R * (np.eye(self.N) / den - 2 * np.outer(x, x) / den ** 2)
        J[-1] = R * (2 * x / den - 2 * x * (r2 - R * R) / den ** 2)
        return J

    def push_to_chart(self, x, v):
        """Chart components of the model tangent vector ``v`` at chart point ``x``."""
        if not self.is_sphere:
            return np.asarray(v, dtype=float).copy()
        J = self.jacobian(x)
        scale = J[:, 0] @ J[:, 0]
        return J.T @ np.asarray(v, dtype=float) / scale

    def chart_metric(self, x):
        """Conformal factor of the model metric in the chart at ``x``."""
        if not self.is_sphere:
            return 1.0
        R = self.radius
        return 4 * R ** 4 / (R * R + float(np.dot(x, x))) ** 2

    # model geometry -----------------------------------------------------
    def project_tangent(self, P, v):
        """Orthogonal projection of ambient vectors onto ``T_P``."""
        v = np.asarray(v, dtype=float)
        if not self.is_sphere:
            return v
        P = np.asarray(P, dtype=float)
        return v - (np.sum(v * P, axis=-1, keepdims=True) * self.K) * P

    def distance(self, P, Q):
        P = np.asarray(P, dtype=float)
        Q = np.asarray(Q, dtype=float)
        chord = np.linalg.norm(P - Q, axis=-1)
        if not self.is_sphere:
            return chord
        R = self.radius
        return 2 * R * np.arcsin(np.clip(chord / (2 * R), 0.0, 1.0))

    def exp(self, P, v):
        """Exponential map at ``P`` (vectorised over leading axes)."""
        P = np.asarray(P, dtype=float)
        v = np.asarray(v, dtype=float)
        if not self.is_sphere:
            return P + v
        R = self.radius
        t = np.linalg.norm(v, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            sinc = np.where(t > 0, R * np.sin(t / R) / np.where(t > 0, t, 1.0), 1.0)
        Q = np.cos(t / R) * P + sinc * v
        # renormalise against drift
        return Q * (R / np.linalg.norm(Q, axis=-1, keepdims=True))

    def log(self, P, Q):
        """Inverse exponential map: tangent at ``P`` pointing at ``Q`` with length d."""
        P = np.asarray(P, dtype=float)
        Q = np.asarray(Q, dtype=float)
        if not self.is_sphere:
            return Q - P
        d = self.distance(P, Q)
        u = self.project_tangent(P, Q - P)
        nu = np.linalg.norm(u, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(nu > 0, u / np.where(nu > 0, nu, 1.0), 0.0) * np.asarray(d)[..., None]
        return out

    def unit_tangents(self, P, Q):
        """Unit geodesic tangents at both ends of the segment from P to Q.

        Returns ``(d, t_P, t_Q)`` with ``t_P = gamma'(-d/2)`` and
        ``t_Q = gamma'(d/2)``, both pointing from P towards Q.
        """
        P = np.asarray(P, dtype=float)
        Q = np.asarray(Q, dtype=float)
        d = np.asarray(self.distance(P, Q))
        if not self.is_sphere:
            with np.errstate(invalid="ignore", divide="ignore"):
                t = (Q - P) / d[..., None]
            return d, t, t
        tP = self.log(P, Q)
        tQ = -self.log(Q, P)
        with np.errstate(invalid="ignore", divide="ignore"):
            return d, tP / d[..., None], tQ / d[..., None]

    def transport(self, P, Q, v):
        """Parallel transport of ``v`` in ``T_P`` to ``T_Q`` along the minimal geodesic."""
        v = np.asarray(v, dtype=float)
        if not self.is_sphere:
            return v.copy()
        d, tP, tQ = self.unit_tangents(P, Q)
        a = np.sum(v * tP, axis=-1, keepdims=True)
        R2 = self.radius ** 2
        P = np.asarray(P, dtype=float)
        Q = np.asarray(Q, dtype=float)
        # component along the position vector (zero for tangent v, kept for safety)
        b = np.sum(v * P, axis=-1, keepdims=True) / R2
        perp = v - a * tP - b * P
        return perp + a * tQ + b * Q

    def mirror(self, P, Q, v):
        """Mirror map: transport to Q, then reflect the geodesic direction."""
        d, tP, tQ = self.unit_tangents(P, Q)
        a = np.sum(np.asarray(v, dtype=float) * tP, axis=-1, keepdims=True)
        return self.transport(P, Q, v) - 2 * a * tQ


@dataclass(frozen=True)
class FrameAlongGeodesic:
    """Parallel orthonormal frame along the geodesic from x to y.

    ``frame_x`` and ``frame_y`` hold model vectors as columns ``e_1..e_N``,
    with ``e_N`` the unit tangent pointing from x to y.  The geodesic is
    parametrised by arclength on ``[-d/2, d/2]``.
    """

    space: SpaceForm
    x: np.ndarray
    y: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    d: float
    frame_x: np.ndarray
    frame_y: np.ndarray

    @property
    def half(self) -> float:
        return 0.5 * self.d

    @property
    def tangent_x(self):
        return self.frame_x[:, -1]

    @property
    def tangent_y(self):
        return self.frame_y[:, -1]

    def mirror(self, w):
        """Image of the model vector ``w`` at x under the mirror map."""
        w = np.asarray(w, dtype=float)
        return self.space.mirror(self.X, self.Y, w)

    def point(self, t):
        """Model point ``gamma(t)`` for ``t`` in ``[-d/2, d/2]``."""
        return self.space.exp(self.X, (t + self.half) * self.tangent_x)

    def chart_frames(self):
        """Frames pushed to chart components at x and y."""
        fx = np.column_stack([self.space.push_to_chart(self.x, c) for c in self.frame_x.T])
        fy = np.column_stack([self.space.push_to_chart(self.y, c) for c in self.frame_y.T])
        return fx, fy


def geodesic_frame(space: SpaceForm, x, y, tol: float = 1e-12) -> FrameAlongGeodesic:
    """Frame data for the minimal geodesic between chart points ``x`` and ``y``.

    Raises
    ------
    GeometryError
        For coincident points, or for (nearly) antipodal points on a sphere.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    X = space.to_model(x)
    Y = space.to_model(y)
    d = float(space.distance(X, Y))
    if d <= tol * max(1.0, float(np.abs(X).max())):
        raise GeometryError("coincident points have no geodesic frame")
    if space.is_sphere and d >= math.pi * space.radius * (1 - 1e-9):
        raise GeometryError("antipodal points: the geodesic is not unique")
    _, tX, tY = space.unit_tangents(X, Y)
    if space.is_sphere:
        rest = _complete_basis(np.column_stack([X / space.radius, tX]))
    else:
        rest = _complete_basis(tX[:, None])
    frame_x = np.column_stack([rest, tX])
    frame_y = np.column_stack([space.transport(X, Y, c) for c in rest.T] + [tY])
    return FrameAlongGeodesic(space, x, y, X, Y, d, frame_x, frame_y)
