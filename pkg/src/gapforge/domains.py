"""Convex domains in a chart, with the geometric measurements used by the bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Optional

import numpy as np

from .errors import ChartError, GeometryError, PreconditionError
from .geometry import hyperbolic_distance

CHARTS = ("euclidean", "poincare-disk", "sphere-stereographic")


@dataclass(frozen=True, eq=False)
class Domain:
    """Axis rectangle, ball, or (2D) convex polygon in a chart.

    Build instances with :meth:`rectangle`, :meth:`ball` or :meth:`polygon`.
    """

    kind: str
    chart: str = "euclidean"
    center: Optional[np.ndarray] = None
    half_widths: Optional[np.ndarray] = None
    radius: Optional[float] = None
    vertices: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise PreconditionError(f"unknown chart {self.chart!r}")
        if self.kind == "rectangle":
            if np.any(self.half_widths <= 0):
                raise PreconditionError("half-widths must be positive")
        elif self.kind == "ball":
            if not self.radius > 0:
                raise PreconditionError("radius must be positive")
        elif self.kind == "polygon":
            v = self.vertices
            if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
                raise PreconditionError("polygons are 2D with at least 3 vertices")
            e = np.roll(v, -1, axis=0) - v
            cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
            if np.any(cross <= 0):
                raise PreconditionError("polygon must be strictly convex and counterclockwise")
        else:
            raise PreconditionError(f"unknown domain kind {self.kind!r}")
        if self.chart == "poincare-disk":
            if self.kind == "ball":
                far = float(np.linalg.norm(self.center)) + self.radius
            else:
                far = float(np.max(np.linalg.norm(self.corner_points(), axis=1)))
            if far >= 1:
                raise ChartError("domain must lie strictly inside the unit ball")

    # constructors -----------------------------------------------------------
    @classmethod
    def rectangle(cls, center, half_widths, chart="euclidean"):
        return cls("rectangle", chart, center=np.asarray(center, float),
                   half_widths=np.asarray(half_widths, float))

    @classmethod
    def box(cls, lo, hi, chart="euclidean"):
        lo = np.asarray(lo, float)
        hi = np.asarray(hi, float)
        return cls.rectangle((lo + hi) / 2, (hi - lo) / 2, chart)

    @classmethod
    def ball(cls, center, radius, chart="euclidean"):
        return cls("ball", chart, center=np.asarray(center, float), radius=float(radius))

    @classmethod
    def polygon(cls, vertices, chart="euclidean"):
        return cls("polygon", chart, vertices=np.asarray(vertices, float))

    # basic geometry -----------------------------------------------------------
    @property
    def dim(self) -> int:
        if self.kind == "polygon":
            return 2
        return len(self.center)

    def corner_points(self):
        """Vertices of a rectangle or polygon."""
        if self.kind == "polygon":
            return self.vertices.copy()
        if self.kind == "rectangle":
            signs = np.array(list(product((-1.0, 1.0), repeat=self.dim)))
            return self.center + signs * self.half_widths
        raise PreconditionError("balls have no vertices")

    def bbox(self):
        if self.kind == "rectangle":
            return self.center - self.half_widths, self.center + self.half_widths
        if self.kind == "ball":
            return self.center - self.radius, self.center + self.radius
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def _halfplanes(self):
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        n = np.column_stack([e[:, 1], -e[:, 0]])
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        return n, np.sum(n * v, axis=1)

    def contains(self, p):
        """Membership of the closed domain (vectorised over leading axes)."""
        p = np.asarray(p, dtype=float)
        if self.kind == "rectangle":
            return np.all(np.abs(p - self.center) <= self.half_widths, axis=-1)
        if self.kind == "ball":
            return np.sum((p - self.center) ** 2, axis=-1) <= self.radius ** 2
        n, b = self._halfplanes()
        return np.all(p @ n.T <= b + 1e-15, axis=-1)

    def signed_distance_lower(self, p):
        """Euclidean distance from interior points to the boundary (positive inside)."""
        p = np.asarray(p, dtype=float)
        if self.kind == "rectangle":
            return np.min(self.half_widths - np.abs(p - self.center), axis=-1)
        if self.kind == "ball":
            return self.radius - np.linalg.norm(p - self.center, axis=-1)
        n, b = self._halfplanes()
        return np.min(b - p @ n.T, axis=-1)

    def ray_exit(self, p, axis: int, sign: int):
        """Distance from interior points ``p`` to the boundary along ``sign * e_axis``."""
        p = np.asarray(p, dtype=float)
        if self.kind == "rectangle":
            c = self.center[axis]
            w = self.half_widths[axis]
            return (c + w - p[..., axis]) if sign > 0 else (p[..., axis] - (c - w))
        if self.kind == "ball":
            q = p - self.center
            b = sign * q[..., axis]
            c = np.sum(q * q, axis=-1) - self.radius ** 2
            return -b + np.sqrt(np.maximum(b * b - c, 0.0))
        n, bb = self._halfplanes()
        ne = sign * n[:, axis]
        slack = bb - p @ n.T
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(ne > 0, slack / np.where(ne > 0, ne, 1.0), np.inf)
        return np.min(t, axis=-1)

    def min_width(self) -> float:
        if self.kind == "rectangle":
            return float(2 * self.half_widths.min())
        if self.kind == "ball":
            return 2 * self.radius
        n, b = self._halfplanes()
        # width in direction n_i is b_i - min_v n_i . v
        return float(np.min(b - np.min(self.vertices @ n.T, axis=0)))

    # boundary samples ------------------------------------------------------------
    def boundary_samples(self, n: int = 4096):
        """Points on the boundary of a 2D domain, roughly uniform in arclength."""
        if self.dim != 2:
            raise PreconditionError("boundary sampling is implemented for 2D domains")
        if self.kind == "ball":
            t = 2 * np.pi * np.arange(n) / n
            return self.center + self.radius * np.column_stack([np.cos(t), np.sin(t)])
        v = self.corner_points()
        if self.kind == "rectangle":
            v = v[[0, 2, 3, 1]]  # counterclockwise order
        e = np.roll(v, -1, axis=0) - v
        lens = np.linalg.norm(e, axis=1)
        cum = np.r_[0.0, np.cumsum(lens)]
        t = cum[-1] * np.arange(n) / n
        k = np.searchsorted(cum, t, side="right") - 1
        return v[k] + ((t - cum[k]) / lens[k])[:, None] * e[k]

    def boundary_curve(self, n: int = 1024):
        """Samples of a counterclockwise boundary parametrisation with two derivatives.

        Corners of polygons and rectangles are skipped (the straight sides are
        sampled at interior points).
        """
        if self.dim != 2:
            raise PreconditionError("boundary curves are implemented for 2D domains")
        if self.kind == "ball":
            t = 2 * np.pi * np.arange(n) / n
            c, s = np.cos(t), np.sin(t)
            a = self.radius
            return BoundaryCurve(self.center + a * np.column_stack([c, s]),
                                 a * np.column_stack([-s, c]), -a * np.column_stack([c, s]))
        v = self.corner_points()
        if self.kind == "rectangle":
            v = v[[0, 2, 3, 1]]
        e = np.roll(v, -1, axis=0) - v
        per = max(2, n // len(v))
        tt = (np.arange(per) + 0.5) / per
        pts = np.concatenate([v[i] + tt[:, None] * e[i] for i in range(len(v))])
        d1 = np.concatenate([np.repeat(e[i][None], per, axis=0) for i in range(len(v))])
        return BoundaryCurve(pts, d1, np.zeros_like(d1))

    def describe(self) -> dict:
        d = {"kind": self.kind, "chart": self.chart}
        if self.kind == "rectangle":
            d.update(center=self.center.tolist(), half_widths=self.half_widths.tolist())
        elif self.kind == "ball":
            d.update(center=self.center.tolist(), radius=self.radius)
        else:
            d.update(vertices=self.vertices.tolist())
        return d


@dataclass(frozen=True)
class BoundaryCurve:
    """Samples ``c(t), c'(t), c''(t)`` of a counterclockwise planar curve."""

    points: np.ndarray
    d1: np.ndarray
    d2: Optional[np.ndarray]


@dataclass(frozen=True)
class DomainMetrics:
    """Lengths of a domain: Euclidean and hyperbolic diameters plus bounds."""

    D_E: float
    D_H: Optional[float]
    r_in: Optional[float]
    R_E: Optional[float]


# -------------------------------------------------------------------------------
# diameters
# -------------------------------------------------------------------------------

def _pairwise_max(points, metric):
    best = (-1.0, 0, 0)
    for i in range(len(points)):
        d = metric(points[i][None, :], points[i:])
        j = int(np.argmax(d))
        if d[j] > best[0]:
            best = (float(d[j]), i, i + j)
    return best


def euclidean_diameter(dom: Domain) -> float:
    if dom.kind == "ball":
        return 2 * dom.radius
    if dom.kind == "rectangle":
        return float(2 * np.linalg.norm(dom.half_widths))
    return _pairwise_max(dom.vertices, lambda a, b: np.linalg.norm(a - b, axis=1))[0]


def _line_extremes(dom):
    c = dom.center
    nc = float(np.linalg.norm(c))
    u = c / nc if nc > 0 else np.eye(dom.dim)[0]
    return c - dom.radius * u, c + dom.radius * u


def hyperbolic_diameter(dom: Domain) -> float:
    """Hyperbolic diameter of a Poincaré-chart domain.

    For balls the extreme pair lies on the chart line through the origin and
    the center (a hyperbolic geodesic through the hyperbolic center).  For
    rectangles and polygons the distance to a fixed point has Euclidean-ball
    sublevel sets (hyperbolic balls), so it is quasi-convex and its maximum
    over a polytope is attained at vertices; the vertex pairs are enumerated.
    """
    if dom.chart != "poincare-disk":
        raise ChartError("hyperbolic diameter requested off the Poincaré-disk chart")
    if dom.kind == "ball":
        a, b = _line_extremes(dom)
        return float(hyperbolic_distance(a, b))
    return _pairwise_max(dom.corner_points(), hyperbolic_distance)[0]


def sampled_hyperbolic_diameter(dom: Domain, n: int = 4096, refine: bool = True):
    """Boundary-sampling estimate of the hyperbolic diameter of a 2D domain.

    Returns ``(D_H, (x, y))``.  The best sampled pair is refined by
    alternating golden-section searches along the boundary parameter.
    Used as an independent check of :func:`hyperbolic_diameter`.
    """
    from scipy.optimize import minimize_scalar

    if dom.chart != "poincare-disk":
        raise ChartError("hyperbolic diameter requested off the Poincaré-disk chart")
    pts = dom.boundary_samples(n)
    d, i, j = _pairwise_max(pts, hyperbolic_distance)
    if not refine:
        return d, (pts[i], pts[j])
    dense = dom.boundary_samples(64 * n) if dom.kind != "ball" else None

    def at(t):
        t = t % 1.0
        if dom.kind == "ball":
            a = 2 * np.pi * t
            return dom.center + dom.radius * np.array([np.cos(a), np.sin(a)])
        k = t * len(dense)
        k0 = int(k) % len(dense)
        k1 = (k0 + 1) % len(dense)
        w = k - int(k)
        return (1 - w) * dense[k0] + w * dense[k1]

    ti, tj = i / n, j / n
    for _ in range(4):
        ti = minimize_scalar(lambda t: -hyperbolic_distance(at(t), at(tj)),
                             bounds=(ti - 2 / n, ti + 2 / n), method="bounded").x
        tj = minimize_scalar(lambda t: -hyperbolic_distance(at(ti), at(t)),
                             bounds=(tj - 2 / n, tj + 2 / n), method="bounded").x
    x, y = at(ti), at(tj)
    return max(d, float(hyperbolic_distance(x, y))), (x, y)


def sphere_diameter(dom: Domain, K: float) -> float:
    """Diameter in the round metric of curvature K, for a stereographic-chart domain."""
    from .geometry import SpaceForm

    if dom.chart != "sphere-stereographic":
        raise ChartError("sphere diameter needs the sphere-stereographic chart")
    S = SpaceForm(dom.dim, K, "sphere-stereographic")
    if dom.kind == "ball":
        a, b = _line_extremes(dom)
        return float(S.distance(S.to_model(a), S.to_model(b)))
    P = S.to_model(dom.corner_points())
    return _pairwise_max(P, S.distance)[0]


def diameters(dom: Domain):
    """``(D_E, D_H)``; ``D_H`` is ``None`` off the Poincaré-disk chart."""
    D_E = euclidean_diameter(dom)
    D_H = hyperbolic_diameter(dom) if dom.chart == "poincare-disk" else None
    return D_E, D_H


def inradius_from_diameter(D_H: float) -> float:
    """Lower bound ``(-1 + sqrt(D_H/2 + 1))^2`` on the inradius of a horoconvex domain."""
    if not D_H > 0:
        raise PreconditionError("diameter must be positive")
    # (-1 + sqrt(1+x))^2 with x = D/2, written without cancellation
    x = D_H / 2
    return (x / (1 + math.sqrt(1 + x))) ** 2


def circumradius_RE(N: int, D_H: float):
    """Euclidean chart circumradius bound ``R_E`` and the derived check.

    Returns ``(R_E, holds)`` where ``holds`` reports
    ``1/(1 - R_E^2) <= 1 + 2N/(N+1) sinh^2 D_H``.
    """
    if N < 2:
        raise PreconditionError("N must be >= 2")
    if D_H < 0:
        raise PreconditionError("diameter must be nonnegative")
    a = math.sqrt(2 * N / (N + 1)) * math.sinh(D_H)
    R_E = math.tanh(0.5 * math.asinh(a))
    lhs = 1 / (1 - R_E * R_E) if R_E < 1 else math.inf
    rhs = 1 + 2 * N / (N + 1) * math.sinh(D_H) ** 2
    return R_E, lhs <= rhs * (1 + 1e-12)


def one_minus_RE2(N: int, D_H: float) -> float:
    """``1 - R_E^2`` computed without cancellation (it underflows only for huge D_H)."""
    a = math.sqrt(2 * N / (N + 1)) * math.sinh(D_H)
    # R_E = tanh(u/2), u = asinh(a); 1 - tanh^2 = 1/cosh^2(u/2) = 2/(1 + cosh u)
    return 2.0 / (1.0 + math.sqrt(1.0 + a * a))


def domain_metrics(dom: Domain, N: Optional[int] = None) -> DomainMetrics:
    D_E, D_H = diameters(dom)
    if D_H is None:
        return DomainMetrics(D_E, None, None, None)
    N = dom.dim if N is None else N
    return DomainMetrics(D_E, D_H, inradius_from_diameter(D_H), circumradius_RE(N, D_H)[0])


# -------------------------------------------------------------------------------
# horoconvexity
# -------------------------------------------------------------------------------

def boundary_geodesic_curvature(curve: BoundaryCurve):
    """Hyperbolic geodesic curvature of a counterclockwise chart curve.

    ``kappa_g = exp(-phi) (kappa_E + d phi / d nu)`` with ``phi`` the
    Poincaré factor and ``nu`` the outward unit normal.
    """
    if curve.d2 is None:
        raise GeometryError("second derivatives are required for curvature")
    c = np.asarray(curve.points, float)
    d1 = np.asarray(curve.d1, float)
    d2 = np.asarray(curve.d2, float)
    if not (c.shape == d1.shape == d2.shape) or c.shape[-1] != 2:
        raise GeometryError("boundary samples must be (n, 2) arrays of equal shape")
    speed = np.linalg.norm(d1, axis=1)
    if np.any(speed == 0):
        raise GeometryError("boundary parametrisation is singular")
    kE = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed ** 3
    nu = np.column_stack([d1[:, 1], -d1[:, 0]]) / speed[:, None]
    r2 = np.sum(c * c, axis=1)
    if np.any(r2 >= 1):
        raise ChartError("boundary leaves the unit disk")
    dphi_dnu = 2 * np.sum(c * nu, axis=1) / (1 - r2)
    return (1 - r2) / 2 * (kE + dphi_dnu)


def horoconvexity_check(dom_or_curve, tol: float = 1e-6, n: int = 1024) -> bool:
    """True iff the hyperbolic geodesic curvature of the boundary is >= 1 - tol."""
    if isinstance(dom_or_curve, Domain):
        if dom_or_curve.chart != "poincare-disk":
            raise ChartError("horoconvexity is checked in the Poincaré-disk chart")
        curve = dom_or_curve.boundary_curve(n)
    else:
        curve = dom_or_curve
    return bool(np.min(boundary_geodesic_curvature(curve)) >= 1 - tol)


def horocycle_arc(radius: float, n: int = 256, half_angle: float = 2.5, direction=(1.0, 0.0)):
    """Arc of the chart circle of the given radius internally tangent to the unit circle.

    The arc is centred on the point opposite the tangency and spans
    ``2*half_angle`` radians (``half_angle < pi`` keeps away from the ideal point).
    """
    u = np.asarray(direction, float)
    u = u / np.linalg.norm(u)
    c = (1 - radius) * u
    base = math.atan2(-u[1], -u[0])
    t = base + np.linspace(-half_angle, half_angle, n)
    cs, sn = np.cos(t), np.sin(t)
    return BoundaryCurve(c + radius * np.column_stack([cs, sn]),
                         radius * np.column_stack([-sn, cs]),
                         -radius * np.column_stack([cs, sn]))
