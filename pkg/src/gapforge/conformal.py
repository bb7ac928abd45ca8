"""Conformal factors ``g~ = exp(2 phi) g`` and the associated calculus.

Built-in radial factors are described by three profile functions of
``r = |x|``: ``f(r) = phi``, ``g(r) = f'(r)/r`` and ``k(r) = (f'' - g)/r^2``,
so that

    grad phi = g(r) x,        Hess phi = g(r) I + k(r) x x^T,

in Euclidean chart components.  Writing the factor this way avoids the
``0/0`` at the origin for factors that are smooth there.

Conventions
-----------
``phi`` is always taken relative to the factor's *base* metric:

* ``poincare-disk``, ``inverse-square-radial``: base is Euclidean;
* ``flat``, ``user-sampled-grid``: base is Euclidean, or the round sphere
  of curvature ``K`` in its stereographic chart when ``K > 0``;
* ``sphere-stereo-radius-R``: base is the round sphere of radius ``R``
  (curvature ``1/R^2``) in its stereographic chart, so
  ``exp(2 phi) = (R^2 + r^2)^2 / (R^4 (1 - r^2)^2)``;
* ``sphere-chart``: the round sphere's own metric over the Euclidean chart,
  ``exp(2 phi) = 4/(1 + K r^2)^2``.  Used to express sphere-based
  quantities in chart components.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ChartError, PreconditionError
from .geometry import SpaceForm

KINDS = ("flat", "poincare-disk", "sphere-stereo-radius-R", "inverse-square-radial",
         "sphere-chart", "user-sampled-grid")


@dataclass(frozen=True, eq=False)
class ConformalFactor:
    """A conformal factor with analytic (or spline) derivatives.

    Use the constructors :meth:`flat`, :meth:`poincare`, :meth:`sphere_stereo`,
    :meth:`inverse_square`, :meth:`sphere_chart` and :meth:`from_grid`.
    """

    kind: str
    R: float = 1.0
    K: float = 0.0
    _grid: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown conformal factor kind {self.kind!r}")
        if self.kind == "sphere-stereo-radius-R" and not self.R > 0:
            raise PreconditionError("sphere radius must be positive")
        if self.kind == "sphere-chart" and not self.K > 0:
            raise PreconditionError("sphere-chart needs K > 0")
        if self.K < 0:
            raise PreconditionError("negative base curvature is not supported")

    # constructors ---------------------------------------------------------
    @classmethod
    def flat(cls, K: float = 0.0):
        """``phi = 0`` over the Euclidean chart, or over the sphere of curvature ``K``."""
        return cls("flat", K=float(K))

    @classmethod
    def poincare(cls):
        return cls("poincare-disk")

    @classmethod
    def sphere_stereo(cls, R):
        return cls("sphere-stereo-radius-R", R=float(R))

    @classmethod
    def inverse_square(cls):
        return cls("inverse-square-radial")

    @classmethod
    def sphere_chart(cls, K):
        return cls("sphere-chart", K=float(K))

    @classmethod
    def from_grid(cls, x, y, phi, K: float = 0.0):
        """Bicubic spline factor from samples ``phi[i, j] = phi(x[i], y[j])`` (2D).

        ``K > 0`` makes the sphere of curvature ``K`` the base metric.
        """
        from scipy.interpolate import RectBivariateSpline

        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        spl = RectBivariateSpline(x, y, np.asarray(phi, dtype=float), kx=3, ky=3)
        box = (x[0], x[-1], y[0], y[-1])
        return cls("user-sampled-grid", K=float(K), _grid=(spl, box))

    # base geometry ---------------------------------------------------------
    @property
    def base_K(self) -> float:
        """Curvature of the base metric."""
        if self.kind == "sphere-stereo-radius-R":
            return 1.0 / self.R ** 2
        if self.kind in ("flat", "user-sampled-grid"):
            return self.K
        return 0.0

    def base_space(self, N: int) -> SpaceForm:
        if self.base_K > 0:
            return SpaceForm(N, self.base_K, "sphere-stereographic")
        if self.kind == "poincare-disk":
            return SpaceForm(N, 0.0, "poincare-disk")
        return SpaceForm(N, 0.0, "euclidean")

    def base_chart_factor(self) -> "ConformalFactor":
        """Factor of the base metric over the Euclidean chart."""
        if self.base_K > 0:
            return ConformalFactor.sphere_chart(self.base_K)
        return ConformalFactor.flat()

    # validity ----------------------------------------------------------------
    def check_chart(self, p):
        p = np.asarray(p, dtype=float)
        r2 = np.sum(p * p, axis=-1)
        if self.kind in ("poincare-disk", "sphere-stereo-radius-R") and np.any(r2 >= 1):
            raise ChartError("point on or outside the unit ball (chart boundary singularity)")
        if self.kind == "inverse-square-radial" and np.any(r2 == 0):
            raise ChartError("the origin is the singular point of 1/r^2")
        if self.kind == "user-sampled-grid":
            x0, x1, y0, y1 = self._grid[1]
            if p.shape[-1] != 2:
                raise ChartError("grid factors are two-dimensional")
            if np.any((p[..., 0] < x0) | (p[..., 0] > x1) | (p[..., 1] < y0) | (p[..., 1] > y1)):
                raise ChartError("point outside the sampled grid")
        return p

    # radial profiles ----------------------------------------------------------
    def _profiles(self, r2):
        """Return (f, g, k) arrays for the radial kinds, given r^2."""
        if self.kind == "flat":
            z = np.zeros_like(r2)
            return z, z, z
        if self.kind == "poincare-disk":
            a = 1 - r2
            return math.log(2) - np.log(a), 2 / a, 4 / a ** 2
        if self.kind == "inverse-square-radial":
            return -0.5 * np.log(r2), -1 / r2, 2 / r2 ** 2
        if self.kind == "sphere-chart":
            K = self.K
            b = 1 + K * r2
            return math.log(2) - np.log(b), -2 * K / b, 4 * K * K / b ** 2
        if self.kind == "sphere-stereo-radius-R":
            R2 = self.R ** 2
            a = 1 - r2
            c = R2 + r2
            f = np.log(c) - np.log(R2) - np.log(a)
            return f, 2 / c + 2 / a, -4 / c ** 2 + 4 / a ** 2
        raise AssertionError(self.kind)

    # evaluators ------------------------------------------------------------------
    def phi(self, p):
        p = self.check_chart(p)
        if self.kind == "user-sampled-grid":
            spl = self._grid[0]
            return spl.ev(p[..., 0], p[..., 1])
        f, _, _ = self._profiles(np.sum(p * p, axis=-1))
        return f

    def grad_phi(self, p):
        p = self.check_chart(p)
        if self.kind == "user-sampled-grid":
            spl = self._grid[0]
            return np.stack([spl.ev(p[..., 0], p[..., 1], dx=1),
                             spl.ev(p[..., 0], p[..., 1], dy=1)], axis=-1)
        _, g, _ = self._profiles(np.sum(p * p, axis=-1))
        return np.asarray(g)[..., None] * p

    def hess_phi(self, p):
        p = self.check_chart(p)
        if self.kind == "user-sampled-grid":
            spl = self._grid[0]
            a = spl.ev(p[..., 0], p[..., 1], dx=2)
            b = spl.ev(p[..., 0], p[..., 1], dx=1, dy=1)
            c = spl.ev(p[..., 0], p[..., 1], dy=2)
            return np.stack([np.stack([a, b], -1), np.stack([b, c], -1)], -2)
        _, g, k = self._profiles(np.sum(p * p, axis=-1))
        N = p.shape[-1]
        g = np.asarray(g)[..., None, None]
        k = np.asarray(k)[..., None, None]
        return g * np.eye(N) + k * (p[..., :, None] * p[..., None, :])

    def exp2phi(self, p):
        return np.exp(2 * self.phi(p))

    def grad_exp2phi(self, p):
        return 2 * self.exp2phi(p)[..., None] * self.grad_phi(p)

    def hess_exp2phi(self, p):
        """Euclidean-chart Hessian of ``exp(2 phi)``: ``e^{2phi}(2 Hess phi + 4 dphi dphi)``."""
        e = self.exp2phi(p)[..., None, None]
        gp = self.grad_phi(p)
        return e * (2 * self.hess_phi(p) + 4 * gp[..., :, None] * gp[..., None, :])

    def laplacian_phi(self, p):
        """Euclidean-chart Laplacian of ``phi``."""
        return np.trace(self.hess_phi(p), axis1=-2, axis2=-1)

    # base-metric quantities --------------------------------------------------------
    def grad_norm2_base(self, p):
        """``|grad phi|^2`` measured in the base metric."""
        gp = self.grad_phi(p)
        n2 = np.sum(gp * gp, axis=-1)
        if self.base_K > 0:
            n2 = n2 * np.exp(-2 * self.base_chart_factor().phi(p))
        return n2

    def laplacian_base(self, p):
        """Laplace-Beltrami operator of the base metric applied to ``phi``."""
        lap = self.laplacian_phi(p)
        if self.base_K > 0:
            b = self.base_chart_factor()
            N = np.asarray(p).shape[-1]
            lap = np.exp(-2 * b.phi(p)) * (lap + (N - 2) * np.sum(b.grad_phi(p) * self.grad_phi(p), axis=-1))
        return lap


def schrodinger_data(cf: ConformalFactor, N: int, p):
    """Weight and potential of the conformally transformed Laplacian.

    Returns ``(rho, V)`` with ``rho = exp(2 phi)`` and
    ``V = (N-2)^2/4 |grad phi|^2 + (N-2)/2 Lap phi`` in the base metric.
    """
    if N < 2:
        raise PreconditionError("N must be >= 2")
    p = np.asarray(p, dtype=float)
    rho = cf.exp2phi(p)
    V = (N - 2) ** 2 / 4 * cf.grad_norm2_base(p) + (N - 2) / 2 * cf.laplacian_base(p)
    return rho, V


def scalar_curvature(cf: ConformalFactor, N: int, base: SpaceForm, p):
    """Scalar curvature of ``exp(2 phi) g`` where ``g`` is the base metric."""
    if N < 2:
        raise PreconditionError("N must be >= 2")
    if abs(base.K - cf.base_K) > 1e-14 * max(1.0, base.K):
        raise ChartError("base space does not match the factor's base metric")
    Rg = N * (N - 1) * base.K
    return np.exp(-2 * cf.phi(p)) * (Rg - 2 * (N - 1) * cf.laplacian_base(p)
                                     - (N - 1) * (N - 2) * cf.grad_norm2_base(p))


def schrodinger_V_from_curvature(cf: ConformalFactor, N: int, p):
    """Potential via ``-(N-2)/(4(N-1)) (e^{2phi} R~ - R_g)``; an independent route."""
    base = cf.base_space(N)
    c = (N - 2) / (4 * (N - 1))
    Rt = scalar_curvature(cf, N, base, p)
    return -c * cf.exp2phi(p) * Rt + c * base.scalar_curvature


def _chart_total(cf: ConformalFactor):
    """Callables for the total factor relative to the Euclidean chart."""
    b = cf.base_chart_factor()

    def grad(p):
        return cf.grad_phi(p) + b.grad_phi(p)

    return grad


def conformal_hessian(cf: ConformalFactor, F_grad: Callable, F_hess: Callable, p,
                      chart_base: bool = True):
    """Hessian of a scalar field in the conformal metric.

    ``Hess_g~ F = Hess_g F - (dphi dF + dF dphi) + <grad phi, grad F> g``,
    returned as chart components.  ``F_grad``/``F_hess`` give the Euclidean
    chart gradient and Hessian of ``F``.  With ``chart_base`` the factor is
    composed with its base-chart factor so the reference metric is the flat
    chart metric (this is exact since conformal factors compose).
    """
    p = np.asarray(p, dtype=float)
    gF = np.asarray(F_grad(p), dtype=float)
    HF = np.asarray(F_hess(p), dtype=float)
    gphi = _chart_total(cf)(p) if chart_base else cf.grad_phi(p)
    sym = np.outer(gphi, gF)
    return HF - (sym + sym.T) + float(gphi @ gF) * np.eye(len(p))


def metric_hessian_eigs(cf: ConformalFactor, F_grad: Callable, F_hess: Callable, p):
    """Eigenvalues of ``Hess F`` for the metric ``exp(2 phi) g_E`` (relative to that metric)."""
    H = conformal_hessian(cf, F_grad, F_hess, p, chart_base=False)
    return np.linalg.eigvalsh(H) * float(np.exp(-2 * cf.phi(p)))
