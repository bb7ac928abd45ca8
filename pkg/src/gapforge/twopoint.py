"""Two-point functions along minimal geodesics and a finite-difference check
of the second-variation identity for ``Z``.

Fields are given in *model* coordinates: the chart itself for flat space,
and ambient coordinates of the sphere of radius ``R = 1/sqrt(K)`` in
``R^{N+1}`` otherwise.  The Riemannian gradient, Hessian and Laplacian of a
restricted ambient field ``F`` are obtained by projection::

    grad v = (I - n n^T) grad F,
    Hess v = Hess F |_T - (grad F . n / R) g,
    Lap v  = tr_T Hess F - N (grad F . n) / R,

with ``n = P / R`` the outward unit normal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import GeometryError, PreconditionError
from .geometry import SpaceForm, cs_K, geodesic_frame, sn_K, tn_K


@dataclass(frozen=True)
class ScalarField:
    """A smooth field on model coordinates with ambient gradient and Hessian."""

    value: Callable
    grad: Callable
    hess: Callable
    name: str = "field"

    @classmethod
    def polynomial(cls, c0: float, b, A, T=None, name="polynomial"):
        """``c0 + b.P + P^T A P / 2 + T[i,j,k] P_i P_j P_k / 6`` with symmetric ``A`` and ``T``."""
        b = np.asarray(b, dtype=float)
        A = np.asarray(A, dtype=float)
        A = (A + A.T) / 2
        if T is None:
            T = np.zeros((len(b),) * 3)
        T = np.asarray(T, dtype=float)
        T = sum(np.transpose(T, p) for p in
                [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]) / 6

        def value(P):
            P = np.asarray(P, dtype=float)
            return float(c0 + b @ P + 0.5 * P @ A @ P + np.einsum("ijk,i,j,k", T, P, P, P) / 6)

        def grad(P):
            P = np.asarray(P, dtype=float)
            return b + A @ P + 0.5 * np.einsum("ijk,j,k->i", T, P, P)

        def hess(P):
            P = np.asarray(P, dtype=float)
            return A + np.einsum("ijk,k->ij", T, P)

        return cls(value, grad, hess, name)

    @classmethod
    def random_cubic(cls, dim: int, rng: np.random.Generator, scale: float = 1.0):
        return cls.polynomial(rng.normal(), scale * rng.normal(size=dim),
                              scale * rng.normal(size=(dim, dim)),
                              scale * rng.normal(size=(dim, dim, dim)), name="random-cubic")

    @classmethod
    def linear(cls, b):
        b = np.asarray(b, dtype=float)
        return cls.polynomial(0.0, b, np.zeros((len(b), len(b))), name="linear")

    @classmethod
    def half_square_norm(cls, dim: int, sign: float = -1.0):
        """``sign * |P|^2 / 2``."""
        return cls.polynomial(0.0, np.zeros(dim), sign * np.eye(dim), name="half-square-norm")

    @classmethod
    def height(cls, dim: int, axis: int = -1):
        b = np.zeros(dim)
        b[axis] = 1.0
        return cls.polynomial(0.0, b, np.zeros((dim, dim)), name="height")


class TwoPointContext:
    """A space form plus a scalar field ``v``; Riemannian derivatives on demand."""

    def __init__(self, space: SpaceForm, v: ScalarField):
        self.space = space
        self.v = v

    # Riemannian calculus of v in model coordinates -----------------------------------
    def _normal(self, P):
        return P / self.space.radius

    def grad(self, P):
        return self.space.project_tangent(P, self.v.grad(P))

    def hess_bilinear(self, P, a, b):
        H = float(a @ self.v.hess(P) @ b)
        if self.space.is_sphere:
            H -= float(self.v.grad(P) @ self._normal(P)) / self.space.radius * float(a @ b)
        return H

    def laplacian(self, P):
        H = self.v.hess(P)
        if not self.space.is_sphere:
            return float(np.trace(H))
        n = self._normal(P)
        Pt = np.eye(len(P)) - np.outer(n, n)
        return float(np.trace(Pt @ H)) - self.space.N * float(self.v.grad(P) @ n) / self.space.radius

    def W(self, P):
        """``Lap v + |grad v|^2``: equals ``V - lam rho`` when ``v = log u1``."""
        g = self.grad(P)
        return self.laplacian(P) + float(g @ g)

    # two-point forms ---------------------------------------------------------------
    def Z_model(self, X, Y):
        d, tX, tY = self.space.unit_tangents(X, Y)
        return float(self.grad(Y) @ tY - self.grad(X) @ tX)

    def F_model(self, field_grad: Callable, X, Y):
        d, tX, tY = self.space.unit_tangents(X, Y)
        return float(field_grad(Y) @ tY - field_grad(X) @ tX)

    def dir_derivative(self, f: Callable, P, u, h):
        """Central difference of ``f`` along the geodesic through ``P`` with velocity ``u``."""
        ex = self.space.exp
        return (f(ex(P, h * u)) - f(ex(P, -h * u))) / (2 * h)


@dataclass
class TwoPointForms:
    Z: float
    F: float
    C: dict


def two_point_forms(ctx: TwoPointContext, x, y, fields: Optional[dict] = None) -> TwoPointForms:
    """``Z(x, y)``, ``F_{grad v}(x, y)`` and ``C_f(x, y)`` for the named ``fields``.

    ``Z`` and ``F_{grad v}`` coincide by definition; both are returned so the
    evaluators can be cross-checked.  ``x`` and ``y`` are chart points.
    """
    fr = geodesic_frame(ctx.space, x, y)
    Z = ctx.Z_model(fr.X, fr.Y)
    F = ctx.F_model(ctx.grad, fr.X, fr.Y)
    C = {}
    for name, f in (fields or {}).items():
        C[name] = float(f(fr.X) + f(fr.Y))
    return TwoPointForms(Z, F, C)


@dataclass
class IdentityCheck:
    lhs: float
    rhs: float
    residual: float
    residual_half: float
    residual_rich: float
    order: float
    h: float


def _identity_sides(ctx: TwoPointContext, fr, h: float):
    sp = ctx.space
    N = sp.N
    K = sp.K
    X, Y, d = fr.X, fr.Y, fr.d
    ex = sp.exp
    Zf = ctx.Z_model

    def varied(ux, uy, r):
        return Zf(ex(X, r * ux), ex(Y, r * uy))

    Z0 = Zf(X, Y)
    lhs = 0.0
    for i in range(N):
        ux = fr.frame_x[:, i]
        uy = fr.frame_y[:, i] if i < N - 1 else -fr.frame_y[:, i]
        lhs += (varied(ux, uy, h) - 2 * Z0 + varied(ux, uy, -h)) / (h * h)

    t = tn_K(K, d / 2)
    eN_x, eN_y = fr.frame_x[:, -1], -fr.frame_y[:, -1]
    dEN = (varied(eN_x, eN_y, h) - varied(eN_x, eN_y, -h)) / (2 * h)
    gx, gy = ctx.grad(X), ctx.grad(Y)
    dgrad = (varied(gx, gy, h) - varied(gx, gy, -h)) / (2 * h)
    CW = ctx.W(X) + ctx.W(Y)
    FW = (ctx.dir_derivative(ctx.W, Y, fr.frame_y[:, -1], h)
          - ctx.dir_derivative(ctx.W, X, fr.frame_x[:, -1], h))
    vx = fr.frame_x.T @ gx
    vy = fr.frame_y.T @ gy
    rhs = (-2 * t * dEN - 2 * dgrad + (N - 1) * (K - t * t) * Z0 - 2 * t * CW + FW
           + 2 * t * (vx[-1] ** 2 + vy[-1] ** 2)
           + 2 / float(sn_K(K, d)) * float(np.sum((vy[:-1] - vx[:-1]) ** 2)))
    return lhs, rhs


def hessian_identity_residual(ctx: TwoPointContext, x, y, h: Optional[float] = None) -> IdentityCheck:
    """Finite-difference check of the second-variation identity for ``Z``.

    The left side sums second central differences of ``Z`` along the
    endpoint variations ``E_i = e_i + e_i`` (``i < N``) and
    ``E_N = e_N - e_N``; first-derivative terms on the right use central
    differences too, and ``V - lam rho`` is replaced by ``W = Lap v + |grad v|^2``.

    Returns the residual at ``h`` and ``h/2``, their Richardson combination
    and the observed order ``log2(res(h)/res(h/2))``.
    """
    fr = geodesic_frame(ctx.space, x, y)
    if h is None:
        h = 1e-3 * min(1.0, fr.d)
    if h > 0.1 * fr.d:
        raise PreconditionError("finite-difference step too large for this pair")
    if ctx.space.is_sphere and fr.d + 2 * h >= np.pi * ctx.space.radius / 2 * 2 * 0.999:
        raise GeometryError("pair too close to antipodal")
    l1, r1 = _identity_sides(ctx, fr, h)
    l2, r2 = _identity_sides(ctx, fr, h / 2)
    e1, e2 = l1 - r1, l2 - r2
    rich = (4 * e2 - e1) / 3
    order = float(np.log2(abs(e1) / abs(e2))) if e2 != 0 and e1 != 0 else float("nan")
    return IdentityCheck(l1, r1, abs(e1), abs(e2), abs(rich), order, h)
