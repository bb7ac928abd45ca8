import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapforge.errors import PreconditionError
from gapforge.geomkernel import (ConformalFactor, SpaceForm, cs_K, geodesic_frame, hyperbolic_distance,
                                 scalar_curvature, schrodinger_data, sn_K, tn_K, trig_K)

curv = st.floats(0.0, 4.0)


@given(curv, st.floats(-0.7, 0.7))
def test_trig_identities(K, u):
    s = u * (math.pi / (2 * math.sqrt(K)) if K > 0 else 1.0)
    c, sn, t = trig_K(K, s)
    assert c * c + K * sn * sn == pytest.approx(1.0, abs=1e-12)
    if K > 0:
        assert t == pytest.approx(K * sn / c, rel=1e-12, abs=1e-14)
    else:
        assert t == 0.0 and sn == s


def test_trig_flat_limit():
    s = np.linspace(-1, 1, 7)
    assert np.allclose(sn_K(1e-12, s), s, atol=1e-10)
    assert np.allclose(cs_K(0.0, s), 1.0)


def test_tn_pole_and_negative_curvature():
    with pytest.raises(PreconditionError):
        tn_K(1.0, math.pi / 2)
    with pytest.raises(PreconditionError):
        sn_K(-1.0, 0.3)


@pytest.mark.parametrize("space", [SpaceForm(2), SpaceForm(3), SpaceForm(2, 1.0, "sphere-stereographic"),
                                   SpaceForm(3, 2.0, "sphere-stereographic")])
def test_exp_log_and_mirror(space, rng):
    for _ in range(20):
        x, y = rng.uniform(-0.6, 0.6, (2, space.N))
        X, Y = space.to_model(x), space.to_model(y)
        assert np.allclose(space.to_chart(X), x, atol=1e-12)
        v = space.log(X, Y)
        assert np.allclose(space.exp(X, v), Y, atol=1e-10)
        assert np.linalg.norm(v) == pytest.approx(space.distance(X, Y), rel=1e-10)
        w = space.project_tangent(X, rng.normal(size=space.model_dim))
        m = space.mirror(X, Y, w)
        assert np.linalg.norm(m) == pytest.approx(np.linalg.norm(w), rel=1e-10)
        # the mirror sends the geodesic direction at x to the reversed one at y
        _, ex, ey = space.unit_tangents(X, Y)
        assert np.allclose(space.mirror(X, Y, ex), -ey, atol=1e-10)


def test_geodesic_frame_orthonormal(rng):
    sp = SpaceForm(3, 1.0, "sphere-stereographic")
    fr = geodesic_frame(sp, [0.1, -0.2, 0.3], [-0.3, 0.2, 0.1])
    G = fr.frame_x.T @ fr.frame_x
    assert np.allclose(G, np.eye(3), atol=1e-12)
    assert np.allclose(fr.point(fr.half), fr.Y, atol=1e-10)
    assert np.allclose(fr.frame_y.T @ fr.frame_y, np.eye(3), atol=1e-12)


def test_hyperbolic_distance_from_origin():
    for r in (0.1, 0.5, 0.9):
        assert hyperbolic_distance(np.zeros(2), np.array([r, 0.0])) == pytest.approx(2 * math.atanh(r))


@pytest.mark.parametrize("N", [2, 3, 5])
def test_poincare_scalar_curvature(N, rng):
    p = rng.uniform(-0.4, 0.4, (5, N))
    R = scalar_curvature(ConformalFactor.poincare(), N, SpaceForm(N), p)
    assert np.allclose(R, -N * (N - 1), rtol=1e-9)


def test_sphere_chart_scalar_curvature(rng):
    p = rng.uniform(-0.5, 0.5, (4, 3))
    R = scalar_curvature(ConformalFactor.sphere_chart(1.0), 3, SpaceForm(3), p)
    assert np.allclose(R, 6.0, rtol=1e-9)


def test_schrodinger_data_flat_weight_is_trivial(rng):
    rho, V = schrodinger_data(ConformalFactor.flat(), 3, rng.uniform(-1, 1, (4, 3)))
    assert np.allclose(rho, 1.0) and np.allclose(V, 0.0)


def test_space_form_validation():
    with pytest.raises(PreconditionError):
        SpaceForm(1)
    with pytest.raises(PreconditionError):
        SpaceForm(2, 1.0)
    with pytest.raises(PreconditionError):
        SpaceForm(2, -1.0, "sphere-stereographic")
