import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapforge.geometry import SpaceForm
from gapforge.twopoint import ScalarField, TwoPointContext, hessian_identity_residual, two_point_forms

pts = st.lists(st.floats(-0.8, 0.8), min_size=2, max_size=2)


@given(pts, pts)
def test_Z_of_concave_quadratic_is_minus_distance(x, y):
    x, y = np.array(x), np.array(y)
    if np.linalg.norm(x - y) < 1e-3:
        return
    f = two_point_forms(TwoPointContext(SpaceForm(2), ScalarField.half_square_norm(2)), x, y)
    assert f.Z == pytest.approx(-np.linalg.norm(x - y), abs=1e-12)
    assert f.Z == pytest.approx(f.F, abs=1e-12)


def test_linear_field_has_zero_Z():
    ctx = TwoPointContext(SpaceForm(3), ScalarField.linear([1.0, -2.0, 0.5]))
    f = two_point_forms(ctx, [0.1, 0.2, 0.0], [-0.3, 0.0, 0.4])
    assert f.Z == pytest.approx(0.0, abs=1e-13)


def test_C_forms_are_sums():
    ctx = TwoPointContext(SpaceForm(2), ScalarField.height(2))
    f = two_point_forms(ctx, [0.1, 0.2], [0.4, -0.1], fields={"one": lambda P: 1.0})
    assert f.C["one"] == 2.0


@pytest.mark.parametrize("space,dim", [(SpaceForm(2), 2), (SpaceForm(3), 3),
                                       (SpaceForm(2, 1.0, "sphere-stereographic"), 3)])
def test_second_variation_identity_converges(space, dim):
    rng = np.random.default_rng(7)
    r1 = r2 = 0.0
    for _ in range(8):
        ctx = TwoPointContext(space, ScalarField.random_cubic(dim, rng, 0.5))
        x = rng.uniform(-0.4, 0.4, space.N)
        y = x + 0.4 * rng.normal(size=space.N) / math.sqrt(space.N)
        c = hessian_identity_residual(ctx, x, y, h=1e-3)
        assert c.residual <= 1e-4
        r1 += c.residual
        r2 += c.residual_half
    assert 1.6 <= math.log2(r1 / r2) <= 2.4
