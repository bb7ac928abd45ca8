import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapforge.domains import (Domain, circumradius_RE, diameters, horoconvexity_check, inradius_from_diameter,
                              sampled_hyperbolic_diameter)
from gapforge.errors import PreconditionError


def test_ball_diameters():
    D_E, D_H = diameters(Domain.ball([0, 0], 0.5, chart="poincare-disk"))
    assert D_E == pytest.approx(1.0)
    assert D_H == pytest.approx(4 * math.atanh(0.5), rel=1e-9)
    assert diameters(Domain.box([0, 0], [3, 4]))[1] is None


def test_sampled_diameter_agrees():
    dom = Domain.rectangle([0.1, 0.0], [0.3, 0.2], chart="poincare-disk")
    exact = diameters(dom)[1]
    approx = sampled_hyperbolic_diameter(dom)
    approx = approx[0] if isinstance(approx, tuple) else approx
    assert approx == pytest.approx(exact, rel=1e-6)


def test_contains_and_signed_distance():
    dom = Domain.box([0, 0], [1, 1])
    p = np.array([[0.5, 0.5], [1.5, 0.5], [0.1, 0.9]])
    assert list(dom.contains(p)) == [True, False, True]
    assert dom.signed_distance_lower(p)[0] == pytest.approx(0.5)


def test_polygon_contains():
    tri = Domain.polygon([[0, 0], [1, 0], [0, 1]])
    assert list(tri.contains(np.array([[0.2, 0.2], [0.8, 0.8]]))) == [True, False]


def test_horoconvexity():
    assert horoconvexity_check(Domain.ball([0, 0], 0.5, chart="poincare-disk"))
    assert not horoconvexity_check(Domain.rectangle([0, 0], [0.5, 0.05], chart="poincare-disk"))


@given(st.floats(0.05, 20.0))
def test_inradius_formula(D):
    r = inradius_from_diameter(D)
    assert r == pytest.approx((-1 + math.sqrt(D / 2 + 1)) ** 2, rel=1e-9, abs=1e-15)
    assert 0 < r < D / 2


@given(st.integers(2, 6), st.floats(0.1, 8.0))
def test_circumradius_in_unit_disk(N, D):
    R, _ = circumradius_RE(N, D)
    assert 0 < R < 1


def test_bad_domains():
    with pytest.raises(PreconditionError):
        inradius_from_diameter(0.0)
    with pytest.raises((PreconditionError, ValueError)):
        Domain.ball([0, 0], -1.0)
