import math

import numpy as np
import pytest

from gapforge import oracles
from gapforge.domains import Domain
from gapforge.eigsolve import (appendix_collapse, euclidean_rectangle_gap, height_bounds, hyperbolic_ball_gap,
                               log_concavity_audit, ratio_equation_residual, solve_weighted_2d)
from gapforge.errors import PreconditionError
from gapforge.model1d import Modulus1D, shoot_1d


@pytest.fixture(scope="module")
def square():
    return solve_weighted_2d(Domain.box([0, 0], [1, 1]), h=1 / 32)


def test_unit_square_anchor(square):
    l1, l2, g = square.best()
    assert l1 == pytest.approx(2 * math.pi ** 2, rel=1e-4)
    assert g == pytest.approx(3 * math.pi ** 2, rel=1e-3)


def test_eigenfunctions_normalised_and_positive(square):
    assert np.all(square.u1 > 0)
    h = square.h
    assert h * h * np.sum(square.u1 ** 2) == pytest.approx(1.0, rel=1e-10)
    assert abs(h * h * np.sum(square.u1 * square.u2)) < 1e-8


def test_constant_weight_scales_eigenvalues():
    dom = Domain.box([0, 0], [1, 1])
    a = solve_weighted_2d(dom, h=1 / 16, extrapolate=False)
    b = solve_weighted_2d(dom, rho=4.0, h=1 / 16, extrapolate=False)
    assert b.lam1 == pytest.approx(a.lam1 / 4, rel=1e-10)


def test_disk_matches_bessel_zero():
    from scipy.special import jn_zeros
    l1 = solve_weighted_2d(Domain.ball([0, 0], 1.0), h=1 / 32).best()[0]
    assert l1 == pytest.approx(jn_zeros(0, 1)[0] ** 2, rel=2e-3)


def test_hyperbolic_ball_against_radial_oracle():
    l1, l2, _ = hyperbolic_ball_gap(0.5, h=1 / 32)
    o1, o2 = oracles.hyperbolic_disk_eigenvalues(0.5)
    assert l1 == pytest.approx(o1, rel=5e-3)
    assert l2 == pytest.approx(o2, rel=1e-2)
    assert l1 >= 0.25
    with pytest.raises(PreconditionError):
        hyperbolic_ball_gap(1.2)


def test_ratio_equation_small(square):
    assert ratio_equation_residual(square) < 0.05


def test_square_ground_state_is_log_concave(square):
    spec = shoot_1d(Modulus1D.quadratic(math.sqrt(2)))
    au = log_concavity_audit(square, spec, pairs=500, seed=1)
    assert au.ok and au.n_pairs == 500


def test_appendix_collapse_trends():
    rows = appendix_collapse(0.8, (0.2, 0.1, 0.05), cells=10)
    logs = [r.log_gap for r in rows]
    assert logs[0] > logs[1] > logs[2]
    # the flat-weight control gap depends only on the longer side
    assert euclidean_rectangle_gap(0.8, 0.1) == euclidean_rectangle_gap(0.8, 0.05)


def test_height_ratio_limit():
    hb = height_bounds(0.8, 1e-6)
    assert hb["ratio"] == pytest.approx(hb["ratio_limit"], rel=1e-6)
