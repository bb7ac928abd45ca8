import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapforge import oracles
from gapforge.errors import PreconditionError
from gapforge.model1d import (Modulus1D, closed_form_gap_bound, eigenvalue_bracket, interior_mask,
                              log_derivative_psi, neumann_ratio_eigen, riccati_compare, shoot_1d, solve_1d)


def test_flat_interval_is_exact():
    l1, l2, g = solve_1d(Modulus1D.quadratic(math.pi), 400).best()
    assert l1 == pytest.approx(1.0, abs=1e-6)
    assert l2 == pytest.approx(4.0, abs=1e-6)
    assert g == pytest.approx(3.0, abs=1e-6)


def test_richardson_improves_order():
    m = Modulus1D.quadratic(2.0, sigma=1.5, C=0.7, V=0.3)
    ref = oracles.model_eigenvalues(2.0, 1.5, 0.7, 0.3)
    sp = solve_1d(m, 100)
    raw = abs(sp.lam1 - ref[0])
    rich = abs(sp.best()[0] - ref[0])
    assert rich < raw / 50


@given(st.floats(0.0, 4.0), st.floats(0.2, 5.0), st.floats(0.5, 4.0), st.floats(0.0, 5.0))
def test_spectrum_inside_bracket_and_above_closed_form(sigma, C, D, V):
    m = Modulus1D.quadratic(D, sigma=sigma, C=C, V=V)
    l1, l2, g = solve_1d(m, 200).best()
    for k, lam in ((1, l1), (2, l2)):
        lo, hi = eigenvalue_bracket(m, k)
        # constant weight makes the bracket tight, so allow discretization error
        assert lo * (1 - 1e-8) <= lam <= hi * (1 + 1e-8)
    cf = closed_form_gap_bound(m)
    assert g >= cf - 1e-8 * abs(cf) - 1e-9


def test_psi_is_odd_and_decreasing():
    sp = solve_1d(Modulus1D.quadratic(2.0, sigma=1.0, C=1.0), 200)
    s, psi = log_derivative_psi(sp)
    assert np.allclose(psi, -psi[::-1], atol=1e-12)
    inner = interior_mask(sp)
    assert np.all(np.diff(psi[inner]) < 0)


def test_neumann_ratio_matches_gap_for_constant_weight():
    sp = solve_1d(Modulus1D.quadratic(math.pi), 400)
    assert neumann_ratio_eigen(sp) == pytest.approx(3.0, rel=1e-6)


def test_riccati_comparison_holds_at_threshold():
    m = Modulus1D.quadratic(1.5, sigma=2.0, C=0.5)
    rmin, rmax = m.rho_bounds()
    ok, viol = riccati_compare(m, math.sqrt(rmax / rmin) * m.D)
    assert ok and viol < 0
    with pytest.raises(PreconditionError):
        riccati_compare(m, 0.5 * m.D)


def test_shooting_matches_fd_and_oracle():
    m = Modulus1D.quadratic(2.5, sigma=0.8, C=1.2, V=0.4)
    sh = shoot_1d(m)
    ref = oracles.model_eigenvalues(2.5, 0.8, 1.2, 0.4)
    assert sh.lam1 == pytest.approx(ref[0], rel=1e-8)
    assert sh.lam2 == pytest.approx(ref[1], rel=1e-8)
    assert sh.gap == pytest.approx(solve_1d(m, 400).best()[2], rel=1e-6)


def test_shooting_resolves_tiny_gaps():
    # coefficients of the size met in horoconvex moduli: the large constant
    # potential pushes the eigenfunctions into the heavy ends, and the two
    # wells tunnel so weakly that lam2 - lam1 is far below double resolution
    m = Modulus1D.quadratic(2.0, sigma=6.4e6, C=1.0e5, V=6.3e8)
    sh = shoot_1d(m)
    assert math.isfinite(sh.log_gap)
    assert sh.log_gap < -1000
    assert sh.gap == 0.0
    assert sh.branch == "wronskian"


def test_negative_potential_rejected():
    with pytest.raises(PreconditionError):
        closed_form_gap_bound(Modulus1D.quadratic(1.0, V=-0.5))
    with pytest.raises(PreconditionError):
        eigenvalue_bracket(Modulus1D.quadratic(1.0), 0)
