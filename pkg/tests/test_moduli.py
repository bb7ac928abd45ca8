import math

import mpmath
import numpy as np
import pytest

from gapforge import goldens, oracles
from gapforge.conformal import ConformalFactor
from gapforge.domains import Domain
from gapforge.eigsolve import hyperbolic_ball_gap
from gapforge.moduli import (asymptotic_horoconvex_bound, conformally_flat_bound, explicit_horoconvex_bound,
                             horoconvex_gap_bound, horoconvex_sweep, s1xsn_modulus, sphere_deformation_bound,
                             thread_cap)


@pytest.mark.parametrize("N,D,s", goldens.EXPLICIT)
def test_explicit_golden(N, D, s):
    with mpmath.workdps(60):
        ref = mpmath.mpf(s)
        oracle, _ = oracles.explicit_bound_mp(N, D, dps=120)
        assert abs(oracle / ref - 1) < mpmath.mpf(10) ** -45
        assert abs(explicit_horoconvex_bound(N, D).mp / ref - 1) < 1e-12


@pytest.mark.parametrize("N,D,s", goldens.ASYMPTOTIC)
def test_asymptotic_golden(N, D, s):
    with mpmath.workdps(60):
        ref = mpmath.mpf(s)
        assert abs(oracles.asymptotic_bound_mp(N, D, dps=120) / ref - 1) < mpmath.mpf(10) ** -45
        assert abs(asymptotic_horoconvex_bound(N, D).mp / ref - 1) < 1e-12


def test_closed_form_value_underflows_gracefully():
    v = explicit_horoconvex_bound(10, 8)
    assert v.value == 0.0 and v.log < -1e14


def test_horoconvex_report_is_consistent():
    rep = horoconvex_gap_bound(2, 1.0, n=500)
    assert rep.positive and not rep.vacuous
    b, lb = rep.recompute()
    assert lb == pytest.approx(rep.log_bound, rel=1e-12)
    d = rep.to_dict()
    assert d["positive"] is True and d["N"] == 2
    assert list(d)[:3] == ["pipeline", "branch", "N"]


def test_horoconvex_bound_below_pde_gap():
    rep = horoconvex_gap_bound(2, 1.0, n=500)
    R_E = math.tanh(1.0 / 4)
    gap = hyperbolic_ball_gap(R_E, h=R_E / 16)[2]
    assert rep.bound <= gap


def test_bound_decreases_with_diameter():
    logs = [horoconvex_gap_bound(3, D, n=300).log_bound for D in (0.5, 1.0, 2.0)]
    assert logs[0] > logs[1] > logs[2]


def test_sweep_independent_of_workers(monkeypatch):
    a = horoconvex_sweep([2, 3], [0.5, 1.0], n=200, threads=1)
    b = horoconvex_sweep([2, 3], [0.5, 1.0], n=200, threads=2)
    assert [r.log_bound for r in a] == [r.log_bound for r in b]
    monkeypatch.setenv("GAPFORGE_THREADS", "3")
    assert thread_cap() == 3


def test_conformally_flat_on_poincare_ball():
    rep = conformally_flat_bound(ConformalFactor.poincare(), Domain.ball([0, 0], 0.4, chart="poincare-disk"), 2,
                                 n=500)
    assert rep.positive
    assert rep.correction == 0.0  # N = 2 has no curvature-oscillation term


def test_concave_branch_for_flat_weight():
    rep = conformally_flat_bound(ConformalFactor.flat(), Domain.box([0, 0], [1, 1]), 2)
    assert rep.branch == "concave"
    assert rep.bound == pytest.approx(3 * math.pi ** 2 / 2, rel=1e-12)


def test_s1xsn_and_sphere_pipelines():
    rep = s1xsn_modulus(2, Domain.ball([2, 0], 0.5), n=500)
    assert rep.positive
    sph = sphere_deformation_bound(ConformalFactor.flat(1.0),
                                   Domain.ball([0, 0], 0.3, chart="sphere-stereographic"), 2, 1.0)
    assert sph.positive and sph.flags["side_conditions"]


def test_small_horoconvex_search_finds_admissible_radius():
    rep = sphere_deformation_bound(None, Domain.ball([0, 0], 0.1, chart="sphere-stereographic"), 2, 1.0,
                                   small_horoconvex=True)
    assert rep.positive and rep.branch == "small-horoconvex"
    assert rep.correction == 0.0  # both correction terms carry a factor N - 2


def test_inverse_square_hessian_eigenvalues():
    H = ConformalFactor.inverse_square().hess_exp2phi(np.array([[1.0, 0.0, 0.0]]))[0]
    assert np.allclose(np.linalg.eigvalsh(H), [-2.0, -2.0, 6.0])


def test_bound_vanishes_as_diameter_shrinks():
    logs = [horoconvex_gap_bound(2, D, n=300).log_bound for D in (0.5, 0.25, 0.125)]
    assert logs[0] > logs[1] > logs[2]
