import math

import numpy as np
import pytest

from gapforge.diffusion import (DiffusionConfig, drift_audit, noise_block, phi_decay_audit, predicted_xi_drift,
                                simulate_coupled)
from gapforge.domains import Domain
from gapforge.errors import PreconditionError
from gapforge.geometry import SpaceForm
from gapforge.model1d import Modulus1D, shoot_1d
from gapforge.verify import gaussian_drift_config, square_config


def free_cfg(seed=0, M=500, T=0.1, **kw):
    a = np.linspace(0.3, 1.0, M)
    x0 = np.column_stack([-a, np.zeros(M)])
    return DiffusionConfig(SpaceForm(2), Domain.box([-50, -50], [50, 50]), x0, -x0, dt=1e-3, T_max=T, M=M,
                           seed=seed, record_increments=True, **kw)


def test_noise_blocks_are_reproducible_and_distinct():
    a = noise_block(3, 10, 0, 100, 2)
    assert np.array_equal(a, noise_block(3, 10, 0, 100, 2))
    assert not np.array_equal(a, noise_block(3, 10, 1, 100, 2))
    assert not np.array_equal(a, noise_block(4, 10, 0, 100, 2))
    assert a.shape == (100, 2)


def test_config_validation():
    with pytest.raises(PreconditionError):
        free_cfg(alpha=2)
    with pytest.raises(PreconditionError):
        free_cfg(eps_couple=1e-4)
    assert free_cfg().n_steps == 100


def test_same_seed_same_paths():
    a = simulate_coupled(free_cfg(seed=5, M=200))
    b = simulate_coupled(free_cfg(seed=5, M=200))
    c = simulate_coupled(free_cfg(seed=6, M=200))
    assert np.array_equal(a.tau, b.tau) and np.array_equal(a.inc_dxi, b.inc_dxi)
    assert not np.array_equal(a.inc_dxi, c.inc_dxi)


def test_free_mirror_coupling_has_no_drift():
    cfg = free_cfg(M=2000)
    rep = drift_audit(simulate_coupled(cfg), cfg)
    assert rep.worst_z < 4
    assert rep.qv_rate == pytest.approx(2.0, rel=0.1)


def test_gaussian_drift_slope():
    cfg = gaussian_drift_config(seed=1)
    rep = drift_audit(simulate_coupled(cfg), cfg)
    assert -2.2 <= rep.slope <= -1.8
    assert rep.n_used >= 100_000


def test_prediction_formula():
    cfg = free_cfg(alpha=1)
    assert predicted_xi_drift(cfg, np.array([0.3]), np.array([0.5]))[0] == pytest.approx(0.5)
    sph = DiffusionConfig(SpaceForm(3, 1.0, "sphere-stereographic"),
                          Domain.ball([0, 0, 0], 0.8, chart="sphere-stereographic"),
                          [-0.2, 0, 0], [0.2, 0, 0], alpha=1, M=10)
    xi = np.array([0.4])
    assert predicted_xi_drift(sph, xi, np.zeros(1))[0] == pytest.approx(-4 * math.tan(0.4))


def test_square_run_couples_and_decays():
    cfg = square_config(seed=2, M=1000, T_max=5.0, checkpoints=(0.0, 0.02, 0.05, 0.1))
    st = simulate_coupled(cfg)
    assert st.coupled_fraction == 1.0 and st.n_excluded == 0
    spec = shoot_1d(Modulus1D.quadratic(math.sqrt(2)))
    rep = phi_decay_audit(cfg, spec, require_audit=False, stats=st)
    assert rep.ok
    assert rep.rate == pytest.approx(1.5 * math.pi ** 2, rel=1e-6)


def test_decay_audit_requires_alpha_zero():
    spec = shoot_1d(Modulus1D.quadratic(math.sqrt(2)))
    cfg = square_config(M=10, T_max=0.01)
    cfg.alpha = 1
    with pytest.raises(PreconditionError):
        phi_decay_audit(cfg, spec, require_audit=False)


def test_csv_export(tmp_path):
    st = simulate_coupled(free_cfg(M=20, T=0.01))
    st.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "trajectory,tau,censored,excluded" and len(lines) == 21
