import warnings

import numpy as np
import pytest

from bifluid_lab import spectral_ops as so
from bifluid_lab.errors import BlowUpError, ConfigError, DomainError
from bifluid_lab.solver import (CFLWarning, MixtureState, Trajectory, check_min_principle,
                                default_config, make_initial, prepare_initial, run, step)
from oracles import loglog_slope


@pytest.fixture(scope="module")
def cfg():
    return default_config()


def initial(cfg, recipe="smooth_wave", **kw):
    return prepare_initial(*make_initial(recipe, cfg.grid, cfg.region, **kw), cfg)


# --- configuration and initial data -------------------------------------------

def test_config_rejects_bad_viscosity():
    with pytest.raises(ConfigError, match="mu"):
        default_config(mu=0.0)
    with pytest.raises(ConfigError, match="lambda"):
        default_config(lam=-1.0)
    with pytest.raises(ConfigError):
        default_config(dt=0.0)


def test_prepare_homogeneous_unchanged(cfg):
    rho, Z, u = make_initial("homogeneous", cfg.grid, cfg.region, s=0.5)
    st = prepare_initial(rho, Z, u, cfg)
    assert np.all(st.rho == 1.0) and np.all(st.Z == 0.5) and np.all(st.u == 0.0)


def test_prepare_rejects_band_violation(cfg):
    rho, Z, u = make_initial("homogeneous", cfg.grid, cfg.region)
    with pytest.raises(DomainError, match="worst point"):
        prepare_initial(rho, 2.0 * rho[None], u, cfg)
    with pytest.raises(DomainError, match="positive"):
        prepare_initial(rho - 1.0, 0 * Z, u, cfg)


def test_band_limited_velocity_is_kept(cfg):
    rho, Z, u = make_initial("smooth_wave", cfg.grid, cfg.region)
    st = prepare_initial(rho, Z, u, default_config(N=so.total_modes(cfg.grid)))
    assert np.max(np.abs(st.u - u)) < 1e-13
    st = prepare_initial(rho, Z, u, cfg)
    assert np.max(np.abs(st.u - u)) < 1e-13  # sin modes with |xi| = 1 are retained


def test_smoothing_keeps_band(cfg):
    rho, Z, u = make_initial("random_band_limited", cfg.grid, cfg.region, kmax=6, seed=3)
    st = prepare_initial(rho, Z, u, cfg, smoothing=5)
    assert np.all(st.rho > 0)
    lo, hi = cfg.region.band_defects(st.rho, st.Z)
    assert np.max(lo) == 0 and np.max(hi) == 0


# --- single steps ---------------------------------------------------------------

def test_homogeneous_fixed_point(cfg):
    st = initial(cfg, "homogeneous")
    new = step(st, cfg)
    assert np.max(np.abs(new.rho - st.rho)) <= 1e-14
    assert np.max(np.abs(new.Z - st.Z)) <= 1e-14
    assert np.max(np.abs(new.u)) <= 1e-14


def test_shear_mode_dissipation():
    cfg = default_config(mu=1.0, lam=0.0, dt=1e-3, t_end=1e-3)
    g = cfg.grid
    rho, Z, _ = make_initial("homogeneous", g, cfg.region)
    u = np.stack([np.sin(g.coords[1]), np.zeros(g.shape)])
    res = run(cfg, prepare_initial(rho, Z, u, cfg))
    expected = cfg.dt * (2 * np.pi) ** 2 / 2
    assert res.ledger[-1].dissipation_cum == pytest.approx(expected, rel=2 * cfg.dt)


def test_zero_velocity_ledger(cfg):
    res = run(default_config(t_end=0.1), initial(cfg, "homogeneous"))
    assert all(row.dissipation_cum == 0.0 for row in res.ledger)
    assert np.max(np.abs(res.residuals)) <= 1e-12


# --- runs -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def smooth_run(cfg):
    return run(cfg, initial(cfg))


def test_mass_conservation(smooth_run):
    assert smooth_run.max_relative_mass_drift() <= 1e-12


def test_galerkin_orthogonality(smooth_run):
    assert max(smooth_run.galerkin_residuals) <= 1e-10


def test_band_monitor_clean(smooth_run):
    assert smooth_run.max_band_defect <= 1e-8
    assert all(m.passed for m in smooth_run.monitors)


def test_ledger_summands_nonnegative(smooth_run):
    for row in smooth_run.ledger:
        assert row.kinetic >= 0 and row.dissipation_cum >= 0 and row.eps_gradient_cum >= 0
        assert np.isfinite(row.residual)


def test_proportional_data_stay_proportional(cfg):
    c = default_config(t_end=1.0)
    res = run(c, initial(c, "proportional", c=[0.3]), keep_states=True)
    final = res.final
    assert final.step == 100
    assert np.max(np.abs(final.Z[0] - 0.3 * final.rho)) <= 1e-10


def test_min_principle_hand_built(cfg):
    st = initial(cfg, "homogeneous", s=0.5)
    Z = st.Z.copy()
    Z[0, 3, 4] = 1.1 * cfg.region.a_upper[0] * st.rho[3, 4]
    rec = check_min_principle(st.replace(Z=Z), cfg.region, cfg.grid)
    assert rec.upper_sup[0] == pytest.approx(0.1 * cfg.region.a_upper[0] * st.rho[3, 4])
    assert rec.worst_cell == (3, 4) and not rec.passed
    assert check_min_principle(st, cfg.region, cfg.grid).max_defect == 0.0


def test_cfl_warning():
    cfg = default_config(dt=0.05, t_end=0.05)
    with pytest.warns(CFLWarning):
        run(cfg, initial(cfg, u_amp=2.0))


def test_blow_up_reports_time(tmp_path):
    cfg = default_config(dt=2.0, t_end=20.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(BlowUpError) as info:
            run(cfg, initial(cfg, u_amp=3.0), out_dir=tmp_path)
    assert info.value.time > 0
    assert info.value.result.blowup is info.value
    assert (tmp_path / "ledger.csv").is_file()


def test_sbdf2_conserves_mass():
    cfg = default_config(scheme="sbdf2", t_end=0.2)
    res = run(cfg, initial(cfg))
    assert res.max_relative_mass_drift() <= 1e-12


def test_epsilon_consistency():
    eps = [0.1, 0.05, 0.025]
    finals = []
    for e in eps:
        c = default_config(epsilon=e, t_end=0.3)
        finals.append(run(c, initial(c), keep_states=False, check_galerkin=False).final)
    g = finals[0].rho.shape
    d = [np.sqrt(so.integrate(default_config().grid, (a.rho - b.rho) ** 2))
         for a, b in zip(finals, finals[1:])]
    assert np.all(np.isfinite(d)) and g == (32, 32)
    assert loglog_slope(eps[:-1], d) >= 0.8


def test_trajectory_round_trip(tmp_path, cfg):
    c = default_config(t_end=0.05, checkpoint_every=2)
    res = run(c, initial(c), out_dir=tmp_path)
    traj = res.trajectory
    assert traj.steps == [0, 2, 4, 5]
    back = Trajectory.load(tmp_path / "checkpoints")
    assert back.steps == traj.steps
    for a, b in zip(traj, back):
        assert np.array_equal(a.rho, b.rho) and np.array_equal(a.u, b.u)
        assert a.time == b.time
    with pytest.raises(FileNotFoundError):
        Trajectory.load(tmp_path / "missing")
    header = (tmp_path / "ledger.csv").read_text().splitlines()[0]
    assert header.startswith("step,time,kinetic,helmholtz,dissipation_cum")
