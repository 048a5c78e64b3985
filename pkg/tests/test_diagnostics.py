import numpy as np
import pytest

from bifluid_lab import spectral_ops as so
from bifluid_lab.constitutive import TruncationKit
from bifluid_lab.diagnostics import (RefinementStudy, bog_exponent, common_times,
                                     continuity_residual, covariance, effective_viscous_flux,
                                     fitted_slope, oscillation_defect, oscillation_defect_sup,
                                     pressure_integrability, renorm_residual, s_transport_defect,
                                     time_integral, truncation_levels)
from bifluid_lab.errors import ConfigError, DomainError
from bifluid_lab.solver import Trajectory, default_config, make_initial, prepare_initial, run


def simulate(recipe="smooth_wave", **overrides):
    params = {k: overrides.pop(k) for k in list(overrides) if k in ("c", "u_amp", "rho")}
    cfg = default_config(**{"t_end": 0.1, **overrides})
    st = prepare_initial(*make_initial(recipe, cfg.grid, cfg.region, **params), cfg)
    return cfg, run(cfg, st).trajectory


@pytest.fixture(scope="module")
def smooth():
    return simulate()


def shifted(traj, c):
    return Trajectory(traj.grid, states=[s.replace(rho=s.rho + c) for s in traj])


# --- renormalized residuals ------------------------------------------------------

def test_constant_renormalization_is_noise(smooth):
    _, traj = smooth
    res = renorm_residual(traj, lambda r: 3.0 + 0 * r, lambda r: 0 * r)
    assert np.max(res) <= 1e-10


def test_identity_matches_continuity_residual(smooth):
    cfg, traj = smooth
    a = renorm_residual(traj, lambda r: r, lambda r: np.ones_like(r), epsilon=cfg.epsilon)
    b = continuity_residual(traj, cfg.epsilon)
    assert np.allclose(a, b, rtol=1e-10, atol=1e-13)


def test_truncation_above_max_is_identity(smooth):
    cfg, traj = smooth
    kit = TruncationKit(10.0)
    a = renorm_residual(traj, kit.T, kit.T_prime, epsilon=cfg.epsilon)
    b = renorm_residual(traj, lambda r: r, lambda r: np.ones_like(r), epsilon=cfg.epsilon)
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(b)


def test_identity_residual_decreases_with_dt():
    means = []
    dts = [0.02, 0.01, 0.005]
    for dt in dts:
        cfg, traj = simulate(dt=dt, t_end=0.2)
        means.append(np.mean(continuity_residual(traj, cfg.epsilon)[1:-1]))
    assert fitted_slope(dts, means) >= 1.0 - 0.05


def test_two_density_form_with_b_equal_Z(smooth):
    cfg, traj = smooth
    a = renorm_residual(traj, lambda r, z: z, lambda r, z: (0 * r, 1 + 0 * z),
                        form="two_density", epsilon=cfg.epsilon)
    b = continuity_residual(traj, cfg.epsilon, species=0)
    assert np.allclose(a, b, rtol=1e-10, atol=1e-13)


def test_transport_form_for_proportional_data():
    cfg, traj = simulate("proportional", c=[0.4])
    res = renorm_residual(traj, lambda s: s ** 2, lambda s: 2 * s, form="transport",
                          epsilon=cfg.epsilon)
    assert np.max(res) <= 1e-10


@pytest.mark.filterwarnings("ignore:invalid value")
def test_undefined_map_rejected(smooth):
    _, traj = smooth
    with pytest.raises(DomainError, match="not finite"):
        renorm_residual(traj, lambda r: np.log(r - 10.0), lambda r: 1 / (r - 10.0))
    with pytest.raises(DomainError):
        renorm_residual(traj, lambda r: r, form="bogus")


# --- s transport ---------------------------------------------------------------

def test_s_defect_self_zero(smooth):
    _, traj = smooth
    assert np.all(s_transport_defect(traj, traj) == 0)
    assert np.all(s_transport_defect(traj, traj, p=2) == 0)


def test_s_defect_proportional_twins():
    _, a = simulate("proportional", c=[0.4])
    _, b = simulate("proportional", c=[0.4], u_amp=0.1)
    assert np.max(s_transport_defect(a, b)) <= 1e-10


def test_cadence_mismatch(smooth):
    _, traj = smooth
    _, other = simulate(t_end=0.2)
    with pytest.raises(DomainError, match="cadence"):
        s_transport_defect(traj, other)
    a, b = common_times(traj, other)
    assert len(a) == len(b) == len(traj)


# --- integrability -----------------------------------------------------------------

def test_homogeneous_integrability():
    cfg, traj = simulate("homogeneous", rho=1.5, t_end=0.2)
    theta = 0.2
    rep = pressure_integrability(traj, theta, cfg.law, cfg.pressure_params)
    volume = (2 * np.pi) ** 2
    assert rep.rho_integral == pytest.approx(0.2 * volume * 1.5 ** (2 + theta), rel=1e-12)
    assert rep.delta_integral == pytest.approx(
        cfg.pressure_params.delta * 0.2 * volume * 1.5 ** (5 + theta), rel=1e-12)


def test_theta_out_of_range(smooth):
    cfg, traj = smooth
    with pytest.raises(DomainError, match="gamma_BOG"):
        pressure_integrability(traj, cfg.law.gamma, cfg.law, cfg.pressure_params)
    assert bog_exponent(2.0) == pytest.approx(1 / 3)


# --- effective viscous flux ---------------------------------------------------------

def test_flux_homogeneous_zero():
    cfg, traj = simulate("homogeneous", t_end=0.02)
    assert effective_viscous_flux(traj[-1], 2.0, cfg) == 0.0


def test_covariance_orthogonal_modes():
    g = so.TorusGrid(2, 16)
    x, y = g.coords
    assert abs(covariance(g, np.cos(x) + 5, np.sin(2 * y) + 1)) <= 1e-14
    assert covariance(g, np.cos(x), np.cos(x)) == pytest.approx(0.5)


def test_flux_invariant_under_constant_pressure(smooth):
    cfg, traj = smooth
    st = traj[-1]

    class Shifted:
        def __init__(self, law, c):
            self.law, self.c = law, c

        def evaluate(self, rho, Z):
            return self.law.evaluate(rho, Z) + self.c

    from bifluid_lab.constitutive import regularized_law
    base = regularized_law(cfg.pressure_params, cfg.law)
    a = effective_viscous_flux(st, 2.0, cfg, base)
    b = effective_viscous_flux(st, 2.0, cfg, Shifted(base, 7.0))
    assert b == pytest.approx(a, rel=1e-10, abs=1e-14)
    assert np.isfinite(a)


# --- oscillation defect ------------------------------------------------------------

def test_oscillation_defect_identical_zero(smooth):
    _, traj = smooth
    assert oscillation_defect(traj, traj, 2.0, 2.0) == 0.0


def test_oscillation_defect_constant_shift(smooth):
    _, traj = smooth
    c = 0.05
    val = oscillation_defect(traj, shifted(traj, c), 10.0, 2.0)
    t_end = traj.times[-1]
    assert val == pytest.approx(c ** 3 * t_end * (2 * np.pi) ** 2, rel=1e-10)


def test_truncation_levels(smooth):
    _, traj = smooth
    ks = truncation_levels(traj)
    assert len(ks) == 5 and ks[0] > 1
    assert np.allclose(np.diff(np.log2(ks)), 1.0)
    assert oscillation_defect_sup(traj, traj, 2.0) == 0.0


def test_time_integral_trapezoid():
    assert time_integral([0, 1, 2], [0, 1, 2]) == 2.0
    assert time_integral([0.0], [5.0]) == 0.0


# --- studies --------------------------------------------------------------------------

def test_study_rejects_bad_ladder():
    with pytest.raises(ConfigError):
        RefinementStudy(base={}, axis="mu", values=[1, 2])
    with pytest.raises(ConfigError):
        RefinementStudy(base={}, axis="delta", values=[1e-2, 1e-1, 1e-3])
