import numpy as np
import pytest

from bifluid_lab.bifluid import (BiFluidSystem, audit_bifluid, bifluid_table, build_q,
                                 effective_pressure, exponent_condition, hbi3_profile, power_phase,
                                 recover_phases, rho_plus_partials, solve_rho_plus)
from bifluid_lab.constitutive import AdmissibleRegion, decompose_pressure, eval_pressure
from bifluid_lab.errors import DomainError


def system(gp, gm, a_lower=0.0, a_upper=1.0, **kw):
    return BiFluidSystem(power_phase(gp, **kw), power_phase(gm),
                         AdmissibleRegion.single(a_lower, a_upper))


@pytest.fixture(scope="module")
def isentropic():
    return system(1.8, 1.2)


def test_q_examples():
    q, _ = build_q(power_phase(2), power_phase(1))
    assert q(3.0) == pytest.approx(9.0, rel=1e-15)
    q, qi = build_q(power_phase(1.5), power_phase(1.5))
    assert q(7.0) == pytest.approx(7.0, rel=1e-15)
    assert qi(7.0) == pytest.approx(7.0, rel=1e-15)
    q, qi = build_q(power_phase(3), power_phase(2))
    assert q(2.0) == pytest.approx(8 ** 0.5, rel=1e-14)
    assert qi(q(2.0)) == pytest.approx(2.0, rel=1e-14)


def test_q_with_affine_phase_uses_root_finder():
    sys = BiFluidSystem(power_phase(2.0, slope=0.5), power_phase(1.5, slope=1.0))
    s = np.logspace(-4, 4, 50)
    q = sys.q(s)
    assert np.allclose(sys.minus.evaluate(q), sys.plus.evaluate(s), rtol=1e-13)
    assert np.allclose(sys.q_inverse(q), s, rtol=1e-12)
    assert sys.q(0.0) == 0.0


def test_solve_rho_plus_examples():
    lin = system(1, 1)
    assert solve_rho_plus(lin, 1.0, 1.0) == pytest.approx(2.0, rel=1e-15)
    sys = system(1.8, 1.2)
    assert solve_rho_plus(sys, 3.0, 0.0) == 3.0
    assert solve_rho_plus(sys, 0.0, 2.0) == sys.q_inverse(2.0)
    assert solve_rho_plus(sys, 0.0, 0.0) == 0.0
    with pytest.raises(DomainError):
        solve_rho_plus(sys, -1.0, 0.0)


def _grid(n=50):
    rho = np.logspace(-3, 3, n)
    s = np.linspace(0.02, 1.0, n)
    R, S = np.meshgrid(rho, s, indexing="ij")
    return R, R * S


@pytest.mark.parametrize("gp,gm", [(1.8, 1.2), (2.0, 3.0), (3.0, 1.5)])
def test_implicit_residual(gp, gm):
    sys = system(gp, gm)
    R, Z = _grid()
    r = solve_rho_plus(sys, R, Z)
    q = sys.q(r)
    res = np.abs(r * q - q * R - Z * r)
    assert np.all(res <= 1e-12 * (r * q + 1))
    assert np.all(r >= R)


def test_partials_match_differences(isentropic):
    R, Z = _grid(20)
    dr, dz = rho_plus_partials(isentropic, R, Z)
    h_r, h_z = 1e-5 * R, 1e-5 * Z

    def f(a, b):
        return solve_rho_plus(isentropic, a, b)

    fd_r = (f(R + h_r, Z) - f(R - h_r, Z)) / (2 * h_r)
    fd_z = (f(R, Z + h_z) - f(R, Z - h_z)) / (2 * h_z)
    assert np.max(np.abs(dr - fd_r) / np.abs(fd_r)) <= 1e-6
    assert np.max(np.abs(dz - fd_z) / np.abs(fd_z)) <= 1e-6
    assert np.all((dr > 0) & (dr <= 1 + 1e-14)) and np.all(dz > 0)


def test_monotone_in_each_variable(isentropic):
    R, Z = _grid(30)
    r = solve_rho_plus(isentropic, R, Z)
    assert np.all(np.diff(r, axis=0) > 0)
    assert np.all(np.diff(r, axis=1) > 0)


def test_effective_pressure_examples():
    lin = effective_pressure(system(1, 1))
    assert eval_pressure(lin, 1.0, 1.0) == pytest.approx(2.0, rel=1e-15)
    assert eval_pressure(lin, 0.0, 0.0) == 0.0


def test_recover_phases_examples():
    lin = system(1, 1)
    ph = recover_phases(lin, 1.0, 1.0)
    assert ph.a_frac == pytest.approx(0.5) and ph.rho_plus == pytest.approx(2.0)
    assert ph.rho_minus == pytest.approx(2.0)
    sys = system(1.8, 1.2)
    ph = recover_phases(sys, 2.0, 0.0)
    assert ph.a_frac == 1.0 and ph.rho_plus == 2.0
    ph = recover_phases(sys, 0.0, 3.0)
    assert ph.a_frac == 0.0 and ph.rho_minus == 3.0
    ph = recover_phases(sys, 0.0, 0.0)
    assert (ph.a_frac, ph.rho_plus, ph.rho_minus) == (1.0, 0.0, 0.0)


def test_round_trip(isentropic):
    R, Z = _grid()
    ph = recover_phases(isentropic, R, Z)
    assert np.max(np.abs(ph.a_frac * ph.rho_plus - R) / R) <= 1e-10
    assert np.max(np.abs((1 - ph.a_frac) * ph.rho_minus - Z) / Z) <= 1e-10
    assert np.allclose(isentropic.plus(ph.rho_plus), isentropic.minus(ph.rho_minus), rtol=1e-12)


def test_decomposition_of_effective_law():
    sys = BiFluidSystem(power_phase(2.0, slope=0.0), power_phase(1.5))
    law = effective_pressure(sys)
    rho = np.logspace(-2, 2, 30)
    pm, rm = decompose_pressure(law, rho, np.full_like(rho, 0.5))
    assert np.all(rm == 0)
    assert np.allclose(pm - rm, eval_pressure(law, rho, 0.5 * rho), rtol=1e-12)


def test_q_lower_exact_for_equal_laws():
    assert system(2, 2).q_lower == 0.5


def test_exponent_condition_exact():
    Gbar, G = exponent_condition(1.8, 1.2, 0.0)
    assert Gbar < G
    Gbar, G = exponent_condition(2.0, 10.0, 0.0)
    assert Gbar >= G


def test_isentropic_audit_passes(isentropic):
    report = audit_bifluid(isentropic)
    assert report.verdict != "fail", report.summary_lines()
    assert report.check("gamma.exponents").verdict == "pass"
    assert report.check("Hbi4").constants["q_lower"] == pytest.approx(1 / (1 + 1.8 / 1.2), rel=1e-12)


def test_equal_laws_hbi4_half():
    report = audit_bifluid(system(2, 2))
    assert report.check("Hbi4").value == pytest.approx(0.5, rel=1e-12)
    assert report.check("Hbi4").verdict == "pass"


def test_violation_fails_with_printed_inequality():
    report = audit_bifluid(system(2, 10))
    check = report.check("gamma.exponents")
    assert check.verdict == "fail"
    assert ">=" in check.witness["violated"]
    assert report.verdict == "fail"


def test_hbi3_profile_finite(isentropic):
    s = np.logspace(-6, 0, 20)
    assert np.all(np.isfinite(hbi3_profile(isentropic, s)))


def test_table_rows(isentropic):
    rows = bifluid_table(isentropic, [0.0, 1.0], [0.0, 0.5])
    assert rows.shape == (4, 5)
    assert rows[0].tolist() == [0.0, 0.0, 0.0, 1.0, 0.0]
    assert rows[3, 2] > 1.0
