import numpy as np
import pytest
import sympy as sp

from bifluid_lab.constitutive import (AdmissibleRegion, RegularizedPressureParams, TruncationKit,
                                      decompose_pressure, delta_polynomial, eta, eta_delta,
                                      eval_pressure, h_delta, helmholtz, helmholtz_field,
                                      make_law, power_law_helmholtz, profile, regularized_helmholtz,
                                      regularized_pressure, species_ratio, truncate)
from bifluid_lab.constitutive.laws import PressureLaw
from bifluid_lab.errors import CapabilityError, DomainError, NumericError
from oracles import helmholtz_pde_residual


# --- admissible region -------------------------------------------------------

def test_region_validation():
    with pytest.raises(DomainError, match="H1"):
        AdmissibleRegion.single(1.0, 0.5)
    with pytest.raises(DomainError):
        AdmissibleRegion.single(-0.1, 1.0)
    with pytest.raises(DomainError):
        AdmissibleRegion((0.0, 0.1), (1.0,))


def test_region_membership():
    reg = AdmissibleRegion((0.2, 0.0), (1.0, 2.0))
    rho = np.array([1.0, 1.0, 0.0, 2.0])
    Z = np.array([[0.5, 0.1, 0.0, 2.0], [1.0, 1.0, 0.0, 4.1]])
    assert reg.contains(rho, Z).tolist() == [True, False, True, False]
    lo, hi = reg.band_defects(rho, Z)
    assert lo[0, 1] == pytest.approx(0.1)
    assert hi[1, 3] == pytest.approx(0.1)


def test_species_ratio_vacuum_convention():
    s = species_ratio(np.array([0.0, 2.0]), np.array([0.0, 1.0]))
    assert s.tolist() == [0.0, 0.5]


# --- pressure evaluation -----------------------------------------------------

def test_eval_examples():
    e1 = make_law("e1", gamma=2, beta=2)
    assert eval_pressure(e1, 0.0, 0.0) == 0.0
    assert eval_pressure(e1, 1.0, 1.0) == 2.0
    assert eval_pressure(make_law("e2", gamma=2), 1.0, 2.0) == 9.0


def test_eval_errors():
    e1 = make_law("e1")
    with pytest.raises(DomainError):
        eval_pressure(e1, -1.0, 0.0)
    with pytest.raises(DomainError):
        eval_pressure(e1, 1.0, -0.5)
    bad = PressureLaw("bad", lambda r, z: 1.0 / (r - 1.0), AdmissibleRegion.single(0, 1), 2, 2, 2)
    with pytest.raises(NumericError, match="rho=1.0"):
        eval_pressure(bad, np.array([0.5, 1.0]), np.array([0.1, 0.1]))
    with pytest.raises(DomainError):
        make_law("nonexistent")


def test_multi_species_law():
    reg = AdmissibleRegion((0.0, 0.0), (1.0, 1.0))
    law = make_law("e1", region=reg, gamma=2, beta=[2, 3])
    assert law.K == 2
    assert eval_pressure(law, 1.0, np.array([1.0, 2.0])) == pytest.approx(1 + 1 + 8)


# --- Helmholtz energy --------------------------------------------------------

def test_helmholtz_examples():
    assert helmholtz(make_law("power", gamma=2), 2.0, 0.0) == pytest.approx(2.0, rel=1e-12)
    for name in ("e1", "e2", "power"):
        assert helmholtz(make_law(name), 1.0, 1.0) == 0.0
    assert helmholtz(make_law("e1"), 0.0, 0.0) == 0.0


def test_helmholtz_symbolic_oracle():
    """H(rho, Z) for (e1), gamma = beta = 2, from a sympy integral."""
    r, s, z = sp.symbols("r s z", positive=True)
    P = s ** 2 + (s * z / r) ** 2
    H = sp.simplify(r * sp.integrate(P / s ** 2, (s, 1, r)))
    assert sp.simplify(H.subs({r: 2, z: 2})) == 4
    law = make_law("e1", gamma=2, beta=2)
    for rv, zv in [(2.0, 2.0), (0.3, 0.1), (50.0, 20.0)]:
        ref = float(H.subs({r: rv, z: zv}))
        assert helmholtz(law, rv, zv) == pytest.approx(ref, rel=1e-11, abs=1e-14)


@pytest.mark.parametrize("gamma", [1.8, 2.0, 3.0])
def test_helmholtz_power_closed_form(gamma):
    rho = np.logspace(-3, 3, 41)
    H = helmholtz(make_law("power", gamma=gamma), rho, np.zeros_like(rho))
    ref = power_law_helmholtz(rho, gamma)
    nz = ref != 0
    assert np.all(H[~nz] == 0)
    assert np.max(np.abs(H - ref)[nz] / np.abs(ref[nz])) < 1e-10


def test_helmholtz_field_matches_adaptive():
    law = make_law("e1", couplings=[{"C": 0.5, "r": 0.5, "s": 1.0}])
    rho = np.linspace(0.05, 20, 37)
    Z = 0.4 * rho
    a = helmholtz(law, rho, Z)
    b, dr, dz = helmholtz_field(law, rho, Z, with_gradient=True)
    assert np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-12)) < 1e-11
    # Euler-type identity behind the gradient formula
    P = eval_pressure(law, rho, Z)
    assert np.max(np.abs(rho * dr + Z * dz[0] - b - P) / (1 + P)) < 1e-10


@pytest.mark.parametrize("name,params", [
    ("e1", {}), ("e2", {}), ("e1", {"couplings": [{"C": 0.5, "r": 0.5, "s": 1.0}]}),
])
def test_helmholtz_pde_residual(name, params):
    law = make_law(name, **params)
    rho = np.logspace(-2, 2, 30)
    s = np.linspace(0.05, 0.95, 30)
    R, S = np.meshgrid(rho, s, indexing="ij")
    res = helmholtz_pde_residual(lambda r, z: helmholtz_field(law, r, z),
                                 lambda r, z: eval_pressure(law, r, z), R, R * S)
    assert np.max(res) <= 1e-8


# --- regularization ----------------------------------------------------------

def test_cutoff_profile():
    z = np.linspace(0, 1.5, 301)
    e = eta(z)
    assert np.all(e[z <= 0.5] == 1.0) and np.all(e[z >= 1.0] == 0.0)
    assert np.all(np.diff(e) <= 0)


def test_regularized_pressure_examples():
    law = make_law("e1", gamma=2, beta=2)
    assert regularized_pressure(RegularizedPressureParams(1.0, 10.0), law, 2.0, 2.0) == 3080.0
    p = RegularizedPressureParams(0.3, 6.0)
    assert regularized_pressure(p, law, 0.0, 0.0) == 0.0
    r, z = 0.05, 0.08  # r^2 + z^2 <= delta^2 / 4: pressure fully cut off
    assert regularized_pressure(p, law, r, z) == pytest.approx(0.3 * delta_polynomial(r, [z], 6.0),
                                                               rel=1e-15)


def test_regularized_pressure_converges():
    law = make_law("e1")
    rho, Z = 0.4, 0.2
    exact = eval_pressure(law, rho, Z)
    errs = [abs(regularized_pressure(RegularizedPressureParams(d, 5.0), law, rho, Z) - exact)
            for d in (1.0, 0.3, 0.1, 0.03, 0.01)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_regularized_helmholtz_examples():
    zero = make_law("zero")
    assert regularized_helmholtz(RegularizedPressureParams(1.0, 3.0), zero, 2.0, 2.0) == \
        pytest.approx(12.0)
    assert regularized_helmholtz(RegularizedPressureParams(1.0, 3.0), zero, 0.0, 0.0) == 0.0
    law = make_law("e1")
    p = RegularizedPressureParams(1e-2, 5.0)
    for r, z in [(3.0, 1.0), (0.5, 0.2)]:
        two_term = helmholtz(law, r, z) + h_delta(p, r, z)
        assert regularized_helmholtz(p, law, r, z) == pytest.approx(two_term, rel=1e-10)


def test_exponent_condition():
    law = make_law("e1", gamma=2, beta=2)
    with pytest.raises(DomainError):
        RegularizedPressureParams(1e-3, 4.0).check_exponents(law)
    RegularizedPressureParams(1e-3, 5.0).check_exponents(law)
    with pytest.raises(DomainError):
        RegularizedPressureParams(0.0, 5.0)


def test_delta_part_midpoint_convexity():
    rng = np.random.default_rng(0)
    a = rng.uniform(0, 3, size=(2, 10_000))
    b = rng.uniform(0, 3, size=(2, 10_000))
    p = RegularizedPressureParams(0.5, 5.0)
    for f in (lambda x: delta_polynomial(x[0], x[1:], p.B), lambda x: h_delta(p, x[0], x[1:])):
        mid = f(0.5 * (a + b))
        assert np.all(mid <= 0.5 * (f(a) + f(b)) * (1 + 1e-12) + 1e-300)


# --- truncation --------------------------------------------------------------

def test_truncation_examples():
    kit = TruncationKit(2.0)
    assert kit.T(1.0) == 1.0
    assert kit.T(10.0) == 4.0
    assert kit.L(1.0) == 0.0
    T, L = truncate(kit, np.array([0.5, 7.0]))
    assert T.tolist() == [0.5, pytest.approx(4.0)]


def test_truncation_sandwich():
    z = np.linspace(0, 40, 4001)
    for k in (1.5, 2.0, 7.0):
        kit = TruncationKit(k)
        T = kit.T(z)
        assert np.all(T >= 0) and np.all(T <= np.minimum(z, 2 * k) + 1e-15)
        assert np.allclose(T[z <= k], z[z <= k], rtol=1e-15, atol=0)
        assert np.all(np.diff(T) >= -1e-15)
        assert np.all(np.diff(T, 2) <= 1e-12)


def test_truncation_rejects_small_k():
    with pytest.raises(DomainError):
        TruncationKit(1.0)


def test_profile_is_c2():
    for z0 in (1.0, 3.0):
        h = 1e-4
        left, right = profile(z0 - h), profile(z0 + h)
        mid = profile(z0)
        assert abs((right - mid) / h - (mid - left) / h) < 1e-3
    assert profile(0.3) == 0.3 and profile(5.0) == 2.0


def test_L_identity():
    """z L_k'(z) - L_k(z) = T_k(z)."""
    kit = TruncationKit(2.0)
    z = np.array([0.3, 1.7, 5.0, 9.0])
    h = 1e-5 * z
    dL = (kit.L(z + h) - kit.L(z - h)) / (2 * h)
    assert np.allclose(z * dL - kit.L(z), kit.T(z), rtol=1e-7, atol=1e-9)


# --- decomposition -----------------------------------------------------------

def test_decomposition_exactness():
    law = make_law("e1")
    rho = np.logspace(-3, 3, 50)
    for s in (0.0, 0.3, 1.0):
        pm, rm = decompose_pressure(law, rho, np.full_like(rho, s))
        P = eval_pressure(law, rho, rho * s)
        assert np.all(rm == 0)
        assert np.all(np.abs(pm - rm - P) <= 1e-12 * np.maximum(P, 1e-300))
    pm, rm = decompose_pressure(law, 0.0, 0.5)
    assert pm - rm == 0.0


def test_decomposition_missing():
    with pytest.raises(CapabilityError):
        decompose_pressure(make_law("log_oscillating"), 1.0, 0.5)
