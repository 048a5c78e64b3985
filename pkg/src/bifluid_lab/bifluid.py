"""Reduction of the two-phase (volume fraction) model to a two-density model.

With phase pressures ``P_plus`` and ``P_minus`` and the pressure-equality
closure, the heavy-phase density ``r = rho_plus(rho, Z)`` solves

    r q(r) - q(r) rho - Z r = 0,    q = P_minus^{-1} o P_plus,

on ``[rho, inf)``, and the two-density pressure is ``P(rho, Z) = P_plus(r)``.
Implicit differentiation gives, with ``D = rho q(r) + r q'(r) (r - rho)``,

    d r / d rho = r q(r) / D,        d r / d Z = r^2 / D.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .constitutive.audit import (AuditSampling, audit_hypotheses, fit_slope, tail_verdict)
from .constitutive.laws import Decomposition, PressureLaw
from .constitutive.region import AdmissibleRegion
from .constitutive.report import BAND, Check, HypothesisReport, compare_lower, compare_upper, worst
from .errors import DomainError
from .roots import solve_increasing


# ---------------------------------------------------------------------------
# phase laws

@dataclass(frozen=True)
class PhaseLaw:
    """Strictly increasing single-phase pressure ``s -> P(s)`` with ``P(0) = 0``.

    ``growth_lower`` and ``offset`` are constants with
    ``P'(s) >= growth_lower * s^(gamma - 1) - offset``.
    """

    name: str
    evaluate: Callable
    derivative: Callable
    gamma: float
    alpha: float
    second_derivative: Optional[Callable] = None
    inverse: Optional[Callable] = None
    growth_lower: float = 1.0
    offset: float = 0.0
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, s):
        return self.evaluate(np.asarray(s, dtype=float))

    def invert(self, p, x0=None):
        """Solve ``P(s) = p`` for ``s >= 0``."""
        p = np.asarray(p, dtype=float)
        if np.any(p < 0):
            raise DomainError("phase pressure inverse needs a nonnegative argument")
        if self.inverse is not None:
            return self.inverse(p)
        pos = p > 0
        out = np.zeros(p.shape)
        if np.any(pos):
            target = p[pos]
            guess = None if x0 is None else np.broadcast_to(x0, p.shape)[pos]
            # a good seed gives a tight bracket; the solver still expands it if needed
            hi = np.ones(target.shape) if guess is None else 2.0 * guess + 1e-300
            out[pos] = solve_increasing(lambda s: self.evaluate(s) - target, np.zeros(target.shape),
                                        hi, self.derivative, guess)
        return out[()] if out.ndim == 0 else out


def power_phase(gamma, coef=1.0, slope=0.0, name=None):
    """``P(s) = coef * s^gamma + slope * s`` (``coef > 0``, ``slope >= 0``)."""
    gamma, coef, slope = float(gamma), float(coef), float(slope)
    if not (gamma > 0 and coef > 0 and slope >= 0):
        raise DomainError("power phase law needs gamma > 0, coef > 0 and slope >= 0")
    if slope > 0 and gamma < 1:
        raise DomainError("an affine perturbation requires gamma >= 1")

    def evaluate(s):
        return coef * np.power(s, gamma) + slope * s

    def derivative(s):
        with np.errstate(divide="ignore"):
            return coef * gamma * np.power(s, gamma - 1.0) + slope

    def second(s):
        with np.errstate(divide="ignore", invalid="ignore"):
            return coef * gamma * (gamma - 1.0) * np.power(s, gamma - 2.0)

    inverse = None
    if slope == 0:
        def inverse(p):
            return np.power(np.asarray(p, dtype=float) / coef, 1.0 / gamma)

    return PhaseLaw(
        name=name or ("power" if slope == 0 else "power_affine"), evaluate=evaluate,
        derivative=derivative, second_derivative=second, inverse=inverse, gamma=gamma,
        alpha=gamma if slope == 0 else min(1.0, gamma), growth_lower=coef * gamma, offset=0.0,
        params={"gamma": gamma, "coef": coef, "slope": slope},
    )


PHASE_CATALOG = {"power": power_phase}


def make_phase(spec):
    """Build a phase law from ``{"law": "power", "gamma": .., ...}``."""
    spec = dict(spec)
    name = spec.pop("law", "power")
    try:
        return PHASE_CATALOG[name](**spec)
    except KeyError:
        raise DomainError(f"unknown phase law {name!r}; known: {sorted(PHASE_CATALOG)}") from None


# ---------------------------------------------------------------------------
# the coupled system

@dataclass(frozen=True)
class PhaseDecomposition:
    a_frac: np.ndarray
    rho_plus: np.ndarray
    rho_minus: np.ndarray


class BiFluidSystem:
    """Two phase laws, the map ``q`` and the implicit heavy-phase solve.

    A log-spaced table of ``q`` is tabulated once; it only seeds Newton
    iterations and never enters a returned value directly.
    """

    def __init__(self, plus, minus, region=None, root_tolerance=4 * np.finfo(float).eps):
        self.plus = plus
        self.minus = minus
        self.region = region or AdmissibleRegion.single(0.0, 1.0)
        if self.region.species_count != 1:
            raise DomainError("the two-phase reduction is implemented for one secondary species")
        self.root_tolerance = float(root_tolerance)
        self._table_s = np.logspace(-12, 12, 241)
        self._table_q = self.q(self._table_s, seeded=False)
        self._q_lower = None

    # --- q and its inverse -------------------------------------------------
    def _seed(self, x, xs, ys):
        with np.errstate(divide="ignore"):
            lx = np.log(np.clip(x, 1e-300, None))
        return np.exp(np.interp(lx, np.log(xs), np.log(ys)))

    def q(self, s, seeded=True):
        """``q(s) = P_minus^{-1}(P_plus(s))``."""
        s = np.asarray(s, dtype=float)
        guess = self._seed(s, self._table_s, self._table_q) if seeded else None
        return np.asarray(self.minus.invert(self.plus.evaluate(s), guess), dtype=float)

    def q_prime(self, s, q=None):
        s = np.asarray(s, dtype=float)
        q = self.q(s) if q is None else q
        return self.plus.derivative(s) / self.minus.derivative(q)

    def q_inverse(self, z):
        """``q^{-1}(z) = P_plus^{-1}(P_minus(z))``."""
        z = np.asarray(z, dtype=float)
        guess = self._seed(z, self._table_q, self._table_s)
        return np.asarray(self.plus.invert(self.minus.evaluate(z), guess), dtype=float)

    @property
    def q_lower(self):
        """``inf_s q / (s q' + q)``: exact for pure power pairs, sampled otherwise."""
        if self._q_lower is None:
            pp, mp = self.plus.params, self.minus.params
            if self.plus.name == "power" and self.minus.name == "power":
                self._q_lower = 1.0 / (1.0 + pp["gamma"] / mp["gamma"])
            else:
                s = np.logspace(-10, 10, 2001)
                q = self.q(s)
                # 1% safety margin below the sampled infimum
                self._q_lower = 0.99 * float(np.min(q / (s * self.q_prime(s) + q)))
        return self._q_lower

    def to_dict(self):
        return {"plus": {"law": self.plus.name, **self.plus.params},
                "minus": {"law": self.minus.name, **self.minus.params},
                **self.region.to_dict(), "root_tolerance": self.root_tolerance}


def build_q(plus, minus):
    """Return ``(q, q_inverse)`` for the pair of phase laws."""
    sys = BiFluidSystem(plus, minus)
    return sys.q, sys.q_inverse


def _check_inputs(rho, Z):
    rho = np.asarray(rho, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == rho.ndim + 1 and Z.shape[0] == 1:
        Z = Z[0]
    rho, Z = np.broadcast_arrays(rho, Z)
    if np.any(rho < 0) or np.any(Z < 0):
        raise DomainError("densities must be nonnegative")
    return rho, Z


def solve_rho_plus(sys, rho, Z):
    """Heavy-phase density ``rho_plus(rho, Z) >= rho``.

    Exact on the axes: ``rho_plus(rho, 0) = rho`` and
    ``rho_plus(0, Z) = q^{-1}(Z)``.
    """
    rho, Z = _check_inputs(rho, Z)
    out = np.array(rho, dtype=float, copy=True)
    axis = (rho == 0) & (Z > 0)
    if np.any(axis):
        out[axis] = sys.q_inverse(Z[axis])
    inner = (rho > 0) & (Z > 0)
    if np.any(inner):
        r0, z0 = rho[inner], Z[inner]
        guess = r0 + sys.q_inverse(z0)

        last = {}

        def q_at(r):
            # the derivative is always requested at the point just evaluated
            if last.get("r") is not r:
                last["r"], last["q"] = r, sys.q(r)
            return last["q"]

        def h(r):
            return (r - r0) / r * q_at(r) - z0

        def dh(r):
            q = q_at(r)
            return r0 * q / r ** 2 + (r - r0) / r * sys.q_prime(r, q)

        out[inner] = solve_increasing(h, r0, 2.0 * guess + 1.0, dh, guess,
                                      rtol=sys.root_tolerance)
    return out[()]


def rho_plus_partials(sys, rho, Z, r=None):
    """``(d rho_plus / d rho, d rho_plus / d Z)`` by implicit differentiation.

    At the origin both are reported as 0.
    """
    rho, Z = _check_inputs(rho, Z)
    r = solve_rho_plus(sys, rho, Z) if r is None else np.asarray(r, dtype=float)
    pos = r > 0
    rs = np.where(pos, r, 1.0)
    q = sys.q(rs)
    D = rho * q + rs * sys.q_prime(rs, q) * (rs - rho)
    dr = np.where(pos, rs * q / D, 0.0)
    dz = np.where(pos, rs ** 2 / D, 0.0)
    return dr, dz


def _smooth_plateau(z, R):
    """C^2 cut-off equal to 1 on [0, R] and 0 beyond 3R (|slope| <= 1/R)."""
    x = np.clip((np.asarray(z, dtype=float) - R) / (2.0 * R), 0.0, 1.0)
    return 1.0 - x ** 3 * (10.0 - 15.0 * x + 6.0 * x ** 2)


def effective_pressure(sys):
    """Two-density law ``P(rho, Z) = P_plus(rho_plus(rho, Z))``.

    It carries analytic partials and the monotone decomposition with leading
    coefficient ``q_lower * growth_lower / (2 gamma_plus)``.
    """
    plus, minus = sys.plus, sys.minus

    def evaluate(rho, Z):
        return plus.evaluate(solve_rho_plus(sys, rho, Z))

    def partials(rho, Z):
        r = solve_rho_plus(sys, rho, Z)
        dr, dz = rho_plus_partials(sys, rho, Z, r)
        dP = plus.derivative(np.where(r > 0, r, 1.0))
        return np.where(r > 0, dP * dr, 0.0), np.where(r > 0, dP * dz, 0.0)

    ql = sys.q_lower
    a_plus, b_plus, g = plus.growth_lower, plus.offset, plus.gamma
    if b_plus > 0:
        r_low = (2.0 * b_plus / a_plus) ** (1.0 / (g - 1.0)) if g != 1 else 1.0
        R = max(2.0 * r_low, (2.0 * b_plus / a_plus) ** (1.0 / g))
    else:
        r_low, R = 0.0, 0.0

    def remainder(rho, s):
        rho = np.asarray(rho, dtype=float)
        if b_plus == 0:
            return np.zeros(rho.shape)
        return ql * b_plus * _smooth_plateau(rho, R) * np.minimum(r_low, rho)

    def monotone(rho, s):
        s = np.asarray(s, dtype=float)
        s = s[0] if s.ndim == np.ndim(rho) + 1 else s
        return evaluate(rho, rho * s) + remainder(rho, s)

    leading = ql * a_plus / (2.0 * g)
    decomposition = Decomposition(monotone=monotone, remainder=remainder, support_radius=3.0 * R,
                                  leading=lambda s: np.full(np.shape(s)[-1:], leading))
    return PressureLaw(
        name="bifluid", evaluate=evaluate, region=sys.region, gamma=plus.gamma,
        beta=(minus.gamma,), alpha=min(plus.alpha, minus.alpha),
        partial_rho=lambda rho, Z: partials(rho, Z)[0],
        partial_Z=lambda rho, Z: partials(rho, Z)[1][None],
        decomposition=decomposition, A=None,
        params={**sys.to_dict(), "q_lower": ql},
    )


def recover_phases(sys, rho, Z):
    """Invert ``rho = a rho_plus``, ``Z = (1 - a) rho_minus``.

    At vacuum the fraction is set to 1 and both phase densities to 0.
    """
    rho, Z = _check_inputs(rho, Z)
    r = np.asarray(solve_rho_plus(sys, rho, Z), dtype=float)
    pos = r > 0
    a = np.where(pos, rho / np.where(pos, r, 1.0), 1.0)
    rm = np.where(pos, sys.q(np.where(pos, r, 0.0)), 0.0)
    # on the rho = 0 axis q(q^{-1}(Z)) = Z up to round-off; return Z itself
    rm = np.where((rho == 0) & (Z > 0), Z, rm)
    return PhaseDecomposition(a_frac=a[()], rho_plus=r[()], rho_minus=rm[()])


def bifluid_table(sys, rho_values, Z_values):
    """Rows ``(rho, Z, rho_plus, a, P)`` over the tensor grid."""
    rho_values = np.asarray(rho_values, dtype=float)
    Z_values = np.asarray(Z_values, dtype=float)
    R, Zg = np.meshgrid(rho_values, Z_values, indexing="ij")
    ph = recover_phases(sys, R, Zg)
    P = sys.plus.evaluate(np.asarray(ph.rho_plus))
    return np.column_stack([R.ravel(), Zg.ravel(), np.ravel(ph.rho_plus), np.ravel(ph.a_frac),
                            np.ravel(P)])


# ---------------------------------------------------------------------------
# audits

def _frac(x):
    return Fraction(repr(float(x)))


def _bog(g):
    return min(Fraction(2, 3) * g - 1, g / 2)


def exponent_condition(gamma_plus, gamma_minus, a_lower):
    """Exact ``(Gamma_bar, G)`` for the exponent condition ``Gamma_bar < G``."""
    gp, gm = _frac(gamma_plus), _frac(gamma_minus)
    G = gp + _bog(gp)
    if a_lower > 0:
        G = max(G, gm + _bog(gm))
        second = gm + gm / gp - 1
    else:
        second = gm + gm / gp - gp / gm
    return max(gp - gp / gm + 1, second), G


def _check_exponents(sys):
    gp, gm = sys.plus.gamma, sys.minus.gamma
    a_low = sys.region.a_lower[0]
    Gbar, G = exponent_condition(gp, gm, a_low)
    consts = {"Gamma_bar": str(Gbar), "G": str(G), "Gamma_bar_float": float(Gbar),
              "G_float": float(G)}
    witness = {"gamma_plus": gp, "gamma_minus": gm, "a_lower": a_low}
    if not _frac(gp) >= Fraction(9, 5):
        return Check("gamma.exponents", "fail", gp, 1.8, {**witness, "violated": "gamma_plus >= 9/5"},
                     "heavy-phase exponent below 9/5", consts)
    if Gbar >= G:
        return Check("gamma.exponents", "fail", float(Gbar), float(G),
                     {**witness, "violated": f"Gamma_bar = {Gbar} >= G = {G}"},
                     f"Gamma_bar = {Gbar} >= G = {G}", consts)
    return Check("gamma.exponents", "pass", float(Gbar), float(G), None,
                 f"Gamma_bar = {Gbar} < G = {G} (exact)", consts)


def _check_phase(phase, label, is_plus):
    s = np.logspace(-6, 6, 241)
    P = phase.evaluate(s)
    dP = phase.derivative(s)
    p0 = float(phase.evaluate(np.zeros(1))[0])
    name = f"Hbi2.{label}"
    if p0 != 0:
        return Check(name, "fail", p0, 0.0, {"s": 0.0, "P": p0}, "P(0) must vanish")
    if np.any(dP <= 0):
        i = int(np.argmin(dP))
        return Check(name, "fail", float(dP[i]), 0.0, {"s": float(s[i]), "dP": float(dP[i])},
                     "phase pressure not strictly increasing")
    if is_plus and phase.second_derivative is not None:
        d2 = phase.second_derivative(s)
        if np.any(d2 < -1e-12 * np.abs(dP) / s):
            i = int(np.argmin(d2))
            return Check(name, "fail", float(d2[i]), 0.0, {"s": float(s[i]), "d2P": float(d2[i])},
                         "heavy-phase pressure must be convex")
    g_fit = fit_slope(s, P, (1e4, 1e6))
    dev = abs(g_fit - phase.gamma) if g_fit is not None else np.inf
    verdict = "pass" if dev <= BAND * phase.gamma else "indeterminate"
    with np.errstate(divide="ignore"):
        lower = float(np.min((dP + phase.offset) / s ** (phase.gamma - 1.0)))
    if lower < phase.growth_lower * (1 - 1e-12):
        i = int(np.argmin((dP + phase.offset) / s ** (phase.gamma - 1.0)))
        return Check(name, "fail", lower, phase.growth_lower, {"s": float(s[i])},
                     "declared lower growth constant violated")
    return Check(name, verdict, g_fit, phase.gamma, None,
                 "P(0)=0, P'>0, growth exponent fitted at large s"
                 + (", convex" if is_plus else ""), {"gamma_fit": g_fit})


def hbi3_profile(sys, s):
    """``P_plus'(w) w^2 / (s q(s))`` with ``w = s + q^{-1}(a_upper s)``."""
    w = s + sys.q_inverse(sys.region.a_upper[0] * s)
    return sys.plus.derivative(w) * w ** 2 / (s * sys.q(s))


def _check_hbi3(sys):
    s = np.logspace(-8, 0, 161)[:-1]
    F = hbi3_profile(sys, s)
    slope = fit_slope(s, F, (1e-8, 1e-5))
    gam = max(0.0, -slope) if slope is not None else 0.0
    sup = float(np.max(s ** gam * F))
    verdict = compare_upper(gam, 1.0)
    consts = {"Gamma_lower": gam, "sup": sup}
    detail = "sup_s s^Gamma_lower P+'(w) w^2 / (s q(s)) finite with Gamma_lower < 1"
    # exact near-vacuum exponent test for pure power pairs
    if sys.plus.name == "power" and sys.minus.name == "power":
        ap, am = _frac(sys.plus.alpha), _frac(sys.minus.alpha)
        exact = am * am * (ap + 1) > ap * ap
        consts["isentropic_condition"] = f"({am})^2 ({ap} + 1) > ({ap})^2: {exact}"
        if not exact and verdict == "pass":
            verdict = "indeterminate"
        if exact and verdict == "fail":
            verdict = "indeterminate"
    # alternate form q(s) >= C s^A with A < 2 when P_plus'(0) > 0
    dp0 = float(sys.plus.derivative(np.array([0.0]))[0])
    if np.isfinite(dp0) and dp0 > 0:
        A = fit_slope(s, sys.q(s), (1e-8, 1e-5))
        alt = A is not None and A < 2
        consts["alternate_exponent"] = A
        if alt != (verdict == "pass"):
            verdict = "indeterminate"
            detail += "; alternate form q(s) >= C s^A, A < 2 disagrees"
    witness = None
    if verdict == "fail":
        witness = {"s": float(s[0]), "profile": float(F[0]), "Gamma_lower_required": gam}
    return Check("Hbi3+", verdict, gam, 1.0, witness, detail, consts)


def _check_hbi4(sys):
    s = np.logspace(-8, 8, 321)
    q = sys.q(s)
    ratio = q / (s * sys.q_prime(s) + q)
    qmin = float(np.min(ratio))
    lo_trend = fit_slope(s, ratio, (1e-8, 1e-6))
    hi_trend = fit_slope(s, ratio, (1e6, 1e8))
    verdict = "pass" if qmin > 0 else "fail"
    if verdict == "pass":
        verdict = worst(tail_verdict(-hi_trend if hi_trend is not None else None),
                        tail_verdict(lo_trend if lo_trend is not None else None))
    i = int(np.argmin(ratio))
    witness = {"s": float(s[i]), "ratio": qmin} if verdict == "fail" else None
    return Check("Hbi4", verdict, qmin, 0.0, witness, "q_lower = inf q / (s q' + q) > 0",
                 {"q_lower": qmin})


def _region_grid(sys, sampling):
    rho1 = np.logspace(-4, 4, 41)
    lo, hi = sys.region.a_lower[0], sys.region.a_upper[0]
    s = np.linspace(lo, hi, sampling.n_s)
    s[s == 0] = 1e-3 * hi
    R, S = np.meshgrid(rho1, s, indexing="ij")
    return R, R * S


def _check_sandwich(sys, sampling):
    R, Z = _region_grid(sys, sampling)
    r = solve_rho_plus(sys, R, Z)
    base = R + sys.q_inverse(Z)
    ratio = r / base
    c_low, c_up = float(np.min(ratio)), float(np.max(ratio))
    below = np.min(r - R)
    verdict = "pass" if (c_low > 0 and np.isfinite(c_up) and below >= 0) else "fail"
    witness = None
    if verdict == "fail":
        i = np.unravel_index(np.argmin(ratio), ratio.shape)
        witness = {"rho": float(R[i]), "Z": float(Z[i]), "rho_plus": float(r[i])}
    return Check("it2.sandwich", verdict, c_low, 0.0, witness,
                 "max{rho, c(rho + q^-1(Z))} <= rho_plus <= C(rho + q^-1(Z))",
                 {"c_lower": c_low, "c_upper": c_up})


def _check_pzbi(sys, sampling, law):
    rho1 = np.logspace(0, 6, 61)
    hi = sys.region.a_upper[0]
    lo = max(sys.region.a_lower[0], 1e-3 * hi)
    s = np.linspace(lo, hi, sampling.n_s)
    R, S = np.meshgrid(rho1, s, indexing="ij")
    dZ = law.partial_Z(R, (R * S)[None])[0]
    fit = fit_slope(rho1, np.max(np.abs(dZ), axis=1), (1e4, 1e6))
    Gbar, _ = exponent_condition(sys.plus.gamma, sys.minus.gamma, sys.region.a_lower[0])
    fitted = (fit + 1.0) if fit is not None else None
    verdict = "pass"
    if fitted is not None and fitted > float(Gbar) * (1 + BAND) + 0.02:
        verdict = "indeterminate"
    return Check("PZbi", verdict, fitted, float(Gbar), None,
                 "tail exponent of dP/dZ against the closed-form Gamma_bar",
                 {"Gamma_bar_fit": fitted, "Gamma_bar_formula": float(Gbar)})


def audit_bifluid(sys, sampling=None):
    """Audit the two-phase assumptions and the induced two-density law."""
    sampling = sampling or AuditSampling()
    law = effective_pressure(sys)
    checks = [
        _check_exponents(sys),
        _check_phase(sys.plus, "plus", True),
        _check_phase(sys.minus, "minus", False),
        _check_hbi3(sys),
        _check_hbi4(sys),
        _check_sandwich(sys, sampling),
        _check_pzbi(sys, sampling, law),
    ]
    report = HypothesisReport(subject="bifluid", checks=checks,
                              sampling={"system": sys.to_dict(), **sampling.to_dict()})
    report.extend(audit_hypotheses(law, sampling), prefix="effective.")
    return report
