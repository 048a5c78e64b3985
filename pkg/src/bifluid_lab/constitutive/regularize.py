"""Vacuum cut-off and high-exponent regularization of the pressure.

``Pi_delta(rho, Z) = (1 - eta_delta(|(rho, Z)|)) P(rho, Z) + delta * poly_B(rho, Z)``
with the convex penalty

    poly_B = rho^B + sum_i (Z_i^B + rho^2 Z_i^(B-2) / 2 + Z_i^2 rho^(B-2) / 2).

The matching energy is ``H_delta = H_{P_delta} + delta / (B - 1) * poly_B``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .helmholtz import helmholtz, helmholtz_field
from .laws import PressureLaw, as_species, eval_pressure, pressure_partial_Z, pressure_partials


@dataclass(frozen=True)
class RegularizedPressureParams:
    delta: float
    B: float

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError(f"delta must be positive, got {self.delta}")
        if not self.B > 2:
            raise DomainError(f"B must exceed 2, got {self.B}")

    @property
    def cutoff_width(self):
        return self.delta

    def check_exponents(self, law):
        """Enforce ``B > max{9/2, gamma, beta_i, A}`` required by the scheme."""
        bound = max([4.5, law.gamma, *law.beta] + ([law.A] if law.A is not None else []))
        if not self.B > bound:
            raise DomainError(f"B={self.B} must exceed max(9/2, gamma, beta, A) = {bound}")


# ---------------------------------------------------------------------------
# smooth cut-off

def _psi(t):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)


def _dpsi(t):
    tp = np.where(t > 0, t, 1.0)
    return np.where(t > 0, _psi(t) / tp ** 2, 0.0)


def eta(z):
    """C-infinity cut-off: 1 on [0, 1/2], 0 on [1, inf), strictly between."""
    z = np.asarray(z, dtype=float)
    t = 2.0 * z - 1.0
    a = _psi(1.0 - t)
    b = _psi(t)
    return (a / (a + b))[()]


def eta_prime(z):
    z = np.asarray(z, dtype=float)
    t = 2.0 * z - 1.0
    a = _psi(1.0 - t)
    b = _psi(t)
    da = -_dpsi(1.0 - t)
    db = _dpsi(t)
    return (2.0 * (da * b - a * db) / (a + b) ** 2)[()]


def eta_delta(z, delta):
    return eta(np.asarray(z, dtype=float) / delta)


# ---------------------------------------------------------------------------
# penalty polynomial

def _species_axis(rho, Z):
    rho = np.asarray(rho, dtype=float)
    Z = np.asarray(Z, dtype=float)
    # one species given without its leading axis
    return rho, (Z[None] if Z.ndim == rho.ndim else Z)


def delta_polynomial(rho, Z, B):
    rho, Z = _species_axis(rho, Z)
    val = rho ** B
    for zi in Z:
        val = val + zi ** B + 0.5 * rho ** 2 * zi ** (B - 2) + 0.5 * zi ** 2 * rho ** (B - 2)
    return val


def delta_polynomial_gradient(rho, Z, B):
    rho, Z = _species_axis(rho, Z)
    dr = B * rho ** (B - 1)
    dz = np.empty(Z.shape)
    for i, zi in enumerate(Z):
        dr = dr + rho * zi ** (B - 2) + 0.5 * (B - 2) * zi ** 2 * rho ** (B - 3)
        dz[i] = B * zi ** (B - 1) + 0.5 * (B - 2) * rho ** 2 * zi ** (B - 3) + zi * rho ** (B - 2)
    return dr, dz


def h_delta(params, rho, Z):
    """Closed-form energy of the penalty, ``delta/(B-1) * poly_B``."""
    return params.delta / (params.B - 1.0) * delta_polynomial(rho, Z, params.B)


# ---------------------------------------------------------------------------
# regularized laws

def cutoff_law(params, law):
    """The law ``P_delta = (1 - eta_delta(|(rho, Z)|)) P`` as a :class:`PressureLaw`."""
    d = params.delta

    def radius(rho, Z):
        return np.sqrt(rho ** 2 + np.sum(Z ** 2, axis=0))

    def evaluate(rho, Z):
        rad = radius(rho, Z)
        if np.min(rad, initial=np.inf) >= d:
            return law.evaluate(rho, Z)
        return (1.0 - eta_delta(rad, d)) * law.evaluate(rho, Z)

    def partial(rho, Z, wrt_rho):
        rad = radius(rho, Z)
        if np.min(rad, initial=np.inf) >= d:
            # outside the cut-off layer the law is untouched
            if wrt_rho:
                return pressure_partials(law, rho, Z)[0]
            return pressure_partial_Z(law, rho, Z)
        cut = 1.0 - eta_delta(rad, d)
        dcut = -eta_prime(rad / d) / d
        safe = np.where(rad > 0, rad, 1.0)
        P = law.evaluate(rho, Z)
        # the cut-off is flat near the origin, where dcut == 0 exactly
        if wrt_rho:
            dP = pressure_partials(law, rho, Z)[0]
            out = cut * dP + dcut * rho / safe * P
        else:
            dP = pressure_partial_Z(law, rho, Z)
            out = cut * dP + dcut * Z / safe * P
        return np.where(cut > 0, out, 0.0)

    def breakpoints(zeta):
        norm = np.sqrt(1.0 + float(np.sum(np.asarray(zeta) ** 2)))
        return [0.5 * d / norm, d / norm]

    return PressureLaw(
        name=f"{law.name}|cutoff", evaluate=evaluate, region=law.region, gamma=law.gamma,
        beta=law.beta, alpha=law.alpha,
        partial_rho=lambda r, z: partial(r, z, True),
        partial_Z=lambda r, z: partial(r, z, False),
        decomposition=None, A=law.A, breakpoints=breakpoints,
        params={"base": law.name, "delta": d},
    )


def regularized_law(params, law):
    """``Pi_delta`` as a :class:`PressureLaw` (cut-off pressure plus penalty)."""
    cut = cutoff_law(params, law)
    d, B = params.delta, params.B

    def evaluate(rho, Z):
        return cut.evaluate(rho, Z) + d * delta_polynomial(rho, Z, B)

    def partial_rho(rho, Z):
        return cut.partial_rho(rho, Z) + d * delta_polynomial_gradient(rho, Z, B)[0]

    def partial_Z(rho, Z):
        return cut.partial_Z(rho, Z) + d * delta_polynomial_gradient(rho, Z, B)[1]

    return PressureLaw(
        name=f"{law.name}|reg", evaluate=evaluate, region=law.region, gamma=max(law.gamma, B),
        beta=tuple(max(b, B) for b in law.beta), alpha=law.alpha, partial_rho=partial_rho,
        partial_Z=partial_Z, decomposition=None, A=law.A, breakpoints=cut.breakpoints,
        params={"base": law.name, "delta": d, "B": B},
    )


def regularized_pressure(params, law, rho, Z):
    """Evaluate ``Pi_delta`` at ``(rho, Z)``."""
    rho, Z = as_species(rho, Z, law.K)
    val = eval_pressure(cutoff_law(params, law), rho, Z)
    return (val + params.delta * delta_polynomial(rho, Z, params.B))[()]


def regularized_helmholtz(params, law, rho, Z, **quad_opts):
    """``H_{P_delta} + h_delta`` by adaptive quadrature plus closed form."""
    rho, Z = as_species(rho, Z, law.K)
    return (helmholtz(cutoff_law(params, law), rho, Z, **quad_opts) + h_delta(params, rho, Z))[()]


def regularized_helmholtz_field(params, law, rho, Z, *, with_gradient=False):
    """Grid version of :func:`regularized_helmholtz` (fixed quadrature rule)."""
    rho, Z = as_species(rho, Z, law.K)
    cut = cutoff_law(params, law)
    hd = h_delta(params, rho, Z)
    if not with_gradient:
        return helmholtz_field(cut, rho, Z) + hd
    H, dr, dz = helmholtz_field(cut, rho, Z, with_gradient=True)
    gr, gz = delta_polynomial_gradient(rho, Z, params.B)
    c = params.delta / (params.B - 1.0)
    return H + hd, dr + c * gr, dz + c * gz
