"""Energy bookkeeping for the regularized system.

For smooth solutions

    E(t) + int_0^t D + eps int_0^t G = E(0),

with ``E = 1/2 int R |u|^2 + int H_delta(rho, Z)``, the viscous dissipation
``D = int mu |grad u|^2 + (mu + lam) (div u)^2`` and the diffusion term
``G = int sum_a grad rho_a . grad(dH_delta / d rho_a)`` (nonnegative for a
convex energy).  Time integrals use the trapezoidal rule; the residual is the
defect of the balance above.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .. import spectral_ops as so
from ..constitutive.regularize import regularized_helmholtz_field


@dataclass(frozen=True)
class EnergyLedger:
    time: float
    kinetic: float
    helmholtz_total: float
    dissipation_cum: float
    eps_gradient_cum: float
    eps_penalty_cum: float
    residual: float
    initial_energy: float
    # instantaneous rates, kept for the next trapezoidal update
    dissipation_rate: float = 0.0
    eps_gradient_rate: float = 0.0
    eps_penalty_rate: float = 0.0

    @property
    def total(self):
        return self.kinetic + self.helmholtz_total

    def row(self):
        d = asdict(self)
        for k in ("dissipation_rate", "eps_gradient_rate", "eps_penalty_rate", "initial_energy"):
            d.pop(k)
        return d


def kinetic_energy(grid, state):
    return 0.5 * so.integrate(grid, state.inertia * np.sum(state.u ** 2, axis=0))


def dissipation_rate(grid, u, mu, lam):
    total = mu * sum(so.integrate(grid, np.sum(so.grad(grid, u[j]) ** 2, axis=0))
                     for j in range(grid.dim))
    return total + (mu + lam) * so.integrate(grid, so.div(grid, u) ** 2)


def energy_parts(state, config):
    """Instantaneous ``(kinetic, int H_delta, D, G, penalty monitor)``."""
    grid = config.grid
    H, dHr, dHz = regularized_helmholtz_field(config.pressure_params, config.law, state.rho,
                                              state.Z, with_gradient=True)
    G = so.integrate(grid, np.sum(so.grad(grid, state.rho) * so.grad(grid, dHr), axis=0))
    for i in range(state.Z.shape[0]):
        G += so.integrate(grid, np.sum(so.grad(grid, state.Z[i]) * so.grad(grid, dHz[i]), axis=0))
    B = config.pressure_params.B
    weight = state.rho ** (B - 2) + np.sum(state.Z ** (B - 2), axis=0)
    grad2 = np.sum(so.grad(grid, state.rho) ** 2, axis=0)
    for i in range(state.Z.shape[0]):
        grad2 = grad2 + np.sum(so.grad(grid, state.Z[i]) ** 2, axis=0)
    penalty = so.integrate(grid, grad2 * weight)
    parts = (kinetic_energy(grid, state), so.integrate(grid, H),
             dissipation_rate(grid, state.u, config.mu, config.lam), G, penalty)
    return tuple(float(p) for p in parts)


def initial_ledger(state, config):
    kin, helm, D, G, pen = energy_parts(state, config)
    return EnergyLedger(time=state.time, kinetic=kin, helmholtz_total=helm, dissipation_cum=0.0,
                        eps_gradient_cum=0.0, eps_penalty_cum=0.0, residual=0.0,
                        initial_energy=kin + helm, dissipation_rate=D, eps_gradient_rate=G,
                        eps_penalty_rate=pen)


def energy_ledger_update(prev, old_state, new_state, config):
    """Advance the ledger from ``old_state`` to ``new_state`` (trapezoidal rule)."""
    kin, helm, D, G, pen = energy_parts(new_state, config)
    h = new_state.time - old_state.time
    eps = config.epsilon
    diss = prev.dissipation_cum + 0.5 * h * (prev.dissipation_rate + D)
    epsg = prev.eps_gradient_cum + 0.5 * h * eps * (prev.eps_gradient_rate + G)
    epsp = prev.eps_penalty_cum + 0.5 * h * eps * (prev.eps_penalty_rate + pen)
    residual = kin + helm + diss + epsg - prev.initial_energy
    return EnergyLedger(time=new_state.time, kinetic=kin, helmholtz_total=helm,
                        dissipation_cum=diss, eps_gradient_cum=epsg, eps_penalty_cum=epsp,
                        residual=residual, initial_energy=prev.initial_energy,
                        dissipation_rate=D, eps_gradient_rate=G, eps_penalty_rate=pen)
