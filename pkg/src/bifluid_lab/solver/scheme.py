"""One time step of the regularized mixture system on the torus.

Continuity equations (for ``a`` = rho, Z_1, ..., Z_K)

    d_t rho_a + div(rho_a u) = eps Lap rho_a

are advanced with implicit diffusion and explicit flux.  The momentum
equation, with ``R = rho + sum Z`` and ``L u = -mu Lap u - (mu + lam) grad div u``,

    d_t(R u) + div(R u (x) u) + grad Pi_delta + eps (grad R . grad) u + L u = 0,

is solved in the Galerkin sense on the retained velocity modes: mass matrix
and viscous operator implicit, convection, pressure and the ``eps`` term
explicit.  The ``eps`` term cancels the kinetic energy produced by the
density diffusion, which keeps the discrete energy balance closed.

``imex1`` is backward/forward Euler; ``sbdf2`` the second-order
backward-difference variant with extrapolated explicit terms (started by one
``imex1`` step).
"""
from __future__ import annotations

import logging
import warnings

import numpy as np

from .. import spectral_ops as so
from ..constitutive.regularize import regularized_law
from ..errors import BlowUpError, NumericError
from .state import MixtureState

log = logging.getLogger(__name__)


class CFLWarning(UserWarning):
    pass


class Stepper:
    """Precomputed operators for one :class:`ApproxConfig`."""

    def __init__(self, config):
        self.config = config
        g = config.grid
        self.grid = g
        self.modes = so.mode_set(g, config.N)
        self.mask = self.modes.mask
        self.pressure = regularized_law(config.pressure_params, config.law)
        self.k = [np.broadcast_to(k, g.spectral_shape) for k in g.dwavenumbers]
        self.dk2 = g.dk2
        self.cfl_violations = 0
        self.floored_cells = 0
        self.clamp_corrections = []

    # --- small helpers ----------------------------------------------------
    def project(self, v):
        return so.ifft(self.grid, np.where(self.mask, so.fft(self.grid, v), 0.0))

    def product(self, a, b):
        if self.config.dealias:
            return so.padded_product(self.grid, a, b)
        return a * b

    def inner(self, a, b):
        return float(np.sum(a * b)) * self.grid.dx ** self.grid.dim

    def viscous(self, u):
        """``L u`` for ``u`` given in physical space."""
        c = self.config
        uh = so.fft(self.grid, u)
        kdotu = sum(1j * k * uh[j] for j, k in enumerate(self.k))
        out = np.stack([c.mu * self.dk2 * uh[j] - (c.mu + c.lam) * 1j * self.k[j] * kdotu
                        for j in range(self.grid.dim)])
        return so.ifft(self.grid, out)

    def diffusion_solve(self, f, coef):
        """``(1 - coef * eps * Lap)^{-1} f`` (coefficient absorbs dt)."""
        fh = so.fft(self.grid, f)
        return so.ifft(self.grid, fh / (1.0 + coef * self.config.epsilon * self.grid.k2))

    def _precondition(self, r, mass, coef):
        c = self.config
        rh = so.fft(self.grid, r)
        k2 = self.dk2
        safe = np.where(k2 > 0, k2, 1.0)
        kdotr = sum(k * rh[j] for j, k in enumerate(self.k))
        trans = 1.0 / (mass + coef * c.mu * k2)
        longi = 1.0 / (mass + coef * (2 * c.mu + c.lam) * k2)
        out = []
        for j, k in enumerate(self.k):
            par = np.where(k2 > 0, k * kdotr / safe, 0.0)
            out.append(np.where(self.mask, trans * (rh[j] - par) + longi * par, 0.0))
        return so.ifft(self.grid, np.stack(out))

    def galerkin_solve(self, R, rhs, coef, x0):
        """Solve ``P_N(R u) + coef * L u = P_N(rhs)`` for ``u`` in the mode span by PCG."""
        c = self.config
        b = self.project(rhs)
        mass = float(np.mean(R))

        def A(u):
            return self.project(R * u) + coef * self.viscous(u)

        x = self.project(x0)
        r = b - A(x)
        bnorm = np.sqrt(self.inner(b, b)) + 1e-300
        z = self._precondition(r, mass, coef)
        p = z
        rz = self.inner(r, z)
        for it in range(c.cg_maxiter):
            if np.sqrt(self.inner(r, r)) <= c.cg_rtol * bnorm:
                return x, it
            Ap = A(p)
            alpha = rz / self.inner(p, Ap)
            x = x + alpha * p
            r = r - alpha * Ap
            z = self._precondition(r, mass, coef)
            rz_new = self.inner(r, z)
            p = z + (rz_new / rz) * p
            rz = rz_new
        if np.sqrt(self.inner(r, r)) <= 1e3 * c.cg_rtol * bnorm:
            return x, c.cg_maxiter
        raise NumericError(f"Galerkin solve did not converge: residual "
                           f"{np.sqrt(self.inner(r, r)) / bnorm:.3e}")

    def galerkin_residual(self, R_new, u_new, rhs, coef):
        """Components of the momentum residual on the retained modes (max abs)."""
        res = self.project(R_new * u_new) + coef * self.viscous(u_new) - self.project(rhs)
        return float(np.max(np.abs(so.fft(self.grid, res)[:, self.mask]))) if res.size else 0.0

    # --- explicit terms ---------------------------------------------------
    def mass_flux(self, f, u):
        """``div(f u)``."""
        return so.div(self.grid, np.stack([self.product(f, u[j]) for j in range(self.grid.dim)]))

    def momentum_explicit(self, R, u, rho, Z):
        """``div(R u (x) u) + grad Pi(rho, Z) + eps (grad R . grad) u``."""
        g = self.grid
        d = g.dim
        Ru = np.stack([self.product(R, u[j]) for j in range(d)])
        conv = np.stack([
            so.div(g, np.stack([self.product(Ru[j], u[i]) for j in range(d)]))
            for i in range(d)])
        with np.errstate(all="ignore"):
            Pi = self.pressure.evaluate(rho, Z)
        gradR = so.grad(g, R)
        comp = np.stack([
            sum(self.product(gradR[j], so.grad(g, u[i])[j]) for j in range(d)) for i in range(d)])
        return conv + so.grad(g, Pi) + self.config.epsilon * comp

    # --- checks -----------------------------------------------------------
    def _guard(self, rho, Z, u, time):
        c = self.config
        fields = (rho, Z, u)
        if not all(np.all(np.isfinite(f)) for f in fields):
            raise BlowUpError(f"non-finite field at t={time:.6g}", time=time)
        if c.positivity_clamp:
            rho, Z = self._clamp(rho, Z)
        if np.min(rho) <= 0 or np.min(Z) < 0:
            which = "rho" if np.min(rho) <= 0 else "Z"
            raise BlowUpError(f"{which} lost positivity at t={time:.6g} "
                              f"(min rho={np.min(rho):.3e}, min Z={np.min(Z):.3e})", time=time)
        umax = float(np.max(np.abs(u)))
        cfl = umax * c.dt / self.grid.dx
        if cfl > c.cfl_limit:
            self.cfl_violations += 1
            if self.cfl_violations == 1:
                warnings.warn(f"CFL number {cfl:.3g} exceeds {c.cfl_limit} at t={time:.6g}",
                              CFLWarning, stacklevel=3)
        return rho, Z

    def _clamp(self, rho, Z):
        g = self.grid
        out = []
        for f, floor in [(rho, 1e-300)] + [(z, 0.0) for z in Z]:
            m0 = so.integrate(g, f)
            fc = np.maximum(f, floor)
            if np.any(fc != f):
                fc = fc * (m0 / so.integrate(g, fc))
                self.clamp_corrections.append(float(np.max(np.abs(fc - f))))
                log.info("positivity clamp applied; max correction %.3e",
                         self.clamp_corrections[-1])
            out.append(fc)
        return out[0], np.stack(out[1:])

    # --- the step ---------------------------------------------------------
    def step(self, state, prev=None):
        """Advance one step; ``prev`` (the state before ``state``) enables ``sbdf2``."""
        c = self.config
        dt = c.dt
        t_new = state.time + dt
        rho, Z, u = state.rho, state.Z, state.u
        R = state.inertia
        two_level = c.scheme == "sbdf2" and prev is not None
        if two_level:
            rp, Zp, up = prev.rho, prev.Z, prev.u
            rho_new = self.diffusion_solve(
                (4 * rho - rp) / 3 - 2 * dt / 3 * (2 * self.mass_flux(rho, u) - self.mass_flux(rp, up)),
                2 * dt / 3)
            Z_new = np.stack([self.diffusion_solve(
                (4 * Z[i] - Zp[i]) / 3
                - 2 * dt / 3 * (2 * self.mass_flux(Z[i], u) - self.mass_flux(Zp[i], up)),
                2 * dt / 3) for i in range(Z.shape[0])])
        else:
            rho_new = self.diffusion_solve(rho - dt * self.mass_flux(rho, u), dt)
            Z_new = np.stack([self.diffusion_solve(Z[i] - dt * self.mass_flux(Z[i], u), dt)
                              for i in range(Z.shape[0])])
        rho_new, Z_new = self._guard(rho_new, Z_new, u, t_new)
        R_new = rho_new + np.sum(Z_new, axis=0)

        if two_level:
            Rp = prev.inertia
            expl = 2 * self.momentum_explicit(R, u, rho_new, Z_new) \
                - self.momentum_explicit(Rp, up, rho_new, Z_new)
            # the pressure enters once, at the new level
            rhs = (4 * R * u - Rp * up) / 3 - 2 * dt / 3 * expl
            coef = 2 * dt / 3
            guess = 2 * u - up
        else:
            rhs = R * u - dt * self.momentum_explicit(R, u, rho_new, Z_new)
            coef = dt
            guess = u
        u_new, iters = self.galerkin_solve(R_new, rhs, coef, guess)
        self.last_iterations = iters
        self.last_rhs = (rhs, coef)
        self._guard(rho_new, Z_new, u_new, t_new)
        return MixtureState(rho=rho_new, Z=Z_new, u=u_new, time=t_new, step=state.step + 1)


_STEPPERS: dict = {}


def stepper_for(config):
    key = id(config)
    st = _STEPPERS.get(key)
    if st is None or st.config is not config:
        st = Stepper(config)
        _STEPPERS.clear()
        _STEPPERS[key] = st
    return st


def step(state, config, prev=None):
    """Advance ``state`` by one time step of ``config``."""
    return stepper_for(config).step(state, prev)
