"""Grid state of the mixture at one time instant."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import spectral_ops as so


@dataclass(frozen=True)
class MixtureState:
    """Densities ``rho``, ``Z`` (species axis first) and the velocity field.

    The velocity is stored in physical space, shape ``(d,) + grid.shape``, and
    lies in the span of the retained Fourier modes.
    """

    rho: np.ndarray
    Z: np.ndarray
    u: np.ndarray
    time: float = 0.0
    step: int = 0

    @property
    def inertia(self):
        """Inertial density ``rho + sum_i Z_i``."""
        return self.rho + np.sum(self.Z, axis=0)

    def masses(self, grid):
        """``(int rho, [int Z_i])``."""
        return so.integrate(grid, self.rho), [so.integrate(grid, z) for z in self.Z]

    def velocity_coefficients(self, grid, N):
        """Complex rfft coefficients of the retained velocity modes, shape ``(d, M)``."""
        ms = so.mode_set(grid, N)
        return so.fft(grid, self.u)[:, ms.mask]

    def replace(self, **kw):
        data = dict(rho=self.rho, Z=self.Z, u=self.u, time=self.time, step=self.step)
        data.update(kw)
        return MixtureState(**data)
