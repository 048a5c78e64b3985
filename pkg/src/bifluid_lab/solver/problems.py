"""Named initial-data recipes and the default smooth test problem."""
from __future__ import annotations

import numpy as np

from .. import spectral_ops as so
from ..constitutive.laws import make_law
from ..constitutive.region import AdmissibleRegion
from ..constitutive.regularize import RegularizedPressureParams
from ..errors import ConfigError
from .config import ApproxConfig


def _band_mid(region):
    lo = np.array(region.a_lower)
    hi = np.array(region.a_upper)
    return 0.5 * (lo + hi), 0.5 * (hi - lo)


def homogeneous(grid, region, rho=1.0, s=None, u=None):
    K = region.species_count
    mid, _ = _band_mid(region)
    s = mid if s is None else np.broadcast_to(np.asarray(s, dtype=float), (K,))
    u = np.zeros(grid.dim) if u is None else np.broadcast_to(np.asarray(u, dtype=float), (grid.dim,))
    rho0 = np.full(grid.shape, float(rho))
    Z0 = np.stack([s[i] * rho0 for i in range(K)])
    u0 = np.stack([np.full(grid.shape, u[j]) for j in range(grid.dim)])
    return rho0, Z0, u0


def smooth_wave(grid, region, rho=1.0, rho_amp=0.2, s_amp=0.5, u_amp=0.3):
    """Smooth data with strict band margins.

    ``rho = rho0 (1 + rho_amp sin x_1 cos x_d)``; each ratio oscillates around
    the middle of its band with relative amplitude ``s_amp`` of the half
    width; ``u_j = u_amp sin x_{j+1}`` (cyclically).
    """
    x = grid.coords
    K = region.species_count
    mid, half = _band_mid(region)
    rho0 = rho * (1.0 + rho_amp * np.sin(x[0]) * np.cos(x[-1]))
    phase = x[0] + x[-1]
    Z0 = np.stack([rho0 * (mid[i] + s_amp * half[i] * np.cos(phase + i)) for i in range(K)])
    u0 = np.stack([u_amp / (1 + j) * np.sin(x[(j + 1) % grid.dim]) for j in range(grid.dim)])
    return rho0, Z0, u0


def proportional(grid, region, c=None, **kw):
    """:func:`smooth_wave` densities with ``Z_i = c_i rho`` exactly."""
    rho0, _, u0 = smooth_wave(grid, region, **kw)
    mid, _ = _band_mid(region)
    c = mid if c is None else np.broadcast_to(np.asarray(c, dtype=float), (region.species_count,))
    return rho0, np.stack([ci * rho0 for ci in c]), u0


def random_band_limited(grid, region, rho=1.0, rho_amp=0.2, s_amp=0.5, u_amp=0.3, kmax=3, seed=0):
    """Random trigonometric data with wavenumbers ``|xi|_inf <= kmax``."""
    rng = np.random.default_rng(seed)
    K = region.species_count
    mid, half = _band_mid(region)
    mask = np.ones(grid.spectral_shape, dtype=bool)
    for k in grid.wavenumbers:
        mask &= np.abs(k) <= kmax

    def field():
        c = rng.standard_normal(grid.spectral_shape) + 1j * rng.standard_normal(grid.spectral_shape)
        f = so.ifft(grid, np.where(mask, c, 0.0))
        f = f - f.mean()
        return f / np.max(np.abs(f))

    rho0 = rho * (1.0 + rho_amp * field())
    Z0 = np.stack([rho0 * (mid[i] + s_amp * half[i] * field()) for i in range(K)])
    u0 = u_amp * np.stack([field() for _ in range(grid.dim)])
    return rho0, Z0, u0


RECIPES = {
    "homogeneous": homogeneous,
    "smooth_wave": smooth_wave,
    "proportional": proportional,
    "random_band_limited": random_band_limited,
}


def make_initial(name, grid, region, **params):
    try:
        recipe = RECIPES[name]
    except KeyError:
        raise ConfigError(f"unknown initial-data recipe {name!r}; known: {sorted(RECIPES)}") from None
    return recipe(grid, region, **params)


def default_config(**overrides):
    """The default smooth 2-D problem: law (e1) with gamma = beta = 2 on a 32^2 grid."""
    params = dict(
        grid=so.TorusGrid(2, 32),
        law=make_law("e1", region=AdmissibleRegion.single(0.0, 1.0)),
        N=13, epsilon=0.05, pressure_params=RegularizedPressureParams(1e-3, 5.0),
        mu=0.5, lam=0.0, dt=0.01, t_end=0.5,
    )
    params.update(overrides)
    return ApproxConfig(**params)
