"""Helmholtz free energy of a pressure law.

For ``rho > 0`` the energy density is

    H(rho, Z) = rho * int_1^rho P(s, s Z/rho) / s^2 ds,   H(0, 0) = 0,

one solution of ``rho dH/drho + sum_i Z_i dH/dZ_i - H = P``.  The integral is
evaluated in the logarithmic variable ``t = log s``,

    int_0^{log rho} P(e^t, e^t zeta) e^{-t} dt,   zeta = Z / rho,

which turns the possible ``s^(alpha-2)`` singularity at vacuum into a smooth
exponential and keeps panels well scaled on ``[1e-3, 1e3]`` and beyond.
"""
from __future__ import annotations

import warnings

import numpy as np
from scipy import integrate

from ..errors import DomainError, NumericError
from .laws import as_species, pressure_partial_Z

_GL_CACHE: dict = {}


def _gauss_legendre(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _validate(law, rho, Z):
    if np.any(rho < 0) or np.any(Z < 0):
        raise DomainError("densities must be nonnegative")
    vac = rho == 0
    if np.any(vac & np.any(Z > 0, axis=0)):
        raise DomainError("rho = 0 with Z > 0 lies outside the admissible region")


def helmholtz(law, rho, Z, *, rtol=1e-10, atol=1e-12):
    """Helmholtz energy density by adaptive Gauss-Kronrod quadrature.

    Works elementwise on arrays.  Raises :class:`NumericError` when QUADPACK
    cannot reach the requested tolerance; the message carries the achieved
    error estimate.
    """
    rho, Z = as_species(rho, Z, law.K)
    _validate(law, rho, Z)
    out = np.zeros(rho.shape)
    for idx in np.ndindex(rho.shape):
        r = float(rho[idx])
        if r == 0.0 or r == 1.0:
            continue
        zeta = np.asarray(Z[(slice(None),) + idx], dtype=float) / r
        out[idx] = r * _log_integral(law, r, zeta, rtol, atol)
    return out[()]


def _log_integral(law, r, zeta, rtol, atol):
    zcol = zeta.reshape(-1, 1)

    def integrand(t):
        s = np.exp(t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return float(law.evaluate(np.array([s]), s * zcol)[0]) / s

    a, b = 0.0, float(np.log(r))
    pts = None
    if law.breakpoints is not None:
        bp = [np.log(p) for p in law.breakpoints(zeta) if p > 0]
        lo, hi = min(a, b), max(a, b)
        pts = [t for t in bp if lo < t < hi] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info = integrate.quad(integrand, a, b, epsabs=atol, epsrel=rtol,
                                        limit=200, points=pts, full_output=1)[:3]
    if not np.isfinite(val) or err > 10 * max(atol, rtol * abs(val)):
        raise NumericError(
            f"Helmholtz quadrature failed at rho={r!r}, zeta={zeta.tolist()!r}: "
            f"value {val!r}, error estimate {err!r}")
    return val


def _panels(logr, width, nodes):
    """Composite Gauss-Legendre nodes/weights on [0, logr], vectorised over points."""
    m = max(1, int(np.ceil(np.max(np.abs(logr)) / width))) if logr.size else 1
    x, w = _gauss_legendre(nodes)
    # panel j covers [j/m, (j+1)/m] of the unit interval
    u = (np.arange(m)[:, None] + 0.5 * (x[None, :] + 1.0)) / m
    wu = np.broadcast_to(0.5 * w[None, :] / m, u.shape)
    u = u.ravel()
    wu = wu.ravel()
    t = logr[..., None] * u
    wt = logr[..., None] * wu
    return t, wt


def helmholtz_field(law, rho, Z, *, with_gradient=False, nodes=20, panel_width=0.5):
    """Vectorised Helmholtz energy for grid data (fixed composite Gauss-Legendre).

    Intended for smooth laws on densities bounded away from vacuum, where a
    fixed rule is accurate to round-off.  With ``with_gradient`` the partials
    are returned too, using

        dH/dZ_i  = int_1^rho dP/dZ_i(s, s zeta) / s ds,
        dH/drho  = (H + P - sum_i Z_i dH/dZ_i) / rho.

    Returns ``H`` or ``(H, dH/drho, dH/dZ)``.
    """
    rho, Z = as_species(rho, Z, law.K)
    _validate(law, rho, Z)
    pos = rho > 0
    r = np.where(pos, rho, 1.0)
    zeta = Z / r
    logr = np.log(r)
    t, wt = _panels(logr, panel_width, nodes)
    s = np.exp(t)
    zq = zeta[..., None] * s
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        pq = law.evaluate(s, zq)
    H = r * np.sum(pq / s * wt, axis=-1)
    H = np.where(pos, H, 0.0)
    if not np.all(np.isfinite(H)):
        raise NumericError("non-finite Helmholtz energy on grid")
    if not with_gradient:
        return H
    dzq = pressure_partial_Z(law, s, zq)
    dHdZ = np.sum(dzq * wt, axis=-1)
    P = law.evaluate(r, Z)
    dHdr = (H + P - np.sum(Z * dHdZ, axis=0)) / r
    dHdZ = np.where(pos, dHdZ, 0.0)
    dHdr = np.where(pos, dHdr, 0.0)
    return H, dHdr, dHdZ


def power_law_helmholtz(rho, gamma):
    """Closed form ``(rho^gamma - rho) / (gamma - 1)`` for ``P = rho^gamma``."""
    rho = np.asarray(rho, dtype=float)
    if gamma == 1:
        return rho * np.log(np.where(rho > 0, rho, 1.0))
    return (rho ** gamma - rho) / (gamma - 1.0)
