"""Concave density truncations ``T_k`` and their companions ``L_k``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ..errors import DomainError


def profile(z):
    """C^2 concave nondecreasing profile: ``z`` on [0, 1], 2 on [3, inf).

    On [1, 3] it is the Hermite blend ``1 + x - x^3/4 + x^4/16``, ``x = z - 1``,
    matching value, slope and curvature at both ends.
    """
    z = np.asarray(z, dtype=float)
    x = z - 1.0
    mid = 1.0 + x - x ** 3 / 4.0 + x ** 4 / 16.0
    return np.where(z < 1.0, z, np.where(z >= 3.0, 2.0, mid))[()]


def profile_prime(z):
    z = np.asarray(z, dtype=float)
    x = z - 1.0
    mid = (x - 2.0) ** 2 * (x + 1.0) / 4.0
    return np.where(z < 1.0, 1.0, np.where(z >= 3.0, 0.0, mid))[()]


@dataclass(frozen=True)
class TruncationKit:
    k: float

    def __post_init__(self):
        if not self.k > 1:
            raise DomainError(f"truncation level must exceed 1, got {self.k}")

    def T(self, z):
        """``T_k(z) = k T(z / k)``."""
        z = np.asarray(z, dtype=float)
        if np.any(z < 0):
            raise DomainError("truncation argument must be nonnegative")
        return (self.k * profile(z / self.k))[()]

    def T_prime(self, z):
        return profile_prime(np.asarray(z, dtype=float) / self.k)

    def L(self, z):
        """``L_k(z) = z * int_1^z T_k(t) / t^2 dt`` by adaptive quadrature."""
        z = np.asarray(z, dtype=float)
        if np.any(z < 0):
            raise DomainError("argument must be nonnegative")
        out = np.zeros(z.shape)
        for idx in np.ndindex(z.shape):
            zz = float(z[idx])
            if zz == 0.0 or zz == 1.0:
                continue
            lo, hi = sorted((1.0, zz))
            pts = [p for p in (self.k, 3 * self.k) if lo < p < hi] or None
            val = integrate.quad(lambda t: float(self.T(t)) / t ** 2, 1.0, zz,
                                 points=pts, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
            out[idx] = zz * val
        return out[()]


def truncate(kit, z):
    """Return ``(T_k(z), L_k(z))``."""
    return kit.T(z), kit.L(z)
