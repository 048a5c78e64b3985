"""The admissible cone of partial densities and the species-ratio convention."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class AdmissibleRegion:
    """Cone ``{rho >= 0, a_lower[i] rho <= Z_i <= a_upper[i] rho}``.

    Bounds are stored as tuples, one entry per species.
    """

    a_lower: tuple
    a_upper: tuple

    def __post_init__(self):
        lo = tuple(float(x) for x in np.atleast_1d(self.a_lower))
        hi = tuple(float(x) for x in np.atleast_1d(self.a_upper))
        object.__setattr__(self, "a_lower", lo)
        object.__setattr__(self, "a_upper", hi)
        if len(lo) != len(hi) or not lo:
            raise DomainError("a_lower and a_upper need one entry per species")
        for i, (a, b) in enumerate(zip(lo, hi)):
            if not (0.0 <= a < b < np.inf):
                raise DomainError(
                    f"species {i}: need 0 <= a_lower < a_upper < inf (Hypothesis H1), "
                    f"got a_lower={a}, a_upper={b}")

    @classmethod
    def single(cls, a_lower, a_upper):
        return cls((a_lower,), (a_upper,))

    @property
    def species_count(self):
        return len(self.a_lower)

    def contains(self, rho, Z, *, tol=0.0):
        """Pointwise membership test; ``Z`` has the species axis first."""
        rho = np.asarray(rho, dtype=float)
        Z = np.asarray(Z, dtype=float)
        ok = rho >= -tol
        for i in range(self.species_count):
            ok &= (Z[i] >= self.a_lower[i] * rho - tol) & (Z[i] <= self.a_upper[i] * rho + tol)
        return ok

    def band_defects(self, rho, Z):
        """Return ``(lower, upper)`` defect arrays ``max(0, a rho - Z)`` and
        ``max(0, Z - a_upper rho)``, species axis first."""
        rho = np.asarray(rho, dtype=float)
        Z = np.asarray(Z, dtype=float)
        lo = np.stack([np.maximum(0.0, self.a_lower[i] * rho - Z[i])
                       for i in range(self.species_count)])
        hi = np.stack([np.maximum(0.0, Z[i] - self.a_upper[i] * rho)
                       for i in range(self.species_count)])
        return lo, hi

    def to_dict(self):
        return {"a_lower": list(self.a_lower), "a_upper": list(self.a_upper)}


def species_ratio(rho, Z):
    """``s = Z / rho`` with the vacuum convention ``s = 0`` where ``rho == 0``."""
    rho = np.asarray(rho, dtype=float)
    Z = np.asarray(Z, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(rho > 0, Z / np.where(rho > 0, rho, 1.0), 0.0)
    return s
