"""Discrete minimum-principle monitor."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import spectral_ops as so


@dataclass(frozen=True)
class MinPrincipleRecord:
    inf_rho: float
    lower_sup: tuple
    upper_sup: tuple
    lower_l1: tuple
    upper_l1: tuple
    threshold: float
    worst_cell: tuple

    @property
    def passed(self):
        return self.inf_rho > 0 and max(self.lower_sup + self.upper_sup) <= self.threshold

    @property
    def max_defect(self):
        return max(self.lower_sup + self.upper_sup)


def check_min_principle(state, region, grid, threshold=1e-8):
    """Report ``inf rho`` and the band defects ``max(0, a rho - Z_i)``,
    ``max(0, Z_i - a_upper rho)`` in sup and L1 norms."""
    lo, hi = region.band_defects(state.rho, state.Z)
    both = np.maximum(lo, hi).max(axis=0)
    worst = tuple(int(i) for i in np.unravel_index(np.argmax(both), both.shape))
    return MinPrincipleRecord(
        inf_rho=float(np.min(state.rho)),
        lower_sup=tuple(float(np.max(x)) for x in lo),
        upper_sup=tuple(float(np.max(x)) for x in hi),
        lower_l1=tuple(float(so.integrate(grid, x)) for x in lo),
        upper_l1=tuple(float(so.integrate(grid, x)) for x in hi),
        threshold=threshold, worst_cell=worst,
    )
