"""Run parameters of the regularized approximation scheme."""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..constitutive.laws import PressureLaw
from ..constitutive.regularize import RegularizedPressureParams
from ..errors import ConfigError, DomainError
from ..spectral_ops import TorusGrid, total_modes

SCHEMES = ("imex1", "sbdf2")


@dataclass(frozen=True)
class ApproxConfig:
    """Discretization ``(N, epsilon, delta)`` plus physics and time stepping.

    ``N`` counts Fourier mode classes ``{xi, -xi}`` of the velocity space,
    ordered by ``|xi|`` (see :func:`bifluid_lab.spectral_ops.mode_set`).
    """

    grid: TorusGrid
    law: PressureLaw
    N: int
    epsilon: float
    pressure_params: RegularizedPressureParams
    mu: float
    lam: float
    dt: float
    t_end: float
    scheme: str = "imex1"
    dealias: bool = True
    cfl_limit: float = 0.5
    cg_rtol: float = 1e-13
    cg_maxiter: int = 500
    positivity_clamp: bool = False
    checkpoint_every: int = 1
    band_threshold: float = 1e-8

    def __post_init__(self):
        problems = []
        if not self.mu > 0:
            problems.append(f"mu must be positive, got {self.mu}")
        if not 2 * self.mu + 3 * self.lam >= 0:
            problems.append(f"need 2 mu + 3 lambda >= 0, got mu={self.mu}, lambda={self.lam}")
        for name in ("epsilon", "dt", "t_end"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be positive, got {getattr(self, name)}")
        if self.scheme not in SCHEMES:
            problems.append(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not 1 <= self.N <= total_modes(self.grid):
            problems.append(f"N must lie in [1, {total_modes(self.grid)}], got {self.N}")
        if self.checkpoint_every < 1:
            problems.append("checkpoint_every must be >= 1")
        try:
            self.pressure_params.check_exponents(self.law)
        except DomainError as exc:
            problems.append(str(exc))
        if problems:
            raise ConfigError("; ".join(problems))

    @property
    def steps(self):
        return max(1, math.ceil(self.t_end / self.dt - 1e-9))

    @property
    def region(self):
        return self.law.region

    @property
    def species_count(self):
        return self.law.K

    def to_dict(self):
        return {
            "grid": self.grid.metadata(), "law": self.law.name, "law_params": self.law.params,
            "N": self.N, "epsilon": self.epsilon, "delta": self.pressure_params.delta,
            "B": self.pressure_params.B, "mu": self.mu, "lambda": self.lam, "dt": self.dt,
            "t_end": self.t_end, "scheme": self.scheme, "dealias": self.dealias,
            "cfl_limit": self.cfl_limit, "cg_rtol": self.cg_rtol,
            "positivity_clamp": self.positivity_clamp, "checkpoint_every": self.checkpoint_every,
        }
