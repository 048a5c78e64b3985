"""Pressure laws, Helmholtz energies, regularization and hypothesis audits."""
from .audit import AuditSampling, audit_hypotheses, bog_exponent
from .helmholtz import helmholtz, helmholtz_field, power_law_helmholtz
from .laws import (CATALOG, Decomposition, PressureLaw, as_species, decompose_pressure,
                   eval_pressure, fd_derivative, log_oscillating_law, make_law, power_law,
                   pressure_partial_Z, pressure_partials, separable_law, total_density_law, zero_law)
from .region import AdmissibleRegion, species_ratio
from .regularize import (RegularizedPressureParams, cutoff_law, delta_polynomial,
                         delta_polynomial_gradient, eta, eta_delta, eta_prime, h_delta,
                         regularized_helmholtz, regularized_helmholtz_field, regularized_law,
                         regularized_pressure)
from .report import Check, HypothesisReport
from .truncation import TruncationKit, profile, profile_prime, truncate

__all__ = [
    "AdmissibleRegion", "AuditSampling", "CATALOG", "Check", "Decomposition", "HypothesisReport",
    "PressureLaw", "RegularizedPressureParams", "TruncationKit", "as_species", "audit_hypotheses",
    "bog_exponent", "cutoff_law", "decompose_pressure", "delta_polynomial",
    "delta_polynomial_gradient", "eta", "eta_delta", "eta_prime", "eval_pressure",
    "fd_derivative", "h_delta", "helmholtz", "helmholtz_field", "log_oscillating_law", "make_law",
    "power_law", "power_law_helmholtz", "pressure_partial_Z", "pressure_partials", "profile", "profile_prime",
    "regularized_helmholtz", "regularized_helmholtz_field", "regularized_law",
    "regularized_pressure", "separable_law", "species_ratio", "total_density_law", "truncate",
    "zero_law",
]
