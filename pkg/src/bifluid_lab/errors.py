"""Exception hierarchy shared by every module of the package."""


class BifluidError(Exception):
    """Base class for all errors raised by bifluid_lab."""


class DomainError(BifluidError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class NumericError(BifluidError, ArithmeticError):
    """A numerical procedure failed (non-finite value, no convergence)."""


class CapabilityError(BifluidError):
    """The object lacks an optional capability (e.g. a declared decomposition)."""


class BlowUpError(NumericError):
    """The time stepper produced non-finite fields."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ConfigError(BifluidError, ValueError):
    """A run/study/audit configuration is malformed or inconsistent."""
