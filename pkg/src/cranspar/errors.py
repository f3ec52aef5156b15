"""Exception types shared across the package."""

from __future__ import annotations


class CranSparError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CranSparError):
    """Invalid configuration. Collects every violation found, not just the first.

    The CLI maps this to exit code 2.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DomainError(CranSparError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class NumericalError(CranSparError):
    """A numerical procedure failed beyond recoverable tolerance.

    Carries a condition-number estimate when one is available. The CLI maps
    this to exit code 3.
    """

    def __init__(self, message, condition_estimate=None):
        self.condition_estimate = condition_estimate
        if condition_estimate is not None:
            message = f"{message} (condition estimate {condition_estimate:.3e})"
        super().__init__(message)
