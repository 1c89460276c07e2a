"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: domain problems exit with 3 and
numerical failures with 4.
"""

from __future__ import annotations


class BmoSharpError(Exception):
    """Base class for all library errors."""


class DomainError(BmoSharpError, ValueError):
    """An argument lies outside the set where the quantity is defined."""

    def __init__(self, message: str, violation: float | None = None):
        super().__init__(message)
        self.violation = violation


class RangeError(DomainError):
    """A target value is outside the range of a monotone function."""

    def __init__(self, message: str, attained: tuple[float, float] | None = None):
        super().__init__(message)
        self.attained = attained


class ParameterError(BmoSharpError, ValueError):
    """Unsupported exponent combination."""


class NumericalError(BmoSharpError, ArithmeticError):
    """A quadrature or root solve did not reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual
