"""Exception types raised across the package."""

from __future__ import annotations


class JPVIError(Exception):
    """Base class for all package errors."""


class DomainError(JPVIError, ValueError):
    """Argument outside the supported domain of a function."""


class NotConverged(JPVIError):
    """A series, quadrature or iteration hit its budget before reaching tolerance."""

    def __init__(self, message: str, value=None):
        super().__init__(message)
        self.value = value


class NotPositiveDefinite(JPVIError):
    def __init__(self, index: int, pivot=None):
        super().__init__(f"matrix is not positive definite: pivot {index} = {pivot}")
        self.index = index
        self.pivot = pivot


class PrecisionExhausted(JPVIError):
    """Cancellation consumed the working precision; retry with more bits."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


# alias kept for the factorization contract
NonFinitePivot = PrecisionExhausted


class PoleEvaluation(JPVIError, ZeroDivisionError):
    """Evaluation requested at a pole (z in {0, 1, t})."""


class ZeroDenominator(JPVIError, ZeroDivisionError):
    pass


class SingularLocus(JPVIError):
    """The Painleve VI state touched W in {0, 1, t} or t in {0, 1}."""

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


class StepUnderflow(JPVIError):
    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state
