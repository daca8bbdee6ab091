"""Exception hierarchy shared by every module of the package."""


class QOscError(Exception):
    """Base class for all errors raised by :mod:`qoscillator`."""


class DomainError(QOscError, ValueError):
    """An argument lies outside the admissible domain of an operation."""


class RangeError(QOscError, OverflowError):
    """A result is not representable in double precision."""


class PoleError(QOscError, ZeroDivisionError):
    """Evaluation was requested at (or too close to) a pole."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class SingularOperatorError(QOscError, ZeroDivisionError):
    """An operator is undefined for the given parameters."""


class ConfigurationError(QOscError, ValueError):
    """A model configuration is inconsistent or pathological."""


class ConvergenceError(QOscError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ResourceGuardError(QOscError, RuntimeError):
    """A request exceeds a cost guard; pass the override flag to proceed."""
