from .base import InferenceError


class NumericalError(InferenceError):
    """Failures of the numeric substrate"""

    def __init__(self, message: str, details: str = None, operation: str = None):
        super().__init__(message, details)
        self.operation = operation


class QuadratureError(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance"""

    def __init__(
        self,
        message: str,
        best_estimate: float,
        error_estimate: float,
        details: str = None,
    ):
        super().__init__(message, details, operation="integrate")
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class RootBracketError(NumericalError):
    """Root finder was given an interval without a sign change"""

    def __init__(self, message: str, details: str = None):
        super().__init__(message, details, operation="find_root")


class DomainError(NumericalError):
    """Argument outside the support of a density or transform"""
    pass
