from .base import InferenceError
from .numerical import (
    NumericalError,
    QuadratureError,
    RootBracketError,
    DomainError,
)
from .validation import (
    ValidationError,
    ConfigError,
    AlphaBelowFloorError,
    DegenerateConditioningError,
    InvalidDensityError,
    CurveError,
    SamplerError,
)

__all__ = [
    "InferenceError",
    "NumericalError",
    "QuadratureError",
    "RootBracketError",
    "DomainError",
    "ValidationError",
    "ConfigError",
    "AlphaBelowFloorError",
    "DegenerateConditioningError",
    "InvalidDensityError",
    "CurveError",
    "SamplerError",
]
