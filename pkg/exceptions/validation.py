from .base import InferenceError


class ValidationError(InferenceError):
    """Input validation errors"""
    pass


class ConfigError(ValidationError):
    """Malformed or incoherent analysis configuration"""

    def __init__(self, message: str, details: str = None, field: str = None, line: int = None):
        super().__init__(message, details)
        self.field = field
        self.line = line


class AlphaBelowFloorError(ValidationError):
    """Probability of H_S below the fiducial floor P_f(H_S)"""

    def __init__(self, alpha: float, floor: float, details: str = None):
        super().__init__(f"alpha below P_f(H_S) = {floor:.4f}", details or f"alpha = {alpha:.6g}")
        self.alpha = alpha
        self.floor = floor


class DegenerateConditioningError(ValidationError):
    """Conditioning event carries (numerically) zero fiducial mass"""
    pass


class InvalidDensityError(ValidationError):
    """Density violates a structural requirement (normalisation, endpoint zeros)"""
    pass


class CurveError(ValidationError):
    """Invalid post-data opinion curve or evaluation outside its range"""
    pass


class SamplerError(InferenceError):
    """Invalid sampler configuration or undefined diagnostic"""
    pass
