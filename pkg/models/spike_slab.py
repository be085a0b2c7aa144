import numpy as np

from exceptions import ValidationError
from utils.numeric import normal_pdf


def bayes_spike_slab(x: float, sigma: float, prior_sd: float, prior_mass: float) -> float:
    """
    Posterior probability that μ = 0 under a point mass p0 at zero and a
    N(0, σ0²) slab, for x ~ N(μ, σ²).
    """
    if sigma <= 0 or prior_sd <= 0:
        raise ValidationError("Standard deviations must be positive", f"sigma={sigma}, sigma0={prior_sd}")
    if not 0.0 < prior_mass < 1.0:
        raise ValidationError("Prior mass must lie in (0, 1)", f"p0={prior_mass}")

    spike = prior_mass * normal_pdf(x / sigma) / sigma
    slab_sd = np.hypot(sigma, prior_sd)
    slab = (1.0 - prior_mass) * normal_pdf(x / slab_sd) / slab_sd
    return float(spike / (spike + slab))
