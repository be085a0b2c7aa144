from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from exceptions import CurveError, ValidationError
from utils.fiducial import (
    FiducialDensity,
    IntervalShape,
    normal_density,
    p_f_hs,
    scaled_inv_chi2_density,
    student_t_density,
)
from utils.hypotheses import (
    HypothesisPairNormal,
    OrientedHypotheses,
    SpecialInterval,
    TestStatistic,
    normal_mean_statistic,
    orient,
)
from utils.numeric import normal_ppf
from utils.postdata import Fill, PostDataDensity, assemble


@dataclass
class NormalKnownVarModel:
    """Normal mean with known sd; a single observed difference is the n = 1 case"""

    mean: float
    sigma: float
    n: int = 1
    epsilon: float = 0.0
    centre: float = 0.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValidationError("sigma must be positive", f"sigma={self.sigma}")
        if self.n < 1:
            raise ValidationError("Sample size must be at least 1", f"n={self.n}")
        if self.epsilon < 0:
            raise ValidationError("epsilon must be nonnegative", f"epsilon={self.epsilon}")

    @property
    def standard_error(self) -> float:
        return self.sigma / np.sqrt(self.n)

    def interval(self) -> SpecialInterval:
        return SpecialInterval.centred(self.centre, self.epsilon)

    def statistic(self) -> TestStatistic:
        return normal_mean_statistic(self.mean, self.standard_error)

    def fiducial(self) -> FiducialDensity:
        return normal_density(self.mean, self.standard_error, name="f_S(mu)")

    def hypothesis_pair(self) -> HypothesisPairNormal:
        return HypothesisPairNormal(self.mean - self.centre, self.standard_error, self.epsilon)

    def orient(self) -> OrientedHypotheses:
        return orient(self.statistic(), self.interval())

    def floor(self) -> float:
        return p_f_hs(self.fiducial(), self.orient())

    def assemble(
        self, alpha: float, fill: Fill = Fill.CALIBRATED, h: Optional[IntervalShape] = None
    ) -> PostDataDensity:
        return assemble(alpha, self.fiducial(), self.orient(), self.interval(), fill, h)


@dataclass
class NormalUnknownVarModel:
    """
    Normal sample summarised by (n, x̄, s²). μ carries the special interval
    [centre - ε, centre + ε]; σ has no pre-data knowledge.
    """

    n: int
    mean: float
    variance: float
    epsilon: float = 0.0
    centre: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("Sample size must be at least 2", f"n={self.n}")
        if self.variance <= 0:
            raise ValidationError("Sample variance must be positive", f"s2={self.variance}")
        if self.epsilon < 0:
            raise ValidationError("epsilon must be nonnegative", f"epsilon={self.epsilon}")

    @classmethod
    def from_sample(cls, xs: Sequence[float], epsilon: float = 0.0, centre: float = 0.0) -> "NormalUnknownVarModel":
        data = np.asarray(xs, dtype=float)
        return cls(int(data.size), float(data.mean()), float(data.var(ddof=1)), epsilon, centre)

    def sum_of_squares(self, mu: float) -> float:
        """Σ(x_i - μ)² from the summaries"""
        return (self.n - 1) * self.variance + self.n * (self.mean - mu) ** 2

    def variance_conditional(self, mu: float) -> FiducialDensity:
        """f_S(σ² | μ, x): Scale-inv-χ²(n, Σ(x_i - μ)²/n)"""
        return scaled_inv_chi2_density(self.n, self.sum_of_squares(mu) / self.n)

    def mean_model(self, sigma: float) -> NormalKnownVarModel:
        return NormalKnownVarModel(self.mean, sigma, self.n, self.epsilon, self.centre)

    def mean_fiducial(self, sigma: float) -> FiducialDensity:
        """f_S(μ | σ, x): N(x̄, σ²/n)"""
        return self.mean_model(sigma).fiducial()

    def marginal_mean(self) -> FiducialDensity:
        """μ | x under the compatible fiducial pair: x̄ + (s/√n)·t_{n-1}"""
        return student_t_density(self.mean, np.sqrt(self.variance / self.n), self.n - 1)

    def marginal_variance(self) -> FiducialDensity:
        """σ² | x under the compatible fiducial pair: Scale-inv-χ²(n - 1, s²)"""
        return scaled_inv_chi2_density(self.n - 1, self.variance)

    def mean_family(self) -> "NormalMeanFamily":
        return NormalMeanFamily(self)

    def initial_state(self) -> dict:
        return {"mu": self.mean, "sigma": float(np.sqrt(self.variance))}


@dataclass
class NormalMeanFamily:
    """μ | σ conditionals indexed by σ, with β = Φ((ε - |x̄ - centre|)√n/σ)"""

    model: NormalUnknownVarModel
    name: str = "normal-mean"

    @property
    def _distance(self) -> float:
        return abs(self.model.mean - self.model.centre) - self.model.epsilon

    def beta(self, sigma: float) -> float:
        return self.model.mean_model(sigma).orient().p_value

    def nuisance_for_beta(self, beta: float) -> float:
        if self._distance <= 0:
            raise CurveError("beta does not vary with sigma when the mean lies in the interval")
        if not 0.0 < beta < 0.5:
            raise CurveError("beta must lie in (0, 0.5) for this family", f"beta={beta}")
        return float(-self._distance * np.sqrt(self.model.n) / normal_ppf(beta))

    def conditional(self, sigma: float) -> Tuple[FiducialDensity, OrientedHypotheses]:
        known = self.model.mean_model(sigma)
        return known.fiducial(), known.orient()
