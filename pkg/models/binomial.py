from dataclasses import dataclass
from typing import Optional

from exceptions import ValidationError
from utils.fiducial import FiducialDensity, IntervalShape, jeffreys_density, p_f_hs
from utils.hypotheses import (
    OrientedHypotheses,
    SpecialInterval,
    TestStatistic,
    binomial_statistic,
    orient,
)
from utils.postdata import Fill, PostDataDensity, assemble


@dataclass
class BinomialModel:
    """e successes out of n trials, special interval [centre - ε, centre + ε]"""

    successes: int
    trials: int
    epsilon: float = 0.03
    centre: float = 0.5

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise ValidationError("Success count out of range", f"e={self.successes}, n={self.trials}")
        lo, hi = self.centre - self.epsilon, self.centre + self.epsilon
        if not 0.0 < lo <= hi < 1.0:
            raise ValidationError("Special interval must lie inside (0, 1)", f"[{lo:g}, {hi:g}]")

    @property
    def proportion(self) -> float:
        return self.successes / self.trials

    def interval(self) -> SpecialInterval:
        return SpecialInterval.centred(self.centre, self.epsilon)

    def statistic(self) -> TestStatistic:
        return binomial_statistic(self.successes, self.trials)

    def fiducial(self) -> FiducialDensity:
        return jeffreys_density(self.successes, self.trials)

    def orient(self) -> OrientedHypotheses:
        return orient(self.statistic(), self.interval())

    def floor(self) -> float:
        return p_f_hs(self.fiducial(), self.orient())

    def assemble(
        self, alpha: float, fill: Fill = Fill.CALIBRATED, h: Optional[IntervalShape] = None
    ) -> PostDataDensity:
        return assemble(alpha, self.fiducial(), self.orient(), self.interval(), fill, h)
