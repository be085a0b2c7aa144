import logging
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike

from exceptions import CurveError, DomainError, ValidationError
from utils.fiducial import FiducialDensity, jeffreys_density, lognormal_density
from utils.hypotheses import (
    Direction,
    OrientedHypotheses,
    SpecialInterval,
    binomial_statistic,
    orient,
)
from utils.numeric import find_root, normal_ppf

logger = logging.getLogger(__name__)

# keeps root finding away from saturated binomial tails
PI_EDGE = 1e-9


class Arm(Enum):
    TREATMENT = "treatment"
    CONTROL = "control"

    def other(self) -> "Arm":
        return Arm.CONTROL if self is Arm.TREATMENT else Arm.TREATMENT

    @property
    def parameter(self) -> str:
        return "pi_t" if self is Arm.TREATMENT else "pi_c"


def odds(p: ArrayLike) -> ArrayLike:
    """p / (1 - p)"""
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise DomainError("odds needs a probability in [0, 1)", f"p={p}")
    out = arr / (1.0 - arr)
    return float(out) if np.ndim(p) == 0 else out


def odds_inverse(o: ArrayLike) -> ArrayLike:
    """o / (1 + o)"""
    arr = np.asarray(o, dtype=float)
    if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
        raise DomainError("Inverse odds needs a finite nonnegative value", f"o={o}")
    out = arr / (1.0 + arr)
    return float(out) if np.ndim(o) == 0 else out


def special_interval_rr(pi_other: float, epsilon: float) -> SpecialInterval:
    """
    Probabilities whose odds lie within a factor 1 + ε of odds(pi_other):
    [odds⁻¹(odds(π)/(1+ε)), odds⁻¹(odds(π)(1+ε))]
    """
    if not 0.0 < pi_other < 1.0:
        raise DomainError("Conditioning proportion must lie in (0, 1)", f"pi={pi_other}")
    if epsilon < 0:
        raise DomainError("epsilon must be nonnegative", f"epsilon={epsilon}")
    base = odds(pi_other)
    return SpecialInterval(odds_inverse(base / (1.0 + epsilon)), odds_inverse(base * (1.0 + epsilon)))


@dataclass
class RelativeRiskModel:
    """Adverse-event counts in a treatment and a control arm"""

    events_t: int
    n_t: int
    events_c: int
    n_c: int
    epsilon: float = 0.08

    def __post_init__(self):
        for arm, (e, n) in (("treatment", (self.events_t, self.n_t)), ("control", (self.events_c, self.n_c))):
            if n < 1 or not 0 <= e <= n:
                raise ValidationError(f"Invalid {arm} counts", f"e={e}, n={n}")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive", f"epsilon={self.epsilon}")

    def counts(self, arm: Arm) -> Tuple[int, int]:
        if arm is Arm.TREATMENT:
            return self.events_t, self.n_t
        return self.events_c, self.n_c

    def proportion(self, arm: Arm) -> float:
        e, n = self.counts(arm)
        return e / n

    @property
    def sample_relative_risk(self) -> float:
        if self.events_c == 0:
            raise DomainError("Sample relative risk undefined with zero control events")
        return self.proportion(Arm.TREATMENT) / self.proportion(Arm.CONTROL)

    def fiducial(self, arm: Arm) -> FiducialDensity:
        """Jeffreys-approximated f_S of the arm's proportion; it ignores the other arm"""
        return jeffreys_density(*self.counts(arm))

    def initial_state(self) -> dict:
        """Sample proportions, shrunk half an event inwards so both lie strictly inside (0, 1)"""
        state = {}
        for arm in Arm:
            e, n = self.counts(arm)
            state[arm.parameter] = (e + 0.5) / (n + 1.0)
        return state


def rr_one_sided_p(model: RelativeRiskModel, pi_other: float, arm: Arm = Arm.TREATMENT) -> OrientedHypotheses:
    """
    Orient the pair for the arm's proportion given the other arm's value:
    β₀ = P(E ≤ e | π₀) against β₁ = P(E ≥ e | π₁) on I(pi_other), ties to lower.
    """
    e, n = model.counts(arm)
    interval = special_interval_rr(pi_other, model.epsilon)
    return orient(binomial_statistic(e, n), interval)


def rr_tail_betas(model: RelativeRiskModel, pi_other: float, arm: Arm = Arm.TREATMENT) -> Tuple[float, float]:
    """(β₀, β₁) before orientation"""
    e, n = model.counts(arm)
    stat = binomial_statistic(e, n)
    interval = special_interval_rr(pi_other, model.epsilon)
    return float(stat.cdf(e, interval.lo)), float(stat.comp_cdf(e, interval.hi))


def log_rr_variance(model: RelativeRiskModel) -> float:
    """1/e_t - 1/n_t + 1/e_c - 1/n_c"""
    if min(model.events_t, model.events_c) <= 0:
        raise DomainError("Log relative risk undefined with a zero event count")
    return 1.0 / model.events_t - 1.0 / model.n_t + 1.0 / model.events_c - 1.0 / model.n_c


def confidence_density_log_rr(model: RelativeRiskModel) -> FiducialDensity:
    """Confidence density of RR from the normal approximation to log(sample RR)"""
    sd = np.sqrt(log_rr_variance(model))
    if sd <= 0:
        raise DomainError("Log relative risk variance is zero", f"counts={model.counts(Arm.TREATMENT)}")
    return lognormal_density(np.log(model.sample_relative_risk), sd, name="confidence-rr")


def confidence_interval_log_rr(model: RelativeRiskModel, level: float = 0.95) -> Tuple[float, float]:
    """Equal-tailed interval exp(log RR ± z·sd)"""
    if not 0.0 < level < 1.0:
        raise ValidationError("Confidence level must lie in (0, 1)", f"level={level}")
    centre = np.log(model.sample_relative_risk)
    half = float(normal_ppf(0.5 + 0.5 * level)) * np.sqrt(log_rr_variance(model))
    return float(np.exp(centre - half)), float(np.exp(centre + half))


def fiducial_rr_sample(model: RelativeRiskModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draws of π_t/π_c under the two independent arm fiducial densities"""
    pi_t = model.fiducial(Arm.TREATMENT).sample(rng, n)
    pi_c = model.fiducial(Arm.CONTROL).sample(rng, n)
    return np.asarray(pi_t) / np.asarray(pi_c)


@dataclass
class RelativeRiskFamily:
    """
    Conditionals for one arm's proportion indexed by the other arm's value,
    with H_S held to one definition (direction) so β is invertible.
    """

    model: RelativeRiskModel
    arm: Arm = Arm.TREATMENT
    direction: Direction = Direction.LOWER

    @property
    def name(self) -> str:
        return f"rr-{self.arm.value}-{self.direction.value}"

    def beta(self, pi_other: float) -> float:
        beta_lower, beta_upper = rr_tail_betas(self.model, pi_other, self.arm)
        return beta_lower if self.direction is Direction.LOWER else beta_upper

    def nuisance_for_beta(self, beta: float) -> float:
        lo, hi = PI_EDGE, 1.0 - PI_EDGE
        b_lo, b_hi = self.beta(lo), self.beta(hi)
        if not min(b_lo, b_hi) < beta < max(b_lo, b_hi):
            raise CurveError(
                f"beta outside the range of {self.name}",
                f"beta={beta:.6g}, range=({min(b_lo, b_hi):.3g}, {max(b_lo, b_hi):.3g})",
            )
        return find_root(lambda p: self.beta(p) - beta, lo, hi)

    def conditional(self, pi_other: float) -> Tuple[FiducialDensity, OrientedHypotheses]:
        interval = special_interval_rr(pi_other, self.model.epsilon)
        oriented = OrientedHypotheses(self.direction, interval, self.beta(pi_other), self.model.counts(self.arm)[0])
        return self.model.fiducial(self.arm), oriented
