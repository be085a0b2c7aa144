"""
Parameter-space / sampling-space hypothesis pairs.

A pair (H_P, H_S) is oriented from a test statistic and a special interval:
H_P is a one-sided restriction on the parameter, H_S bounds the long-run
proportion of an as-yet-unobserved statistic falling in one tail by the
one-sided P value β.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from exceptions import DomainError, InvalidDensityError
from .numeric import binom_lower_tail, binom_pmf, binom_upper_tail, normal_cdf

logger = logging.getLogger(__name__)


class Direction(Enum):
    LOWER = "lower"  # H_P: θ ≥ θ_j0, H_S on the left tail
    UPPER = "upper"  # H_P: θ ≤ θ_j1, H_S on the right tail

    @property
    def tail(self) -> str:
        return "left" if self is Direction.LOWER else "right"

    def mirrored(self) -> "Direction":
        return Direction.UPPER if self is Direction.LOWER else Direction.LOWER


@dataclass(frozen=True)
class SpecialInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise DomainError("Special interval endpoints must be finite")
        if self.lo > self.hi:
            raise DomainError("Special interval needs lo <= hi", f"[{self.lo}, {self.hi}]")

    @property
    def is_sharp(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, theta: float) -> bool:
        return self.lo <= theta <= self.hi

    @classmethod
    def centred(cls, centre: float, half_width: float) -> "SpecialInterval":
        if half_width < 0:
            raise DomainError("Half-width must be nonnegative", f"epsilon={half_width}")
        return cls(centre - half_width, centre + half_width)


@dataclass(frozen=True)
class TestStatistic:
    """
    Observed statistic t with its CDF F(t|θ) and complementary CDF
    F'(t|θ) = P(T ≥ t | θ). For a discrete statistic pmf gives P(T = t | θ).
    """

    __test__ = False

    value: float
    cdf: Callable[[float, float], float]
    comp_cdf: Callable[[float, float], float]
    pmf: Optional[Callable[[float, float], float]] = None
    ancillary: Tuple = ()

    @property
    def is_discrete(self) -> bool:
        return self.pmf is not None

    def tail_proportion(self, theta: float, direction: Direction) -> float:
        """Long-run proportion of the H_S tail event under θ"""
        if direction is Direction.LOWER:
            return float(self.cdf(self.value, theta))
        return float(self.comp_cdf(self.value, theta))


@dataclass(frozen=True)
class OrientedHypotheses:
    direction: Direction
    interval: SpecialInterval
    p_value: float
    statistic_value: float

    @property
    def h_s_tail(self) -> str:
        return self.direction.tail

    @property
    def boundary(self) -> float:
        return self.interval.lo if self.direction is Direction.LOWER else self.interval.hi

    def h_p(self, theta: float) -> bool:
        if self.direction is Direction.LOWER:
            return theta >= self.interval.lo
        return theta <= self.interval.hi

    def h_s(self, tail_proportion: float) -> bool:
        return tail_proportion <= self.p_value

    def describe(self) -> str:
        op = ">=" if self.direction is Direction.LOWER else "<="
        return f"H_P: theta {op} {self.boundary:g}, beta = {self.p_value:.4g}"


@dataclass(frozen=True)
class HypothesisPairNormal:
    """Observed difference x with known sd σ and special interval [-ε, ε]"""

    x: float
    sigma: float
    epsilon: float = 0.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise DomainError("sigma must be positive", f"sigma={self.sigma}")
        if self.epsilon < 0:
            raise DomainError("epsilon must be nonnegative", f"epsilon={self.epsilon}")


def orient(stat: TestStatistic, interval: SpecialInterval) -> OrientedHypotheses:
    """Pick the lower pair iff F(t|θ_j0) ≤ F'(t|θ_j1); ties go to lower"""
    beta_lower = float(stat.cdf(stat.value, interval.lo))
    beta_upper = float(stat.comp_cdf(stat.value, interval.hi))
    if beta_lower <= beta_upper:
        direction, beta = Direction.LOWER, beta_lower
    else:
        direction, beta = Direction.UPPER, beta_upper
    oriented = OrientedHypotheses(direction, interval, min(max(beta, 0.0), 1.0), stat.value)
    logger.debug(f"Oriented t={stat.value:g} on [{interval.lo:g}, {interval.hi:g}]: {oriented.describe()}")
    return oriented


def two_sided_p(h: HypothesisPairNormal) -> float:
    return float(2.0 * normal_cdf(-abs(h.x) / h.sigma))


def q_value(h: HypothesisPairNormal) -> float:
    a = abs(h.x)
    return float(
        normal_cdf((-a - h.epsilon) / h.sigma) + normal_cdf((-a + h.epsilon) / h.sigma)
    )


def one_sided_p_normal(h: HypothesisPairNormal) -> float:
    if h.x <= 0:
        return float(normal_cdf((h.x + h.epsilon) / h.sigma))
    return float(normal_cdf((-h.x + h.epsilon) / h.sigma))


def normal_mean_statistic(mean: float, standard_error: float) -> TestStatistic:
    """T = x̄ with T | μ ~ N(μ, se²)"""
    if standard_error <= 0:
        raise DomainError("Standard error must be positive", f"se={standard_error}")
    return TestStatistic(
        value=mean,
        cdf=lambda t, mu: normal_cdf((t - mu) / standard_error),
        comp_cdf=lambda t, mu: normal_cdf((mu - t) / standard_error),
    )


def binomial_statistic(successes: int, trials: int) -> TestStatistic:
    """T = count with inclusive tails P(T ≤ t) and P(T ≥ t)"""
    return TestStatistic(
        value=successes,
        cdf=lambda t, p: binom_lower_tail(int(t), trials, p),
        comp_cdf=lambda t, p: binom_upper_tail(int(t), trials, p),
        pmf=lambda t, p: binom_pmf(int(t), trials, p),
    )


def check_monotone(stat: TestStatistic, theta_grid: Sequence[float], tol: float = 1e-12) -> bool:
    """
    Numerical check that F(t|θ) and 1 - F'(t|θ) decrease in θ on a grid,
    strictly wherever the tail is not saturated, and that the two tails are
    complementary (up to the atom at t for discrete statistics).
    """
    grid = np.asarray(theta_grid, dtype=float)
    lower = np.array([stat.cdf(stat.value, th) for th in grid])
    upper = np.array([stat.comp_cdf(stat.value, th) for th in grid])

    for name, curve in (("F", lower), ("1 - F'", 1.0 - upper)):
        steps = np.diff(curve)
        if np.any(steps > tol):
            raise InvalidDensityError(f"{name}(t|theta) increases in theta", f"t={stat.value}")
        interior = (curve[:-1] > tol) & (curve[:-1] < 1.0 - tol) & (curve[1:] > tol)
        if np.any(steps[interior] >= 0.0):
            raise InvalidDensityError(f"{name}(t|theta) not strictly decreasing", f"t={stat.value}")

    atoms = (
        np.array([stat.pmf(stat.value, th) for th in grid]) if stat.is_discrete else 0.0
    )
    if np.any(np.abs(lower + upper - atoms - 1.0) > 1e-9):
        raise InvalidDensityError("Statistic tails are not complementary", f"t={stat.value}")
    return True
