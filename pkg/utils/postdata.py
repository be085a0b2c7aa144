"""
Post-data density assembly around a special interval.

The non-H_P side receives 1 - α, the far side λ(1 - α) and the interval
α - λ(1 - α); the interval itself is filled uniformly, by the τ-calibrated
GPD fill (continuous at both endpoints), or left undefined.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from exceptions import AlphaBelowFloorError, InvalidDensityError
from .fiducial import (
    FiducialDensity,
    GpdInterval,
    IntervalShape,
    condition_inside,
    condition_outside,
    interval_moment,
    lambda_ratio,
    p_f_hs,
)
from .hypotheses import Direction, OrientedHypotheses, SpecialInterval
from .numeric import GridDensity

logger = logging.getLogger(__name__)

FLOOR_TOL = 1e-12


class Fill(Enum):
    UNIFORM = "uniform"
    CALIBRATED = "calibrated"
    PARTIAL = "partial"


@dataclass(frozen=True)
class TauCalibration:
    tau: float
    K: float
    M0: float
    M1: float
    S: float


@dataclass(frozen=True)
class PostDataDensity:
    interval: SpecialInterval
    direction: Direction
    alpha: float
    lam: float
    floor: float
    mass_below: float
    mass_inside: float
    mass_above: float
    piece_below: Optional[FiducialDensity]
    piece_inside: Optional[FiducialDensity]
    piece_above: Optional[FiducialDensity]
    fill: Fill
    f_s: FiducialDensity
    calibration: Optional[TauCalibration] = None

    @property
    def atom(self) -> float:
        """Point mass carried by a sharp interval"""
        return self.mass_inside if self.interval.is_sharp else 0.0

    def pdf(self, theta: ArrayLike) -> ArrayLike:
        th = np.asarray(theta, dtype=float)
        lo, hi = self.interval.lo, self.interval.hi
        out = np.zeros_like(th)
        below, above = th < lo, th > hi
        inside = ~(below | above)
        if self.piece_below is not None and np.any(below):
            out[below] = self.mass_below * self.piece_below.pdf(th[below])
        if self.piece_above is not None and np.any(above):
            out[above] = self.mass_above * self.piece_above.pdf(th[above])
        if np.any(inside) and not self.interval.is_sharp:
            if self.piece_inside is None:
                out[inside] = np.nan
            else:
                out[inside] = self.mass_inside * self.piece_inside.pdf(th[inside])
        return float(out) if np.ndim(theta) == 0 else out

    def cdf(self, theta: ArrayLike) -> ArrayLike:
        th = np.asarray(theta, dtype=float)
        lo, hi = self.interval.lo, self.interval.hi
        out = np.zeros_like(th)
        if self.piece_below is not None:
            out += self.mass_below * self.piece_below.cdf(np.minimum(th, lo))
        if self.interval.is_sharp:
            out += np.where(th >= lo, self.mass_inside, 0.0)
        elif self.piece_inside is not None:
            out += np.where(th >= lo, self.mass_inside * self.piece_inside.cdf(np.clip(th, lo, hi)), 0.0)
        else:
            out = np.where((th >= lo) & (th < hi), np.nan, out + np.where(th >= hi, self.mass_inside, 0.0))
        if self.piece_above is not None:
            out += np.where(th > hi, self.mass_above * self.piece_above.cdf(np.maximum(th, hi)), 0.0)
        return float(out) if np.ndim(theta) == 0 else out

    def probability(self, lo: float, hi: float) -> float:
        """Post-data probability of [lo, hi]; the interval itself is queried exactly"""
        if lo == self.interval.lo and hi == self.interval.hi:
            return self.mass_inside
        return float(self.cdf(hi) - self.cdf(np.nextafter(lo, -np.inf)))

    def boundary_values(self) -> dict:
        """One-sided limits of the assembled density at both endpoints"""
        lo, hi = self.interval.lo, self.interval.hi
        inside_lo = inside_hi = np.nan
        if self.piece_inside is not None:
            inside_lo = self.mass_inside * float(self.piece_inside.pdf(lo))
            inside_hi = self.mass_inside * float(self.piece_inside.pdf(hi))
        return {
            "below": self.mass_below * float(self.piece_below.pdf(lo)) if self.piece_below else 0.0,
            "inside_lo": inside_lo,
            "inside_hi": inside_hi,
            "above": self.mass_above * float(self.piece_above.pdf(hi)) if self.piece_above else 0.0,
        }

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
        if self.fill is Fill.PARTIAL:
            raise InvalidDensityError("Cannot sample a partially defined post-data density")
        n = 1 if size is None else int(size)
        masses = np.array([self.mass_below, self.mass_inside, self.mass_above])
        component = rng.choice(3, size=n, p=masses / masses.sum())
        draws = np.empty(n)
        for index, piece in enumerate((self.piece_below, self.piece_inside, self.piece_above)):
            chosen = component == index
            count = int(np.count_nonzero(chosen))
            if count == 0:
                continue
            if index == 1 and self.interval.is_sharp:
                draws[chosen] = self.interval.lo
            else:
                draws[chosen] = piece.sample(rng, count)
        return float(draws[0]) if size is None else draws


def interval_mass(alpha: float, lam: float, floor: Optional[float] = None) -> float:
    """P(θ in the special interval | x) = α - λ(1 - α)"""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidDensityError("alpha must lie in [0, 1]", f"alpha={alpha}")
    mass = alpha - lam * (1.0 - alpha)
    if mass < 0.0:
        if mass > -FLOOR_TOL:
            return 0.0
        raise AlphaBelowFloorError(alpha, floor if floor is not None else lam / (1.0 + lam))
    return mass


def _complement_side_mass(f_s: FiducialDensity, interval: SpecialInterval, direction: Direction) -> float:
    if direction is Direction.LOWER:
        return f_s.mass(f_s.domain[0], interval.lo)
    return f_s.mass(interval.hi, f_s.domain[1])


def calibrate_tau(
    alpha: float,
    f_s: FiducialDensity,
    oriented: OrientedHypotheses,
    interval: SpecialInterval,
    h: IntervalShape,
) -> TauCalibration:
    """
    τ making the assembled density continuous at both endpoints. h vanishes
    at the endpoints, so continuity requires ∫(1 + τh)f_S = mass_inside·S/(1 - α),
    which is linear in τ.
    """
    floor = p_f_hs(f_s, oriented)
    if alpha >= 1.0:
        raise InvalidDensityError("Calibrated fill needs alpha < 1", f"alpha={alpha}")
    lam = lambda_ratio(f_s, interval, oriented.direction)
    inside = interval_mass(alpha, lam, floor)
    s = _complement_side_mass(f_s, interval, oriented.direction)
    m0 = f_s.mass(interval.lo, interval.hi)
    m1 = interval_moment(f_s, h, interval)
    if m1 <= 0.0:
        raise InvalidDensityError("h carries no fiducial weight on the interval", f"M1={m1:.3g}")
    k = inside * s / (1.0 - alpha)
    tau = (k - m0) / m1
    if tau < -FLOOR_TOL * max(1.0, abs(k / m1)):
        raise AlphaBelowFloorError(alpha, floor, f"tau = {tau:.6g}")
    tau = max(tau, 0.0)
    logger.debug(f"Calibrated tau={tau:.6g} (K={k:.6g}, M0={m0:.6g}, M1={m1:.6g}, S={s:.6g})")
    return TauCalibration(tau=tau, K=m0 + tau * m1, M0=m0, M1=m1, S=s)


def _uniform_piece(interval: SpecialInterval) -> FiducialDensity:
    lo, hi = interval.lo, interval.hi
    width = interval.width

    def pdf(theta):
        th = np.asarray(theta, dtype=float)
        out = np.where((th >= lo) & (th <= hi), 1.0 / width, 0.0)
        return float(out) if np.ndim(theta) == 0 else out

    return FiducialDensity(
        pdf=pdf,
        cdf=lambda th: np.clip((np.asarray(th, dtype=float) - lo) / width, 0.0, 1.0),
        ppf=lambda q: lo + np.asarray(q) * width,
        domain=(lo, hi),
        name="uniform",
    )


def assemble(
    alpha: float,
    f_s: FiducialDensity,
    oriented: OrientedHypotheses,
    interval: Optional[SpecialInterval] = None,
    fill: Fill = Fill.CALIBRATED,
    h: Optional[IntervalShape] = None,
) -> PostDataDensity:
    interval = interval or oriented.interval
    floor = p_f_hs(f_s, oriented)
    if alpha < floor - FLOOR_TOL:
        raise AlphaBelowFloorError(alpha, floor)

    lam = lambda_ratio(f_s, interval, oriented.direction)
    inside = interval_mass(alpha, lam, floor)
    near, far = 1.0 - alpha, lam * (1.0 - alpha)
    if oriented.direction is Direction.LOWER:
        below, above = near, far
    else:
        below, above = far, near

    # both sides are f_S under the neutral GPD, each rescaled to its post-data mass
    outside = condition_outside(f_s, interval)
    piece_below = outside.below if below > 0.0 else None
    piece_above = outside.above if above > 0.0 else None

    calibration = None
    piece_inside = None
    if interval.is_sharp or fill is Fill.PARTIAL:
        pass
    elif fill is Fill.UNIFORM:
        piece_inside = _uniform_piece(interval)
    else:
        h = (h or IntervalShape()).validate()
        calibration = calibrate_tau(alpha, f_s, oriented, interval, h)
        piece_inside = condition_inside(f_s, GpdInterval(interval, calibration.tau, h))

    logger.debug(
        f"Assembled alpha={alpha:.6g}, lambda={lam:.6g}: masses "
        f"({below:.6g}, {inside:.6g}, {above:.6g}) fill={fill.value}"
    )
    return PostDataDensity(
        interval=interval,
        direction=oriented.direction,
        alpha=alpha,
        lam=lam,
        floor=floor,
        mass_below=below,
        mass_inside=inside,
        mass_above=above,
        piece_below=piece_below,
        piece_inside=piece_inside,
        piece_above=piece_above,
        fill=fill,
        f_s=f_s,
        calibration=calibration,
    )


def density_grid(p: PostDataDensity, n_points: int = 4096, tail: float = 1e-6) -> GridDensity:
    """
    Render the assembled density on a grid spanning the central 1 - 2·tail
    of f_S plus the special interval. Each endpoint is duplicated one ulp
    outside so jumps are drawn vertically; sharp intervals become atoms.
    """
    f_s, interval = p.f_s, p.interval
    lo_q = float(f_s.quantile(tail))
    hi_q = float(f_s.upper_quantile(tail))
    pad = max(interval.width, 1e-3 * (hi_q - lo_q))
    start = max(min(lo_q, interval.lo - pad), f_s.domain[0])
    stop = min(max(hi_q, interval.hi + pad), f_s.domain[1])

    base = np.linspace(start, stop, n_points)
    base = base[(base > f_s.domain[0]) & (base < f_s.domain[1])]
    edges = [np.nextafter(interval.lo, -np.inf), np.nextafter(interval.hi, np.inf)]
    if not interval.is_sharp and p.fill is not Fill.PARTIAL:
        edges += [interval.lo, interval.hi]
    points = np.union1d(base, edges)
    if p.fill is Fill.PARTIAL or interval.is_sharp:
        points = points[(points < interval.lo) | (points > interval.hi)]

    values = np.nan_to_num(p.pdf(points), nan=0.0)
    atoms = {interval.lo: p.mass_inside} if interval.is_sharp and p.mass_inside > 0 else {}
    return GridDensity(points=points, values=values, domain=f_s.domain, atoms=atoms)
