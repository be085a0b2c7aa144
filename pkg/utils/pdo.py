"""
Post-data opinion (PDO) curves: α as a function of the one-sided P value β,
the admissibility bounds they are checked against, and the derived
interval-mass curve.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from exceptions import AlphaBelowFloorError, CurveError, InferenceError
from .fiducial import FiducialDensity, lambda_ratio, p_f_hs
from .hypotheses import OrientedHypotheses
from .postdata import interval_mass

logger = logging.getLogger(__name__)

BetaCurve = Callable[[float], float]

# values closer than this to the lower bound count as touching it
DOMINANCE_MARGIN = 1e-9


@dataclass(frozen=True)
class PdoCurve:
    """Power law α = (cβ)^γ, or monotone cubic interpolation through (β, α) knots"""

    form: str = "power"
    c: float = 1.0
    gamma: float = 1.0
    knots: Tuple[Tuple[float, float], ...] = ()
    beta_max: float = 0.5

    def __post_init__(self):
        if self.form not in ("power", "knots"):
            raise CurveError(f"Unknown PDO curve form: {self.form}")
        if not 0.0 < self.beta_max <= 1.0:
            raise CurveError("beta_max must lie in (0, 1]", f"beta_max={self.beta_max}")
        if self.form == "power":
            if self.c <= 0 or self.gamma <= 0:
                raise CurveError("Power-law PDO curve needs c > 0 and gamma > 0")
            if self(self.beta_max) > 1.0:
                raise CurveError("PDO curve exceeds 1 on its range", f"alpha(beta_max)={self(self.beta_max):.4g}")
        else:
            betas = np.array([k[0] for k in self.knots], dtype=float)
            alphas = np.array([k[1] for k in self.knots], dtype=float)
            if betas.size < 2 or np.any(np.diff(betas) <= 0):
                raise CurveError("PDO knots need at least two strictly increasing beta values")
            if np.any(alphas <= 0) or np.any(alphas > 1):
                raise CurveError("PDO knot values must lie in (0, 1]")
            object.__setattr__(self, "_spline", PchipInterpolator(betas, alphas, extrapolate=False))

    @classmethod
    def power(cls, c: float = 1.0, gamma: float = 1.0, beta_max: float = 0.5) -> "PdoCurve":
        return cls(form="power", c=c, gamma=gamma, beta_max=beta_max)

    @classmethod
    def from_knots(cls, points: Sequence[Sequence[float]], beta_max: Optional[float] = None) -> "PdoCurve":
        knots = tuple((float(b), float(a)) for b, a in points)
        return cls(form="knots", knots=knots, beta_max=beta_max or knots[-1][0])

    @classmethod
    def from_spec(cls, spec: dict) -> "PdoCurve":
        """{form: "power", c, gamma} or {form: "knots", points: [[β, α], ...]}"""
        form = spec.get("form")
        if form == "power":
            return cls.power(spec.get("c", 1.0), spec.get("gamma", 1.0), spec.get("beta_max", 0.5))
        if form == "knots":
            return cls.from_knots(spec["points"], spec.get("beta_max"))
        raise CurveError(f"Unknown PDO curve form: {form}")

    @property
    def beta_range(self) -> Tuple[float, float]:
        if self.form == "knots":
            return self.knots[0][0], self.beta_max
        return 0.0, self.beta_max

    def __call__(self, beta: float) -> float:
        return eval_curve(self, beta)


def eval_curve(curve: PdoCurve, beta: float) -> float:
    lo, hi = curve.beta_range
    if not lo <= beta <= hi * (1.0 + 1e-12):
        raise CurveError("beta outside the PDO curve range", f"beta={beta:.6g}, range=({lo:g}, {hi:g}]")
    if curve.form == "power":
        return float((curve.c * beta) ** curve.gamma)
    return float(curve._spline(min(beta, curve.knots[-1][0])))


class ConditionalFamily(Protocol):
    """f_S and oriented hypotheses indexed by a nuisance value, invertible in β"""

    name: str

    def nuisance_for_beta(self, beta: float) -> float: ...

    def conditional(self, nuisance: float) -> Tuple[FiducialDensity, OrientedHypotheses]: ...


def _at_beta(family: ConditionalFamily, beta: float) -> Tuple[FiducialDensity, OrientedHypotheses]:
    try:
        nuisance = family.nuisance_for_beta(beta)
    except InferenceError as e:
        raise CurveError(f"beta map of {family.name} is not invertible at {beta:.6g}", str(e)) from e
    return family.conditional(nuisance)


def lower_bound_curve(family: ConditionalFamily) -> BetaCurve:
    """β ↦ P_f(H_S) under the f_S of the nuisance value producing β"""

    def lower(beta: float) -> float:
        f_s, oriented = _at_beta(family, beta)
        return p_f_hs(f_s, oriented)

    return lower


def _lambda_at(family: ConditionalFamily, beta: float) -> Tuple[float, float]:
    f_s, oriented = _at_beta(family, beta)
    return lambda_ratio(f_s, oriented.interval, oriented.direction), p_f_hs(f_s, oriented)


def interval_mass_curve(curve: PdoCurve, family: ConditionalFamily) -> BetaCurve:
    """β ↦ P(θ in the special interval | nuisance, x) with α taken from the curve"""

    def mass(beta: float) -> float:
        alpha = eval_curve(curve, beta)
        lam, floor = _lambda_at(family, beta)
        if alpha < floor:
            raise AlphaBelowFloorError(alpha, floor, f"at beta = {beta:.6g}")
        return interval_mass(alpha, lam, floor)

    return mass


def upper_bound_curve(target: float, family: ConditionalFamily) -> BetaCurve:
    """β ↦ the α that keeps the interval mass at a constant target"""
    if not 0.0 < target < 1.0:
        raise CurveError("Upper-bound target must lie in (0, 1)", f"target={target}")

    def upper(beta: float) -> float:
        lam, _ = _lambda_at(family, beta)
        return (target + lam) / (1.0 + lam)

    return upper


@dataclass
class PdoBounds:
    lower: BetaCurve
    upper: Optional[BetaCurve] = None


@dataclass
class CurveTable:
    """Curves tabulated on a β grid; failed points are NaN and listed in failures"""

    betas: np.ndarray
    columns: Dict[str, np.ndarray] = field(default_factory=dict)
    failures: Dict[str, List[Tuple[float, str]]] = field(default_factory=dict)


def tabulate(curves: Dict[str, BetaCurve], betas: Sequence[float]) -> CurveTable:
    grid = np.asarray(betas, dtype=float)
    table = CurveTable(betas=grid)
    for name, fn in curves.items():
        values = np.full(grid.shape, np.nan)
        failed = []
        for i, beta in enumerate(grid):
            try:
                values[i] = fn(float(beta))
            except InferenceError as e:
                failed.append((float(beta), str(e)))
        if failed:
            logger.warning(f"Curve '{name}' failed at {len(failed)} of {grid.size} beta values")
        table.columns[name] = values
        table.failures[name] = failed
    return table


@dataclass
class ValidationReport:
    monotone: bool
    dominates_lower: bool
    below_upper: Optional[bool] = None
    mass_monotone: Optional[bool] = None
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        checks = [self.monotone, self.dominates_lower, self.below_upper, self.mass_monotone]
        return all(c for c in checks if c is not None)


def validate(
    curve: PdoCurve,
    bounds: PdoBounds,
    grid: Sequence[float],
    family: Optional[ConditionalFamily] = None,
) -> ValidationReport:
    """Check monotonicity, strict dominance of the lower bound, the optional upper bound and a monotone interval mass"""
    table_curves = {"pdo": lambda b: eval_curve(curve, b), "lower": bounds.lower}
    if bounds.upper is not None:
        table_curves["upper"] = bounds.upper
    if family is not None:
        table_curves["mass"] = interval_mass_curve(curve, family)
    table = tabulate(table_curves, grid)
    cols = table.columns
    failures: List[str] = []

    alpha = cols["pdo"]
    monotone = bool(np.all(np.diff(alpha) > 0))
    if not monotone:
        failures.append("PDO curve is not strictly increasing in beta")

    # bound points that failed to evaluate are listed in failures, not compared
    lower = cols["lower"]
    defined = np.isfinite(lower)
    dominates = bool(np.any(defined) and np.all(alpha[defined] > lower[defined] + DOMINANCE_MARGIN))
    if not dominates and np.any(defined):
        worst = table.betas[defined][np.argmin(alpha[defined] - lower[defined])]
        failures.append(f"PDO curve does not lie above the P_f(H_S) bound (beta = {worst:.4g})")
    elif not dominates:
        failures.append("P_f(H_S) bound undefined on the whole grid")

    below_upper = None
    if "upper" in cols:
        upper = cols["upper"]
        defined = np.isfinite(upper)
        below_upper = bool(np.all(alpha[defined] <= upper[defined]))
        if not below_upper:
            failures.append("PDO curve exceeds the upper bound")

    mass_monotone = None
    if "mass" in cols:
        mass = cols["mass"]
        mass_monotone = bool(np.all(np.isfinite(mass)) and np.all(np.diff(mass) >= 0))
        if not mass_monotone:
            failures.append("Interval-mass curve is not monotone increasing")

    for name, failed in table.failures.items():
        failures.extend(f"{name}: {msg}" for _, msg in failed[:3])

    report = ValidationReport(monotone, dominates, below_upper, mass_monotone, failures)
    logger.info(f"PDO validation {'passed' if report.passed else 'failed'} on {len(table.betas)} beta values")
    return report
