"""
Metropolis-within-Gibbs over a set of full conditional densities, plus
importance sampling for single-parameter renders.

Conditionals that can be drawn from exactly are drawn exactly; the others
are updated with a symmetric random-walk Metropolis step whose scale is
tuned during burn-in and frozen afterwards.
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike

from exceptions import InferenceError, SamplerError
from .fiducial import FiducialDensity
from .helpers import ProgressTracker
from .numeric import GridDensity, RngStream
from .postdata import Fill, PostDataDensity

logger = logging.getLogger(__name__)

State = Dict[str, float]
Target = Callable[[float], float]

ACCEPTANCE_BAND = (0.2, 0.5)
ESS_WARNING_FRACTION = 0.01


@dataclass(frozen=True)
class ScanOrder:
    """Uniform-random scan, or a fixed permutation of parameter indices"""

    kind: str = "random"
    permutation: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("random", "fixed"):
            raise SamplerError(f"Unknown scan kind: {self.kind}")

    @classmethod
    def random(cls) -> "ScanOrder":
        return cls("random")

    @classmethod
    def fixed(cls, permutation: Sequence[int]) -> "ScanOrder":
        return cls("fixed", tuple(int(i) for i in permutation))

    @classmethod
    def from_names(cls, order: Sequence[str], names: Sequence[str]) -> "ScanOrder":
        missing = [n for n in order if n not in names]
        if missing:
            raise SamplerError("Scan order names unknown parameters", ", ".join(missing))
        return cls.fixed([list(names).index(n) for n in order])

    def check(self, k: int) -> "ScanOrder":
        if self.kind == "fixed" and sorted(self.permutation) != list(range(k)):
            raise SamplerError(
                "Fixed scan must visit every parameter exactly once",
                f"permutation={self.permutation}, parameters={k}",
            )
        return self

    def describe(self, names: Sequence[str]) -> str:
        if self.kind == "random":
            return "random"
        return "fixed(" + ",".join(names[i] for i in self.permutation) + ")"


@dataclass
class GibbsConfig:
    n_samples: int
    burn_in: int = 1000
    seed: RngStream = field(default_factory=lambda: RngStream(0))
    proposal_scales: Dict[str, float] = field(default_factory=dict)
    thin: int = 1
    tune: bool = True
    tune_window: int = 100
    warn_window: int = 1000

    def __post_init__(self):
        if self.n_samples <= 0:
            raise SamplerError("n_samples must be positive", f"n_samples={self.n_samples}")
        if self.burn_in < 0 or self.thin < 1:
            raise SamplerError("burn_in must be >= 0 and thin >= 1")
        bad = {k: v for k, v in self.proposal_scales.items() if not v > 0}
        if bad:
            raise SamplerError("Proposal scales must be positive", str(bad))


@dataclass
class ChainOutput:
    """
    One row per recorded transition. A fixed-scan transition is a full
    sweep; a random-scan transition is a single coordinate update.
    """

    samples: np.ndarray
    names: Tuple[str, ...]
    acceptance_rates: Dict[str, float]
    scan: ScanOrder
    seed: RngStream
    selection_counts: Dict[str, int] = field(default_factory=dict)
    failures: Dict[str, int] = field(default_factory=dict)
    proposal_scales: Dict[str, float] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    approximate: bool = False

    def column(self, name: str) -> np.ndarray:
        return self.samples[:, self.names.index(name)]

    def __len__(self):
        return self.samples.shape[0]


class Conditional:
    """A full conditional p(θ_j | θ_-j, x) for the parameter `name`"""

    name: str
    exact: bool = False
    approximate: bool = False
    initial_scale: float = 1.0

    def target(self, state: State) -> Target:
        """Density up to a constant of θ_j given the other coordinates"""
        raise NotImplementedError

    def draw(self, state: State, rng: np.random.Generator) -> float:
        raise NotImplementedError


class ExactConditional(Conditional):
    """
    Conditional drawn exactly from a fiducial density built from the other
    coordinates; `transform` maps the density's variable to the parameter
    (e.g. σ² -> σ).
    """

    exact = True

    def __init__(
        self,
        name: str,
        build: Callable[[State], FiducialDensity],
        transform: Optional[Callable[[float], float]] = None,
    ):
        self.name = name
        self.build = build
        self.transform = transform

    def draw(self, state: State, rng: np.random.Generator) -> float:
        value = float(self.build(state).sample(rng))
        return self.transform(value) if self.transform else value

    def target(self, state: State) -> Target:
        if self.transform is not None:
            raise SamplerError(f"Conditional '{self.name}' is only available as a sampler")
        return self.build(state).pdf


class DensityConditional(Conditional):
    """Conditional known through an evaluable density; updated by Metropolis"""

    def __init__(self, name: str, build: Callable[[State], Target], initial_scale: float = 1.0):
        self.name = name
        self.build = build
        self.initial_scale = initial_scale

    def target(self, state: State) -> Target:
        return self.build(state)


class BispatialConditional(Conditional):
    """
    Post-data density of θ_j re-assembled from scratch for the current values
    of the other coordinates (β, α, λ and τ are all re-derived).
    """

    def __init__(self, name: str, build: Callable[[State], PostDataDensity], initial_scale: float = 1.0):
        self.name = name
        self.build = build
        self.initial_scale = initial_scale

    def target(self, state: State) -> Target:
        density = self.build(state)
        if density.interval.is_sharp:
            raise SamplerError(f"Metropolis updates of '{self.name}' need a non-sharp special interval")
        if density.fill is Fill.PARTIAL:
            raise SamplerError(f"Conditional '{self.name}' is undefined inside its special interval")
        return lambda theta: float(density.pdf(theta))


class MemoizedConditional(Conditional):
    """
    Caches the inner conditional's target at nuisance values on a grid of
    the given resolution and interpolates linearly between the two grid
    points around the current value. The cache is least-recently-used and
    holds at most `max_entries` targets. Results are approximate; chains
    using it are flagged. Build one instance per chain.
    """

    approximate = True

    def __init__(self, inner: Conditional, nuisance: str, resolution: float, max_entries: int = 4096):
        if resolution <= 0:
            raise SamplerError("Memo resolution must be positive", f"resolution={resolution}")
        if inner.exact:
            raise SamplerError(f"Conditional '{inner.name}' is drawn exactly; nothing to memoize")
        if max_entries < 2:
            raise SamplerError("Memo needs room for two grid points", f"max_entries={max_entries}")
        self.inner = inner
        self.name = inner.name
        self.initial_scale = inner.initial_scale
        self.nuisance = nuisance
        self.resolution = resolution
        self.max_entries = max_entries
        self._targets: "OrderedDict[int, Optional[Target]]" = OrderedDict()

    def _cached(self, index: int, state: State) -> Optional[Target]:
        if index in self._targets:
            self._targets.move_to_end(index)
            return self._targets[index]
        node = dict(state)
        node[self.nuisance] = index * self.resolution
        try:
            target = self.inner.target(node)
        except (InferenceError, ValueError):
            target = None
        self._targets[index] = target
        if len(self._targets) > self.max_entries:
            self._targets.popitem(last=False)
        return target

    def target(self, state: State) -> Target:
        position = state[self.nuisance] / self.resolution
        lower = int(np.floor(position))
        weight = position - lower
        left, right = self._cached(lower, state), self._cached(lower + 1, state)
        if left is None and right is None:
            raise SamplerError(
                f"Conditional '{self.name}' undefined on both grid points",
                f"{self.nuisance}={state[self.nuisance]:g}",
            )
        if right is None or weight == 0.0:
            return left if left is not None else right
        if left is None:
            return right
        return lambda theta: (1.0 - weight) * left(theta) + weight * right(theta)

    @property
    def cache_size(self) -> int:
        return len(self._targets)


def _safe_density(target: Target, theta: float) -> float:
    try:
        value = float(target(theta))
    except (InferenceError, ValueError, ZeroDivisionError, FloatingPointError):
        return 0.0
    return value if np.isfinite(value) and value > 0.0 else 0.0


def metropolis_step(
    target: Target,
    current: float,
    scale: float,
    rng: np.random.Generator,
    current_density: Optional[float] = None,
) -> Tuple[float, bool]:
    """Symmetric normal random-walk step accepting with min(1, target(proposal)/target(current))"""
    density = current_density if current_density is not None else _safe_density(target, current)
    if density <= 0.0:
        raise SamplerError("Metropolis step needs target(current) > 0", f"current={current:g}")
    proposal = current + scale * rng.standard_normal()
    proposed = _safe_density(target, proposal)
    if proposed >= density or rng.random() * density < proposed:
        return proposal, True
    return current, False


class _Coordinate:
    """Per-parameter bookkeeping for one chain"""

    def __init__(self, conditional: Conditional, scale: float):
        self.conditional = conditional
        self.scale = scale
        self.attempts = 0
        self.accepted = 0
        self.failures = 0
        self.window_attempts = 0
        self.window_accepted = 0
        self.warn_attempts = 0
        self.warn_accepted = 0
        self.warned = False

    def reset_counts(self):
        self.attempts = self.accepted = self.failures = 0
        self.warn_attempts = self.warn_accepted = 0

    def record(self, accepted: bool):
        self.attempts += 1
        self.window_attempts += 1
        self.warn_attempts += 1
        if accepted:
            self.accepted += 1
            self.window_accepted += 1
            self.warn_accepted += 1

    def tune(self, window: int):
        if self.conditional.exact or self.window_attempts < window:
            return
        rate = self.window_accepted / self.window_attempts
        if rate < ACCEPTANCE_BAND[0]:
            self.scale *= max(0.25, rate / ACCEPTANCE_BAND[0])
        elif rate > ACCEPTANCE_BAND[1]:
            self.scale *= min(4.0, 1.0 + (rate - ACCEPTANCE_BAND[1]) / (1.0 - ACCEPTANCE_BAND[1]) * 3.0)
        self.window_attempts = self.window_accepted = 0


def _update(coord: _Coordinate, state: State, rng: np.random.Generator) -> bool:
    """Update one coordinate in place; failures to build the conditional count as rejections"""
    name = coord.conditional.name
    try:
        if coord.conditional.exact:
            value = coord.conditional.draw(state, rng)
            if not np.isfinite(value):
                raise SamplerError(f"Non-finite draw for '{name}'")
            state[name] = value
            return True
        target = coord.conditional.target(state)
        current = _safe_density(target, state[name])
        if current <= 0.0:
            raise SamplerError(f"Current value of '{name}' has zero density", f"{name}={state[name]:g}")
        state[name], accepted = metropolis_step(target, state[name], coord.scale, rng, current)
        return accepted
    except InferenceError as e:
        coord.failures += 1
        logger.debug(f"Update of '{name}' rejected: {e}")
        return False


def gibbs_run(
    conditionals: Sequence[Conditional],
    config: GibbsConfig,
    scan: ScanOrder,
    initial: State,
    label: str = "chain",
) -> ChainOutput:
    names = tuple(c.name for c in conditionals)
    if len(set(names)) != len(names):
        raise SamplerError("Conditionals must name distinct parameters", ", ".join(names))
    missing = [n for n in names if n not in initial or not np.isfinite(initial[n])]
    if missing:
        raise SamplerError("Every parameter needs a finite initial value", ", ".join(missing))
    scan.check(len(names))

    rng = config.seed.generator()
    state: State = {k: float(v) for k, v in initial.items()}
    coords = [
        _Coordinate(c, float(config.proposal_scales.get(c.name, c.initial_scale)))
        for c in conditionals
    ]
    k = len(coords)
    order = list(scan.permutation) if scan.kind == "fixed" else None
    recorded_transitions = config.n_samples * config.thin
    total = config.burn_in + recorded_transitions
    samples = np.empty((config.n_samples, k))
    selections = np.zeros(k, dtype=np.int64)
    warnings: List[str] = []
    tracker = ProgressTracker(total, label=label)

    for transition in range(total):
        burning = transition < config.burn_in
        if transition == config.burn_in:
            for coord in coords:
                coord.reset_counts()

        visit = order if order is not None else [int(rng.integers(k))]
        for j in visit:
            coord = coords[j]
            coord.record(_update(coord, state, rng))
            if burning and config.tune:
                coord.tune(config.tune_window)
            elif not burning:
                selections[j] += 1
                if coord.warn_attempts >= config.warn_window:
                    if coord.warn_accepted == 0 and not coord.warned:
                        message = f"Zero acceptance for '{coord.conditional.name}' over {config.warn_window} updates"
                        warnings.append(message)
                        logger.warning(f"{label}: {message}")
                        coord.warned = True
                    coord.warn_attempts = coord.warn_accepted = 0

        if not burning:
            step = transition - config.burn_in
            if (step + 1) % config.thin == 0:
                samples[step // config.thin] = [state[n] for n in names]
        if (transition + 1) % 1000 == 0 or transition + 1 == total:
            tracker.update(transition + 1 - tracker.current_step)

    acceptance = {
        c.conditional.name: (c.accepted / c.attempts if c.attempts else float("nan")) for c in coords
    }
    output = ChainOutput(
        samples=samples,
        names=names,
        acceptance_rates=acceptance,
        scan=scan,
        seed=config.seed,
        selection_counts={n: int(selections[i]) for i, n in enumerate(names)},
        failures={c.conditional.name: c.failures for c in coords},
        proposal_scales={c.conditional.name: c.scale for c in coords},
        warnings=warnings,
        approximate=any(c.approximate for c in conditionals),
    )
    rates = ", ".join(f"{n}={r:.2f}" for n, r in acceptance.items())
    logger.info(f"{label}: {config.n_samples} samples ({scan.describe(names)}), acceptance {rates}")
    return output


@dataclass
class ImportanceRender:
    draws: np.ndarray
    weights: np.ndarray
    ess: float
    histogram: GridDensity
    edges: np.ndarray
    warnings: List[str] = field(default_factory=list)


def importance_render(
    f_base: FiducialDensity,
    weight: Callable[[np.ndarray], ArrayLike],
    n: int,
    rng: np.random.Generator,
    bins: Union[int, Sequence[float]] = 200,
    range: Optional[Tuple[float, float]] = None,
) -> ImportanceRender:
    """Draw from f_base, weight by the target/base density ratio and self-normalise"""
    if n <= 0:
        raise SamplerError("Importance sample size must be positive", f"n={n}")
    draws = np.asarray(f_base.sample(rng, n), dtype=float)
    raw = np.asarray(weight(draws), dtype=float)
    if raw.shape != draws.shape or np.any(raw < 0) or not np.all(np.isfinite(raw)):
        raise SamplerError("Importance weights must be finite and nonnegative")
    total = raw.sum()
    if total <= 0:
        raise SamplerError("All importance weights are zero")
    weights = raw / total
    ess = float(1.0 / np.sum(weights**2))

    warnings = []
    if ess < ESS_WARNING_FRACTION * n:
        message = f"Effective sample size {ess:.0f} is below {ESS_WARNING_FRACTION:.0%} of {n}"
        warnings.append(message)
        logger.warning(message)

    heights, edges = np.histogram(draws, bins=bins, range=range, weights=weights, density=True)
    centres = 0.5 * (edges[:-1] + edges[1:])
    histogram = GridDensity(points=centres, values=heights, domain=f_base.domain)
    logger.debug(f"Importance render: n={n}, ESS={ess:.0f}")
    return ImportanceRender(draws, weights, ess, histogram, edges, warnings)
