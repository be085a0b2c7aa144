"""
Fiducial densities f_S, pre-data weighting functions (GPD/LPD) and the
conditioned densities built from them.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate as sp_integrate
from scipy import special, stats

from exceptions import DegenerateConditioningError, DomainError, InvalidDensityError, SamplerError
from .hypotheses import Direction, OrientedHypotheses, SpecialInterval
from .numeric import beta_pdf, find_root, integrate_fixed, scaled_inv_chi2_dist

logger = logging.getLogger(__name__)

DEGENERATE_OUTSIDE_MASS = 1e-12
DEGENERATE_INSIDE_MASS = 1e-300
MAX_REJECTION_ROUNDS = 100
MAX_REJECTION_BATCH = 1_000_000


class FiducialDensity:
    """
    Evaluable density over a parameter domain with CDF, survival function,
    quantiles and a sampler. Instances are immutable once built; densities
    backed by a frozen scipy.stats distribution keep it in ``frozen``.
    """

    def __init__(
        self,
        pdf: Callable[[np.ndarray], np.ndarray],
        cdf: Callable[[np.ndarray], np.ndarray],
        domain: Tuple[float, float],
        sf: Optional[Callable] = None,
        ppf: Optional[Callable] = None,
        isf: Optional[Callable] = None,
        sampler: Optional[Callable[[np.random.Generator, Optional[int]], ArrayLike]] = None,
        name: str = "f_S",
        frozen=None,
    ):
        self._pdf = pdf
        self._cdf = cdf
        self._sf = sf
        self._ppf = ppf
        self._isf = isf
        self._sampler = sampler
        self.domain = (float(domain[0]), float(domain[1]))
        self.name = name
        self.frozen = frozen

    @classmethod
    def from_frozen(cls, dist, name: str) -> "FiducialDensity":
        """Wrap a frozen scipy.stats distribution"""
        return cls(
            pdf=dist.pdf,
            cdf=dist.cdf,
            sf=dist.sf,
            ppf=dist.ppf,
            isf=dist.isf,
            sampler=lambda rng, size: dist.rvs(size=size, random_state=rng),
            domain=dist.support(),
            name=name,
            frozen=dist,
        )

    def __repr__(self):
        return f"FiducialDensity({self.name}, domain={self.domain})"

    @property
    def family(self) -> Optional[str]:
        return None if self.frozen is None else self.frozen.dist.name

    def pdf(self, theta: ArrayLike) -> ArrayLike:
        return self._pdf(theta)

    def cdf(self, theta: ArrayLike) -> ArrayLike:
        return self._cdf(theta)

    def sf(self, theta: ArrayLike) -> ArrayLike:
        if self._sf is not None:
            return self._sf(theta)
        return 1.0 - self._cdf(theta)

    def in_upper_half(self, theta: float) -> bool:
        """True when θ lies above the median, where differences of sf are exact"""
        return float(self.cdf(theta)) > 0.5

    def mass(self, lo: float, hi: float) -> float:
        """Fiducial probability of [lo, hi]"""
        if hi <= lo:
            return 0.0
        if hi >= self.domain[1]:
            return float(self.sf(max(lo, self.domain[0])))
        if self.in_upper_half(lo):
            return float(max(self.sf(lo) - self.sf(hi), 0.0))
        return float(max(self.cdf(hi) - self.cdf(lo), 0.0))

    def quantile(self, q: ArrayLike) -> ArrayLike:
        if self._ppf is not None:
            return self._ppf(q)
        return np.vectorize(self._invert_cdf)(q)

    def upper_quantile(self, q: ArrayLike) -> ArrayLike:
        """θ with sf(θ) = q"""
        if self._isf is not None:
            return self._isf(q)
        return self.quantile(1.0 - np.asarray(q))

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
        if self._sampler is not None:
            return self._sampler(rng, size)
        return self.quantile(rng.random(size))

    def _invert_cdf(self, q: float) -> float:
        lo, hi = self.domain
        lo = lo if np.isfinite(lo) else -1.0
        hi = hi if np.isfinite(hi) else 1.0
        while not np.isfinite(self.domain[0]) and self.cdf(lo) > q:
            lo = 2.0 * lo - 1.0
        while not np.isfinite(self.domain[1]) and self.cdf(hi) < q:
            hi = 2.0 * hi + 1.0
        return find_root(lambda th: float(self.cdf(th)) - q, lo, hi)


def _scalar_or_array(values: np.ndarray, like: ArrayLike):
    return float(values) if np.ndim(like) == 0 else values


def normal_density(loc: float, scale: float, name: str = "normal") -> FiducialDensity:
    if scale <= 0:
        raise DomainError("Normal scale must be positive", f"scale={scale}")
    return FiducialDensity.from_frozen(stats.norm(loc=loc, scale=scale), f"{name}({loc:g}, {scale:g})")


def student_t_density(loc: float, scale: float, df: float) -> FiducialDensity:
    """Location-scale Student t; the compatible marginal fiducial density of a normal mean"""
    if scale <= 0 or df <= 0:
        raise DomainError("Student t needs positive scale and df", f"scale={scale}, df={df}")
    return FiducialDensity.from_frozen(stats.t(df, loc=loc, scale=scale), f"t{df:g}({loc:g}, {scale:g})")


def beta_density(a: float, b: float, name: str = "beta") -> FiducialDensity:
    if a <= 0 or b <= 0:
        raise DomainError("Beta shape parameters must be positive", f"a={a}, b={b}")
    return FiducialDensity.from_frozen(stats.beta(a, b), f"{name}({a:g}, {b:g})")


def jeffreys_density(successes: int, trials: int) -> FiducialDensity:
    """Jeffreys-prior posterior Beta(e + 1/2, n - e + 1/2), standing in for f_S of a proportion"""
    if not 0 <= successes <= trials:
        raise DomainError("Success count out of range", f"e={successes}, n={trials}")
    return beta_density(successes + 0.5, trials - successes + 0.5, name="jeffreys")


def scaled_inv_chi2_density(df: float, s: float) -> FiducialDensity:
    """Scale-inv-χ²(df, s) over σ², i.e. Inv-Gamma(df/2, df·s/2)"""
    return FiducialDensity.from_frozen(scaled_inv_chi2_dist(s, df), f"scale-inv-chi2({df:g}, {s:g})")


def lognormal_density(log_loc: float, log_scale: float, name: str = "lognormal") -> FiducialDensity:
    """Density of exp(Y) for Y ~ N(log_loc, log_scale²)"""
    if log_scale <= 0:
        raise DomainError("Log-scale sd must be positive", f"sd={log_scale}")
    return FiducialDensity.from_frozen(
        stats.lognorm(s=log_scale, scale=np.exp(log_loc)), f"{name}({log_loc:.4g}, {log_scale:.4g})"
    )


def mixture_density(
    components: Sequence[FiducialDensity], weights: Sequence[float], name: str = "mixture"
) -> FiducialDensity:
    """Finite mixture Σ w_i·f_i; sampled by picking a component, then drawing from it"""
    w = np.asarray(weights, dtype=float)
    if len(components) != w.size or w.size == 0 or np.any(w < 0) or w.sum() <= 0:
        raise InvalidDensityError("Mixture needs one nonnegative weight per component", f"weights={list(w)}")
    w = w / w.sum()
    domain = (min(c.domain[0] for c in components), max(c.domain[1] for c in components))

    def pdf(theta):
        th = np.asarray(theta, dtype=float)
        out = sum(wi * np.asarray(c.pdf(th), dtype=float) for wi, c in zip(w, components))
        return _scalar_or_array(out, theta)

    def cdf(theta):
        th = np.asarray(theta, dtype=float)
        out = sum(wi * np.asarray(c.cdf(th), dtype=float) for wi, c in zip(w, components))
        return _scalar_or_array(out, theta)

    def sampler(rng, size):
        n = 1 if size is None else int(size)
        picks = rng.choice(w.size, size=n, p=w)
        draws = np.empty(n)
        for index, component in enumerate(components):
            chosen = picks == index
            count = int(np.count_nonzero(chosen))
            if count:
                draws[chosen] = component.sample(rng, count)
        return float(draws[0]) if size is None else draws

    return FiducialDensity(pdf=pdf, cdf=cdf, sampler=sampler, domain=domain, name=name)


@dataclass(frozen=True)
class IntervalShape:
    """
    The density h on a special interval: a Beta(a, b) shape mapped affinely
    onto the interval, either directly ("identity") or on the log-odds scale
    ("logit", for intervals of probabilities).
    """

    a: float = 4.0
    b: float = 4.0
    scale: str = "identity"

    def validate(self) -> "IntervalShape":
        if self.scale not in ("identity", "logit"):
            raise InvalidDensityError(f"Unknown interval scale: {self.scale}")
        if self.a <= 1.0 or self.b <= 1.0:
            raise InvalidDensityError(
                "h must vanish at both interval endpoints",
                f"Beta({self.a:g}, {self.b:g}) needs both shapes > 1",
            )
        return self

    def _bounds(self, interval: SpecialInterval) -> Tuple[float, float]:
        if self.scale == "identity":
            return interval.lo, interval.hi
        if not 0.0 < interval.lo <= interval.hi < 1.0:
            raise DomainError("Log-odds shape needs an interval inside (0, 1)")
        return float(special.logit(interval.lo)), float(special.logit(interval.hi))

    def density(self, theta: ArrayLike, interval: SpecialInterval) -> ArrayLike:
        lo, hi = self._bounds(interval)
        th = np.asarray(theta, dtype=float)
        u_raw = th if self.scale == "identity" else special.logit(np.clip(th, 1e-300, 1 - 1e-16))
        u = (u_raw - lo) / (hi - lo)
        out = np.zeros_like(th)
        inside = (u > 0.0) & (u < 1.0)
        out[inside] = beta_pdf(u[inside], self.a, self.b) / (hi - lo)
        if self.scale == "logit":
            out[inside] /= th[inside] * (1.0 - th[inside])
        return _scalar_or_array(out, theta)

    def max_density(self, interval: SpecialInterval) -> float:
        if self.scale == "identity":
            mode = (self.a - 1.0) / (self.a + self.b - 2.0)
            return float(beta_pdf(mode, self.a, self.b) / interval.width)
        grid = np.linspace(interval.lo, interval.hi, 1025)
        # log-odds Jacobian varies little across a narrow interval
        return float(np.max(self.density(grid, interval)) * 1.05)


@dataclass(frozen=True)
class GpdNeutral:
    """Neutral GPD weight: zero on the special interval, level d elsewhere"""

    interval: SpecialInterval
    level: float = 1.0

    def weight(self, theta: ArrayLike) -> ArrayLike:
        th = np.asarray(theta, dtype=float)
        w = np.where((th >= self.interval.lo) & (th <= self.interval.hi), 0.0, self.level)
        return _scalar_or_array(w, theta)


@dataclass(frozen=True)
class GpdInterval:
    """Interval GPD weight 1 + τ·h(θ) on the special interval, zero outside"""

    interval: SpecialInterval
    tau: float
    h: IntervalShape = IntervalShape()

    def __post_init__(self):
        if self.tau < 0:
            raise InvalidDensityError("tau must be nonnegative", f"tau={self.tau}")

    def weight(self, theta: ArrayLike) -> ArrayLike:
        th = np.asarray(theta, dtype=float)
        inside = (th >= self.interval.lo) & (th <= self.interval.hi)
        w = np.where(inside, 1.0 + self.tau * self.h.density(th, self.interval), 0.0)
        return _scalar_or_array(w, theta)


@dataclass(frozen=True)
class LpdUniform:
    level: float = 1.0


def interval_moment(f_s: FiducialDensity, h: IntervalShape, interval: SpecialInterval) -> float:
    """M1 = ∫ h·f_S over the special interval"""
    return integrate_fixed(
        lambda th: h.density(th, interval) * f_s.pdf(th), interval.lo, interval.hi
    )


def restrict(f_s: FiducialDensity, lo: float, hi: float, name: str = None) -> FiducialDensity:
    """
    f_S conditioned on θ ∈ [lo, hi] (either end may be infinite). Normal
    f_S becomes a scipy truncnorm; other families are inverted from
    whichever tail [lo, hi] sits in.
    """
    lo = max(lo, f_s.domain[0])
    hi = min(hi, f_s.domain[1])
    total = f_s.mass(lo, hi)
    if total < DEGENERATE_INSIDE_MASS:
        raise DegenerateConditioningError(
            "Conditioning region carries no fiducial mass", f"[{lo:g}, {hi:g}]"
        )
    name = name or f"{f_s.name}|[{lo:g}, {hi:g}]"
    if f_s.family == "norm":
        loc, scale = float(f_s.frozen.mean()), float(f_s.frozen.std())
        dist = stats.truncnorm((lo - loc) / scale, (hi - loc) / scale, loc=loc, scale=scale)
        return FiducialDensity.from_frozen(dist, name)

    def pdf(theta):
        th = np.asarray(theta, dtype=float)
        out = np.where((th >= lo) & (th <= hi), f_s.pdf(th) / total, 0.0)
        return _scalar_or_array(out, theta)

    if f_s.in_upper_half(lo):
        sf_lo = float(f_s.sf(lo))

        def cdf(theta):
            th = np.clip(np.asarray(theta, dtype=float), lo, hi)
            return np.clip((sf_lo - f_s.sf(th)) / total, 0.0, 1.0)

        def ppf(q):
            return f_s.upper_quantile(np.maximum(sf_lo - np.asarray(q, dtype=float) * total, 0.0))

    else:
        cdf_lo = float(f_s.cdf(lo))

        def cdf(theta):
            th = np.clip(np.asarray(theta, dtype=float), lo, hi)
            return np.clip((f_s.cdf(th) - cdf_lo) / total, 0.0, 1.0)

        def ppf(q):
            return f_s.quantile(np.minimum(cdf_lo + np.asarray(q, dtype=float) * total, 1.0))

    return FiducialDensity(pdf=pdf, cdf=cdf, ppf=ppf, domain=(lo, hi), name=name)


def _restrict_or_none(f_s: FiducialDensity, lo: float, hi: float) -> Optional[FiducialDensity]:
    try:
        return restrict(f_s, lo, hi)
    except DegenerateConditioningError:
        return None


class OutsideDensity(FiducialDensity):
    """
    f_S under the neutral GPD: the special interval is removed and the two
    one-sided pieces keep their relative fiducial masses.
    """

    def __init__(
        self,
        f_s: FiducialDensity,
        gpd: GpdNeutral,
        below: Optional[FiducialDensity],
        above: Optional[FiducialDensity],
        mass_below: float,
        mass_above: float,
    ):
        self.below = below
        self.above = above
        self.mass_below = mass_below
        self.mass_above = mass_above
        outside = mass_below + mass_above
        self.weight_below = mass_below / outside
        self.weight_above = mass_above / outside
        super().__init__(
            pdf=self._mixture_pdf(gpd),
            cdf=self._mixture_cdf,
            ppf=self._mixture_ppf,
            domain=f_s.domain,
            name=f"{f_s.name}|outside",
        )

    def _mixture_pdf(self, gpd: GpdNeutral):
        def pdf(theta):
            th = np.asarray(theta, dtype=float)
            out = np.zeros_like(th)
            if self.below is not None:
                out = out + self.weight_below * self.below.pdf(th)
            if self.above is not None:
                out = out + self.weight_above * self.above.pdf(th)
            return _scalar_or_array(gpd.weight(th) / gpd.level * out, theta)

        return pdf

    def _mixture_cdf(self, theta):
        th = np.asarray(theta, dtype=float)
        out = np.zeros_like(th)
        if self.below is not None:
            out = out + self.weight_below * self.below.cdf(th)
        if self.above is not None:
            out = out + self.weight_above * self.above.cdf(th)
        return _scalar_or_array(out, theta)

    def _mixture_ppf(self, q):
        q = np.asarray(q, dtype=float)
        if self.above is None:
            return self.below.quantile(q)
        if self.below is None:
            return self.above.quantile(q)
        left = self.below.quantile(np.clip(q / self.weight_below, 0.0, 1.0))
        right = self.above.quantile(np.clip((q - self.weight_below) / self.weight_above, 0.0, 1.0))
        return np.where(q <= self.weight_below, left, right)


def condition_outside(
    f_s: FiducialDensity, interval: SpecialInterval, gpd: Optional[GpdNeutral] = None
) -> OutsideDensity:
    """Fiducial density under the neutral GPD: f_S with the special interval removed"""
    gpd = gpd or GpdNeutral(interval)
    below = f_s.mass(f_s.domain[0], interval.lo)
    above = f_s.mass(interval.hi, f_s.domain[1])
    if below + above < DEGENERATE_OUTSIDE_MASS:
        raise DegenerateConditioningError(
            "No fiducial mass outside the special interval",
            f"[{interval.lo:g}, {interval.hi:g}] mass {below + above:.3g}",
        )
    logger.debug(f"Conditioned {f_s.name} outside [{interval.lo:g}, {interval.hi:g}], C0={1 / (below + above):.6g}")
    return OutsideDensity(
        f_s,
        gpd,
        _restrict_or_none(f_s, f_s.domain[0], interval.lo),
        _restrict_or_none(f_s, interval.hi, f_s.domain[1]),
        below,
        above,
    )


def condition_inside(f_s: FiducialDensity, gpd: GpdInterval) -> FiducialDensity:
    """C1·(1 + τh)·f_S on the special interval"""
    interval = gpd.interval
    m0 = f_s.mass(interval.lo, interval.hi)
    if interval.is_sharp or m0 < DEGENERATE_INSIDE_MASS:
        raise DegenerateConditioningError(
            "No fiducial mass inside the special interval",
            f"[{interval.lo:g}, {interval.hi:g}]",
        )
    m1 = interval_moment(f_s, gpd.h, interval) if gpd.tau > 0 else 0.0
    k = m0 + gpd.tau * m1
    base = restrict(f_s, interval.lo, interval.hi)
    bound = 1.0 + gpd.tau * gpd.h.max_density(interval)

    def pdf(theta):
        return gpd.weight(theta) * f_s.pdf(theta) / k

    def cdf(theta):
        def one(th):
            if th <= interval.lo:
                return 0.0
            if th >= interval.hi:
                return 1.0
            return integrate_fixed(pdf, interval.lo, th)

        return _scalar_or_array(np.vectorize(one)(np.asarray(theta, dtype=float)), theta)

    def sampler(rng, size):
        # rejection from the restricted f_S under the envelope 1 + τ·max h
        n = 1 if size is None else int(size)
        kept, proposed, accepted = [], 0, 0
        for _ in range(MAX_REJECTION_ROUNDS):
            rate = accepted / proposed if accepted else 0.5 / max(proposed // 16, 1)
            batch = int(min(max(1.2 * (n - accepted) / rate, 16), MAX_REJECTION_BATCH))
            proposal = np.atleast_1d(base.sample(rng, batch))
            hits = proposal[rng.random(batch) * bound <= gpd.weight(proposal)]
            kept.append(hits)
            proposed += batch
            accepted += hits.size
            if accepted >= n:
                draws = np.concatenate(kept)[:n]
                return float(draws[0]) if size is None else draws
        raise SamplerError(
            "Rejection sampler for the interval piece did not finish",
            f"{accepted}/{n} accepted from {proposed} proposals, tau={gpd.tau:.4g}",
        )

    return FiducialDensity(
        pdf=pdf,
        cdf=cdf,
        sampler=sampler,
        domain=(interval.lo, interval.hi),
        name=f"{f_s.name}|inside(tau={gpd.tau:.4g})",
    )


def reweight_by_lpd(f_s: FiducialDensity, lpd: LpdUniform) -> FiducialDensity:
    """Apply a uniform LPD weight; the level cancels on normalisation"""
    norm = lpd.level * f_s.mass(*f_s.domain)
    return FiducialDensity(
        pdf=lambda th: lpd.level * f_s.pdf(th) / norm,
        cdf=f_s.cdf,
        sf=f_s.sf,
        ppf=f_s.quantile,
        isf=f_s.upper_quantile,
        sampler=f_s.sample,
        domain=f_s.domain,
        name=f_s.name,
        frozen=f_s.frozen,
    )


def p_f_hs(f_s: FiducialDensity, oriented: OrientedHypotheses) -> float:
    """Fiducial probability of H_S: the floor for any admissible α"""
    interval = oriented.interval
    if oriented.direction is Direction.LOWER:
        return f_s.mass(interval.lo, f_s.domain[1])
    return f_s.mass(f_s.domain[0], interval.hi)


def p_f_event_normal(x: float, sigma: float, tol: float = 1e-10) -> float:
    """
    Fiducial probability of A = {X* < x} with μ | x ~ N(x, σ²) and
    X* | μ ~ N(μ, σ²), integrating the predictive density over A and the
    fiducial density over μ. Both ranges are cut at 12 sd.
    """
    if sigma <= 0:
        raise DomainError("sigma must be positive", f"sigma={sigma}")
    reach = 12.0 * sigma
    fiducial = stats.norm(loc=x, scale=sigma)

    def integrand(x_star, mu):
        return fiducial.pdf(mu) * stats.norm.pdf(x_star, loc=mu, scale=sigma)

    value, _ = sp_integrate.dblquad(
        integrand,
        x - reach,
        x + reach,
        lambda mu: mu - reach,
        lambda mu: max(min(x, mu + reach), mu - reach),
        epsabs=tol,
        epsrel=0.0,
    )
    logger.debug(f"P_f(X* < x) for x={x:g}, sigma={sigma:g}: {value:.12f}")
    return float(value)


def lambda_ratio(
    f_s: FiducialDensity, interval: SpecialInterval, direction: Direction
) -> float:
    """Ratio of the fiducial masses on the two sides of the special interval"""
    below = f_s.mass(f_s.domain[0], interval.lo)
    above = f_s.mass(interval.hi, f_s.domain[1])
    numerator, denominator = (above, below) if direction is Direction.LOWER else (below, above)
    if denominator <= 0.0:
        raise DegenerateConditioningError(
            "Zero fiducial mass on the H_P-complement side",
            f"direction={direction.value}",
        )
    return numerator / denominator
