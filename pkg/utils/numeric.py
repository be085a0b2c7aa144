"""
Numeric substrate: special functions, quadrature, root finding and seeded
random streams shared by every other engine module.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate as sp_integrate
from scipy import optimize, special, stats

from exceptions import DomainError, QuadratureError, RootBracketError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class RngStream:
    """Seed plus stream id; identical pairs give identical draw sequences"""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(sequence))

    def spawn(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


@dataclass
class GridDensity:
    """Density values on an ordered grid, with optional point masses (atoms)"""

    points: np.ndarray
    values: np.ndarray
    domain: Tuple[float, float] = (-np.inf, np.inf)
    atoms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.points.shape != self.values.shape or self.points.ndim != 1:
            raise DomainError("Grid points and values must be 1-D arrays of equal length")
        if self.points.size > 1 and np.any(np.diff(self.points) <= 0):
            raise DomainError("Grid points must be strictly increasing")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise DomainError("Grid densities must be finite and nonnegative")

    def mass(self) -> float:
        """Trapezoid integral of the continuous part"""
        return float(sp_integrate.trapezoid(self.values, self.points))

    def total_mass(self) -> float:
        return self.mass() + float(sum(self.atoms.values()))


def normal_cdf(z: ArrayLike) -> ArrayLike:
    """Standard normal CDF Φ(z)"""
    return special.ndtr(z)


def normal_ppf(p: ArrayLike) -> ArrayLike:
    return special.ndtri(p)


def normal_pdf(z: ArrayLike) -> ArrayLike:
    return stats.norm.pdf(z)


def binom_lower_tail(k: int, n: int, p: float) -> float:
    """P(Y ≤ k) for Y ~ Binomial(n, p)"""
    _check_binomial(k, n, p)
    if k >= n:
        return 1.0
    return float(stats.binom.cdf(k, n, p))


def binom_upper_tail(k: int, n: int, p: float) -> float:
    """P(Y ≥ k) for Y ~ Binomial(n, p), inclusive of k"""
    _check_binomial(k, n, p)
    if k <= 0:
        return 1.0
    return float(stats.binom.sf(k - 1, n, p))


def binom_pmf(k: int, n: int, p: float) -> float:
    _check_binomial(k, n, p)
    return float(np.exp(stats.binom.logpmf(k, n, p)))


def _check_binomial(k: int, n: int, p: float) -> None:
    if n < 0 or k < 0 or k > n:
        raise DomainError("Binomial count out of range", f"k={k}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise DomainError("Binomial probability out of range", f"p={p}")


def beta_pdf(x: ArrayLike, a: float, b: float) -> ArrayLike:
    """Beta(a, b) density on the open unit interval"""
    if a <= 0 or b <= 0:
        raise DomainError("Beta shape parameters must be positive", f"a={a}, b={b}")
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr <= 0.0) | (x_arr >= 1.0)):
        raise DomainError("Beta density evaluated outside (0, 1)", f"x={x}")
    result = stats.beta.pdf(x_arr, a, b)
    return float(result) if np.ndim(x) == 0 else result


def scaled_inv_chi2_dist(s: float, df: float):
    """Frozen Scale-inv-χ²(df, s), which is Inv-Gamma(df/2, df·s/2)"""
    if df <= 0 or s <= 0:
        raise DomainError("Scale-inv-chi2 needs df > 0 and s > 0", f"df={df}, s={s}")
    return stats.invgamma(a=0.5 * df, scale=0.5 * df * s)


def scaled_inv_chi2(
    kind: str,
    s: float,
    df: float,
    at: Optional[ArrayLike] = None,
    rng: Optional[np.random.Generator] = None,
    size: Optional[int] = None,
):
    """
    Scaled inverse chi-squared distribution of σ² with pdf proportional to
    (σ²)^-(df/2+1) exp(-df·s/(2σ²)).

    Args:
        kind: "pdf", "cdf" or "sample"
        s: scale (a variance)
        df: degrees of freedom
        at: evaluation point(s) for pdf/cdf
        rng: generator for sampling
        size: number of draws (None for a scalar)
    """
    dist = scaled_inv_chi2_dist(s, df)
    if kind == "sample":
        if rng is None:
            raise DomainError("Sampling requires a random generator")
        return dist.rvs(size=size, random_state=rng)

    x = np.asarray(at, dtype=float)
    if np.any(x <= 0):
        raise DomainError("Scale-inv-chi2 evaluated at a nonpositive variance", f"at={at}")
    if kind == "pdf":
        result = dist.pdf(x)
    elif kind == "cdf":
        result = dist.cdf(x)
    else:
        raise DomainError(f"Unknown scaled_inv_chi2 kind: {kind}")
    return float(result) if np.ndim(at) == 0 else result


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = DEFAULT_TOL,
    points: Optional[Tuple[float, ...]] = None,
    limit: int = 200,
) -> float:
    """
    Adaptive Gauss-Kronrod quadrature. Infinite endpoints are handled by
    QUADPACK's variable transform. Raises QuadratureError carrying the best
    estimate when the error estimate stays above tol.
    """
    if not lo < hi:
        if lo == hi:
            return 0.0
        raise DomainError("Integration bounds must satisfy lo < hi", f"lo={lo}, hi={hi}")

    kwargs = {"epsabs": tol, "epsrel": 0.0, "limit": limit, "full_output": 1}
    if points is not None and np.isfinite(lo) and np.isfinite(hi):
        inner = tuple(p for p in points if lo < p < hi)
        if inner:
            kwargs["points"] = inner

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sp_integrate.IntegrationWarning)
        result = sp_integrate.quad(f, lo, hi, **kwargs)

    value, error = result[0], result[1]
    # QUADPACK appends a message only when it flags a problem; roundoff
    # overshoots within a decade of tol are accepted
    if len(result) > 3 and error > 10.0 * tol:
        raise QuadratureError(
            "Quadrature did not converge",
            best_estimate=value,
            error_estimate=error,
            details=f"[{lo}, {hi}] error {error:.3g} > tol {tol:.3g}",
        )
    return float(value)


def integrate_fixed(
    f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, order: int = 64
) -> float:
    """Fixed-order Gauss-Legendre rule for smooth integrands on short finite ranges"""
    if lo == hi:
        return 0.0
    nodes, weights = _legendre(order)
    half_width = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return float(half_width * np.dot(weights, f(mid + half_width * nodes)))


_LEGENDRE_CACHE: dict = {}


def _legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    if order not in _LEGENDRE_CACHE:
        _LEGENDRE_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _LEGENDRE_CACHE[order]


def find_root(
    g: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12
) -> float:
    """Bracketing root finder (Brent: bisection with secant/inverse-quadratic steps)"""
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0.0:
        return float(lo)
    if g_hi == 0.0:
        return float(hi)
    if np.sign(g_lo) == np.sign(g_hi):
        raise RootBracketError(
            "No sign change on bracket",
            f"g({lo})={g_lo:.3g}, g({hi})={g_hi:.3g}",
        )
    return float(optimize.brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps))
