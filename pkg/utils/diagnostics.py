"""
Convergence and scan-order diagnostics for Gibbs output.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal, stats

from exceptions import SamplerError
from .numeric import normal_cdf
from .sampler import ChainOutput, Conditional, GibbsConfig, ScanOrder, State, gibbs_run

logger = logging.getLogger(__name__)

RHAT_FLAG = 1.05
MIN_THINNED_DRAWS = 16


def _parameter_index(chain: ChainOutput, parameter: Union[int, str]) -> int:
    if isinstance(parameter, str):
        if parameter not in chain.names:
            raise SamplerError(f"Unknown parameter '{parameter}'", ", ".join(chain.names))
        return chain.names.index(parameter)
    if not 0 <= parameter < len(chain.names):
        raise SamplerError("Parameter index out of range", f"index={parameter}")
    return int(parameter)


def gelman_rubin(chains: Sequence[ChainOutput], parameter: Union[int, str] = 0) -> float:
    """
    Potential scale reduction factor √(V / ((n-1)/n · W)) with
    V = (n-1)/n · W + (m+1)/(m n) · B, so identical chains give exactly 1.
    """
    if len(chains) < 2:
        raise SamplerError("Gelman-Rubin needs at least two chains", f"chains={len(chains)}")
    lengths = {len(c) for c in chains}
    if len(lengths) != 1:
        raise SamplerError("Chains must have equal recorded length", f"lengths={sorted(lengths)}")
    n = lengths.pop()
    if n < 10:
        raise SamplerError("Chains must record at least 10 transitions", f"length={n}")

    draws = np.stack([c.samples[:, _parameter_index(c, parameter)] for c in chains])
    m = draws.shape[0]
    within = float(np.mean(np.var(draws, axis=1, ddof=1)))
    if within <= 0.0:
        raise SamplerError("Gelman-Rubin undefined for zero-variance chains")
    between = n * float(np.var(draws.mean(axis=1), ddof=1))
    pooled = (n - 1) / n * within + (m + 1) / (m * n) * between
    rhat = float(np.sqrt(pooled / ((n - 1) / n * within)))
    if rhat > RHAT_FLAG:
        logger.warning(f"R-hat {rhat:.3f} for parameter {parameter} exceeds {RHAT_FLAG}")
    return rhat


def autocorrelation_time(values: np.ndarray, window: float = 5.0) -> float:
    """
    Integrated autocorrelation time 1 + 2·Σρ_k, summed up to the first lag
    k ≥ window·τ(k) (Sokal's automatic window). Never below 1.
    """
    x = np.asarray(values, dtype=float)
    x = x - x.mean()
    n = x.size
    power = float(np.dot(x, x))
    if n < 2 or power == 0.0:
        return 1.0
    rho = signal.correlate(x, x, mode="full", method="fft")[n - 1:] / power
    taus = 2.0 * np.cumsum(rho) - 1.0
    beyond = np.arange(n) >= window * taus
    cut = int(np.argmax(beyond)) if beyond.any() else n - 1
    return max(float(taus[cut]), 1.0)


def thin_to_independent(samples: np.ndarray) -> Tuple[np.ndarray, int]:
    """Keep every ⌈τ⌉-th row, τ the largest autocorrelation time over the columns; at least 16 rows stay"""
    tau = max(autocorrelation_time(samples[:, i]) for i in range(samples.shape[1]))
    step = min(int(np.ceil(tau)), max(samples.shape[0] // MIN_THINNED_DRAWS, 1))
    return samples[::step], step


@dataclass(frozen=True)
class ScanCutoffs:
    """KS-distance cutoffs for grading a significant scan-order difference"""

    negligible: float = 0.01
    small: float = 0.05


@dataclass
class MarginalComparison:
    parameter: str
    ks_statistic: float
    p_value: float


@dataclass
class CorrelationComparison:
    parameters: Tuple[str, str]
    correlations: Tuple[float, float]
    z: float
    p_value: float


@dataclass
class ScanComparison:
    orders: Tuple[str, str]
    marginals: List[MarginalComparison]
    correlations: List[CorrelationComparison]
    significance: float
    classification: str
    samples_per_order: int
    effective_per_order: int = 0
    thin_steps: List[int] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def significant(self) -> bool:
        tests = [m.p_value for m in self.marginals] + [c.p_value for c in self.correlations]
        return any(p <= self.significance for p in tests if np.isfinite(p))

    def as_dict(self) -> Dict:
        return {
            "orders": list(self.orders),
            "significance": self.significance,
            "classification": self.classification,
            "samples_per_order": self.samples_per_order,
            "effective_per_order": self.effective_per_order,
            "thin_steps": self.thin_steps,
            "marginals": [vars(m) for m in self.marginals],
            "correlations": [
                {**vars(c), "parameters": list(c.parameters), "correlations": list(c.correlations)}
                for c in self.correlations
            ],
            "warnings": self.warnings,
        }


def fisher_z_test(r1: float, n1: int, r2: float, n2: int) -> Tuple[float, float]:
    """Two-sided z-test for equal correlations on Fisher-transformed values"""
    if n1 <= 3 or n2 <= 3:
        raise SamplerError("Correlation test needs more than 3 samples per group")
    if not (np.isfinite(r1) and np.isfinite(r2)):
        return float("nan"), float("nan")
    z1, z2 = np.arctanh(np.clip([r1, r2], -1 + 1e-15, 1 - 1e-15))
    z = float((z1 - z2) / np.sqrt(1.0 / (n1 - 3) + 1.0 / (n2 - 3)))
    return z, float(2.0 * normal_cdf(-abs(z)))


def _correlation(samples: np.ndarray, i: int, j: int) -> float:
    a, b = samples[:, i], samples[:, j]
    if np.std(a) == 0 or np.std(b) == 0:
        return float("nan")
    return float(np.corrcoef(a, b)[0, 1])


def classify(marginals: Sequence[MarginalComparison], significant: bool, cutoffs: ScanCutoffs) -> str:
    if not significant:
        return "undetectable"
    distance = max((m.ks_statistic for m in marginals), default=0.0)
    if distance < cutoffs.negligible:
        return "negligible"
    if distance < cutoffs.small:
        return "small"
    return "substantial"


def scan_order_compare(
    conditionals: Sequence[Conditional],
    config: GibbsConfig,
    orders: Tuple[ScanOrder, ScanOrder],
    initial: State,
    significance: float = 0.01,
    cutoffs: Optional[ScanCutoffs] = None,
    runs: int = 1,
) -> ScanComparison:
    """
    Run each fixed order `runs` times (run r uses seed stream r under both
    orders). Each chain is thinned by its autocorrelation time before
    pooling, then the marginals (KS) and pairwise correlations (Fisher z)
    are compared on the near-independent draws.
    """
    cutoffs = cutoffs or ScanCutoffs()
    if len(orders) != 2 or any(o.kind != "fixed" for o in orders):
        raise SamplerError("Scan comparison needs exactly two fixed orders")
    names = tuple(c.name for c in conditionals)

    pooled: List[np.ndarray] = []
    warnings: List[str] = []
    steps: List[int] = []
    recorded = 0
    for order in orders:
        outputs = []
        for run in range(runs):
            run_config = GibbsConfig(
                n_samples=config.n_samples,
                burn_in=config.burn_in,
                seed=config.seed.spawn(config.seed.stream_id + run),
                proposal_scales=config.proposal_scales,
                thin=config.thin,
                tune=config.tune,
                tune_window=config.tune_window,
                warn_window=config.warn_window,
            )
            label = f"{order.describe(names)} run {run}"
            chain = gibbs_run(conditionals, run_config, order, initial, label=label)
            warnings.extend(f"{label}: {w}" for w in chain.warnings)
            thinned, step = thin_to_independent(chain.samples)
            logger.debug(f"{label}: thinned by {step} to {len(thinned)} draws")
            steps.append(step)
            recorded += len(chain)
            outputs.append(thinned)
        pooled.append(np.vstack(outputs))

    first, second = pooled
    marginals = []
    for i, name in enumerate(names):
        result = stats.ks_2samp(first[:, i], second[:, i])
        marginals.append(MarginalComparison(name, float(result.statistic), float(result.pvalue)))

    correlations = []
    for i, j in combinations(range(len(names)), 2):
        r1, r2 = _correlation(first, i, j), _correlation(second, i, j)
        z, p = fisher_z_test(r1, first.shape[0], r2, second.shape[0])
        correlations.append(CorrelationComparison((names[i], names[j]), (r1, r2), z, p))

    labels = (orders[0].describe(names), orders[1].describe(names))
    report = ScanComparison(
        orders=labels,
        marginals=marginals,
        correlations=correlations,
        significance=significance,
        classification="",
        samples_per_order=recorded // 2,
        effective_per_order=min(first.shape[0], second.shape[0]),
        thin_steps=steps,
        warnings=warnings,
    )
    report.classification = classify(marginals, report.significant, cutoffs)
    logger.info(f"Scan orders {labels[0]} vs {labels[1]}: {report.classification}")
    return report
