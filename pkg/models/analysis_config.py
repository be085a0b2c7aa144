"""
Analysis documents: pydantic schema, loading with CLI overrides, builders
for engine objects and cheap coherence checks.
"""

import logging
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError as SchemaError, model_validator

from exceptions import AlphaBelowFloorError, ConfigError, InferenceError
from utils.fiducial import IntervalShape
from utils.hypotheses import Direction
from utils.numeric import RngStream
from utils.pdo import PdoCurve
from utils.postdata import Fill
from utils.sampler import GibbsConfig, ScanOrder
from utils.validation import apply_overrides, load_yaml, schema_error, validate_beta_grid
from .binomial import BinomialModel
from .normal import NormalKnownVarModel, NormalUnknownVarModel
from .relative_risk import RelativeRiskModel

logger = logging.getLogger(__name__)

AnalysisKind = Literal["density", "importance", "pdo_curves", "gibbs", "fiducial_rr"]


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class AnalysisBlock(Strict):
    kind: AnalysisKind
    name: str = "analysis"
    seed: int = Field(20240101, ge=0)


class NormalKnownBlock(Strict):
    kind: Literal["normal_known"]
    mean: float
    sigma: float = Field(gt=0)
    n: int = Field(1, ge=1)
    epsilon: float = Field(0.0, ge=0)
    centre: float = 0.0

    def build(self) -> NormalKnownVarModel:
        return NormalKnownVarModel(self.mean, self.sigma, self.n, self.epsilon, self.centre)


class BinomialBlock(Strict):
    kind: Literal["binomial"]
    successes: int = Field(ge=0)
    trials: int = Field(ge=1)
    epsilon: float = Field(0.03, ge=0)
    centre: float = 0.5

    def build(self) -> BinomialModel:
        return BinomialModel(self.successes, self.trials, self.epsilon, self.centre)


class NormalUnknownBlock(Strict):
    kind: Literal["normal_unknown"]
    n: Optional[int] = Field(None, ge=2)
    mean: Optional[float] = None
    variance: Optional[float] = Field(None, gt=0)
    data: Optional[List[float]] = None
    epsilon: float = Field(0.0, ge=0)
    centre: float = 0.0

    @model_validator(mode="after")
    def _summaries_or_data(self):
        summaries = (self.n, self.mean, self.variance)
        if self.data is not None:
            if any(s is not None for s in summaries):
                raise ValueError("give either data or (n, mean, variance), not both")
            if len(self.data) < 2:
                raise ValueError("data needs at least two values")
        elif any(s is None for s in summaries):
            raise ValueError("n, mean and variance are all required without data")
        return self

    def build(self) -> NormalUnknownVarModel:
        if self.data is not None:
            return NormalUnknownVarModel.from_sample(self.data, self.epsilon, self.centre)
        return NormalUnknownVarModel(self.n, self.mean, self.variance, self.epsilon, self.centre)


class RelativeRiskBlock(Strict):
    kind: Literal["relative_risk"]
    events_t: int = Field(ge=0)
    n_t: int = Field(ge=1)
    events_c: int = Field(ge=0)
    n_c: int = Field(ge=1)
    epsilon: float = Field(0.08, gt=0)

    def build(self) -> RelativeRiskModel:
        return RelativeRiskModel(self.events_t, self.n_t, self.events_c, self.n_c, self.epsilon)


ModelBlock = Annotated[
    Union[NormalKnownBlock, BinomialBlock, NormalUnknownBlock, RelativeRiskBlock],
    Field(discriminator="kind"),
]


class PdoBlock(Strict):
    form: Literal["power", "knots"] = "power"
    c: float = Field(1.0, gt=0)
    gamma: float = Field(1.0, gt=0)
    points: Optional[List[Tuple[float, float]]] = None
    beta_max: Optional[float] = Field(None, gt=0, le=1)

    @model_validator(mode="after")
    def _points_for_knots(self):
        if self.form == "knots" and not self.points:
            raise ValueError("knots form needs points")
        return self

    def build(self) -> PdoCurve:
        if self.form == "knots":
            return PdoCurve.from_knots(self.points, self.beta_max)
        return PdoCurve.power(self.c, self.gamma, self.beta_max or 0.5)


class ShapeBlock(Strict):
    a: float = Field(4.0, gt=0)
    b: float = Field(4.0, gt=0)
    scale: Literal["identity", "logit"] = "identity"

    def build(self) -> IntervalShape:
        return IntervalShape(self.a, self.b, self.scale)


class BetaGridBlock(Strict):
    start: float = 0.001
    stop: float = 0.499
    points: int = 200


class InferenceBlock(Strict):
    alpha: Optional[Union[float, List[float]]] = None
    pdo: Optional[PdoBlock] = None
    h: Optional[ShapeBlock] = None
    fill: Literal["uniform", "calibrated", "partial"] = "calibrated"
    upper_target: Optional[float] = Field(None, gt=0, lt=1)
    beta_grid: BetaGridBlock = BetaGridBlock()
    directions: List[Literal["lower", "upper"]] = ["lower", "upper"]

    @property
    def alphas(self) -> List[float]:
        if self.alpha is None:
            return []
        return [self.alpha] if isinstance(self.alpha, (int, float)) else list(self.alpha)

    @model_validator(mode="after")
    def _alpha_range(self):
        for a in self.alphas:
            if not 0.0 < a <= 1.0:
                raise ValueError(f"alpha {a} outside (0, 1]")
        return self

    def curve(self) -> Optional[PdoCurve]:
        return self.pdo.build() if self.pdo else None

    def shape(self) -> Optional[IntervalShape]:
        return self.h.build() if self.h else None


class SamplerBlock(Strict):
    n_samples: int = Field(100_000, gt=0)
    burn_in: int = Field(1000, ge=0)
    thin: int = Field(1, ge=1)
    chains: int = Field(1, ge=1)
    scan: Literal["random", "fixed"] = "random"
    order: Optional[List[str]] = None
    compare_orders: Optional[List[List[str]]] = None
    compare_runs: int = Field(1, ge=1)
    significance: float = Field(0.01, gt=0, lt=1)
    cutoffs: Dict[str, float] = {"negligible": 0.01, "small": 0.05}
    proposal_scales: Dict[str, float] = {}
    tune: bool = True
    initial: Optional[List[Dict[str, float]]] = None
    memo: Optional[float] = Field(None, gt=0)
    compatible_baseline: bool = False

    @model_validator(mode="after")
    def _orders(self):
        if self.scan == "fixed" and not self.order:
            raise ValueError("fixed scan needs an order")
        if self.compare_orders is not None and len(self.compare_orders) != 2:
            raise ValueError("compare_orders needs exactly two orders")
        if self.initial is not None and len(self.initial) != self.chains:
            raise ValueError("initial needs one state per chain")
        return self

    def gibbs_config(self, seed: int, chain: int = 0) -> GibbsConfig:
        return GibbsConfig(
            n_samples=self.n_samples,
            burn_in=self.burn_in,
            seed=RngStream(seed, chain),
            proposal_scales=dict(self.proposal_scales),
            thin=self.thin,
            tune=self.tune,
        )

    def scan_order(self, names) -> ScanOrder:
        if self.scan == "random":
            return ScanOrder.random()
        return ScanOrder.from_names(self.order, names)


class OutputBlock(Strict):
    dir: str = "output"
    grid_points: int = Field(4096, ge=16)
    tail: float = Field(1e-6, gt=0, lt=0.5)
    bins: int = Field(200, ge=2)
    range: Optional[Tuple[float, float]] = None
    importance_samples: int = Field(1_000_000, gt=0)
    rr_samples: int = Field(1_000_000, gt=0)


class SpikeSlabBlock(Strict):
    """Bayesian comparator for a normal_known density: point mass at the centre plus a normal slab"""

    prior_sd: float = Field(gt=0)
    prior_mass: float = Field(0.5, gt=0, lt=1)


class AnalysisConfig(Strict):
    analysis: AnalysisBlock
    model: ModelBlock
    inference: InferenceBlock = InferenceBlock()
    sampler: Optional[SamplerBlock] = None
    output: OutputBlock = OutputBlock()
    spike_slab: Optional[SpikeSlabBlock] = None

    @model_validator(mode="after")
    def _kind_needs(self):
        kind, model = self.analysis.kind, self.model.kind
        single = ("normal_known", "binomial")
        if kind in ("density", "importance"):
            if model not in single:
                raise ValueError(f"{kind} analyses need a normal_known or binomial model")
            if not self.inference.alphas:
                raise ValueError(f"{kind} analyses need inference.alpha")
        if kind == "importance" and len(self.inference.alphas) != 1:
            raise ValueError("importance analyses take a single alpha")
        if kind == "pdo_curves" and (self.inference.pdo is None or model not in ("normal_unknown", "relative_risk")):
            raise ValueError("pdo_curves needs inference.pdo and a normal_unknown or relative_risk model")
        if kind == "gibbs":
            if model not in ("normal_unknown", "relative_risk"):
                raise ValueError("gibbs analyses need a normal_unknown or relative_risk model")
            if self.sampler is None:
                raise ValueError("gibbs analyses need a sampler block")
            if self.inference.pdo is None and not self.inference.alphas:
                raise ValueError("gibbs analyses need inference.pdo or inference.alpha")
        if kind == "fiducial_rr" and model != "relative_risk":
            raise ValueError("fiducial_rr needs a relative_risk model")
        if self.spike_slab is not None and (kind != "density" or model != "normal_known"):
            raise ValueError("spike_slab compares against normal_known density analyses only")
        if kind == "gibbs" and self.sampler.compatible_baseline and model != "normal_unknown":
            raise ValueError("compatible_baseline needs a normal_unknown model")
        return self

    @property
    def fill(self) -> Fill:
        return Fill(self.inference.fill)

    @property
    def directions(self) -> List[Direction]:
        return [Direction(d) for d in self.inference.directions]


def parse_config(document: Dict[str, Any], text: str = "") -> AnalysisConfig:
    try:
        return AnalysisConfig.model_validate(document)
    except SchemaError as e:
        raise schema_error(e, text) from e


def load_analysis_config(
    path: Path,
    seed: Optional[int] = None,
    out_dir: Optional[str] = None,
    samples: Optional[int] = None,
    default_out_dir: Optional[str] = None,
) -> Tuple[AnalysisConfig, Dict[str, Any]]:
    """Parsed config plus the override-applied document the digest is taken over"""
    document, text = load_yaml(path)
    document = apply_overrides(document, seed, out_dir, samples)
    if default_out_dir is not None and isinstance(document.get("output", {}), dict):
        document.setdefault("output", {}).setdefault("dir", default_out_dir)
    config = parse_config(document, text)
    logger.info(f"Loaded {config.analysis.kind} analysis '{config.analysis.name}' from {path}")
    return config, document


def coherence_report(config: AnalysisConfig, monotone_grid: int = 64) -> List[str]:
    """
    Problems found without running the analysis: model construction, h
    endpoint zeros, PDO monotonicity and α against the P_f(H_S) floor of
    single-parameter models.
    """
    problems: List[str] = []
    try:
        model = config.model.build()
    except InferenceError as e:
        return [f"model: {e}"]

    shape = config.inference.shape()
    if shape is not None:
        try:
            shape.validate()
        except InferenceError as e:
            problems.append(f"inference.h: {e}")

    curve = None
    if config.inference.pdo is not None:
        try:
            curve = config.inference.curve()
            lo, hi = curve.beta_range
            grid = np.linspace(lo, hi, monotone_grid + 1)[1:]
            if np.any(np.diff([curve(b) for b in grid]) <= 0):
                problems.append("inference.pdo: curve is not strictly increasing")
        except InferenceError as e:
            problems.append(f"inference.pdo: {e}")

    if curve is not None and config.analysis.kind == "pdo_curves":
        grid_block = config.inference.beta_grid
        try:
            validate_beta_grid(grid_block.start, grid_block.stop, grid_block.points, curve.beta_max)
        except ConfigError as e:
            problems.append(f"inference.beta_grid: {e}")

    if isinstance(model, (NormalKnownVarModel, BinomialModel)):
        try:
            floor = model.floor()
        except InferenceError as e:
            problems.append(f"model: {e}")
        else:
            for alpha in config.inference.alphas:
                if alpha < floor:
                    problems.append(f"inference.alpha: {AlphaBelowFloorError(alpha, floor)}")
    return problems
