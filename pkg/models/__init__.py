from .normal import NormalKnownVarModel, NormalMeanFamily, NormalUnknownVarModel
from .binomial import BinomialModel
from .relative_risk import (
    Arm,
    RelativeRiskFamily,
    RelativeRiskModel,
    confidence_density_log_rr,
    confidence_interval_log_rr,
    fiducial_rr_sample,
    odds,
    odds_inverse,
    rr_one_sided_p,
    special_interval_rr,
)
from .spike_slab import bayes_spike_slab
from .conditionals import compatible_conditionals, full_conditionals
from .analysis_config import AnalysisConfig, coherence_report, load_analysis_config, parse_config

__all__ = [
    "NormalKnownVarModel",
    "NormalMeanFamily",
    "NormalUnknownVarModel",
    "BinomialModel",
    "Arm",
    "RelativeRiskFamily",
    "RelativeRiskModel",
    "confidence_density_log_rr",
    "confidence_interval_log_rr",
    "fiducial_rr_sample",
    "odds",
    "odds_inverse",
    "rr_one_sided_p",
    "special_interval_rr",
    "bayes_spike_slab",
    "compatible_conditionals",
    "full_conditionals",
    "AnalysisConfig",
    "coherence_report",
    "load_analysis_config",
    "parse_config",
]
