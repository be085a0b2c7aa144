from .numeric import GridDensity, RngStream, find_root, integrate
from .hypotheses import (
    Direction,
    HypothesisPairNormal,
    OrientedHypotheses,
    SpecialInterval,
    TestStatistic,
    orient,
    one_sided_p_normal,
    q_value,
    two_sided_p,
)
from .fiducial import (
    FiducialDensity,
    GpdInterval,
    GpdNeutral,
    IntervalShape,
    LpdUniform,
    condition_inside,
    condition_outside,
    lambda_ratio,
    p_f_hs,
)
from .postdata import Fill, PostDataDensity, TauCalibration, assemble, density_grid, interval_mass
from .pdo import PdoBounds, PdoCurve, ValidationReport, validate
from .sampler import (
    ChainOutput,
    GibbsConfig,
    ScanOrder,
    gibbs_run,
    importance_render,
    metropolis_step,
)
from .diagnostics import ScanComparison, gelman_rubin, scan_order_compare
from .file_manager import OutputWriter
from .helpers import ProgressTracker, config_digest, safe_filename

__all__ = [
    "GridDensity",
    "RngStream",
    "find_root",
    "integrate",
    "Direction",
    "HypothesisPairNormal",
    "OrientedHypotheses",
    "SpecialInterval",
    "TestStatistic",
    "orient",
    "one_sided_p_normal",
    "q_value",
    "two_sided_p",
    "FiducialDensity",
    "GpdInterval",
    "GpdNeutral",
    "IntervalShape",
    "LpdUniform",
    "condition_inside",
    "condition_outside",
    "lambda_ratio",
    "p_f_hs",
    "Fill",
    "PostDataDensity",
    "TauCalibration",
    "assemble",
    "density_grid",
    "interval_mass",
    "PdoBounds",
    "PdoCurve",
    "ValidationReport",
    "validate",
    "ChainOutput",
    "GibbsConfig",
    "ScanOrder",
    "gibbs_run",
    "importance_render",
    "metropolis_step",
    "ScanComparison",
    "gelman_rubin",
    "scan_order_compare",
    "OutputWriter",
    "ProgressTracker",
    "config_digest",
    "safe_filename",
]
