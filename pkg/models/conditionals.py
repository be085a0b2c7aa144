"""
Full conditional sets for the multi-parameter models: a bispatial
post-data density for each parameter carrying a special interval and the
fiducial density for the others.
"""

import logging
from functools import singledispatch
from typing import Callable, List, Optional, Union

import numpy as np

from exceptions import ValidationError
from utils.fiducial import IntervalShape
from utils.hypotheses import OrientedHypotheses
from utils.pdo import PdoCurve, eval_curve
from utils.postdata import Fill, PostDataDensity, assemble
from utils.sampler import (
    BispatialConditional,
    Conditional,
    ExactConditional,
    MemoizedConditional,
)
from .normal import NormalUnknownVarModel
from .relative_risk import Arm, RelativeRiskModel, rr_one_sided_p, special_interval_rr

logger = logging.getLogger(__name__)

AlphaSpec = Union[PdoCurve, float]


def alpha_rule(pdo: AlphaSpec) -> Callable[[OrientedHypotheses], float]:
    """α from a PDO curve evaluated at β, or a constant"""
    if isinstance(pdo, PdoCurve):
        return lambda oriented: eval_curve(pdo, oriented.p_value)
    alpha = float(pdo)
    if not 0.0 < alpha <= 1.0:
        raise ValidationError("alpha must lie in (0, 1]", f"alpha={alpha}")
    return lambda oriented: alpha


def _maybe_memo(conditional: Conditional, nuisance: str, memo: Optional[float]) -> Conditional:
    if memo is None:
        return conditional
    logger.debug(f"Memoizing '{conditional.name}' on a {nuisance} grid of {memo:g} (approximate)")
    return MemoizedConditional(conditional, nuisance, memo)


@singledispatch
def full_conditionals(
    model,
    pdo: AlphaSpec,
    h: Optional[IntervalShape] = None,
    fill: Fill = Fill.CALIBRATED,
    memo: Optional[float] = None,
) -> List[Conditional]:
    raise ValidationError(f"No full conditionals for model type {type(model).__name__}")


@full_conditionals.register
def _(
    model: NormalUnknownVarModel,
    pdo: AlphaSpec,
    h: Optional[IntervalShape] = None,
    fill: Fill = Fill.CALIBRATED,
    memo: Optional[float] = None,
) -> List[Conditional]:
    """{p(μ | σ, x), f_S(σ | μ, x)}; σ is drawn exactly via σ²"""
    rule = alpha_rule(pdo)
    shape = h or IntervalShape()

    def mean_given_sigma(state) -> PostDataDensity:
        known = model.mean_model(state["sigma"])
        oriented = known.orient()
        return assemble(rule(oriented), known.fiducial(), oriented, fill=fill, h=shape)

    mu = BispatialConditional("mu", mean_given_sigma, initial_scale=float(np.sqrt(model.variance / model.n)))
    sigma = ExactConditional("sigma", lambda state: model.variance_conditional(state["mu"]), transform=np.sqrt)
    return [_maybe_memo(mu, "sigma", memo), sigma]


@full_conditionals.register
def _(
    model: RelativeRiskModel,
    pdo: AlphaSpec,
    h: Optional[IntervalShape] = None,
    fill: Fill = Fill.CALIBRATED,
    memo: Optional[float] = None,
) -> List[Conditional]:
    """{p(π_t | π_c, x), p(π_c | π_t, x)} with h on the log-odds scale"""
    rule = alpha_rule(pdo)
    shape = h or IntervalShape(scale="logit")
    conditionals = []
    for arm in Arm:
        other = arm.other().parameter

        def given_other(state, arm=arm, other=other) -> PostDataDensity:
            oriented = rr_one_sided_p(model, state[other], arm)
            interval = special_interval_rr(state[other], model.epsilon)
            return assemble(rule(oriented), model.fiducial(arm), oriented, interval, fill=fill, h=shape)

        e, n = model.counts(arm)
        p = (e + 0.5) / (n + 1.0)
        scale = float(np.sqrt(p * (1.0 - p) / n))
        conditionals.append(_maybe_memo(BispatialConditional(arm.parameter, given_other, scale), other, memo))
    return conditionals


def compatible_conditionals(model: NormalUnknownVarModel) -> List[Conditional]:
    """The fiducial pair {f_S(μ | σ, x), f_S(σ | μ, x)}, both drawn exactly"""
    return [
        ExactConditional("mu", lambda state: model.mean_fiducial(state["sigma"])),
        ExactConditional("sigma", lambda state: model.variance_conditional(state["mu"]), transform=np.sqrt),
    ]
