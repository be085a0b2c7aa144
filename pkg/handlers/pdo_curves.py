"""PDO curve tables: the curve, its admissibility bounds and the interval-mass curve"""

import logging
from typing import Dict, List, Tuple

from exceptions import CurveError
from models.normal import NormalUnknownVarModel
from models.relative_risk import Arm, RelativeRiskFamily
from utils.pdo import (
    PdoBounds,
    eval_curve,
    interval_mass_curve,
    lower_bound_curve,
    tabulate,
    upper_bound_curve,
    validate,
)
from utils.validation import validate_beta_grid
from .context import RunContext

logger = logging.getLogger(__name__)


def _families(ctx: RunContext, model) -> List[Tuple[str, object]]:
    if isinstance(model, NormalUnknownVarModel):
        return [("", model.mean_family())]
    return [
        (f"_{arm.value}_{direction.value}", RelativeRiskFamily(model, arm, direction))
        for arm in Arm
        for direction in ctx.config.directions
    ]


async def handle(ctx: RunContext):
    config = ctx.config
    model = ctx.build_model()
    curve = config.inference.curve()
    block = config.inference.beta_grid
    betas = validate_beta_grid(block.start, block.stop, block.points, curve.beta_max)

    curves: Dict[str, object] = {"pdo": lambda b: eval_curve(curve, b)}
    families = _families(ctx, model)
    for suffix, family in families:
        curves[f"lower{suffix}"] = lower_bound_curve(family)
        if isinstance(model, NormalUnknownVarModel):
            curves["interval_mass"] = interval_mass_curve(curve, family)
            if config.inference.upper_target is not None:
                curves["upper"] = upper_bound_curve(config.inference.upper_target, family)

    table = await ctx.offload(tabulate, curves, betas)
    for name, failed in table.failures.items():
        if failed:
            ctx.warn(f"Curve '{name}' undefined at {len(failed)} beta values, first: {failed[0][1]}")

    await ctx.writer.write_table(
        f"{ctx.name}_curves.csv",
        {"beta": table.betas, **table.columns},
        comments=[f"curve={config.inference.pdo.model_dump(exclude_none=True)}"],
    )

    reports = {}
    for suffix, family in families:
        upper = curves.get("upper")
        bounds = PdoBounds(lower=curves[f"lower{suffix}"], upper=upper)
        mass_family = family if isinstance(model, NormalUnknownVarModel) else None
        report = await ctx.offload(validate, curve, bounds, betas, mass_family)
        reports[family.name] = {
            "passed": report.passed,
            "monotone": report.monotone,
            "dominates_lower": report.dominates_lower,
            "below_upper": report.below_upper,
            "mass_monotone": report.mass_monotone,
            "failures": report.failures,
        }
    ctx.summary["validation"] = reports

    failed = [name for name, r in reports.items() if not r["passed"]]
    if failed:
        first = reports[failed[0]]["failures"][0] if reports[failed[0]]["failures"] else "see summary"
        raise CurveError(f"PDO curve validation failed for {', '.join(failed)}", first)
