import asyncio
import logging

import numpy as np

from models.normal import NormalKnownVarModel
from models.spike_slab import bayes_spike_slab
from utils.fiducial import p_f_event_normal
from utils.helpers import alpha_tag
from utils.hypotheses import check_monotone, one_sided_p_normal, q_value, two_sided_p
from utils.postdata import Fill, PostDataDensity, density_grid
from .context import RunContext

logger = logging.getLogger(__name__)


def _registration_grid(model, points: int) -> np.ndarray:
    f_s = model.fiducial()
    lo, hi = float(f_s.quantile(1e-4)), float(f_s.upper_quantile(1e-4))
    interval = model.interval()
    lo, hi = min(lo, interval.lo), max(hi, interval.hi)
    if f_s.domain == (0.0, 1.0):
        lo, hi = max(lo, 1e-6), min(hi, 1.0 - 1e-6)
    return np.linspace(lo, hi, points)


def density_comments(p: PostDataDensity) -> list:
    notes = [
        f"alpha={p.alpha:.12g}",
        f"direction={p.direction.value}",
        f"interval=[{p.interval.lo:.12g}, {p.interval.hi:.12g}]",
        f"lambda={p.lam:.12g}",
        f"floor={p.floor:.12g}",
        f"masses=({p.mass_below:.12g}, {p.mass_inside:.12g}, {p.mass_above:.12g})",
        f"fill={p.fill.value}",
    ]
    if p.calibration is not None:
        notes.append(f"tau={p.calibration.tau:.12g}")
    return notes


def density_record(p: PostDataDensity) -> dict:
    record = {
        "alpha": p.alpha,
        "lambda": p.lam,
        "mass_below": p.mass_below,
        "mass_inside": p.mass_inside,
        "mass_above": p.mass_above,
    }
    if p.calibration is not None:
        record["tau"] = p.calibration.tau
    if p.piece_inside is not None:
        record["boundary"] = p.boundary_values()
    return record


async def handle(ctx: RunContext):
    config = ctx.config
    model = ctx.build_model()
    check_monotone(model.statistic(), _registration_grid(model, ctx.engine.monotone_grid))

    oriented = model.orient()
    floor = model.floor()
    ctx.summary.update(
        {
            "direction": oriented.direction.value,
            "beta": oriented.p_value,
            "floor": floor,
            "hypotheses": oriented.describe(),
        }
    )
    if isinstance(model, NormalKnownVarModel):
        pair = model.hypothesis_pair()
        ctx.summary["two_sided_p"] = two_sided_p(pair)
        ctx.summary["q_value"] = q_value(pair)
        ctx.summary["one_sided_p"] = one_sided_p_normal(pair)
        if model.n == 1 and model.centre == 0.0:
            ctx.summary["p_f_event"] = await ctx.offload(
                p_f_event_normal, model.mean, model.sigma, ctx.engine.quad_tol
            )
        if config.spike_slab is not None:
            prior = config.spike_slab
            ctx.summary["spike_slab"] = {
                "prior_sd": prior.prior_sd,
                "prior_mass": prior.prior_mass,
                "posterior_null": bayes_spike_slab(pair.x, pair.sigma, prior.prior_sd, prior.prior_mass),
            }

    shape = config.inference.shape()
    densities = await asyncio.gather(
        *(ctx.offload(model.assemble, alpha, config.fill, shape) for alpha in config.inference.alphas)
    )

    records = []
    for p in densities:
        grid = density_grid(p, config.output.grid_points, config.output.tail)
        mass = grid.total_mass()
        if abs(mass - 1.0) > 1e-3 and p.fill is not Fill.PARTIAL:
            ctx.warn(f"Density grid at alpha={p.alpha:g} integrates to {mass:.6f}")
        await ctx.writer.write_grid(f"{ctx.name}_density_{alpha_tag(p.alpha)}.csv", grid, density_comments(p))
        records.append(density_record(p))
        logger.info(
            f"alpha={p.alpha:g}: P(theta in [{p.interval.lo:g}, {p.interval.hi:g}] | x) = {p.mass_inside:.6g}"
        )
    ctx.summary["densities"] = records
