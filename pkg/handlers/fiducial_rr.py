"""Marginal fiducial density of a relative risk against its confidence density"""

import logging

import numpy as np

from models.relative_risk import (
    confidence_density_log_rr,
    confidence_interval_log_rr,
    fiducial_rr_sample,
    log_rr_variance,
)
from utils.numeric import RngStream
from .context import RunContext

logger = logging.getLogger(__name__)


async def handle(ctx: RunContext):
    config = ctx.config
    model = ctx.build_model()
    stream = RngStream(ctx.seed)
    ctx.seeds.append({"seed": stream.seed, "stream": stream.stream_id})
    draws = await ctx.offload(fiducial_rr_sample, model, config.output.rr_samples, stream.generator())

    confidence = confidence_density_log_rr(model)
    value_range = config.output.range or (0.0, float(np.quantile(draws, 1.0 - config.output.tail)))
    heights, edges = np.histogram(draws, bins=config.output.bins, range=value_range)
    centres = 0.5 * (edges[:-1] + edges[1:])
    # normalised over all draws so out-of-range mass is not folded back in
    density = heights / (draws.size * np.diff(edges))

    await ctx.writer.write_table(
        f"{ctx.name}_rr.csv",
        {"rr": centres, "fiducial": density, "confidence": confidence.pdf(centres)},
        comments=[f"samples={draws.size}", f"seed={stream.seed}"],
    )
    lo, hi = confidence_interval_log_rr(model, 0.95)
    ctx.summary.update(
        {
            "sample_rr": model.sample_relative_risk,
            "log_rr_sd": float(np.sqrt(log_rr_variance(model))),
            "confidence_interval_95": [lo, hi],
            "fiducial_median": float(np.median(draws)),
            "fiducial_interval_95": [float(q) for q in np.quantile(draws, [0.025, 0.975])],
        }
    )
    logger.info(f"Relative risk: sample {model.sample_relative_risk:.4g}, 95% CI ({lo:.4g}, {hi:.4g})")
