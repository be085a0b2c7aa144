"""
Multi-parameter analyses: Metropolis-within-Gibbs chains over the full
conditional post-data densities, run concurrently, with marginal
histograms, convergence diagnostics and an optional scan-order comparison.
"""

import asyncio
import logging
from typing import Callable, Dict, List

import numpy as np

from models.conditionals import compatible_conditionals, full_conditionals
from models.normal import NormalUnknownVarModel
from models.relative_risk import RelativeRiskModel, confidence_density_log_rr
from utils.diagnostics import ScanCutoffs, gelman_rubin, scan_order_compare
from utils.hypotheses import SpecialInterval
from utils.sampler import ChainOutput, Conditional, ScanOrder, gibbs_run
from .context import RunContext

logger = logging.getLogger(__name__)


def histogram(values: np.ndarray, bins: int, value_range=None):
    heights, edges = np.histogram(values, bins=bins, range=value_range, density=True)
    return 0.5 * (edges[:-1] + edges[1:]), heights


def derived_columns(model, chain: ChainOutput) -> Dict[str, np.ndarray]:
    """Parameters plus derived quantities (RR = π_t/π_c for relative-risk chains)"""
    columns = {name: chain.column(name) for name in chain.names}
    if isinstance(model, RelativeRiskModel):
        columns["rr"] = columns["pi_t"] / columns["pi_c"]
    return columns


def _initial_states(ctx: RunContext, model) -> List[Dict[str, float]]:
    sampler = ctx.config.sampler
    if sampler.initial is not None:
        return [dict(state) for state in sampler.initial]
    return [model.initial_state() for _ in range(sampler.chains)]


async def _run_chains(
    ctx: RunContext, model, build: Callable[[], List[Conditional]]
) -> List[ChainOutput]:
    """Conditionals are built per chain; memo caches stay chain-local"""
    sampler = ctx.config.sampler
    names = [c.name for c in build()]
    scan = sampler.scan_order(names)
    initial = _initial_states(ctx, model)

    async def one(chain: int) -> ChainOutput:
        gibbs = sampler.gibbs_config(ctx.seed, chain)
        ctx.seeds.append({"seed": gibbs.seed.seed, "stream": gibbs.seed.stream_id})
        return await ctx.offload(gibbs_run, build(), gibbs, scan, initial[chain], f"chain {chain}")

    return await asyncio.gather(*(one(i) for i in range(sampler.chains)))


async def _write_histograms(ctx: RunContext, model, chains: List[ChainOutput]):
    bins = ctx.config.output.bins
    pooled: Dict[str, np.ndarray] = {}
    for chain in chains:
        for name, values in derived_columns(model, chain).items():
            pooled[name] = np.concatenate([pooled[name], values]) if name in pooled else values

    for name, values in pooled.items():
        centres, heights = histogram(values, bins)
        columns = {"theta": centres, "density": heights}
        if isinstance(model, NormalUnknownVarModel) and name == "mu":
            columns["compatible"] = model.marginal_mean().pdf(centres)
        if isinstance(model, NormalUnknownVarModel) and name == "sigma":
            # σ² ~ Scale-inv-χ²(n - 1, s²) mapped to σ
            columns["compatible"] = model.marginal_variance().pdf(centres**2) * 2.0 * centres
        if isinstance(model, RelativeRiskModel) and name == "rr":
            columns["confidence"] = confidence_density_log_rr(model).pdf(centres)
        await ctx.writer.write_table(f"{ctx.name}_hist_{name}.csv", columns)
    return pooled


def _interval_summary(model, pooled: Dict[str, np.ndarray]) -> Dict[str, float]:
    if not isinstance(model, NormalUnknownVarModel):
        return {}
    interval = SpecialInterval.centred(model.centre, model.epsilon)
    mu = pooled["mu"]
    sampled = float(np.mean((mu >= interval.lo) & (mu <= interval.hi)))
    baseline = model.marginal_mean().mass(interval.lo, interval.hi)
    return {
        "interval_mass": sampled,
        "compatible_interval_mass": baseline,
        "mass_ratio": sampled / baseline if baseline > 0 else float("inf"),
    }


async def _compatible_run(ctx: RunContext, model: NormalUnknownVarModel) -> Dict[str, float]:
    """Gibbs over the compatible fiducial pair on a stream after those of the scan comparison"""
    sampler = ctx.config.sampler
    gibbs = sampler.gibbs_config(ctx.seed, sampler.chains + sampler.compare_runs)
    ctx.seeds.append({"seed": gibbs.seed.seed, "stream": gibbs.seed.stream_id})
    conditionals = compatible_conditionals(model)
    chain = await ctx.offload(
        gibbs_run, conditionals, gibbs, ScanOrder.random(), model.initial_state(), "compatible"
    )
    await ctx.writer.write_chain(
        f"{ctx.name}_chain_compatible.csv",
        chain.samples,
        chain.names,
        f"{gibbs.seed.seed}/{gibbs.seed.stream_id}",
        chain.scan.describe(chain.names),
    )
    interval = SpecialInterval.centred(model.centre, model.epsilon)
    mu = chain.column("mu")
    return {"compatible_sampled_interval_mass": float(np.mean((mu >= interval.lo) & (mu <= interval.hi)))}


async def handle(ctx: RunContext):
    config = ctx.config
    sampler = config.sampler
    model = ctx.build_model()
    alpha_spec = config.inference.curve() or config.inference.alphas[0]

    def build() -> List[Conditional]:
        return full_conditionals(model, alpha_spec, config.inference.shape(), config.fill, sampler.memo)

    names = [c.name for c in build()]
    chains = await _run_chains(ctx, model, build)
    for i, chain in enumerate(chains):
        await ctx.writer.write_chain(
            f"{ctx.name}_chain_{i}.csv",
            chain.samples,
            chain.names,
            f"{chain.seed.seed}/{chain.seed.stream_id}",
            chain.scan.describe(chain.names),
        )
        ctx.warnings.extend(f"chain {i}: {w}" for w in chain.warnings)

    pooled = await _write_histograms(ctx, model, chains)
    ctx.summary["chains"] = [
        {
            "acceptance": chain.acceptance_rates,
            "selection_counts": chain.selection_counts,
            "failures": chain.failures,
            "proposal_scales": chain.proposal_scales,
            "approximate": chain.approximate,
        }
        for chain in chains
    ]
    ctx.summary.update(_interval_summary(model, pooled))
    if sampler.compatible_baseline:
        ctx.summary.update(await _compatible_run(ctx, model))

    if len(chains) > 1:
        ctx.summary["gelman_rubin"] = {name: gelman_rubin(chains, name) for name in names}

    if sampler.compare_orders:
        orders = tuple(ScanOrder.from_names(order, names) for order in sampler.compare_orders)
        report = await ctx.offload(
            scan_order_compare,
            build(),
            sampler.gibbs_config(ctx.seed, sampler.chains),
            orders,
            _initial_states(ctx, model)[0],
            sampler.significance,
            ScanCutoffs(**sampler.cutoffs),
            sampler.compare_runs,
        )
        ctx.seeds.extend({"seed": ctx.seed, "stream": sampler.chains + run} for run in range(sampler.compare_runs))
        ctx.warnings.extend(report.warnings)
        ctx.summary["scan_orders"] = report.as_dict()
        await ctx.writer.write_json(f"{ctx.name}_scan_orders.json", report.as_dict())
