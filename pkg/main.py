#!/usr/bin/env python3
"""
Bispatial-fiducial inference - command-line entry point

Runs a declarative analysis document (post-data densities, importance
renders, PDO curve tables, Gibbs analyses, relative-risk comparisons) and
writes plot data plus a run manifest.
"""

import argparse
import asyncio
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from config import ENGINE_VERSION, EngineConfig, load_config
from exceptions import ConfigError, InferenceError, NumericalError
from handlers import RunContext, setup_handlers
from models.analysis_config import coherence_report, load_analysis_config
from utils.file_manager import OutputWriter
from utils.helpers import config_digest

EXIT_OK = 0
EXIT_INFERENCE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

logger = logging.getLogger("bispatial")


def setup_logging(engine: EngineConfig):
    """Setup logging configuration"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if engine.log_file:
        handlers.append(logging.FileHandler(engine.log_file, encoding="utf-8"))
    logging.basicConfig(
        level=getattr(logging, engine.log_level, logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bispatial", description="Bispatial-fiducial inference runs")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run an analysis document")
    run.add_argument("config", type=Path)
    run.add_argument("--seed", type=int, default=None, help="Override analysis.seed")
    run.add_argument("--out-dir", default=None, help="Override output.dir")
    run.add_argument("--samples", type=int, default=None, help="Override sampler.n_samples")

    check = sub.add_parser("validate", help="Check an analysis document without running it")
    check.add_argument("config", type=Path)
    return parser


def report_error(error: InferenceError) -> int:
    if isinstance(error, ConfigError):
        where = []
        if error.field:
            where.append(f"field {error.field}")
        if error.line:
            where.append(f"line {error.line}")
        suffix = f" ({', '.join(where)})" if where else ""
        logger.error(f"Config error{suffix}: {error}")
        return EXIT_CONFIG
    if isinstance(error, NumericalError):
        operation = error.operation or type(error).__name__
        logger.error(f"Numerical failure in {operation}: {error}")
        return EXIT_NUMERICAL
    logger.error(f"Inference failure: {error}")
    return EXIT_INFERENCE


async def run_analysis(
    path: Path,
    engine: EngineConfig,
    seed: Optional[int] = None,
    out_dir: Optional[str] = None,
    samples: Optional[int] = None,
) -> Path:
    """Run one analysis; returns the manifest path"""
    started = time.monotonic()
    config, document = load_analysis_config(path, seed, out_dir, samples, default_out_dir=engine.output_dir)
    handler = setup_handlers()[config.analysis.kind]

    writer = OutputWriter(Path(config.output.dir))
    await writer.prepare()
    ctx = RunContext(config=config, engine=engine, writer=writer)

    logger.info(f"Starting {config.analysis.kind} analysis '{ctx.name}' (seed {ctx.seed})")
    await handler(ctx)
    elapsed = time.monotonic() - started

    await writer.write_json(f"{ctx.name}_summary.json", ctx.summary)
    manifest = {
        "engine_version": ENGINE_VERSION,
        "config_digest": config_digest(document),
        "analysis": {"kind": config.analysis.kind, "name": ctx.name},
        "seeds": ctx.seeds or [{"seed": ctx.seed, "stream": 0}],
        "outputs": sorted(p.name for p in writer.written) + ["manifest.json"],
        "warnings": ctx.warnings,
        "timings": {"total_seconds": round(elapsed, 3)},
    }
    manifest_path = await writer.write_json("manifest.json", manifest)
    logger.info(f"Analysis '{ctx.name}' finished in {elapsed:.1f}s; {len(writer.written)} files in {writer.out_dir}")
    return manifest_path


def validate_document(path: Path, engine: EngineConfig) -> int:
    config, _ = load_analysis_config(path)
    problems = coherence_report(config, engine.monotone_grid)
    if problems:
        for problem in problems:
            logger.error(problem)
        print(f"FAIL {path}: {len(problems)} problem(s)")
        for problem in problems:
            print(f"  - {problem}")
        return EXIT_INFERENCE
    print(f"OK {path}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        engine = load_config()
    except ConfigError as e:
        logging.basicConfig(level=logging.INFO)
        return report_error(e)
    setup_logging(engine)

    try:
        if args.command == "validate":
            return validate_document(args.config, engine)
        asyncio.run(
            run_analysis(
                args.config,
                engine,
                seed=args.seed,
                out_dir=args.out_dir or None,
                samples=args.samples,
            )
        )
        return EXIT_OK
    except InferenceError as e:
        return report_error(e)


def cli():
    sys.exit(main())


if __name__ == "__main__":
    if sys.version_info < (3, 11):
        print("Python 3.11+ is required")
        sys.exit(1)
    cli()
