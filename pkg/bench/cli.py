"""
Benchmark Command Line

    python -m bench run <config.json> [--seed N] [--out DIR]

Exit codes: 0 success, 2 invalid configuration or data, 3 runtime failure.
"""

import argparse
import asyncio
import logging
import sys
from typing import List, Optional

from bench.config import ConfigParseError, ConfigValidationError, apply_overrides, load_config
from bench.executor import BenchmarkExecutor
from bench.experiments import create_registry

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Run adaptive and two-stage Metropolis benchmark experiments",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Run the experiment described by a JSON file")
    run.add_argument("config", help="Path to the experiment JSON file")
    run.add_argument("--seed", type=int, help="Override the base seed")
    run.add_argument("--out", help="Override the output directory")
    return parser


def configure_logging() -> None:
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s [%(name)s] [%(levelname)s] %(message)s",
        handlers=[logging.StreamHandler()],
    )


def run_command(config_path: str, seed: Optional[int] = None, out: Optional[str] = None) -> int:
    """
    Load, resolve and run one experiment file

    Returns:
        Process exit code
    """
    try:
        config = apply_overrides(load_config(config_path), seed=seed, output_dir=out)
    except (ConfigParseError, ConfigValidationError) as e:
        logger.error(str(e))
        return EXIT_VALIDATION

    executor = BenchmarkExecutor(create_registry())
    result = asyncio.run(executor.execute(config))

    if result.get("success"):
        for path in result.get("files", []):
            logger.info(f"Output: {path}")
        return EXIT_OK

    logger.error(f"Experiment failed: {result.get('error')}")
    return EXIT_VALIDATION if result.get("error_type") == "validation" else EXIT_RUNTIME


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv if argv is not None else sys.argv[1:])
    configure_logging()
    return run_command(args.config, seed=args.seed, out=args.out)
