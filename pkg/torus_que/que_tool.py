#!/usr/bin/env python3
"""
Torus QUE Tool - Command line runner for the torus quantization experiments

Each subcommand runs one experiment. Settings come from the built-in
defaults, then an optional --config file (YAML or JSON), then the flags.
"""

import argparse
import logging
import sys
from collections.abc import Sequence

from torus_que import __version__
from torus_que.errors import TorusQueError
from torus_que.experiments import EXPERIMENTS, ExperimentConfig, get_experiment
from torus_que.experiments.config import cli_schedule
from torus_que.logger import get_logger, setup_logging

# Initialize logging
logger = get_logger(__name__)

SUBCOMMAND_HELP = {
    "que-kron": "remainders of Kronecker eigenfunctions over a schedule of N",
    "slow-conv": "slow convergence for a constructed alpha",
    "perturbed": "remainders and conjugation defects for a perturbed Kronecker map",
    "perturbed-slow": "slow convergence for a perturbed Kronecker map",
    "egorov": "Egorov defect table for the quantized maps",
    "dioph-scan": "finite-range diophantine constant of alpha",
}

# Exit status for configuration and numerical errors
ERROR_EXIT_STATUS = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torus-que",
        description="Quantized Kronecker and perturbed Kronecker maps on the 2-torus",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(dest="experiment", required=True)

    for name in EXPERIMENTS:
        sub = subparsers.add_parser(name, help=SUBCOMMAND_HELP[name])
        sub.add_argument("--config", help="YAML or JSON experiment configuration")
        sub.add_argument("--out", help="output path; .csv and .json go next to it")
        sub.add_argument("--alpha", nargs="+", help="targets, e.g. 'sqrt(2)' 'sqrt(3)'")
        sub.add_argument("--n-min", type=int, help="smallest N of the schedule")
        sub.add_argument(
            "--n-max",
            type=int,
            help="largest N of the schedule (frequency box size for dioph-scan)",
        )
        sub.add_argument("--n-steps", type=int, help="geometric schedule length")
        sub.add_argument("--seed", type=int, help="seed for random observables")
        sub.add_argument("--max-dense", type=int, help="largest N for dense operators")
        sub.add_argument("--workers", type=int, help="worker threads for the sweep")
        sub.add_argument(
            "--record-timing",
            action="store_true",
            default=None,
            help="write wall time per row instead of 0.0",
        )
        sub.add_argument("--log-file", help="log file (default ~/.torus-que/run.log)")
        sub.add_argument("--verbose", action="store_true", help="debug console output")
        if name in ("slow-conv", "perturbed-slow"):
            sub.add_argument("--growth", help="growth function g as an expression in x")
            sub.add_argument("--levels", type=int, help="number of constructed levels")
        if name == "dioph-scan":
            sub.add_argument("--gamma", type=float, help="diophantine exponent")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults < config file < flags"""
    if args.config:
        config = ExperimentConfig.load(args.config, args.experiment)
    else:
        config = ExperimentConfig.from_mapping({"experiment": args.experiment})

    overrides: dict[str, object] = {
        "out": args.out,
        "seed": args.seed,
        "max_dense": args.max_dense,
        "workers": args.workers,
        "record_timing": args.record_timing,
        "growth": getattr(args, "growth", None),
        "levels": getattr(args, "levels", None),
        "gamma": getattr(args, "gamma", None),
    }
    if args.alpha:
        overrides["alpha"] = tuple(args.alpha)
    if args.experiment == "dioph-scan":
        overrides["n_max"] = args.n_max
    else:
        base = config.schedule or get_experiment(args.experiment).default_schedule
        overrides["schedule"] = cli_schedule(args.n_min, args.n_max, args.n_steps, base)

    # Flag values go back through from_mapping so they get the same checks
    merged = config.to_mapping()
    for key, value in overrides.items():
        if value is not None:
            merged[key] = list(value) if isinstance(value, tuple) else value
    return ExperimentConfig.from_mapping(merged)


def main(argv: Sequence[str] | None = None) -> None:
    """Main entry point for the Torus QUE Tool"""
    args = build_parser().parse_args(argv)

    # Setup logging
    setup_logging(
        log_file=args.log_file,
        console_level=logging.DEBUG if args.verbose else logging.INFO,
    )
    logger.info(f"Starting Torus QUE Tool {__version__}: {args.experiment}")

    try:
        config = resolve_config(args)
        experiment = get_experiment(config.experiment)(config)
        result = experiment.run()
        for path in result.paths:
            logger.info(f"Wrote {path}")
    except TorusQueError as e:
        logger.error(f"{type(e).__name__}: {e}")
        sys.exit(ERROR_EXIT_STATUS)
    except Exception as e:
        logger.exception(f"Fatal error: {e}")
        raise
    finally:
        logger.info("Torus QUE Tool shutting down")


if __name__ == "__main__":
    main()
