"""``lsalab`` console script.

Usage:
    lsalab <experiment> --config PATH [--seed N] [--replicas N] [--workers N]
                        [--out PATH] [--set key.sub=value ...] [--log-level LEVEL]

Exit codes: 0 success, 1 other lsalab error, 2 invariant violated, 3 config
error, 4 output error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from rich.console import Console
from rich.table import Table

from .common.exceptions import ConfigError, InvariantViolationError, LsaLabError, OutputError
from .config import ExperimentKind, load_config
from .experiments import ExperimentResult, run_experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVARIANT = 2
EXIT_CONFIG = 3
EXIT_OUTPUT = 4

console = Console()


def _summary_table(result: ExperimentResult) -> Table:
    table = Table(title=f"{result.experiment.value} (config {result.config_hash[:12]}, seed {result.seed})")
    table.add_column("quantity", style="cyan")
    table.add_column("value", justify="right")
    for key, value in result.summary.items():
        table.add_row(key, value)
    for path in result.files:
        table.add_row("wrote", str(path), style="dim")
    return table


def run(
    config_path: str | Path,
    overrides: list[str] | None = None,
    *,
    experiment: ExperimentKind | None = None,
) -> int:
    """Load a config, run its experiment and print the summary.

    Args:
        config_path: TOML config
        overrides: ``key.sub=value`` strings applied before validation
        experiment: Experiment kind overriding the config's ``experiment`` key

    Returns:
        Exit code

    Example:
        ```python
        code = run("configs/counterexample.toml", ["counterexample.n_max=100"])
        ```
    """
    overrides = list(overrides or [])
    if experiment is not None:
        overrides.insert(0, f"experiment={json.dumps(experiment.value)}")
    try:
        config = load_config(config_path, overrides)
        result = run_experiment(config)
    except ConfigError as e:
        logger.error(f"Config error: {e.message}")
        return EXIT_CONFIG
    except OutputError as e:
        logger.error(f"Output error: {e.message}")
        return EXIT_OUTPUT
    except InvariantViolationError as e:
        logger.error(f"Invariant violated: {e.message} {e.details}")
        return EXIT_INVARIANT
    except LsaLabError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        return EXIT_FAILED

    console.print(_summary_table(result))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per experiment kind."""
    parser = argparse.ArgumentParser(
        prog="lsalab",
        description="Verification experiments for linear stochastic approximation with Markovian noise",
    )
    subparsers = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for kind in ExperimentKind:
        sub = subparsers.add_parser(kind.value, help=f"run the {kind.value} experiment")
        sub.add_argument("--config", required=True, type=Path, help="TOML experiment config")
        sub.add_argument("--seed", type=int, help="master seed")
        sub.add_argument("--replicas", type=int, help="Monte Carlo replicas")
        sub.add_argument("--workers", type=int, help="thread pool size")
        sub.add_argument("--out", type=Path, help="output directory")
        sub.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config leaf by dotted path (repeatable)",
        )
        sub.add_argument(
            "--log-level",
            type=str.upper,
            choices=["DEBUG", "INFO", "WARNING", "ERROR"],
            help="logging level (overrides LOG_LEVEL)",
        )
    return parser


def _flag_overrides(args: argparse.Namespace) -> list[str]:
    overrides = []
    for name in ("seed", "replicas", "workers"):
        value = getattr(args, name)
        if value is not None:
            overrides.append(f"{name}={value}")
    if args.out is not None:
        overrides.append(f"output={json.dumps(str(args.out))}")
    return overrides


def main(argv: list[str] | None = None) -> int:
    """Console entry point."""
    args = build_parser().parse_args(argv)
    if args.log_level:
        logging.getLogger().setLevel(args.log_level)
    # Explicit --set wins over the shorthand flags
    overrides = [*_flag_overrides(args), *args.overrides]
    return run(args.config, overrides, experiment=ExperimentKind(args.experiment))


if __name__ == "__main__":
    sys.exit(main())
