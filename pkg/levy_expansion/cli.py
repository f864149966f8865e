"""
Command-line interface.

    levy-expansion simulate    --config F [--out D] [--seed S] [--threads N]
    levy-expansion expand      --config F [--out D] [--seed S] [--threads N]
    levy-expansion order-study --config F [--out D] [--seed S] [--threads N]
    levy-expansion validate    --config F [--out D] [--seed S] [--threads N]

Exit status: 0 on success, 1 when an acceptance property fails, 2 on
configuration errors.
"""

import functools
import logging
import sys
from typing import Dict, Optional

import click

from levy_expansion import __version__
from levy_expansion.config import Config
from levy_expansion.core.exceptions import ConfigError, InvalidInputError
from levy_expansion.experiment.schema import load_config_file
from levy_expansion.orchestrator.coordinator import ExperimentOrchestrator

logger = logging.getLogger(__name__)

EXIT_FAILED = 1
EXIT_CONFIG = 2


def _echo_progress(stage: str, data: Dict) -> None:
    if stage in ("start", "paths", "validation_complete", "done", "error"):
        details = ", ".join(f"{key}={value}" for key, value in data.items())
        click.echo(f"  [{stage}] {details}")


def common_options(command):
    """--config, --out, --seed and --threads shared by every command."""

    @click.option(
        "--config",
        "config_path",
        required=True,
        type=click.Path(exists=True, dir_okay=False),
        help="Experiment document (TOML or JSON)",
    )
    @click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Output directory")
    @click.option("--seed", type=click.IntRange(min=0), help="Master seed override")
    @click.option("--threads", type=click.IntRange(min=1), help="Worker threads")
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        return command(*args, **kwargs)

    return wrapper


def _execute(
    command: str,
    config_path: str,
    out_dir: Optional[str],
    seed: Optional[int],
    threads: Optional[int],
) -> None:
    try:
        cfg, report = load_config_file(config_path)
    except ConfigError as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_CONFIG)

    for warning in report.warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo(
        f"{cfg.problem.preset.value}: omega={report.metrics['omega']:.4g} "
        f"eta={report.metrics['eta']:.4g} omega-eta={report.metrics['gap']:.4g}"
    )

    try:
        orchestrator = ExperimentOrchestrator(
            cfg,
            output_dir=out_dir,
            master_seed=seed,
            threads=threads,
            progress_callback=_echo_progress,
        )
        result = orchestrator.run(command)
    except InvalidInputError as e:
        click.echo(f"Invalid configuration: {e}", err=True)
        sys.exit(EXIT_CONFIG)

    click.echo(str(result.metrics))
    for warning in result.warnings:
        click.echo(f"warning: {warning}", err=True)
    for error in result.errors:
        click.echo(f"error: {error}", err=True)
    if result.summary is not None:
        target = orchestrator.output_dir / "summary.json"
        click.echo(f"summary: {target} ({result.summary.status})")
    sys.exit(0 if result.success else EXIT_FAILED)


@click.group()
@click.version_option(__version__, prog_name="levy-expansion")
@click.option("--log-level", default=None, help="Logging level (default LEVY_LOG_LEVEL)")
def cli(log_level: Optional[str]) -> None:
    """Small-noise expansions of Levy-driven dissipative systems."""
    logging.basicConfig(
        level=(log_level or Config.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        Config.validate()
    except ValueError as e:
        click.echo(f"Invalid environment: {e}", err=True)
        sys.exit(EXIT_CONFIG)


@cli.command()
@common_options
def simulate(config_path, out_dir, seed, threads):
    """Deterministic limit and full solutions for every eps."""
    _execute("simulate", config_path, out_dir, seed, threads)


@cli.command()
@common_options
def expand(config_path, out_dir, seed, threads):
    """Expansion terms phi, u_1..u_n per path."""
    _execute("expand", config_path, out_dir, seed, threads)


@cli.command("order-study")
@common_options
def order_study(config_path, out_dir, seed, threads):
    """Measure the remainder order in eps."""
    _execute("order-study", config_path, out_dir, seed, threads)


@cli.command()
@common_options
def validate(config_path, out_dir, seed, threads):
    """Run the property suites."""
    _execute("validate", config_path, out_dir, seed, threads)


if __name__ == "__main__":
    cli()
