"""Command-line entry point: ``tsl <subcommand> --config <path> [--out <dir>] [--flag k=v ...]``."""
import functools
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import click

from ..errors import ConfigError
from .config import ScenarioConfig, load_config
from .emit import emit_outcome, write_failures
from .experiments import EXPERIMENTS, Outcome

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _configure_logging(level: int) -> None:
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level)
    logging.captureWarnings(True)


def _echo_manifest(cfg: ScenarioConfig) -> None:
    click.echo(f"# scenario manifest (out = {cfg.out_dir()})")
    for key, value in cfg.manifest():
        click.echo(f"{key} = {value}")


def _resolve(config_path: Optional[str], out: Optional[str], flags: Tuple[str, ...]) -> ScenarioConfig:
    overrides = list(flags)
    if out is not None:
        overrides.append(f"out = {out}")
    try:
        return load_config(Path(config_path) if config_path else None, overrides)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def run_experiments(cfg: ScenarioConfig, names: List[str]) -> int:
    """Run the named experiments, write their artifacts, and return the exit code."""
    out_dir = cfg.out_dir()
    failures: List[Tuple[str, str]] = []
    for name in names:
        logger.info("experiment %s: start", name)
        try:
            outcome: Outcome = EXPERIMENTS[name](cfg)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            return EXIT_CONFIG
        emit_outcome(outcome, out_dir, svg=cfg.svg)
        mark = "✓" if outcome.passed else "✗"
        click.echo(f"{mark} {name}: {len(outcome.tables)} tables, "
                   f"{len(outcome.failures)} failed checks")
        failures.extend((f"{name}:{check}", detail) for check, detail in outcome.failures)
    if failures:
        path = write_failures(failures, out_dir)
        click.echo(f"failure manifest: {path}", err=True)
        return EXIT_FAILED
    return EXIT_OK


def scenario_command(func: Callable) -> Callable:
    """Shared --config / --out / --flag options."""

    @click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                  help="key = value scenario file")
    @click.option("--out", default=None, help="Output directory (default: $TSL_OUT or ./tsl_out)")
    @click.option("--flag", "flags", multiple=True, metavar="KEY=VALUE",
                  help="Override one config key; repeatable")
    @functools.wraps(func)
    def wrapper(config_path, out, flags, **kwargs):
        cfg = _resolve(config_path, out, flags)
        _echo_manifest(cfg)
        return func(cfg, **kwargs)

    return wrapper


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
@click.option("--quiet", "-q", is_flag=True, help="Warnings and errors only")
def main(verbose: bool, quiet: bool):
    """Dyadic mixing/unmixing fields and the weak solutions their regularisations select."""
    _configure_logging(logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO)


def _experiment_command(name: str, help_text: str) -> None:
    @main.command(name=name, help=help_text)
    @scenario_command
    def command(cfg: ScenarioConfig):
        sys.exit(run_experiments(cfg, [name]))


_experiment_command("mixing", "Quarter rotation and the exact mixing checkpoints.")
_experiment_command("truncation", "Symmetric and asymmetric truncations at t = 2.")
_experiment_command("density", "L^p distance ladders and the unboundedness table.")
_experiment_command("perturbed", "Composed flows, compressibility and TV bounds.")
_experiment_command("regularize", "Selection of k_q and the two-limit demonstration.")
_experiment_command("oracle", "Finite-volume concordance and weak residuals.")


@main.command(name="all")
@scenario_command
def run_all(cfg: ScenarioConfig):
    """Every experiment in turn."""
    sys.exit(run_experiments(cfg, list(EXPERIMENTS)))


@main.command(name="config")
@scenario_command
def show_config(cfg: ScenarioConfig):
    """Print the resolved manifest and exit."""
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
