"""
Parseval Hamiltonians - command-line runner

One subcommand per task. Every run writes <out>/<run_id>/report.json, the
task's CSV tables and lineage.json. Exit codes: 0 when every check passes,
1 on a failed check or a computation error, 2 on an invalid config.
"""

import logging
from pathlib import Path
from typing import Annotated, Optional

import typer
from rich.console import Console
from rich.table import Table

from cli.models import load_config
from cli.tasks import execute
from config.settings import settings
from core.exceptions import InvariantViolationError, ToolkitError
from services.exceptions import ConfigError, DocumentFormatError
from services.registry import RunRegistry

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="frames",
    help="Parseval-frame Hamiltonian experiments: JSON config in, JSON report and CSV tables out.",
    add_completion=False,
    no_args_is_help=True,
)
console = Console(stderr=True)

ConfigOption = Annotated[
    Path,
    typer.Option("--config", "-c", exists=True, dir_okay=False, readable=True, help="Experiment config JSON"),
]
OutOption = Annotated[Optional[Path], typer.Option("--out", "-o", help="Output directory for run folders")]
SeedOption = Annotated[Optional[int], typer.Option("--seed", min=0, help="Seed for randomised suites")]
QuietOption = Annotated[bool, typer.Option("--quiet", "-q", help="Only warnings and errors")]


def _configure_logging(quiet: bool) -> None:
    level = logging.WARNING if quiet else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s %(message)s", force=True)


def _print_checks(result) -> None:
    table = Table(title=f"{result.report['task']} {result.run_id}")
    table.add_column("check")
    table.add_column("value", justify="right")
    table.add_column("tolerance", justify="right")
    table.add_column("passed")
    for check in result.outcome.checks:
        table.add_row(check.name, f"{check.value:.3e}", f"{check.tolerance:.3e}", "yes" if check.passed else "NO")
    console.print(table)
    console.print(f"report: {result.run_path / 'report.json'}")


def _run(task: str, config_path: Path, out: Optional[Path], seed: Optional[int], quiet: bool) -> None:
    _configure_logging(quiet)
    try:
        config = load_config(config_path, task=task)
    except ConfigError as e:
        typer.echo(f"config error: {e}", err=True)
        raise typer.Exit(code=2)

    try:
        result = execute(config, out_dir=out, seed=seed)
    except (ToolkitError, DocumentFormatError, OSError) as e:
        logger.error("task_failed", extra={"task": task, "error": type(e).__name__})
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(code=1)

    if not quiet:
        _print_checks(result)
    try:
        result.outcome.raise_for_failures()
    except InvariantViolationError as e:
        typer.echo(str(e), err=True)
        raise typer.Exit(code=1)


@app.command("frame-verify")
def frame_verify(config: ConfigOption, out: OutOption = None, seed: SeedOption = None, quiet: QuietOption = False):
    """
    Parseval defect, excess and isometry/reconstruction checks for a frame.

    The frame comes from frame_file, an inline frame or a random projected ONB.
    """
    _run("frame-verify", config, out, seed, quiet)


@app.command("naimark")
def naimark(config: ConfigOption, out: OutOption = None, seed: SeedOption = None, quiet: QuietOption = False):
    """
    Naimark dilation with Gram(h) = I and a Parseval complement.

    CSV dilation.csv: trial, J, dim, m, gram_defect, psi_parseval_defect, excess, embedding_defect.
    """
    _run("naimark", config, out, seed, quiet)


@app.command("spectrum")
def spectrum(config: ConfigOption, out: OutOption = None, seed: SeedOption = None, quiet: QuietOption = False):
    """
    Dense spectrum, certificates and quasi-eigenpairs of H = sum E_j <phi_j, .> phi_j.

    CSV spectrum.csv: mu, multiplicity, residual.
    CSV quasi_eigenpairs.csv: label, E, is_eigenpair, residual, eigen_residual, finiteness_sum.
    """
    _run("spectrum", config, out, seed, quiet)


@app.command("cc-spectrum")
def cc_spectrum(config: ConfigOption, out: OutOption = None, seed: SeedOption = None, quiet: QuietOption = False):
    """
    Secular-equation spectra of Casazza-Christensen blocks, checked against dense eigh.

    CSV cc_spectrum.csv: block, lambda, type (secular | top), residual.
    """
    _run("cc-spectrum", config, out, seed, quiet)


@app.command("cc-ladders")
def cc_ladders(config: ConfigOption, out: OutOption = None, seed: SeedOption = None, quiet: QuietOption = False):
    """
    Truncated ladder algebra and vertical operators for n = 1..n_max.

    CSV ladders.csv: n, commutator_defect, co_isometry_defect, idempotency_defect, rank, action_defect.
    """
    _run("cc-ladders", config, out, seed, quiet)


@app.command("pseudo-boson")
def pseudo_boson(config: ConfigOption, out: OutOption = None, seed: SeedOption = None, quiet: QuietOption = False):
    """
    Pseudo-boson families on a grid: biorthogonality, Parseval residual, ladders.

    CSV pseudo_boson.csv: n, biorthogonality_phi, biorthogonality_tilde,
    lower_residual, raise_residual, number_residual, tolerance.
    """
    _run("pseudo-boson", config, out, seed, quiet)


@app.command("riesz-pairs")
def riesz_pairs(config: ConfigOption, out: OutOption = None, seed: SeedOption = None, quiet: QuietOption = False):
    """Riesz pair families of an invertible X and their union Parseval frame."""
    _run("riesz-pairs", config, out, seed, quiet)


@app.command("runs")
def runs(out: OutOption = None):
    """
    List the run folders under the output directory.

    One line per run: run_id, task, lineage steps, report present (yes/no), tables.
    """
    registry = RunRegistry(out)
    for run_id in registry.list_runs():
        state = registry.get_run_state(run_id)
        lineage = registry.get_lineage(run_id) or {}
        typer.echo(
            "\t".join(
                [
                    run_id,
                    str(lineage.get("task", "-")),
                    str(len(lineage.get("steps", []))),
                    "yes" if state["has_report"] else "no",
                    ",".join(state["tables"]) or "-",
                ]
            )
        )


@app.command("prop15")
def prop15(config: ConfigOption, out: OutOption = None, seed: SeedOption = None, quiet: QuietOption = False):
    """Same as riesz-pairs."""
    _run("prop15", config, out, seed, quiet)


if __name__ == "__main__":
    app()
