"""
Command-line interface for the roomloc localization tool.
"""
import typer
from pathlib import Path
from typing import Any, Dict, Optional, Tuple
from rich.console import Console
from rich.markup import escape
from rich.table import Table
from rich.progress import Progress, TextColumn, BarColumn, TimeElapsedColumn

from .localization.analysis import (
    TABLE1_SUBSETS,
    ScenarioError,
    combo_study,
    monte_carlo_covariance,
    run_scenario,
    subset_label,
    validate_subset,
)
from .localization.point_mass import AXIS_LABELS
from .localization.scenario_file import ScenarioFile, ScenarioFileError, load_scenario_file
from .localization.storage import ResultStorage
from .utils.config_utils import load_config, get_config_with_env_overrides
from .utils.logging_utils import setup_logging

app = typer.Typer(help="Rangefinder localization of an object in a mapped room")

console = Console()
logger = None  # Will be initialized with setup

EXIT_RUNTIME = 1
EXIT_USAGE = 2

USAGE_ERRORS = (ScenarioFileError, ScenarioError)


def initialize_logging(config=None):
    """Initialize logging with the specified config."""
    global logger
    logger = setup_logging(config)
    return logger


@app.callback()
def callback():
    """Rangefinder localization of an object in a mapped room."""
    # This will be called before any command
    config = get_config_with_env_overrides(load_config())
    initialize_logging(config)


def _fail(ex: Exception, code: int, context: str):
    if logger:
        logger.error(f"{context}: {str(ex)}")
    console.print(f"[bold red]Error: [/bold red]{escape(str(ex))}")
    raise typer.Exit(code=code)


def parse_subset(text: Optional[str], beam_count: int) -> Tuple[int, ...]:
    """
    Parse a comma list such as "1,2,3"; None selects every beam.

    Raises:
        ScenarioError: For tokens that are not integers
    """
    if text is None:
        return tuple(range(1, beam_count + 1))
    indices = []
    for position, token in enumerate(t.strip() for t in text.split(",")):
        try:
            indices.append(int(token))
        except ValueError:
            raise ScenarioError(f"subset[{position}]: {token!r} is not a beam number") from None
    return tuple(indices)


def _prepare(scenario_path: Path, config_file: Optional[str]) -> Tuple[Dict[str, Any], ScenarioFile]:
    config = get_config_with_env_overrides(load_config(config_file))
    initialize_logging(config)
    return config, load_scenario_file(scenario_path, config)


def _storage(out_dir: Optional[Path], scenario_file: ScenarioFile, config: Dict[str, Any]) -> ResultStorage:
    target = out_dir or scenario_file.outputs.out_dir
    return ResultStorage(target, config)


def _estimate_table(title: str, axes, mean, rms) -> Table:
    table = Table(title=title)
    table.add_column("Axis", style="cyan")
    table.add_column("Mean", style="green", justify="right")
    table.add_column("RMS", style="yellow", justify="right")
    units = {"x1": "m", "x2": "m", "heading": "deg"}
    for axis, m, r in zip(axes, mean, rms):
        table.add_row(escape(f"{axis} [{units[axis]}]"), f"{m:.4f}", f"{r:.4f}")
    return table


@app.command()
def estimate(
    scenario_path: Path = typer.Option(..., "--scenario", "-s", help="Path to scenario YAML file"),
    subset: Optional[str] = typer.Option(None, "--subset", help="Comma-separated 1-based beam numbers (default: all)"),
    out_dir: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    heatmap: bool = typer.Option(False, "--heatmap", help="Write a PGM heatmap of the posterior"),
    export_grid: bool = typer.Option(False, "--export-grid", help="Write the posterior grid as text"),
    config_file: Optional[str] = typer.Option(None, "--config", help="Path to config file"),
):
    """Estimate the object position from a subset of the scenario beams."""
    try:
        config, scenario_file = _prepare(scenario_path, config_file)
        scenario = scenario_file.scenario
        chosen = validate_subset(scenario, parse_subset(subset, len(scenario.beams)))
    except USAGE_ERRORS as ex:
        _fail(ex, EXIT_USAGE, "Invalid estimate request")

    try:
        with console.status("[yellow]Running point-mass filter...[/yellow]"):
            result = run_scenario(scenario, chosen)

        label = subset_label(chosen)
        report = result.report
        console.print(_estimate_table(f"Estimate using beams {label}", report.axes, report.mean, report.rms))

        storage = _storage(out_dir, scenario_file, config)
        written = storage.write_report(report, label=str(scenario_path))
        if export_grid or scenario_file.outputs.export_grid:
            written.append(storage.write_grid(result.grid, label))
        if heatmap or scenario_file.outputs.heatmap:
            written.append(storage.write_heatmap(result.grid, label))

        for path in written:
            console.print(f"[green]Saved: [/green]{path}")

    except Exception as ex:
        _fail(ex, EXIT_RUNTIME, "Error in estimate")


@app.command()
def table1(
    scenario_path: Path = typer.Option(..., "--scenario", "-s", help="Path to scenario YAML file"),
    out_dir: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    heatmap: bool = typer.Option(False, "--heatmap", help="Write one PGM heatmap per subset"),
    export_grid: bool = typer.Option(False, "--export-grid", help="Write one posterior grid per subset"),
    config_file: Optional[str] = typer.Option(None, "--config", help="Path to config file"),
):
    """Compare posterior RMS over the seven combinations of beams 1, 2 and 3."""
    try:
        config, scenario_file = _prepare(scenario_path, config_file)
        scenario = scenario_file.scenario
        if len(scenario.beams) < 3:
            raise ScenarioError(f"beams: table1 needs at least 3 beams, scenario has {len(scenario.beams)}")
    except USAGE_ERRORS as ex:
        _fail(ex, EXIT_USAGE, "Invalid table1 request")

    try:
        want_heatmaps = heatmap or scenario_file.outputs.heatmap
        want_grids = export_grid or scenario_file.outputs.export_grid

        with console.status("[yellow]Running measurement combinations...[/yellow]"):
            table = combo_study(scenario, TABLE1_SUBSETS, keep_grids=want_heatmaps or want_grids)

        frame = table.to_frame()
        rich_table = Table(title="Posterior RMS per measurement subset")
        rich_table.add_column("", style="cyan")
        for column in frame.columns:
            rich_table.add_column(column, style="green", justify="right")
        for index, values in frame.iterrows():
            rich_table.add_row(escape(index), *(f"{v:.4f}" for v in values))
        console.print(rich_table)

        storage = _storage(out_dir, scenario_file, config)
        written = storage.write_combo_table(table)
        for row in table.rows:
            if want_grids:
                written.append(storage.write_grid(row.grid, row.label))
            if want_heatmaps:
                written.append(storage.write_heatmap(row.grid, row.label))

        for path in written:
            console.print(f"[green]Saved: [/green]{path}")

    except Exception as ex:
        _fail(ex, EXIT_RUNTIME, "Error in table1")


@app.command()
def montecarlo(
    scenario_path: Path = typer.Option(..., "--scenario", "-s", help="Path to scenario YAML file"),
    subset: Optional[str] = typer.Option(None, "--subset", help="Comma-separated 1-based beam numbers (default: all)"),
    trials: Optional[int] = typer.Option(None, "--trials", "-n", help="Number of Monte-Carlo trials"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Threads used to run trials"),
    out_dir: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    config_file: Optional[str] = typer.Option(None, "--config", help="Path to config file"),
):
    """Estimate the unconditional error covariance by repeated simulation."""
    try:
        config, scenario_file = _prepare(scenario_path, config_file)
        scenario = scenario_file.scenario
        chosen = validate_subset(scenario, parse_subset(subset, len(scenario.beams)))

        analysis_config = config.get("analysis", {})
        trials = analysis_config.get("trials", 500) if trials is None else trials
        workers = analysis_config.get("workers", 1) if workers is None else workers
        if trials < 1:
            raise ScenarioError(f"--trials: must be at least 1, got {trials}")
        if workers < 1:
            raise ScenarioError(f"--workers: must be at least 1, got {workers}")
    except USAGE_ERRORS as ex:
        _fail(ex, EXIT_USAGE, "Invalid montecarlo request")

    try:
        console.print(f"[yellow]Running {trials} Monte-Carlo trials with beams {subset_label(chosen)}...[/yellow]")
        with Progress(
            TextColumn("[bold blue]{task.description}"),
            BarColumn(),
            TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
            TimeElapsedColumn(),
            console=console,
        ) as progress:
            task = progress.add_task("Trials", total=100)

            def progress_callback(percent):
                progress.update(task, completed=percent)

            result = monte_carlo_covariance(
                scenario, chosen, trials, workers=workers, progress_callback=progress_callback
            )

        axes = AXIS_LABELS[: result.matrix.shape[0]]
        table = Table(title=f"Error RMS over {result.used} trials")
        table.add_column("Axis", style="cyan")
        table.add_column("Unconditional", style="green", justify="right")
        table.add_column("Mean conditional", style="yellow", justify="right")
        table.add_column("Gap", style="magenta", justify="right")
        for axis, rms, cond, gap in zip(axes, result.rms, result.conditional_rms, result.consistency_gap):
            table.add_row(axis, f"{rms:.4f}", f"{cond:.4f}", f"{gap:.1%}")
        console.print(table)
        if result.skipped:
            console.print(f"[yellow]{result.skipped} trials skipped (degenerate posterior)[/yellow]")

        storage = _storage(out_dir, scenario_file, config)
        for path in storage.write_unconditional(result, chosen):
            console.print(f"[green]Saved: [/green]{path}")

    except Exception as ex:
        _fail(ex, EXIT_RUNTIME, "Error in montecarlo")


if __name__ == "__main__":
    app()
