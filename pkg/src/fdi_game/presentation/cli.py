import logging
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Callable, List, Optional

import click
import typer
import yaml
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from fdi_game.application.estimators import MonteCarloEstimator
from fdi_game.application.service import (
    FeedbackCommand,
    FeedbackDemoUseCase,
    PathsCommand,
    SaddleCheckUseCase,
    SaddleCommand,
    SamplePathsUseCase,
    value_report,
)
from fdi_game.core.errors import GameError
from fdi_game.core.game import exponent_curve
from fdi_game.infrastructure.config_loader import YamlExperimentLoader, merge_overrides
from fdi_game.infrastructure.report_writer import writer_for
from fdi_game.infrastructure.sde_simulator import EulerMaruyamaSimulator
from fdi_game.presentation.schemas import ExperimentConfig, OutputFormat

app = typer.Typer(help="Covert-attack detection game: closed forms, saddle checks and sample paths")

logger = logging.getLogger("fdi_game")

SYMMETRIC_TOLERANCE = 1e-12
EXIT_CONFIG_ERROR = 1
EXIT_SADDLE_VIOLATED = 2


class DriftKind(str, Enum):
    zero = "zero"
    constant = "constant"
    bridge = "bridge"


def setup_logging():
    logging.basicConfig(
        level="INFO",
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True, markup=True)],
    )


ConfigOption = typer.Option(None, "--config", "-c", help="YAML experiment file (see configs/experiment.example.yaml).")
SeedOption = typer.Option(None, "--seed", help="Master seed (unsigned 64-bit). Default 42.")
OutOption = typer.Option(None, "--out", "-o", help="Output file. Written to stdout when omitted.")
FormatOption = typer.Option(None, "--format", "-f", help="Output format.")
WorkersOption = typer.Option(None, "--workers", "-w", help="Monte Carlo worker threads. Default $MAX_WORKERS or 1.")
HorizonOption = typer.Option(None, "--horizon", help="Time horizon T.")
SlopeOption = typer.Option(None, "--slope", help="Unsafe slope d.")
FloorOption = typer.Option(None, "--floor", help="Success-rate floor c.")
BudgetOption = typer.Option(None, "--budget", help="False-alarm budget epsilon.")


def load_raw(config_file: Optional[Path]) -> dict[str, Any]:
    return dict(YamlExperimentLoader().load(config_file)) if config_file else {}


def validate_experiment(raw: dict[str, Any], overrides: dict[str, Any]) -> ExperimentConfig:
    return ExperimentConfig.model_validate(merge_overrides(raw, overrides))


def load_experiment(config_file: Optional[Path], overrides: dict[str, Any]) -> ExperimentConfig:
    return validate_experiment(load_raw(config_file), overrides)


def _file_drift_kind(raw: dict[str, Any]) -> Optional[str]:
    section = raw.get("paths")
    drift = section.get("drift") if isinstance(section, dict) else None
    return drift.get("kind") if isinstance(drift, dict) else None


def drift_overrides(raw: dict[str, Any], kind: Optional[str], level: Optional[float], target: Optional[float]):
    """
    Dotted overrides for the paths drift. The file's drift block is kept and
    patched field by field; it is replaced only when the kind changes.
    """
    overrides: dict[str, Any] = {}
    if kind is None and level is not None:
        kind = DriftKind.constant.value
    elif kind is None and target is not None:
        kind = DriftKind.bridge.value
    if kind is not None and kind != _file_drift_kind(raw):
        overrides["paths.drift"] = {"kind": kind}
    overrides["paths.drift.kind"] = kind
    overrides["paths.drift.level"] = level
    overrides["paths.drift.target"] = target
    return overrides


def _common(seed, out, output_format, workers, horizon=None, slope=None, floor=None, budget=None) -> dict[str, Any]:
    return {
        "seed": seed,
        "workers": workers,
        "output.path": str(out) if out else None,
        "output.format": output_format.value if output_format else None,
        "game.horizon": horizon,
        "game.unsafe_slope": slope,
        "game.success_floor": floor,
        "game.false_alarm_budget": budget,
    }


def emit(report: Any, experiment: ExperimentConfig) -> None:
    writer = writer_for(experiment.output.format.value)
    if experiment.output.path is None:
        writer.write(report, sys.stdout)
        sys.stdout.flush()
        return
    writer.save(report, experiment.output.path)
    logger.info(f"Report written to {experiment.output.path}")


def run_guarded(action: Callable[[], int]) -> None:
    try:
        code = action()
    except (GameError, ValidationError, yaml.YAMLError, FileNotFoundError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        raise typer.Exit(code=EXIT_CONFIG_ERROR)
    except Exception:
        logger.exception("An error occurred during execution.")
        raise typer.Exit(code=EXIT_CONFIG_ERROR)
    if code:
        raise typer.Exit(code=code)


def _estimator(experiment: ExperimentConfig) -> MonteCarloEstimator:
    return MonteCarloEstimator(EulerMaruyamaSimulator(), workers=experiment.workers)


@app.command()
def value(
    config: Optional[Path] = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    output_format: Optional[OutputFormat] = FormatOption,
    workers: Optional[int] = WorkersOption,
    horizon: Optional[float] = HorizonOption,
    slope: Optional[float] = SlopeOption,
    floor: Optional[float] = FloorOption,
    budget: Optional[float] = BudgetOption,
    symmetric: bool = typer.Option(False, "--symmetric", help="Set c = 1 - epsilon and check the symmetric value."),
):
    """
    Closed-form saddle point: theta-bar, the phi* cutoff, lambda* and the game value.
    """
    setup_logging()

    def action() -> int:
        experiment = load_experiment(config, _common(seed, out, output_format, workers, horizon, slope, floor, budget))
        game = experiment.game
        if symmetric:
            game = game.model_copy(update={"success_floor": 1.0 - game.false_alarm_budget})
        report = value_report(game.to_domain())
        logger.info(f"theta_bar={report.theta_bar:.6g}, game value={report.game_value:.6g}")
        if symmetric:
            gap = abs(report.symmetric_value - report.game_value)
            if gap > SYMMETRIC_TOLERANCE:
                logger.error(f"Symmetric value Phi(-sqrt(T) d) differs from the general formula by {gap:.3g}")
                return EXIT_CONFIG_ERROR
            logger.info("Symmetric case: value equals Phi(-sqrt(T) d)")
        emit(report, experiment)
        return 0

    run_guarded(action)


@app.command()
def saddle(
    config: Optional[Path] = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    output_format: Optional[OutputFormat] = FormatOption,
    workers: Optional[int] = WorkersOption,
    horizon: Optional[float] = HorizonOption,
    slope: Optional[float] = SlopeOption,
    floor: Optional[float] = FloorOption,
    budget: Optional[float] = BudgetOption,
    trials: Optional[int] = typer.Option(None, "--trials", "-n", help="Monte Carlo trials per estimate."),
    canonical: Optional[bool] = typer.Option(
        None, "--canonical/--no-canonical", help="Include the built-in deviation library."
    ),
):
    """
    Monte Carlo check of the saddle inequalities against attacker and detector deviations.
    Exits with status 2 if any inequality fails beyond its Monte Carlo margin.
    """
    setup_logging()

    def action() -> int:
        overrides = _common(seed, out, output_format, workers, horizon, slope, floor, budget)
        overrides |= {"saddle.trials": trials, "saddle.canonical_deviations": canonical}
        experiment = load_experiment(config, overrides)
        game = experiment.game.to_domain()
        section = experiment.saddle

        # DI
        use_case = SaddleCheckUseCase(_estimator(experiment))

        command = SaddleCommand(
            config=game,
            trials=section.trials,
            seed=experiment.seed,
            attacker_deviations=[spec.to_signal(game) for spec in section.attacker_deviations],
            detector_deviations=[spec.to_detector(game) for spec in section.detector_deviations],
            include_canonical=section.canonical_deviations,
        )
        report = use_case.execute(command)
        emit(report, experiment)
        if not report.passed:
            logger.error("Saddle inequality violated beyond the Monte Carlo margin")
            return EXIT_SADDLE_VIOLATED
        return 0

    run_guarded(action)


@app.command()
def paths(
    config: Optional[Path] = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    output_format: Optional[OutputFormat] = FormatOption,
    workers: Optional[int] = WorkersOption,
    horizon: Optional[float] = HorizonOption,
    slope: Optional[float] = SlopeOption,
    floor: Optional[float] = FloorOption,
    budget: Optional[float] = BudgetOption,
    drift: Optional[DriftKind] = typer.Option(None, "--drift", help="Drift family."),
    level: Optional[float] = typer.Option(None, "--level", help="Constant drift level."),
    target: Optional[float] = typer.Option(None, "--target", help="Brownian-bridge target b."),
    count: Optional[int] = typer.Option(None, "--count", help="Number of paths."),
    steps: Optional[int] = typer.Option(None, "--steps", help="Euler-Maruyama steps per path."),
):
    """
    Sample paths of the attacked dynamics as a long-format table (path_id, t, x).
    """
    setup_logging()

    def action() -> int:
        raw = load_raw(config)
        overrides = _common(seed, out, output_format, workers, horizon, slope, floor, budget)
        overrides |= drift_overrides(raw, drift.value if drift else None, level, target)
        overrides |= {"paths.count": count, "paths.steps": steps}
        experiment = validate_experiment(raw, overrides)
        game = experiment.game.to_domain()
        section = experiment.paths

        # DI
        use_case = SamplePathsUseCase(EulerMaruyamaSimulator())

        command = PathsCommand(
            config=game,
            drift=section.drift.to_signal(game),
            count=section.count,
            steps=section.steps,
            seed=experiment.seed,
        )
        emit(use_case.execute(command), experiment)
        return 0

    run_guarded(action)


@app.command()
def exponents(
    config: Optional[Path] = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    output_format: Optional[OutputFormat] = FormatOption,
    workers: Optional[int] = WorkersOption,
    slope: Optional[float] = SlopeOption,
    floor: Optional[float] = FloorOption,
    budget: Optional[float] = BudgetOption,
    grid: List[float] = typer.Option(None, "--grid", "-T", help="Horizon grid point. Can be used multiple times."),
):
    """
    Error exponents of the saddle-point beta over a horizon grid, with the
    relative-entropy first-order term and the Hoeffding lower bound.
    """
    setup_logging()

    def action() -> int:
        overrides = _common(seed, out, output_format, workers, None, slope, floor, budget)
        overrides["exponents.horizons"] = list(grid) if grid else None
        experiment = load_experiment(config, overrides)
        curve = exponent_curve(experiment.game.to_domain(), experiment.exponents.horizons)
        logger.info(f"Evaluated {len(curve.points)} horizons, D-bar={curve.first_order_rate:.6g}")
        emit(curve, experiment)
        return 0

    run_guarded(action)


@app.command()
def feedback(
    config: Optional[Path] = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    output_format: Optional[OutputFormat] = FormatOption,
    workers: Optional[int] = WorkersOption,
    horizon: Optional[float] = HorizonOption,
    slope: Optional[float] = SlopeOption,
    floor: Optional[float] = FloorOption,
    budget: Optional[float] = BudgetOption,
    target: Optional[float] = typer.Option(None, "--target", help="Brownian-bridge target b."),
    trials: Optional[int] = typer.Option(None, "--trials", "-n", help="Simulated paths per estimate."),
    steps: Optional[int] = typer.Option(None, "--steps", help="Euler-Maruyama steps per path."),
):
    """
    Brownian-bridge feedback attack against phi*: success rate, detection
    failure rate and whether the open-loop saddle value is exceeded.
    """
    setup_logging()

    def action() -> int:
        overrides = _common(seed, out, output_format, workers, horizon, slope, floor, budget)
        overrides |= {"feedback.target": target, "feedback.trials": trials, "feedback.steps": steps}
        experiment = load_experiment(config, overrides)
        section = experiment.feedback

        # DI
        use_case = FeedbackDemoUseCase(_estimator(experiment))

        command = FeedbackCommand(
            config=experiment.game.to_domain(),
            target=section.target,
            trials=section.trials,
            steps=section.steps,
            seed=experiment.seed,
        )
        report = use_case.execute(command)
        if report.saddle_broken:
            logger.info("Feedback attack exceeds the open-loop game value")
        emit(report, experiment)
        return 0

    run_guarded(action)


def main():
    try:
        code = app(standalone_mode=False)
    except click.ClickException as e:
        e.show()
        sys.exit(EXIT_CONFIG_ERROR)
    except click.exceptions.Abort:
        sys.exit(EXIT_CONFIG_ERROR)
    sys.exit(code or 0)


if __name__ == "__main__":
    main()
