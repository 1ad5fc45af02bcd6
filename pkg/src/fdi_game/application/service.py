import hashlib
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from fdi_game.application.deviations import canonical_attacker_deviations, canonical_detector_deviations
from fdi_game.application.estimators import MonteCarloEstimator
from fdi_game.core.detectors import np_log_threshold, terminal_detector
from fdi_game.core.errors import InadmissibleDeviationError
from fdi_game.core.game import (
    baseline_unsafe_probability,
    best_response_beta,
    game_value,
    information_quantities,
    is_admissible_attack,
)
from fdi_game.core.models import GameConfig, MonteCarloEstimate, RandomStream
from fdi_game.core.normal import phi_cdf
from fdi_game.core.ports import AttackSignal, Detector, FeedbackPolicy, PathSimulator
from fdi_game.core.reports import (
    AttackerDeviation,
    DetectorDeviation,
    FeedbackReport,
    PathBundle,
    SaddleReport,
    SamplePath,
    SkippedDeviation,
    ValueReport,
)
from fdi_game.core.signals import attack_energy, attack_mass, bridge_attack, constant_bias_attack

logger = logging.getLogger(__name__)

MARGIN_SIGMAS = 4.0


def derive_seed(seed: int, label: str) -> int:
    """Stable per-estimate seed so the estimates of one report are independent."""
    digest = hashlib.sha256(f"{seed}:{label}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big", signed=False)


def _combined_stderr(first: MonteCarloEstimate, second: MonteCarloEstimate) -> float:
    return math.hypot(first.stderr, second.stderr)


def value_report(config: GameConfig) -> ValueReport:
    theta_star = constant_bias_attack(config)
    value = game_value(config)
    symmetric_value = None
    if config.is_symmetric:
        symmetric_value = phi_cdf(-config.sqrt_horizon * config.unsafe_slope)
    return ValueReport(
        config=config,
        theta_bar=config.theta_bar,
        detector_cutoff=terminal_detector(config).cutoff,
        log_lambda_star=np_log_threshold(theta_star, config),
        game_value=value,
        baseline_unsafe_probability=baseline_unsafe_probability(config),
        information=information_quantities(config),
        symmetric=config.is_symmetric,
        symmetric_value=symmetric_value,
    )


def _attacker_violation(signal: AttackSignal, config: GameConfig) -> str | None:
    if isinstance(signal, FeedbackPolicy):
        return f"{signal.describe()} is a feedback policy; the saddle check covers open-loop attacks only"
    if is_admissible_attack(signal, config):
        return None
    return (
        f"{signal.describe()} violates the success-rate floor gamma >= c: mass "
        f"{attack_mass(signal, config):.12g} < sqrt(T) Phi^-1(c) + T d = {config.mass_floor:.12g}"
    )


def _detector_violation(alpha: MonteCarloEstimate, detector: Detector, config: GameConfig) -> str | None:
    limit = config.false_alarm_budget + MARGIN_SIGMAS * alpha.stderr
    if alpha.estimate <= limit:
        return None
    return (
        f"{detector.describe()} violates the false-alarm budget alpha <= eps: "
        f"estimated alpha {alpha.estimate:.6g} > {limit:.6g}"
    )


def run_saddle_check(
    config: GameConfig,
    attacker_deviations: Sequence[AttackSignal],
    detector_deviations: Sequence[Detector],
    trials: int,
    seed: int,
    estimator: MonteCarloEstimator | None = None,
    skip_inadmissible: bool = False,
) -> SaddleReport:
    estimator = estimator or MonteCarloEstimator()
    skipped: list[SkippedDeviation] = []

    def reject(description: str, reason: str) -> None:
        if not skip_inadmissible:
            raise InadmissibleDeviationError(reason)
        logger.warning(f"Skipping deviation {description}: {reason}")
        skipped.append(SkippedDeviation(description=description, reason=reason))

    theta_star = constant_bias_attack(config)
    phi_star = terminal_detector(config)
    value = game_value(config)

    logger.info(f"Estimating beta(theta*, phi*) with {trials} trials")
    beta_star = estimator.estimate_beta(phi_star, theta_star, config, trials, derive_seed(seed, "beta_star"))
    value_margin = MARGIN_SIGMAS * beta_star.stderr - abs(beta_star.estimate - value)

    attackers = []
    for index, signal in enumerate(attacker_deviations):
        reason = _attacker_violation(signal, config)
        if reason:
            reject(signal.describe(), reason)
            continue
        beta = estimator.estimate_beta(phi_star, signal, config, trials, derive_seed(seed, f"attacker:{index}"))
        margin = beta_star.estimate - beta.estimate + MARGIN_SIGMAS * _combined_stderr(beta, beta_star)
        closed_form = best_response_beta(signal, config)
        attackers.append(AttackerDeviation(
            description=signal.describe(),
            mass=attack_mass(signal, config),
            energy=attack_energy(signal, config),
            beta=beta,
            margin=margin,
            passed=margin >= 0.0,
            best_response_beta=closed_form,
            dominance_gap=value - closed_form,
        ))

    detectors = []
    for index, detector in enumerate(detector_deviations):
        alpha = estimator.estimate_alpha(detector, config, trials, derive_seed(seed, f"detector_alpha:{index}"))
        reason = _detector_violation(alpha, detector, config)
        if reason:
            reject(detector.describe(), reason)
            continue
        beta = estimator.estimate_beta(detector, theta_star, config, trials, derive_seed(seed, f"detector:{index}"))
        margin = beta.estimate - beta_star.estimate + MARGIN_SIGMAS * _combined_stderr(beta, beta_star)
        detectors.append(DetectorDeviation(
            description=detector.describe(),
            alpha=alpha,
            beta=beta,
            margin=margin,
            passed=margin >= 0.0,
        ))

    report = SaddleReport(
        config=config,
        value_closed_form=value,
        beta_star_mc=beta_star,
        value_margin=value_margin,
        value_consistent=value_margin >= 0.0,
        attacker_deviations=tuple(attackers),
        detector_deviations=tuple(detectors),
        skipped=tuple(skipped),
    )
    logger.info(f"Saddle check {'passed' if report.passed else 'FAILED'}")
    return report


def saddle_check(
    config: GameConfig,
    attacker_deviations: Sequence[AttackSignal],
    detector_deviations: Sequence[Detector],
    trials: int,
    seed: int,
    estimator: MonteCarloEstimator | None = None,
) -> SaddleReport:
    """
    Verify beta(theta, phi*) <= beta(theta*, phi*) <= beta(theta*, phi) within
    Monte Carlo margins (4 combined standard errors of slack). Inadmissible
    deviations raise InadmissibleDeviationError naming the violated constraint.
    """
    return run_saddle_check(config, attacker_deviations, detector_deviations, trials, seed, estimator)


@dataclass
class SaddleCommand:
    config: GameConfig
    trials: int
    seed: int
    attacker_deviations: list[AttackSignal] = field(default_factory=list)
    detector_deviations: list[Detector] = field(default_factory=list)
    include_canonical: bool = True


class SaddleCheckUseCase:
    def __init__(self, estimator: MonteCarloEstimator):
        self.estimator = estimator

    def execute(self, command: SaddleCommand) -> SaddleReport:
        attackers = list(command.attacker_deviations)
        detectors = list(command.detector_deviations)
        if command.include_canonical:
            attackers = canonical_attacker_deviations(command.config) + attackers
            detectors = canonical_detector_deviations(command.config) + detectors
        logger.info(f"Checking {len(attackers)} attacker and {len(detectors)} detector deviations")
        return run_saddle_check(
            command.config,
            attackers,
            detectors,
            command.trials,
            command.seed,
            self.estimator,
            skip_inadmissible=True,
        )


@dataclass
class PathsCommand:
    config: GameConfig
    drift: AttackSignal | FeedbackPolicy
    count: int
    steps: int
    seed: int


class SamplePathsUseCase:
    def __init__(self, simulator: PathSimulator):
        self.simulator = simulator

    def execute(self, command: PathsCommand) -> PathBundle:
        logger.info(f"Simulating {command.count} paths of {command.drift.describe()} with {command.steps} steps")
        values = self.simulator.simulate(
            command.drift, command.config, command.steps, RandomStream(command.seed, 0), command.count
        )
        times = tuple(np.linspace(0.0, command.config.horizon, command.steps + 1).tolist())
        paths = tuple(
            SamplePath(path_id=index, times=times, values=tuple(row.tolist()))
            for index, row in enumerate(values)
        )
        return PathBundle(
            config=command.config,
            drift=command.drift.describe(),
            steps=command.steps,
            seed=command.seed,
            paths=paths,
        )


@dataclass
class FeedbackCommand:
    config: GameConfig
    target: float
    trials: int
    steps: int
    seed: int


class FeedbackDemoUseCase:
    """Brownian-bridge attack against the open-loop saddle detector phi*."""

    def __init__(self, estimator: MonteCarloEstimator):
        self.estimator = estimator

    def execute(self, command: FeedbackCommand) -> FeedbackReport:
        config = command.config
        policy = bridge_attack(command.target, config)
        phi_star = terminal_detector(config)
        gamma = self.estimator.estimate_gamma(
            policy, config, command.trials, derive_seed(command.seed, "gamma"), command.steps
        )
        beta = self.estimator.estimate_beta(
            phi_star, policy, config, command.trials, derive_seed(command.seed, "beta"), command.steps
        )
        alpha = self.estimator.estimate_alpha(phi_star, config, command.trials, derive_seed(command.seed, "alpha"))
        report = FeedbackReport(
            config=config,
            policy=policy.describe(),
            steps=command.steps,
            gamma=gamma,
            beta=beta,
            alpha=alpha,
            game_value=game_value(config),
        )
        logger.info(
            f"{policy.describe()}: gamma={gamma.estimate:.4f}, beta={beta.estimate:.4f} "
            f"vs value {report.game_value:.4f}"
        )
        return report


def feedback_demo(
    config: GameConfig,
    target: float,
    trials: int,
    steps: int,
    seed: int,
    estimator: MonteCarloEstimator | None = None,
) -> FeedbackReport:
    command = FeedbackCommand(config=config, target=target, trials=trials, steps=steps, seed=seed)
    return FeedbackDemoUseCase(estimator or MonteCarloEstimator()).execute(command)
