"""Closed-form quantities of the attacker-vs-detector game."""
import logging
import math
from typing import Iterable

from fdi_game.core.detectors import np_log_threshold
from fdi_game.core.errors import ConfigError, DegenerateReferenceError, UnsupportedPolicyError
from fdi_game.core.models import GameConfig, InformationQuantities
from fdi_game.core.normal import log_phi_cdf, phi_cdf, phi_inv
from fdi_game.core.ports import AttackSignal, FeedbackPolicy
from fdi_game.core.reports import ExponentCurve, ExponentPoint
from fdi_game.core.signals import attack_energy, attack_mass

logger = logging.getLogger(__name__)


def _require_open_loop(signal, operation: str) -> None:
    if isinstance(signal, FeedbackPolicy):
        raise UnsupportedPolicyError(
            f"{operation} has no closed form for feedback policy {signal.describe()}; use a Monte Carlo estimate"
        )


def success_rate(signal: AttackSignal, config: GameConfig) -> float:
    """gamma(theta) = Phi(m / sqrt(T) - sqrt(T) d)."""
    _require_open_loop(signal, "success_rate")
    mass = attack_mass(signal, config)
    return phi_cdf(mass / config.sqrt_horizon - config.sqrt_horizon * config.unsafe_slope)


def is_admissible_attack(signal: AttackSignal, config: GameConfig) -> bool:
    _require_open_loop(signal, "is_admissible_attack")
    return attack_mass(signal, config) >= config.mass_floor


def _value_argument(config: GameConfig) -> float:
    return (
        phi_inv(1.0 - config.false_alarm_budget)
        - phi_inv(config.success_floor)
        - config.sqrt_horizon * config.unsafe_slope
    )


def game_value(config: GameConfig) -> float:
    """beta(theta*, phi*) = Phi(Phi^-1(1 - eps) - Phi^-1(c) - sqrt(T) d)."""
    return phi_cdf(_value_argument(config))


def baseline_unsafe_probability(config: GameConfig) -> float:
    return phi_cdf(-config.sqrt_horizon * config.unsafe_slope)


def terminal_test_beta(signal: AttackSignal, config: GameConfig) -> float:
    """beta(theta, phi*): depends on the attack mass only."""
    _require_open_loop(signal, "terminal_test_beta")
    mass = attack_mass(signal, config)
    return phi_cdf(phi_inv(1.0 - config.false_alarm_budget) - mass / config.sqrt_horizon)


def best_response_beta(signal: AttackSignal, config: GameConfig) -> float:
    """
    Smallest detection-failure rate any admissible detector achieves against
    a fixed open-loop signal: Phi(Phi^-1(1 - eps) - sqrt(energy)), attained by
    the Neyman-Pearson test calibrated on that signal.
    """
    _require_open_loop(signal, "best_response_beta")
    energy = attack_energy(signal, config)
    if energy <= 0.0:
        raise DegenerateReferenceError(f"signal {signal.describe()} has zero energy")
    return phi_cdf(phi_inv(1.0 - config.false_alarm_budget) - math.sqrt(energy))


def likelihood_excess(energy: float, log_threshold: float) -> float:
    """
    E[zeta(T) - lambda]^+ for zeta(T) = exp(s Z - s^2 / 2), s^2 = energy,
    Z standard normal. Increasing in the energy for fixed lambda.
    """
    if energy <= 0.0:
        raise DegenerateReferenceError("likelihood excess needs a positive energy")
    spread = math.sqrt(energy)
    lower = (-log_threshold - 0.5 * energy) / spread
    return phi_cdf(lower + spread) - math.exp(log_threshold) * phi_cdf(lower)


def change_of_measure_beta(signal: AttackSignal, config: GameConfig) -> float:
    """beta = 1 - lambda* eps - E[z - lambda*]^+ for the best-response test to `signal`."""
    _require_open_loop(signal, "change_of_measure_beta")
    log_threshold = np_log_threshold(signal, config)
    excess = likelihood_excess(attack_energy(signal, config), log_threshold)
    return 1.0 - math.exp(log_threshold) * config.false_alarm_budget - excess


def information_quantities(config: GameConfig) -> InformationQuantities:
    """Relative entropy D = T theta_bar^2 / 2 and variance V = T theta_bar^2 of log z under the saddle attack."""
    theta_bar = config.theta_bar
    return InformationQuantities(
        horizon=config.horizon,
        theta_bar=theta_bar,
        relative_entropy=0.5 * config.horizon * theta_bar * theta_bar,
        variance=config.horizon * theta_bar * theta_bar,
    )


def exponent_curve(config_template: GameConfig, horizons: Iterable[float]) -> ExponentCurve:
    """
    First- and second-order exponents of the game value per horizon.

    theta_bar depends on T, so the rates D-bar = theta_bar^2 / 2 and
    V-bar = theta_bar^2 are re-derived at every horizon.
    """
    grid = sorted(float(h) for h in horizons)
    if not grid:
        raise ConfigError("exponent curve needs at least one horizon")
    if grid[0] <= 0:
        raise ConfigError(f"horizons must be positive, got {grid[0]}")

    lower_quantile = phi_inv(config_template.false_alarm_budget)
    points = []
    for horizon in grid:
        config = config_template.with_horizon(horizon)
        info = information_quantities(config)
        root = config.sqrt_horizon
        neg_log_beta = -log_phi_cdf(_value_argument(config))
        first = horizon * info.relative_entropy_rate
        second = root * math.sqrt(info.variance_rate) * lower_quantile
        # Hoeffding's tail bound applies only to a non-negative deviation
        deviation = root * info.theta_bar + lower_quantile
        hoeffding = 0.5 * deviation * deviation if deviation > 0 else 0.0
        points.append(ExponentPoint(
            horizon=horizon,
            theta_bar=info.theta_bar,
            neg_log_beta=neg_log_beta,
            relative_entropy_rate=info.relative_entropy_rate,
            variance_rate=info.variance_rate,
            first_order_term=first,
            second_order_term=second,
            hoeffding_bound=hoeffding,
            residual=neg_log_beta - first - second,
            first_order_ratio=neg_log_beta / first,
        ))

    violations = [p.horizon for p in points if not p.hoeffding_holds]
    if violations:
        logger.warning(f"Hoeffding bound violated at horizons {violations}")
    return ExponentCurve(points=tuple(points))
