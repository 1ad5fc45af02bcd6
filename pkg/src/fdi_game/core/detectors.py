"""
Girsanov likelihood-ratio statistics and Neyman-Pearson detectors.

All likelihood ratios are handled as logs; the comparisons are order
preserving and log z never overflows for long horizons.
"""
import math
from dataclasses import dataclass

import numpy as np

from fdi_game.core.errors import DegenerateReferenceError, DimensionError
from fdi_game.core.models import GameConfig, Trajectory
from fdi_game.core.normal import phi_inv
from fdi_game.core.ports import AttackSignal, Detector
from fdi_game.core.signals import attack_energy, inner_product


@dataclass(frozen=True)
class TerminalThreshold(Detector):
    """Reject H0 iff x(T) > cutoff; reads only the final value."""
    cutoff: float

    @property
    def threshold(self) -> float:
        return self.cutoff

    def statistics(self, times: np.ndarray, values: np.ndarray) -> np.ndarray:
        return values[..., -1]

    def statistic_law(self, attack: AttackSignal, horizon: float) -> tuple[float, float]:
        attack.check_horizon(horizon)
        return attack.mass(horizon), math.sqrt(horizon)

    def describe(self) -> str:
        return f"terminal(cutoff={self.cutoff:.6g})"


@dataclass(frozen=True)
class LikelihoodRatio(Detector):
    """Reject H0 iff log z_reference(x, T) > log_threshold."""
    reference: AttackSignal
    log_threshold: float
    horizon: float

    @property
    def threshold(self) -> float:
        return self.log_threshold

    @property
    def energy(self) -> float:
        return self.reference.energy(self.horizon)

    def statistics(self, times: np.ndarray, values: np.ndarray) -> np.ndarray:
        if not math.isclose(float(times[-1]), self.horizon, rel_tol=1e-12):
            raise DimensionError(
                f"trajectory horizon {float(times[-1])} does not match detector horizon {self.horizon}"
            )
        return self.reference.ito_sum(times, values) - 0.5 * self.energy

    def statistic_law(self, attack: AttackSignal, horizon: float) -> tuple[float, float]:
        # int theta_ref dx ~ N(<theta_ref, theta_attack>, energy) under the attack
        mean = inner_product(self.reference, attack, horizon) - 0.5 * self.energy
        return mean, math.sqrt(self.energy)

    def describe(self) -> str:
        return f"likelihood_ratio(reference={self.reference.describe()}, log_threshold={self.log_threshold:.6g})"


def log_lr_statistic(reference: AttackSignal, trajectory: Trajectory) -> float:
    """log z_theta(x, T): left-endpoint Ito sum of theta dx minus half the exact energy."""
    horizon = trajectory.horizon
    reference.check_horizon(horizon)
    ito = reference.ito_sum(trajectory.times, trajectory.values)
    return float(ito) - 0.5 * reference.energy(horizon)


def np_log_threshold(reference: AttackSignal, config: GameConfig, alpha: float | None = None) -> float:
    """
    log lambda* = s Phi^-1(1 - alpha) - s^2 / 2 with s^2 the reference energy;
    under H0 the induced test has false-alarm rate exactly alpha (default epsilon).
    """
    energy = attack_energy(reference, config)
    if energy <= 0.0:
        raise DegenerateReferenceError(
            f"reference {reference.describe()} has zero energy; the likelihood-ratio test cannot be calibrated"
        )
    level = config.false_alarm_budget if alpha is None else alpha
    spread = math.sqrt(energy)
    return spread * phi_inv(1.0 - level) - 0.5 * energy


def lr_detector(reference: AttackSignal, config: GameConfig, alpha: float | None = None) -> LikelihoodRatio:
    return LikelihoodRatio(
        reference=reference,
        log_threshold=np_log_threshold(reference, config, alpha),
        horizon=config.horizon,
    )


def terminal_detector(config: GameConfig, alpha: float | None = None) -> TerminalThreshold:
    level = config.false_alarm_budget if alpha is None else alpha
    return TerminalThreshold(cutoff=config.sqrt_horizon * phi_inv(1.0 - level))
