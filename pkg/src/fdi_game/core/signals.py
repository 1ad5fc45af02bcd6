"""
Attack signal families and feedback policies.

Every open-loop family is piecewise linear, so mass, energy and inner
products have exact closed forms (no quadrature error).
"""
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from fdi_game.core.errors import ConfigError, DimensionError, PreconditionError
from fdi_game.core.models import GameConfig
from fdi_game.core.normal import phi_inv
from fdi_game.core.ports import AttackSignal, FeedbackPolicy

# two nodes integrate the product of two linear pieces exactly
_GAUSS_NODES, _GAUSS_WEIGHTS = leggauss(2)


@dataclass(frozen=True)
class ZeroSignal(AttackSignal):
    def value_at(self, t: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(t))

    def breakpoints(self, horizon: float) -> np.ndarray:
        return np.array([0.0, horizon])

    def mass(self, horizon: float) -> float:
        return 0.0

    def energy(self, horizon: float) -> float:
        return 0.0

    def describe(self) -> str:
        return "zero"


@dataclass(frozen=True)
class ConstantBias(AttackSignal):
    level: float

    def value_at(self, t: np.ndarray) -> np.ndarray:
        return np.full(np.shape(t), self.level, dtype=float)

    def breakpoints(self, horizon: float) -> np.ndarray:
        return np.array([0.0, horizon])

    def mass(self, horizon: float) -> float:
        return self.level * horizon

    def energy(self, horizon: float) -> float:
        return self.level * self.level * horizon

    def ito_sum(self, times: np.ndarray, values: np.ndarray) -> np.ndarray:
        # telescoped: exact for every grid
        return self.level * (values[..., -1] - values[..., 0])

    def describe(self) -> str:
        return f"constant(level={self.level:.6g})"


@dataclass(frozen=True)
class PiecewiseConstant(AttackSignal):
    """theta = grid_values[k] on [k T / n, (k + 1) T / n); the last value holds at T."""
    grid_values: tuple[float, ...]
    horizon: float

    def __post_init__(self):
        if len(self.grid_values) < 1:
            raise ConfigError("piecewise-constant signal needs at least one value")
        if not all(math.isfinite(v) for v in self.grid_values):
            raise ConfigError("piecewise-constant values must be finite")
        if self.horizon <= 0:
            raise ConfigError("piecewise-constant horizon must be positive")

    @property
    def _values(self) -> np.ndarray:
        return np.asarray(self.grid_values, dtype=float)

    def value_at(self, t: np.ndarray) -> np.ndarray:
        n = len(self.grid_values)
        index = np.floor(np.asarray(t, dtype=float) * n / self.horizon + 1e-9).astype(int)
        return self._values[np.clip(index, 0, n - 1)]

    def breakpoints(self, horizon: float) -> np.ndarray:
        return np.linspace(0.0, horizon, len(self.grid_values) + 1)

    def mass(self, horizon: float) -> float:
        return float(self._values.sum()) * horizon / len(self.grid_values)

    def energy(self, horizon: float) -> float:
        return float(np.square(self._values).sum()) * horizon / len(self.grid_values)

    def check_horizon(self, horizon: float) -> None:
        if not math.isclose(horizon, self.horizon, rel_tol=1e-12):
            raise DimensionError(
                f"piecewise-constant signal is defined on [0, {self.horizon}], not [0, {horizon}]"
            )

    def describe(self) -> str:
        levels = ", ".join(f"{v:.6g}" for v in self.grid_values)
        return f"piecewise([{levels}])"


@dataclass(frozen=True)
class Pulse(AttackSignal):
    """theta = height on [start, start + width), zero elsewhere."""
    height: float
    start: float
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ConfigError("pulse width must be positive")
        if self.start < 0:
            raise ConfigError("pulse start must be non-negative")

    def value_at(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        inside = (t >= self.start) & (t < self.start + self.width)
        return np.where(inside, self.height, 0.0)

    def _overlap(self, horizon: float) -> float:
        return max(0.0, min(self.start + self.width, horizon) - min(self.start, horizon))

    def breakpoints(self, horizon: float) -> np.ndarray:
        points = np.clip([0.0, self.start, self.start + self.width, horizon], 0.0, horizon)
        return np.unique(points)

    def mass(self, horizon: float) -> float:
        return self.height * self._overlap(horizon)

    def energy(self, horizon: float) -> float:
        return self.height * self.height * self._overlap(horizon)

    def describe(self) -> str:
        return f"pulse(height={self.height:.6g}, start={self.start:.6g}, width={self.width:.6g})"


@dataclass(frozen=True)
class Ramp(AttackSignal):
    """theta(t) = slope * t."""
    slope: float

    def value_at(self, t: np.ndarray) -> np.ndarray:
        return self.slope * np.asarray(t, dtype=float)

    def breakpoints(self, horizon: float) -> np.ndarray:
        return np.array([0.0, horizon])

    def mass(self, horizon: float) -> float:
        return 0.5 * self.slope * horizon * horizon

    def energy(self, horizon: float) -> float:
        return self.slope * self.slope * horizon ** 3 / 3.0

    def describe(self) -> str:
        return f"ramp(slope={self.slope:.6g})"


@dataclass(frozen=True)
class BrownianBridge(FeedbackPolicy):
    """
    Drift (b - x) / (T - t), pinning x(T) at b. The drift diverges at t = T;
    left-endpoint evaluation never reaches it.
    """
    target: float
    horizon: float

    def drift(self, t: float, x: np.ndarray) -> np.ndarray:
        return (self.target - x) / (self.horizon - t)

    def describe(self) -> str:
        return f"bridge(target={self.target:.6g})"


@dataclass(frozen=True)
class CustomFeedback(FeedbackPolicy):
    function: Callable[[float, np.ndarray], np.ndarray]
    label: str = "custom"

    def drift(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.function(t, x)

    def describe(self) -> str:
        return f"feedback({self.label})"


def attack_mass(signal: AttackSignal, config: GameConfig) -> float:
    signal.check_horizon(config.horizon)
    return signal.mass(config.horizon)


def attack_energy(signal: AttackSignal, config: GameConfig) -> float:
    signal.check_horizon(config.horizon)
    return signal.energy(config.horizon)


def inner_product(first: AttackSignal, second: AttackSignal, horizon: float) -> float:
    """Exact integral of first * second over [0, T]."""
    first.check_horizon(horizon)
    second.check_horizon(horizon)
    edges = np.union1d(first.breakpoints(horizon), second.breakpoints(horizon))
    left, right = edges[:-1], edges[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    nodes = mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]
    products = first.value_at(nodes) * second.value_at(nodes)
    return float(np.sum(half[:, None] * _GAUSS_WEIGHTS[None, :] * products))


def constant_bias_attack(config: GameConfig) -> ConstantBias:
    """
    The saddle attack theta* = Phi^-1(c) / sqrt(T) + d. The level is rounded
    up (by ulps) until its mass meets the success-rate floor, so the
    constraint stays active and admissible under exact comparison.
    """
    floor = config.mass_floor
    level = floor / config.horizon
    while level * config.horizon < floor:
        level = float(np.nextafter(level, math.inf))
    return ConstantBias(level=level)


def bridge_attack(target: float, config: GameConfig) -> BrownianBridge:
    lower = config.unsafe_level
    upper = config.sqrt_horizon * phi_inv(1.0 - config.false_alarm_budget)
    if not lower < target < upper:
        raise PreconditionError(
            f"bridge target b={target:.6g} must satisfy T*d = {lower:.6g} < b < "
            f"sqrt(T)*Phi^-1(1-eps) = {upper:.6g}"
        )
    return BrownianBridge(target=target, horizon=config.horizon)
