import math
from dataclasses import dataclass

import numpy as np

from fdi_game.core.errors import ConfigError
from fdi_game.core.normal import phi_inv

_U64 = 2**64


@dataclass(frozen=True)
class GameConfig:
    """
    The four game parameters: horizon T, unsafe slope d (x(T) > T*d is
    unsafe), success floor c and false-alarm budget epsilon.
    """
    horizon: float
    unsafe_slope: float
    success_floor: float
    false_alarm_budget: float

    def __post_init__(self):
        for name in ("horizon", "unsafe_slope", "success_floor", "false_alarm_budget"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if self.horizon <= 0:
            raise ConfigError("horizon must be positive")
        if self.unsafe_slope <= 0:
            raise ConfigError("unsafe_slope must be positive")
        if not self.success_floor > 0.5:
            raise ConfigError("success_floor must exceed 0.5")
        if not self.success_floor < 1.0:
            raise ConfigError("success_floor must be below 1")
        if not 0.0 < self.false_alarm_budget < 0.5:
            raise ConfigError("false_alarm_budget must lie in (0, 0.5)")
        if self.theta_bar <= 0:
            raise ConfigError("derived constant attack level must be positive")

    @property
    def sqrt_horizon(self) -> float:
        return math.sqrt(self.horizon)

    @property
    def mass_floor(self) -> float:
        """Smallest admissible attack mass, sqrt(T) * Phi^-1(c) + T * d."""
        return self.sqrt_horizon * phi_inv(self.success_floor) + self.horizon * self.unsafe_slope

    @property
    def theta_bar(self) -> float:
        return phi_inv(self.success_floor) / self.sqrt_horizon + self.unsafe_slope

    @property
    def unsafe_level(self) -> float:
        return self.horizon * self.unsafe_slope

    @property
    def is_symmetric(self) -> bool:
        return math.isclose(self.success_floor, 1.0 - self.false_alarm_budget, rel_tol=0.0, abs_tol=1e-15)

    def with_horizon(self, horizon: float) -> "GameConfig":
        return GameConfig(horizon, self.unsafe_slope, self.success_floor, self.false_alarm_budget)


@dataclass(frozen=True)
class RandomStream:
    """
    Addressable substream of standard normal variates. Identical
    (seed, stream_index) pairs replay identical sequences.
    """
    seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < _U64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not 0 <= self.stream_index < _U64:
            raise ConfigError(f"stream_index must be an unsigned 64-bit integer, got {self.stream_index}")

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.Philox(sequence))

    def substream(self, stream_index: int) -> "RandomStream":
        return RandomStream(self.seed, stream_index)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sample path of dx = theta dt + dw on a uniform grid over [0, T]."""
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise ConfigError("times and values must be one-dimensional arrays of equal length")
        if self.times.size < 2:
            raise ConfigError("a trajectory needs at least one step")
        if self.values[0] != 0.0 or self.times[0] != 0.0:
            raise ConfigError("trajectories start at x(0) = 0, t = 0")
        steps = np.diff(self.times)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0) or steps[0] <= 0:
            raise ConfigError("trajectory times must be uniformly spaced and increasing")

    @classmethod
    def from_values(cls, values, horizon: float) -> "Trajectory":
        values = np.asarray(values, dtype=float)
        times = np.linspace(0.0, horizon, values.size)
        return cls(times=times, values=values)

    @property
    def steps(self) -> int:
        return self.times.size - 1

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def terminal(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Binomial proportion estimate with its standard error."""
    estimate: float
    stderr: float
    trials: int
    seed: int

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not 0.0 <= self.estimate <= 1.0:
            raise ConfigError(f"estimate must be a probability, got {self.estimate}")

    @classmethod
    def from_counts(cls, hits: int, trials: int, seed: int) -> "MonteCarloEstimate":
        if trials < 1:
            raise ConfigError("trials must be at least 1")
        estimate = hits / trials
        return cls(
            estimate=estimate,
            stderr=math.sqrt(estimate * (1.0 - estimate) / trials),
            trials=trials,
            seed=seed,
        )

    def within(self, target: float, sigmas: float = 4.0) -> bool:
        return abs(self.estimate - target) <= sigmas * self.stderr


@dataclass(frozen=True)
class WeightedEstimate:
    """Sample-mean estimate of a non-binomial quantity (sample standard error)."""
    estimate: float
    stderr: float
    trials: int
    seed: int

    def within(self, target: float, sigmas: float = 4.0) -> bool:
        return abs(self.estimate - target) <= sigmas * self.stderr


@dataclass(frozen=True)
class InformationQuantities:
    horizon: float
    theta_bar: float
    relative_entropy: float
    variance: float

    @property
    def relative_entropy_rate(self) -> float:
        return self.relative_entropy / self.horizon

    @property
    def variance_rate(self) -> float:
        return self.variance / self.horizon
