from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Mapping, TextIO

import numpy as np

from fdi_game.core.models import GameConfig, RandomStream, Trajectory


class AttackSignal(ABC):
    """Open-loop drift theta(t) on [0, T], fixed before the game is played."""

    @abstractmethod
    def value_at(self, t: np.ndarray) -> np.ndarray:
        """Evaluate theta on an array of times."""
        pass

    @abstractmethod
    def breakpoints(self, horizon: float) -> np.ndarray:
        """Sorted times in [0, T], endpoints included, between which theta is linear."""
        pass

    @abstractmethod
    def mass(self, horizon: float) -> float:
        """Exact integral of theta over [0, T]."""
        pass

    @abstractmethod
    def energy(self, horizon: float) -> float:
        """Exact integral of theta^2 over [0, T]."""
        pass

    @abstractmethod
    def describe(self) -> str:
        pass

    def check_horizon(self, horizon: float) -> None:
        """Raise DimensionError if the signal is tied to a different horizon."""
        return None

    def ito_sum(self, times: np.ndarray, values: np.ndarray) -> np.ndarray:
        """
        Left-endpoint Ito sum of theta dx along one path or a (count, N + 1) batch.
        """
        return np.diff(values, axis=-1) @ self.value_at(times[:-1])


class FeedbackPolicy(ABC):
    """State-dependent drift theta(t, x(t))."""

    @abstractmethod
    def drift(self, t: float, x: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def describe(self) -> str:
        pass


class Detector(ABC):
    """
    Pure decision rule over trajectories: 1 rejects H0, 0 accepts it.
    Rejection is strict: statistic > threshold.
    """

    @property
    @abstractmethod
    def threshold(self) -> float:
        pass

    @abstractmethod
    def statistics(self, times: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Test statistic of a path or of a (count, N + 1) batch of paths."""
        pass

    @abstractmethod
    def statistic_law(self, attack: AttackSignal, horizon: float) -> tuple[float, float]:
        """Mean and standard deviation of the Gaussian statistic under an open-loop attack."""
        pass

    @abstractmethod
    def describe(self) -> str:
        pass

    def rejects(self, statistics: np.ndarray) -> np.ndarray:
        return statistics > self.threshold

    def reject_paths(self, times: np.ndarray, values: np.ndarray) -> np.ndarray:
        return self.rejects(self.statistics(times, values))

    def decide(self, trajectory: Trajectory) -> int:
        return int(self.reject_paths(trajectory.times, trajectory.values))


class PathSimulator(ABC):
    @abstractmethod
    def simulate(
        self,
        drift: AttackSignal | FeedbackPolicy,
        config: GameConfig,
        steps: int,
        stream: RandomStream,
        count: int,
    ) -> np.ndarray:
        """Simulate `count` paths; returns a (count, steps + 1) array."""
        pass

    @abstractmethod
    def sample_terminal(
        self, signal: AttackSignal, config: GameConfig, stream: RandomStream, count: int
    ) -> np.ndarray:
        """Exact draws of x(T) ~ N(mass, T)."""
        pass


class ExperimentLoader(ABC):
    @abstractmethod
    def load(self, file_path: str | Path) -> Mapping[str, Any]:
        """Load the raw nested mapping of an experiment file."""
        pass


class ReportWriter(ABC):
    @abstractmethod
    def write(self, report: Any, stream: TextIO) -> None:
        pass

    def save(self, report: Any, file_path: str | Path) -> None:
        path = Path(file_path)
        if path.parent and not path.parent.exists():
            raise FileNotFoundError(f"Output directory does not exist: {path.parent}")
        with open(path, "w", encoding="utf-8", newline="") as stream:
            self.write(report, stream)
