import logging
import math

import numpy as np

from fdi_game.core.errors import PreconditionError, SimulationError, UnsupportedPolicyError
from fdi_game.core.models import GameConfig, RandomStream, Trajectory
from fdi_game.core.ports import AttackSignal, FeedbackPolicy, PathSimulator

logger = logging.getLogger(__name__)


class EulerMaruyamaSimulator(PathSimulator):
    """
    Euler-Maruyama recursion x[k+1] = x[k] + drift(t[k], x[k]) dt + sqrt(dt) Z[k],
    drift evaluated at left endpoints (Ito convention).

    For the Brownian bridge the last step has T - t = dt, which gives
    x(T) = b + sqrt(dt) Z exactly: the terminal error is O(sqrt(dt)) with
    Gaussian tails, and no clamping is applied.
    """

    def simulate(
        self,
        drift: AttackSignal | FeedbackPolicy,
        config: GameConfig,
        steps: int,
        stream: RandomStream,
        count: int = 1,
    ) -> np.ndarray:
        if steps < 1:
            raise PreconditionError(f"steps must be at least 1, got {steps}")
        if count < 1:
            raise PreconditionError(f"count must be at least 1, got {count}")

        generator = stream.generator()
        times = np.linspace(0.0, config.horizon, steps + 1)
        dt = config.horizon / steps
        noise = generator.standard_normal((count, steps)) * math.sqrt(dt)
        values = np.zeros((count, steps + 1))

        if isinstance(drift, AttackSignal):
            drift.check_horizon(config.horizon)
            increments = drift.value_at(times[:-1]) * dt + noise
            np.cumsum(increments, axis=1, out=values[:, 1:])
            return values

        for k in range(steps):
            rate = np.asarray(drift.drift(times[k], values[:, k]), dtype=float)
            if not np.all(np.isfinite(rate)):
                raise SimulationError(
                    f"non-finite drift from {drift.describe()} at t={times[k]:.6g} (step {k})"
                )
            values[:, k + 1] = values[:, k] + rate * dt + noise[:, k]
        return values

    def sample_terminal(
        self, signal: AttackSignal, config: GameConfig, stream: RandomStream, count: int = 1
    ) -> np.ndarray:
        if isinstance(signal, FeedbackPolicy):
            raise UnsupportedPolicyError(
                f"exact terminal sampling needs an open-loop signal, got {signal.describe()}"
            )
        signal.check_horizon(config.horizon)
        generator = stream.generator()
        return signal.mass(config.horizon) + config.sqrt_horizon * generator.standard_normal(count)


def simulate_path(
    drift: AttackSignal | FeedbackPolicy, config: GameConfig, steps: int, rng: RandomStream
) -> Trajectory:
    values = EulerMaruyamaSimulator().simulate(drift, config, steps, rng, count=1)[0]
    logger.debug(f"Simulated {drift.describe()} with {steps} steps, x(T)={values[-1]:.6g}")
    return Trajectory(times=np.linspace(0.0, config.horizon, steps + 1), values=values)


def sample_terminal(signal: AttackSignal, config: GameConfig, rng: RandomStream) -> float:
    return float(EulerMaruyamaSimulator().sample_terminal(signal, config, rng, count=1)[0])


def simulate_paths(
    drift: AttackSignal | FeedbackPolicy, config: GameConfig, steps: int, stream: RandomStream, count: int
) -> np.ndarray:
    return EulerMaruyamaSimulator().simulate(drift, config, steps, stream, count)
