import math

import numpy as np
import pytest
from scipy import stats

from fdi_game.core.errors import ConfigError, PreconditionError, SimulationError, UnsupportedPolicyError
from fdi_game.core.models import RandomStream, Trajectory
from fdi_game.core.signals import BrownianBridge, ConstantBias, CustomFeedback, Pulse, ZeroSignal, bridge_attack
from fdi_game.infrastructure.sde_simulator import (
    EulerMaruyamaSimulator,
    sample_terminal,
    simulate_path,
    simulate_paths,
)


class TestRandomStream:
    def test_replays_identically(self):
        first = RandomStream(7, 3).generator().standard_normal(10)
        second = RandomStream(7, 3).generator().standard_normal(10)
        np.testing.assert_array_equal(first, second)

    def test_substreams_differ(self):
        stream = RandomStream(7)
        first = stream.substream(0).generator().standard_normal(10)
        second = stream.substream(1).generator().standard_normal(10)
        assert not np.array_equal(first, second)

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_rejects_non_u64_seed(self, seed):
        with pytest.raises(ConfigError):
            RandomStream(seed)


class TestSimulatePath:
    def test_grid_and_start(self, config):
        trajectory = simulate_path(ZeroSignal(), config, 1000, RandomStream(1))
        assert trajectory.steps == 1000
        assert trajectory.values[0] == 0.0
        assert trajectory.horizon == pytest.approx(1.0)
        assert trajectory.dt == pytest.approx(1e-3)

    def test_bitwise_reproducible(self, config):
        first = simulate_path(Pulse(4.0, 0.2, 0.3), config, 500, RandomStream(11, 2))
        second = simulate_path(Pulse(4.0, 0.2, 0.3), config, 500, RandomStream(11, 2))
        np.testing.assert_array_equal(first.values, second.values)

    def test_single_step_constant_drift_is_exact(self, config):
        values = simulate_paths(ConstantBias(3.1449), config, 1, RandomStream(5), 200_000)
        terminal = values[:, -1]
        assert abs(terminal.mean() - 3.1449) <= 4.0 / math.sqrt(terminal.size)

    def test_zero_drift_increments(self, config):
        values = simulate_paths(ZeroSignal(), config, 100, RandomStream(3), 2000)
        increments = np.diff(values, axis=1).ravel()
        assert increments.var() == pytest.approx(0.01, rel=0.02)

    def test_zero_drift_terminal_mean(self, config):
        values = simulate_paths(ZeroSignal(), config, 10, RandomStream(4), 100_000)
        assert abs(values[:, -1].mean()) <= 4.0 / math.sqrt(100_000) * config.sqrt_horizon

    def test_open_loop_terminal_law(self, config):
        values = simulate_paths(Pulse(10.0, 0.0, 0.31449), config, 200, RandomStream(9), 20_000)
        terminal = values[:, -1]
        assert abs(terminal.mean() - 3.1449) <= 4.0 / math.sqrt(terminal.size)

    def test_bridge_reaches_target(self, config):
        policy = bridge_attack(1.57, config)
        values = simulate_paths(policy, config, 10_000, RandomStream(12), 200)
        assert np.all(np.abs(values[:, -1] - 1.57) < 0.05)

    def test_bridge_last_step_is_exact(self, config):
        # last step: x_N = b + sqrt(dt) Z_{N-1}
        policy = BrownianBridge(target=1.57, horizon=1.0)
        steps = 50
        values = simulate_paths(policy, config, steps, RandomStream(2), 1)
        noise = RandomStream(2).generator().standard_normal((1, steps)) * math.sqrt(1.0 / steps)
        assert values[0, -1] == pytest.approx(1.57 + noise[0, -1], abs=1e-12)

    def test_non_finite_drift(self, config):
        policy = CustomFeedback(lambda t, x: np.full_like(x, np.nan) if t > 0.5 else np.zeros_like(x), "nan")
        with pytest.raises(SimulationError):
            simulate_paths(policy, config, 10, RandomStream(0), 3)

    def test_needs_a_step(self, config):
        with pytest.raises(PreconditionError):
            simulate_path(ZeroSignal(), config, 0, RandomStream(0))


class TestSampleTerminal:
    def test_unit_variance(self, config):
        draws = EulerMaruyamaSimulator().sample_terminal(ZeroSignal(), config, RandomStream(21), 1_000_000)
        assert 0.995 <= draws.var() <= 1.005

    def test_constant_mean(self, config):
        draws = EulerMaruyamaSimulator().sample_terminal(ConstantBias(3.1449), config, RandomStream(22), 1_000_000)
        assert abs(draws.mean() - 3.1449) <= 4e-3

    def test_law_depends_on_mass_only(self, config):
        simulator = EulerMaruyamaSimulator()
        constant = simulator.sample_terminal(ConstantBias(3.1449), config, RandomStream(23), 20_000)
        pulse = simulator.sample_terminal(Pulse(10.0, 0.0, 0.31449), config, RandomStream(24), 20_000)
        assert stats.ks_2samp(constant, pulse).pvalue > 0.01

    def test_scalar_wrapper(self, config):
        assert isinstance(sample_terminal(ZeroSignal(), config, RandomStream(1)), float)

    def test_rejects_feedback(self, config):
        with pytest.raises(UnsupportedPolicyError):
            sample_terminal(bridge_attack(1.57, config), config, RandomStream(1))


class TestTrajectory:
    def test_must_start_at_zero(self):
        with pytest.raises(ConfigError):
            Trajectory(times=np.array([0.0, 1.0]), values=np.array([0.5, 1.0]))

    def test_from_values(self):
        trajectory = Trajectory.from_values([0.0, 0.5, 2.0], horizon=1.0)
        assert trajectory.terminal == 2.0
        assert trajectory.dt == pytest.approx(0.5)
