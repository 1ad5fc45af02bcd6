import math

import numpy as np
import pytest

from fdi_game.core.detectors import (
    LikelihoodRatio,
    TerminalThreshold,
    log_lr_statistic,
    lr_detector,
    np_log_threshold,
    terminal_detector,
)
from fdi_game.core.errors import DegenerateReferenceError, DimensionError
from fdi_game.core.models import GameConfig, RandomStream, Trajectory
from fdi_game.core.signals import ConstantBias, PiecewiseConstant, Pulse, Ramp, ZeroSignal, constant_bias_attack
from fdi_game.infrastructure.sde_simulator import simulate_paths


class TestLogLrStatistic:
    def test_zero_reference(self):
        trajectory = Trajectory.from_values([0.0, 0.3, -0.2, 1.1], horizon=1.0)
        assert log_lr_statistic(ZeroSignal(), trajectory) == 0.0

    def test_constant_reference_telescopes(self, config):
        theta_bar = config.theta_bar
        trajectory = Trajectory.from_values([0.0, 0.7, -0.4, 1.3, 2.0], horizon=1.0)
        expected = theta_bar * 2.0 - 0.5 * theta_bar ** 2
        assert log_lr_statistic(ConstantBias(theta_bar), trajectory) == pytest.approx(expected, abs=1e-12)

    def test_left_endpoint_sum(self):
        trajectory = Trajectory.from_values([0.0, 1.0, 3.0], horizon=1.0)
        # theta(0) * 1 + theta(0.5) * 2 for theta = 2t, energy 4/3
        assert log_lr_statistic(Ramp(2.0), trajectory) == pytest.approx(2.0 - 2.0 / 3.0)

    def test_horizon_mismatch(self, long_config):
        reference = PiecewiseConstant(grid_values=(1.0, 2.0), horizon=4.0)
        trajectory = Trajectory.from_values([0.0, 0.5, 1.0], horizon=1.0)
        with pytest.raises(DimensionError):
            log_lr_statistic(reference, trajectory)

    def test_detector_horizon_mismatch(self, config):
        detector = lr_detector(Pulse(10.0, 0.0, 0.31449), config)
        with pytest.raises(DimensionError):
            detector.statistics(np.linspace(0.0, 2.0, 5), np.zeros(5))


class TestNpLogThreshold:
    def test_constant_reference(self, config):
        attack = constant_bias_attack(config)
        level = attack.level
        expected = level * 1.6448536269514722 - 0.5 * level ** 2
        assert np_log_threshold(attack, config) == pytest.approx(expected, abs=1e-12)
        assert np_log_threshold(attack, config) == pytest.approx(0.2278, abs=1e-3)

    def test_pulse_reference(self, config):
        value = np_log_threshold(Pulse(10.0, 0.0, 0.31449), config)
        assert value == pytest.approx(math.sqrt(31.449) * 1.6448536269514722 - 31.449 / 2, abs=1e-12)
        assert value == pytest.approx(-6.5001, abs=1e-3)

    def test_stricter_alpha(self, config):
        reference = Ramp(6.0)
        assert np_log_threshold(reference, config, alpha=0.01) > np_log_threshold(reference, config)

    def test_zero_energy(self, config):
        with pytest.raises(DegenerateReferenceError):
            np_log_threshold(ZeroSignal(), config)
        with pytest.raises(DegenerateReferenceError):
            lr_detector(ZeroSignal(), config)


class TestTerminalDetector:
    def test_cutoffs(self, config, long_config):
        assert terminal_detector(config).cutoff == pytest.approx(1.6448536269514722, abs=1e-13)
        assert terminal_detector(long_config).cutoff == pytest.approx(3.2897072539029444, abs=1e-12)

    def test_cutoff_vanishes_as_budget_approaches_half(self):
        cfg = GameConfig(horizon=1.0, unsafe_slope=1.5, success_floor=0.95, false_alarm_budget=0.5 - 1e-12)
        assert 0.0 < terminal_detector(cfg).cutoff < 1e-10

    def test_strict_rejection(self):
        detector = TerminalThreshold(cutoff=1.0)
        assert detector.decide(Trajectory.from_values([0.0, 1.0], horizon=1.0)) == 0
        assert detector.decide(Trajectory.from_values([0.0, 1.0 + 1e-12], horizon=1.0)) == 1


class TestDecisions:
    def test_zero_path_accepted(self, config):
        flat = Trajectory.from_values(np.zeros(11), horizon=1.0)
        for reference in (constant_bias_attack(config), Pulse(10.0, 0.0, 0.31449), Ramp(6.0)):
            assert lr_detector(reference, config).decide(flat) == 0

    def test_constant_reference_matches_terminal_test(self, config, long_config):
        for cfg in (config, long_config):
            lr = lr_detector(constant_bias_attack(cfg), cfg)
            terminal = terminal_detector(cfg)
            times = np.linspace(0.0, cfg.horizon, 101)
            for index, drift in enumerate((ZeroSignal(), constant_bias_attack(cfg))):
                values = simulate_paths(drift, cfg, 100, RandomStream(31, index), 5000)
                np.testing.assert_array_equal(lr.reject_paths(times, values), terminal.reject_paths(times, values))

    def test_statistic_law_matches_simulation(self, config):
        detector = lr_detector(Pulse(6.0, 0.25, 0.5), config)
        attack = Ramp(6.0)
        mean, spread = detector.statistic_law(attack, config.horizon)
        times = np.linspace(0.0, 1.0, 401)
        values = simulate_paths(attack, config, 400, RandomStream(8), 20_000)
        observed = detector.statistics(times, values)
        assert isinstance(detector, LikelihoodRatio)
        assert abs(observed.mean() - mean) <= 4.0 * spread / math.sqrt(observed.size) + 0.05
        assert observed.std() == pytest.approx(spread, rel=0.03)


class TestTies:
    def detectors(self, config):
        return [
            terminal_detector(config),
            lr_detector(constant_bias_attack(config), config),
            lr_detector(Pulse(6.0, 0.25, 0.5), config),
            lr_detector(Ramp(6.0), config),
        ]

    def test_exact_draws_never_hit_threshold(self, config):
        for index, detector in enumerate(self.detectors(config)):
            for attack in (ZeroSignal(), constant_bias_attack(config)):
                mean, spread = detector.statistic_law(attack, config.horizon)
                draws = mean + spread * RandomStream(11, index).generator().standard_normal(200_000)
                assert np.count_nonzero(draws == detector.threshold) == 0

    def test_simulated_paths_never_hit_threshold(self, config):
        times = np.linspace(0.0, config.horizon, 201)
        for index, detector in enumerate(self.detectors(config)):
            for drift in (ZeroSignal(), constant_bias_attack(config)):
                values = simulate_paths(drift, config, 200, RandomStream(12, index), 5000)
                statistics = detector.statistics(times, values)
                assert np.count_nonzero(statistics == detector.threshold) == 0
