import itertools
import math

import numpy as np
import pytest

from fdi_game.application.deviations import canonical_attacker_deviations, match_mass
from fdi_game.core.detectors import np_log_threshold
from fdi_game.core.errors import ConfigError, DegenerateReferenceError, UnsupportedPolicyError
from fdi_game.core.game import (
    baseline_unsafe_probability,
    best_response_beta,
    change_of_measure_beta,
    exponent_curve,
    game_value,
    information_quantities,
    is_admissible_attack,
    likelihood_excess,
    success_rate,
    terminal_test_beta,
)
from fdi_game.core.models import GameConfig
from fdi_game.core.normal import phi_cdf, phi_inv
from fdi_game.core.signals import ConstantBias, Pulse, ZeroSignal, attack_energy, bridge_attack, constant_bias_attack

PHI_MINUS_1_5 = 0.0668072012688581


def config_grid() -> list[GameConfig]:
    horizons = (0.5, 1.0, 4.0, 10.0, 25.0)
    settings = ((1.5, 0.95, 0.05), (0.4, 0.8, 0.1), (2.0, 0.99, 0.01), (0.1, 0.6, 0.3))
    return [
        GameConfig(horizon=t, unsafe_slope=d, success_floor=c, false_alarm_budget=eps)
        for t, (d, c, eps) in itertools.product(horizons, settings)
    ]


class TestGameConfig:
    def test_rejects_low_success_floor(self):
        with pytest.raises(ConfigError, match="success_floor must exceed 0.5"):
            GameConfig(horizon=1.0, unsafe_slope=1.5, success_floor=0.4, false_alarm_budget=0.05)

    @pytest.mark.parametrize(
        "fields",
        [
            dict(horizon=0.0, unsafe_slope=1.5, success_floor=0.95, false_alarm_budget=0.05),
            dict(horizon=1.0, unsafe_slope=-1.0, success_floor=0.95, false_alarm_budget=0.05),
            dict(horizon=1.0, unsafe_slope=1.5, success_floor=1.0, false_alarm_budget=0.05),
            dict(horizon=1.0, unsafe_slope=1.5, success_floor=0.95, false_alarm_budget=0.5),
            dict(horizon=math.nan, unsafe_slope=1.5, success_floor=0.95, false_alarm_budget=0.05),
        ],
    )
    def test_rejects_invalid_fields(self, fields):
        with pytest.raises(ConfigError):
            GameConfig(**fields)

    def test_symmetric_flag(self, config, asymmetric_config):
        assert config.is_symmetric
        assert not asymmetric_config.is_symmetric


class TestSuccessRate:
    def test_zero_attack(self, config):
        assert success_rate(ZeroSignal(), config) == pytest.approx(PHI_MINUS_1_5, abs=1e-15)
        assert baseline_unsafe_probability(config) == pytest.approx(PHI_MINUS_1_5, abs=1e-15)

    def test_constraint_active_at_saddle(self, config, asymmetric_config):
        for cfg in (config, asymmetric_config):
            assert success_rate(constant_bias_attack(cfg), cfg) == pytest.approx(cfg.success_floor, abs=1e-12)

    def test_doubled_attack(self, config):
        assert success_rate(ConstantBias(2 * config.theta_bar), config) == pytest.approx(0.9999992, abs=1e-7)

    def test_feedback_has_no_closed_form(self, config):
        with pytest.raises(UnsupportedPolicyError):
            success_rate(bridge_attack(1.57, config), config)


class TestAdmissibility:
    def test_boundary_and_violations(self, config):
        assert is_admissible_attack(constant_bias_attack(config), config)
        assert not is_admissible_attack(ZeroSignal(), config)
        width = 0.5
        height = (config.mass_floor + 0.1) / width
        assert is_admissible_attack(Pulse(height=height, start=0.1, width=width), config)

    def test_match_mass_lands_on_floor(self, config, long_config):
        for cfg in (config, long_config):
            pulse = match_mass(lambda h: Pulse(height=h, start=0.0, width=0.1 * cfg.horizon), cfg)
            assert is_admissible_attack(pulse, cfg)
            assert pulse.mass(cfg.horizon) == pytest.approx(cfg.mass_floor, rel=1e-14)


class TestGameValue:
    def test_paper_parameters(self, config, long_config):
        assert game_value(config) == pytest.approx(PHI_MINUS_1_5, abs=1e-15)
        assert game_value(long_config) == pytest.approx(0.0013498980316301, abs=1e-15)

    def test_symmetric_value_is_baseline(self):
        for cfg in config_grid():
            symmetric = GameConfig(cfg.horizon, cfg.unsafe_slope, 1.0 - cfg.false_alarm_budget, cfg.false_alarm_budget)
            assert game_value(symmetric) == pytest.approx(phi_cdf(-symmetric.sqrt_horizon * symmetric.unsafe_slope), abs=1e-12)

    def test_value_tends_to_half(self):
        cfg = GameConfig(horizon=1.0, unsafe_slope=1e-9, success_floor=0.95, false_alarm_budget=0.05)
        assert game_value(cfg) == pytest.approx(0.5, abs=1e-8)


class TestBestResponse:
    def test_saddle_consistency(self):
        for cfg in config_grid():
            assert abs(best_response_beta(constant_bias_attack(cfg), cfg) - game_value(cfg)) <= 1e-12

    def test_pulse_is_easier_to_detect(self, config):
        beta = best_response_beta(Pulse(10.0, 0.0, 0.31449), config)
        assert beta == pytest.approx(3.70e-5, rel=0.01)
        assert beta < game_value(config)

    def test_energy_at_quantile_gives_half(self, config):
        assert best_response_beta(ConstantBias(phi_inv(0.95)), config) == pytest.approx(0.5, abs=1e-15)

    def test_strict_dominance_of_canonical_deviations(self, config, long_config, asymmetric_config):
        for cfg in (config, long_config, asymmetric_config):
            value = game_value(cfg)
            for signal in canonical_attacker_deviations(cfg):
                assert value - best_response_beta(signal, cfg) > 1e-6

    def test_terminal_test_depends_on_mass_only(self, config):
        for signal in canonical_attacker_deviations(config):
            assert terminal_test_beta(signal, config) == pytest.approx(game_value(config), abs=1e-12)
        heavier = ConstantBias(config.theta_bar + 0.5)
        assert terminal_test_beta(heavier, config) < game_value(config)

    def test_zero_energy(self, config):
        with pytest.raises(DegenerateReferenceError):
            best_response_beta(ZeroSignal(), config)


class TestChangeOfMeasure:
    def test_identity_with_best_response(self, config, long_config, asymmetric_config):
        for cfg in (config, long_config, asymmetric_config):
            for signal in [constant_bias_attack(cfg), *canonical_attacker_deviations(cfg)]:
                assert change_of_measure_beta(signal, cfg) == pytest.approx(best_response_beta(signal, cfg), abs=1e-10)

    def test_constant_attack_minimises_excess(self, config, asymmetric_config):
        for cfg in (config, asymmetric_config):
            theta_star = constant_bias_attack(cfg)
            log_threshold = np_log_threshold(theta_star, cfg)
            saddle_excess = likelihood_excess(attack_energy(theta_star, cfg), log_threshold)
            for signal in canonical_attacker_deviations(cfg):
                assert likelihood_excess(attack_energy(signal, cfg), log_threshold) > saddle_excess

    def test_excess_is_call_price(self):
        # E[exp(sZ - s^2/2) - 1]^+ = 2 Phi(s/2) - 1
        for energy in (0.25, 1.0, 9.0):
            expected = 2.0 * phi_cdf(0.5 * math.sqrt(energy)) - 1.0
            assert likelihood_excess(energy, 0.0) == pytest.approx(expected, abs=1e-14)


class TestInformationQuantities:
    def test_rates(self, config, long_config):
        for cfg in (config, long_config):
            info = information_quantities(cfg)
            assert info.relative_entropy == pytest.approx(0.5 * cfg.horizon * cfg.theta_bar ** 2)
            assert info.relative_entropy_rate == pytest.approx(0.5 * cfg.theta_bar ** 2)
            assert info.variance_rate == pytest.approx(cfg.theta_bar ** 2)


class TestExponentCurve:
    def test_hoeffding_bound_on_grid(self, config):
        curve = exponent_curve(config, range(1, 101))
        assert len(curve.points) == 100
        for point in curve.points:
            assert point.hoeffding_bound <= point.neg_log_beta

    def test_symmetric_unit_horizon(self, config):
        (point,) = exponent_curve(config, [1.0]).points
        assert point.neg_log_beta == pytest.approx(-math.log(PHI_MINUS_1_5), rel=1e-13)
        assert point.neg_log_beta == pytest.approx(2.70595, abs=1e-4)

    def test_first_order_ratio_approaches_one(self, config):
        curve = exponent_curve(config, range(1, 101))
        ratios = np.array([p.first_order_ratio for p in curve.points])
        assert np.all(np.diff(ratios) > 0)
        assert 0.80 <= ratios[-1] <= 1.0
        assert ratios[-1] == pytest.approx(0.8384, abs=2e-3)

    def test_residual_grows_slower_than_sqrt_horizon(self, config):
        curve = exponent_curve(config, [1.0, 100.0])
        first, last = curve.points
        assert last.residual / math.sqrt(last.horizon) < first.residual / math.sqrt(first.horizon)

    def test_deep_tail_is_finite(self, config):
        curve = exponent_curve(config, [1000.0])
        assert math.isfinite(curve.points[0].neg_log_beta)
        assert curve.points[0].neg_log_beta > 1000.0

    def test_sorts_grid(self, config):
        curve = exponent_curve(config, [5.0, 1.0, 2.0])
        assert curve.horizons == (1.0, 2.0, 5.0)

    def test_hoeffding_bound_clamped_for_negative_deviation(self):
        cfg = GameConfig(horizon=0.01, unsafe_slope=1.5, success_floor=0.6, false_alarm_budget=0.01)
        short, long = exponent_curve(cfg, [0.01, 100.0]).points
        assert math.sqrt(0.01) * short.theta_bar + phi_inv(0.01) < 0
        assert short.hoeffding_bound == 0.0
        assert short.hoeffding_holds
        deviation = 10.0 * long.theta_bar + phi_inv(0.01)
        assert long.hoeffding_bound == pytest.approx(0.5 * deviation ** 2, rel=1e-14)

    def test_rates_at_longest_horizon(self, config):
        curve = exponent_curve(config, [1.0, 100.0])
        theta_bar = curve.points[-1].theta_bar
        assert curve.first_order_rate == pytest.approx(0.5 * theta_bar ** 2)
        assert curve.second_order_coeff == pytest.approx(theta_bar * phi_inv(0.05))
        assert curve.bound_gap == tuple(p.residual for p in curve.points)

    @pytest.mark.parametrize("grid", [[], [1.0, 0.0], [-2.0]])
    def test_invalid_grid(self, config, grid):
        with pytest.raises(ConfigError):
            exponent_curve(config, grid)
