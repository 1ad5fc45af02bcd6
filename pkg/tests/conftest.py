import pytest

from fdi_game.core.models import GameConfig


@pytest.fixture
def config() -> GameConfig:
    """T=1, d=1.5, c=0.95, eps=0.05: the symmetric case c = 1 - eps."""
    return GameConfig(horizon=1.0, unsafe_slope=1.5, success_floor=0.95, false_alarm_budget=0.05)


@pytest.fixture
def long_config() -> GameConfig:
    return GameConfig(horizon=4.0, unsafe_slope=1.5, success_floor=0.95, false_alarm_budget=0.05)


@pytest.fixture
def asymmetric_config() -> GameConfig:
    return GameConfig(horizon=2.0, unsafe_slope=0.8, success_floor=0.9, false_alarm_budget=0.02)
