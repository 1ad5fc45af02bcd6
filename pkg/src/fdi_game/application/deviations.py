"""Canonical deviation library for the saddle-point check."""
import math
from typing import Callable

import numpy as np

from fdi_game.core.detectors import lr_detector, terminal_detector
from fdi_game.core.models import GameConfig
from fdi_game.core.ports import AttackSignal, Detector
from fdi_game.core.signals import PiecewiseConstant, Pulse, Ramp


def match_mass(factory: Callable[[float], AttackSignal], config: GameConfig) -> AttackSignal:
    """
    Scale a family whose mass is linear in its parameter so that the mass sits
    on the success-rate floor (rounded up by ulps until admissible).
    """
    floor = config.mass_floor
    scale = floor / factory(1.0).mass(config.horizon)
    signal = factory(scale)
    while signal.mass(config.horizon) < floor:
        scale = float(np.nextafter(scale, math.inf))
        signal = factory(scale)
    return signal


def canonical_attacker_deviations(config: GameConfig) -> list[AttackSignal]:
    horizon = config.horizon
    return [
        match_mass(lambda h: Pulse(height=h, start=0.25 * horizon, width=0.5 * horizon), config),
        match_mass(lambda h: Pulse(height=h, start=0.0, width=0.1 * horizon), config),
        match_mass(lambda s: Ramp(slope=s), config),
        match_mass(lambda s: PiecewiseConstant(grid_values=(0.5 * s, 1.5 * s), horizon=horizon), config),
    ]


def canonical_detector_deviations(config: GameConfig) -> list[Detector]:
    budget = config.false_alarm_budget
    strict = 0.01 if budget > 0.01 else budget / 5.0
    references = canonical_attacker_deviations(config)
    return [
        terminal_detector(config, alpha=strict),
        terminal_detector(config, alpha=budget / 2.0),
        *(lr_detector(reference, config) for reference in references[:3]),
    ]
