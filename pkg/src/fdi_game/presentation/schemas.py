from enum import Enum
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator

from fdi_game.core.detectors import TerminalThreshold, lr_detector, terminal_detector
from fdi_game.core.models import GameConfig
from fdi_game.core.ports import AttackSignal, Detector, FeedbackPolicy
from fdi_game.core.signals import (
    ConstantBias,
    PiecewiseConstant,
    Pulse,
    Ramp,
    ZeroSignal,
    bridge_attack,
    constant_bias_attack,
)

DEFAULT_SEED = 42


class OutputFormat(str, Enum):
    csv = "csv"
    json = "json"


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GameSection(StrictModel):
    horizon: float = Field(default=1.0, description="Time horizon T")
    unsafe_slope: float = Field(default=1.5, description="d; x(T) > T d is unsafe")
    success_floor: float = Field(default=0.95, description="c; required attack success rate")
    false_alarm_budget: float = Field(default=0.05, description="epsilon; detector false-alarm budget")

    def to_domain(self) -> GameConfig:
        return GameConfig(
            horizon=self.horizon,
            unsafe_slope=self.unsafe_slope,
            success_floor=self.success_floor,
            false_alarm_budget=self.false_alarm_budget,
        )


class ZeroSpec(StrictModel):
    kind: Literal["zero"] = "zero"

    def to_signal(self, config: GameConfig) -> AttackSignal:
        return ZeroSignal()


class ConstantSpec(StrictModel):
    kind: Literal["constant"] = "constant"
    level: Optional[float] = Field(default=None, description="Omitted: the saddle level theta-bar")

    def to_signal(self, config: GameConfig) -> AttackSignal:
        if self.level is None:
            return constant_bias_attack(config)
        return ConstantBias(level=self.level)


class PulseSpec(StrictModel):
    kind: Literal["pulse"] = "pulse"
    height: float
    start: float = 0.0
    width: float

    def to_signal(self, config: GameConfig) -> AttackSignal:
        return Pulse(height=self.height, start=self.start, width=self.width)


class RampSpec(StrictModel):
    kind: Literal["ramp"] = "ramp"
    slope: float

    def to_signal(self, config: GameConfig) -> AttackSignal:
        return Ramp(slope=self.slope)


class PiecewiseSpec(StrictModel):
    kind: Literal["piecewise"] = "piecewise"
    values: list[float] = Field(min_length=1)

    def to_signal(self, config: GameConfig) -> AttackSignal:
        return PiecewiseConstant(grid_values=tuple(self.values), horizon=config.horizon)


SignalSpec = Annotated[
    Union[ZeroSpec, ConstantSpec, PulseSpec, RampSpec, PiecewiseSpec],
    Field(discriminator="kind"),
]


class BridgeSpec(StrictModel):
    kind: Literal["bridge"] = "bridge"
    target: float = 1.57

    def to_signal(self, config: GameConfig) -> FeedbackPolicy:
        return bridge_attack(self.target, config)


DriftSpec = Annotated[Union[ZeroSpec, ConstantSpec, BridgeSpec], Field(discriminator="kind")]


class TerminalSpec(StrictModel):
    kind: Literal["terminal"] = "terminal"
    alpha: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    cutoff: Optional[float] = None

    def to_detector(self, config: GameConfig) -> Detector:
        if self.cutoff is not None:
            return TerminalThreshold(cutoff=self.cutoff)
        return terminal_detector(config, alpha=self.alpha)


class LikelihoodRatioSpec(StrictModel):
    kind: Literal["likelihood_ratio"] = "likelihood_ratio"
    reference: SignalSpec
    alpha: Optional[float] = Field(default=None, gt=0.0, lt=1.0)

    def to_detector(self, config: GameConfig) -> Detector:
        return lr_detector(self.reference.to_signal(config), config, alpha=self.alpha)


DetectorSpec = Annotated[Union[TerminalSpec, LikelihoodRatioSpec], Field(discriminator="kind")]


class SaddleSection(StrictModel):
    trials: PositiveInt = 1_000_000
    canonical_deviations: bool = True
    attacker_deviations: list[SignalSpec] = Field(default_factory=list)
    detector_deviations: list[DetectorSpec] = Field(default_factory=list)


class PathsSection(StrictModel):
    drift: DriftSpec = Field(default_factory=lambda: ConstantSpec(level=2.0))
    count: PositiveInt = 10
    steps: PositiveInt = 1000


class ExponentsSection(StrictModel):
    horizons: list[float] = Field(default_factory=lambda: [float(t) for t in range(1, 101)])

    @field_validator("horizons")
    @classmethod
    def _positive_grid(cls, horizons: list[float]) -> list[float]:
        if not horizons:
            raise ValueError("horizon grid must not be empty")
        bad = [h for h in horizons if not h > 0]
        if bad:
            raise ValueError(f"horizons must be positive, got {bad}")
        return sorted(horizons)


class FeedbackSection(StrictModel):
    target: float = 1.57
    trials: PositiveInt = 100_000
    steps: PositiveInt = 10_000


class OutputSection(StrictModel):
    path: Optional[Path] = None
    format: OutputFormat = OutputFormat.csv


class ExperimentConfig(StrictModel):
    game: GameSection = Field(default_factory=GameSection)
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    workers: Optional[PositiveInt] = None
    saddle: SaddleSection = Field(default_factory=SaddleSection)
    paths: PathsSection = Field(default_factory=PathsSection)
    exponents: ExponentsSection = Field(default_factory=ExponentsSection)
    feedback: FeedbackSection = Field(default_factory=FeedbackSection)
    output: OutputSection = Field(default_factory=OutputSection)
