from dataclasses import dataclass

from fdi_game.core.models import GameConfig, InformationQuantities, MonteCarloEstimate


@dataclass(frozen=True)
class ValueReport:
    config: GameConfig
    theta_bar: float
    detector_cutoff: float
    log_lambda_star: float
    game_value: float
    baseline_unsafe_probability: float
    information: InformationQuantities
    symmetric: bool
    symmetric_value: float | None = None


@dataclass(frozen=True)
class AttackerDeviation:
    """beta(theta, phi*) <= beta(theta*, phi*) for an admissible theta."""
    description: str
    mass: float
    energy: float
    beta: MonteCarloEstimate
    margin: float
    passed: bool
    best_response_beta: float
    dominance_gap: float


@dataclass(frozen=True)
class DetectorDeviation:
    """beta(theta*, phi) >= beta(theta*, phi*) for an admissible phi."""
    description: str
    alpha: MonteCarloEstimate
    beta: MonteCarloEstimate
    margin: float
    passed: bool


@dataclass(frozen=True)
class SkippedDeviation:
    description: str
    reason: str


@dataclass(frozen=True)
class SaddleReport:
    config: GameConfig
    value_closed_form: float
    beta_star_mc: MonteCarloEstimate
    value_margin: float
    value_consistent: bool
    attacker_deviations: tuple[AttackerDeviation, ...] = ()
    detector_deviations: tuple[DetectorDeviation, ...] = ()
    skipped: tuple[SkippedDeviation, ...] = ()

    @property
    def passed(self) -> bool:
        return (
            self.value_consistent
            and all(d.passed for d in self.attacker_deviations)
            and all(d.passed for d in self.detector_deviations)
        )


@dataclass(frozen=True)
class ExponentPoint:
    horizon: float
    theta_bar: float
    neg_log_beta: float
    relative_entropy_rate: float
    variance_rate: float
    first_order_term: float
    second_order_term: float
    hoeffding_bound: float
    residual: float
    first_order_ratio: float

    @property
    def bound_gap(self) -> float:
        """-log beta minus the first- and second-order terms (same as residual)."""
        return self.residual

    @property
    def hoeffding_holds(self) -> bool:
        return self.hoeffding_bound < self.neg_log_beta


@dataclass(frozen=True)
class ExponentCurve:
    points: tuple[ExponentPoint, ...]

    @property
    def horizons(self) -> tuple[float, ...]:
        return tuple(p.horizon for p in self.points)

    @property
    def neg_log_beta(self) -> tuple[float, ...]:
        return tuple(p.neg_log_beta for p in self.points)

    @property
    def bound_gap(self) -> tuple[float, ...]:
        return tuple(p.bound_gap for p in self.points)

    @property
    def first_order_rate(self) -> float:
        """D-bar at the longest horizon."""
        return self.points[-1].relative_entropy_rate

    @property
    def second_order_coeff(self) -> float:
        """sqrt(V-bar) * Phi^-1(epsilon) at the longest horizon."""
        last = self.points[-1]
        return last.second_order_term / last.horizon ** 0.5


@dataclass(frozen=True)
class FeedbackReport:
    config: GameConfig
    policy: str
    steps: int
    gamma: MonteCarloEstimate
    beta: MonteCarloEstimate
    alpha: MonteCarloEstimate
    game_value: float

    @property
    def saddle_broken(self) -> bool:
        return self.beta.estimate - 4.0 * self.beta.stderr > self.game_value


@dataclass(frozen=True)
class SamplePath:
    path_id: int
    times: tuple[float, ...]
    values: tuple[float, ...]


@dataclass(frozen=True)
class PathBundle:
    config: GameConfig
    drift: str
    steps: int
    seed: int
    paths: tuple[SamplePath, ...]
