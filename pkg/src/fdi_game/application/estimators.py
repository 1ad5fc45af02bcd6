"""
Monte Carlo estimators of alpha, beta and gamma.

Trials are split into fixed-size blocks and block b draws from
RandomStream(seed, b). Blocks are independent of the worker count and their
hit counts are summed, so every estimate is identical for any number of
workers.
"""
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from fdi_game.core.detectors import np_log_threshold
from fdi_game.core.errors import PreconditionError
from fdi_game.core.models import GameConfig, MonteCarloEstimate, RandomStream, WeightedEstimate
from fdi_game.core.ports import AttackSignal, Detector, FeedbackPolicy, PathSimulator
from fdi_game.core.signals import ZeroSignal, attack_energy
from fdi_game.infrastructure.sde_simulator import EulerMaruyamaSimulator

logger = logging.getLogger(__name__)

TERMINAL_BLOCK = 1 << 16
PATH_BLOCK = 512
DEFAULT_STEPS = 1000


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        mw_env = os.getenv("MAX_WORKERS")
        workers = int(mw_env) if mw_env else 1
    if workers < 1:
        raise PreconditionError(f"workers must be at least 1, got {workers}")
    return workers


class MonteCarloEstimator:
    def __init__(self, simulator: PathSimulator | None = None, workers: int | None = None):
        self.simulator = simulator or EulerMaruyamaSimulator()
        self.workers = resolve_workers(workers)

    def estimate_alpha(
        self,
        detector: Detector,
        config: GameConfig,
        trials: int,
        seed: int,
        steps: int | None = None,
    ) -> MonteCarloEstimate:
        """False-alarm rate under H0. Exact statistic sampling unless `steps` asks for paths."""
        hits = self._rejections(detector, ZeroSignal(), config, trials, seed, steps)
        return MonteCarloEstimate.from_counts(hits, trials, seed)

    def estimate_beta(
        self,
        detector: Detector,
        attack: AttackSignal | FeedbackPolicy,
        config: GameConfig,
        trials: int,
        seed: int,
        steps: int | None = None,
    ) -> MonteCarloEstimate:
        """
        Detection-failure rate: fraction of attacked trials accepted as H0.
        Open-loop attacks use exact statistic draws unless `steps` is given;
        feedback policies are always path-simulated.
        """
        hits = self._rejections(detector, attack, config, trials, seed, steps)
        return MonteCarloEstimate.from_counts(trials - hits, trials, seed)

    def _rejections(
        self,
        detector: Detector,
        attack: AttackSignal | FeedbackPolicy,
        config: GameConfig,
        trials: int,
        seed: int,
        steps: int | None,
    ) -> int:
        _check_trials(trials)
        if isinstance(attack, AttackSignal) and steps is None:
            mean, spread = detector.statistic_law(attack, config.horizon)

            def count_block(stream: RandomStream, size: int) -> int:
                draws = mean + spread * stream.generator().standard_normal(size)
                return int(np.count_nonzero(detector.rejects(draws)))

            hits = self._count(trials, seed, TERMINAL_BLOCK, count_block)
        else:
            steps = DEFAULT_STEPS if steps is None else steps
            times = np.linspace(0.0, config.horizon, steps + 1)

            def count_block(stream: RandomStream, size: int) -> int:
                values = self.simulator.simulate(attack, config, steps, stream, size)
                return int(np.count_nonzero(detector.reject_paths(times, values)))

            hits = self._count(trials, seed, PATH_BLOCK, count_block)

        logger.info(f"{detector.describe()} vs {attack.describe()}: {hits}/{trials} rejected")
        return hits

    def estimate_gamma(
        self,
        attack: AttackSignal | FeedbackPolicy,
        config: GameConfig,
        trials: int,
        seed: int,
        steps: int | None = None,
    ) -> MonteCarloEstimate:
        """Fraction of trials with x(T) strictly above T d."""
        _check_trials(trials)
        level = config.unsafe_level
        if isinstance(attack, AttackSignal) and steps is None:
            def count_block(stream: RandomStream, size: int) -> int:
                terminal = self.simulator.sample_terminal(attack, config, stream, size)
                return int(np.count_nonzero(terminal > level))

            hits = self._count(trials, seed, TERMINAL_BLOCK, count_block)
        else:
            steps = DEFAULT_STEPS if steps is None else steps

            def count_block(stream: RandomStream, size: int) -> int:
                values = self.simulator.simulate(attack, config, steps, stream, size)
                return int(np.count_nonzero(values[:, -1] > level))

            hits = self._count(trials, seed, PATH_BLOCK, count_block)

        logger.info(f"success rate of {attack.describe()}: {hits}/{trials} unsafe")
        return MonteCarloEstimate.from_counts(hits, trials, seed)

    def estimate_beta_change_of_measure(
        self, signal: AttackSignal, config: GameConfig, trials: int, seed: int
    ) -> WeightedEstimate:
        """
        Best-response beta through the likelihood ratio under H0:
        beta = 1 - lambda* eps - E_H0[z - lambda*]^+, with int theta dx ~ N(0, energy).
        """
        _check_trials(trials)
        energy = attack_energy(signal, config)
        log_threshold = np_log_threshold(signal, config)
        threshold = math.exp(log_threshold)
        spread = math.sqrt(energy)

        def sum_block(stream: RandomStream, size: int) -> tuple[float, float]:
            log_z = spread * stream.generator().standard_normal(size) - 0.5 * energy
            excess = np.maximum(np.exp(log_z) - threshold, 0.0)
            return float(excess.sum()), float(np.square(excess).sum())

        totals = self._map_blocks(trials, seed, TERMINAL_BLOCK, sum_block)
        total = sum(t[0] for t in totals)
        total_sq = sum(t[1] for t in totals)
        mean = total / trials
        variance = max(total_sq / trials - mean * mean, 0.0)
        return WeightedEstimate(
            estimate=1.0 - threshold * config.false_alarm_budget - mean,
            stderr=math.sqrt(variance / trials),
            trials=trials,
            seed=seed,
        )

    def _count(self, trials: int, seed: int, block_size: int, count_block: Callable[[RandomStream, int], int]) -> int:
        return sum(self._map_blocks(trials, seed, block_size, count_block))

    def _map_blocks(self, trials: int, seed: int, block_size: int, work: Callable[[RandomStream, int], object]) -> list:
        blocks = [
            (RandomStream(seed, index), min(block_size, trials - start))
            for index, start in enumerate(range(0, trials, block_size))
        ]
        logger.debug(f"Running {len(blocks)} blocks on {self.workers} worker(s)")
        if self.workers == 1:
            return [work(stream, size) for stream, size in blocks]
        with ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="mc_worker") as executor:
            return list(executor.map(lambda block: work(*block), blocks))


def _check_trials(trials: int) -> None:
    if trials < 1:
        raise PreconditionError(f"trials must be at least 1, got {trials}")


def estimate_alpha(detector: Detector, config: GameConfig, trials: int, seed: int) -> MonteCarloEstimate:
    return MonteCarloEstimator().estimate_alpha(detector, config, trials, seed)


def estimate_beta(
    detector: Detector,
    attack: AttackSignal | FeedbackPolicy,
    config: GameConfig,
    trials: int,
    steps: int | None,
    seed: int,
) -> MonteCarloEstimate:
    return MonteCarloEstimator().estimate_beta(detector, attack, config, trials, seed, steps)


def estimate_gamma(
    attack: AttackSignal | FeedbackPolicy, config: GameConfig, trials: int, steps: int | None, seed: int
) -> MonteCarloEstimate:
    return MonteCarloEstimator().estimate_gamma(attack, config, trials, seed, steps)
