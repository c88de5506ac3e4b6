"""
The calibration loop: solve at the current flow rates, grow the dataset,
retrain the surrogate, search the surrogate for flow rates that reproduce the
measurements, and hand the winner back to the solver.

A run of k iterations calls the solver exactly 3 + k times. The validation
error of iteration i is the error of the solve at the flow rates iteration
i - 1 proposed, so no solve is spent on validation alone.
"""
import logging
import time

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from hallcal.errors import SolverError, check_length
from hallcal.hall.layout import OperatingState, SensorVector, SystemInput
from hallcal.search.bounds import Bounds, SearchResult
from hallcal.search.hybrid import SmoothObjective, adam_search, hybrid_search, matched_adam
from hallcal.solvers.base import Solver
from hallcal.surrogate.base import Surrogate, TrainingSample

from .config import CalibConfig, EarlyStop, FeatureNoise, component_seed

logger = logging.getLogger(__name__)


class CalibrationAbortedError(SolverError):
    """The solver failed mid-run; `result` holds everything up to the failure."""

    def __init__(self, message: str, result: 'CalibrationResult'):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class IterationTrace:
    iteration: int
    validation_mae: float
    best_mae: float
    mean_l2: float
    mean_gradient: float
    train_l1: float
    solver_calls: int
    dataset_size: int
    wall_time: float
    improved: bool


@dataclass
class CalibrationResult:
    flow_rates: np.ndarray
    best_mae: float
    measured: SensorVector
    method: str = 'knowledge'
    traces: List[IterationTrace] = field(default_factory=list)
    initial_prediction: Optional[SensorVector] = None
    calibrated_prediction: Optional[SensorVector] = None
    solver_calls: int = 0
    stopped_early: bool = False

    @property
    def iterations(self) -> int:
        return len(self.traces)

    @property
    def best_mae_trace(self) -> List[float]:
        return [t.best_mae for t in self.traces]

    @property
    def dataset_sizes(self) -> List[int]:
        return [t.dataset_size for t in self.traces]


def mae(predicted, measured) -> float:
    predicted = np.asarray(predicted, dtype=float)
    measured = np.asarray(measured, dtype=float)
    check_length('predicted sensors', predicted, len(measured))

    return float(np.mean(np.abs(predicted - measured)))


def init_samples(solver: Solver, bounds: Bounds, state: OperatingState) -> List[TrainingSample]:
    """Solves at the lower bound, the upper bound and the midpoint."""
    samples = []

    for value in (bounds.lower, bounds.upper, bounds.midpoint):
        x = state.with_flow_rates(np.full(len(state.powers), value))
        samples.append(TrainingSample(x, solver.solve(x)))

    return samples


def augment(samples: Sequence[TrainingSample], batch: int, noise: FeatureNoise, seed: int,
            bounds: Bounds = Bounds(), rated_powers=None) -> List[TrainingSample]:
    """
    Replaces every sample by `batch` noisy copies. Noisy inputs stay
    physical: fan speeds in [0, 1], powers non negative, flow rates in bounds.
    """
    if batch < 1:
        raise ValueError('The augment batch must be at least 1, got {}.'.format(batch))

    rng = np.random.default_rng(seed)
    low, high = noise.setpoint_range
    augmented = []

    for s in samples:
        x = s.input
        power_scale = x.powers if rated_powers is None else np.asarray(rated_powers, dtype=float)

        for _ in range(batch):
            noisy = SystemInput(
                x.setpoints + rng.normal(0.0, noise.input_fraction * (high - low), x.l),
                np.clip(x.fan_speeds + rng.normal(0.0, noise.input_fraction, x.l), 0.0, 1.0),
                np.maximum(x.powers + rng.normal(0.0, 1.0, x.m) * noise.input_fraction * power_scale, 0.0),
                bounds.clip(x.flow_rates * (1.0 + rng.normal(0.0, noise.input_fraction, x.m))),
            )
            target = s.target.values + rng.normal(0.0, noise.target_sd, len(s.target))
            augmented.append(TrainingSample(noisy, SensorVector(target, s.target.role, s.target.sensor_ids)))

    return augmented


def search_flow_rates(surrogate: Surrogate, measured: SensorVector, state: OperatingState,
                      cfg: CalibConfig, iteration: int, x0) -> SearchResult:
    """Minimizes L2 of the frozen surrogate over the flow rates."""
    objective = SmoothObjective(
        lambda alpha: surrogate.l2(state.with_flow_rates(alpha), measured.values),
        lambda alpha: surrogate.l2_and_grad(state.with_flow_rates(alpha), measured.values),
    )

    if cfg.search == 'adam':
        adam = matched_adam(cfg.de, cfg.adam) if cfg.match_budget else cfg.adam
        return adam_search(objective, cfg.bounds, adam, x0)

    return hybrid_search(objective, cfg.bounds, cfg.de_for(iteration), cfg.adam, x0)


def stalled(trace, stop: EarlyStop) -> bool:
    """True once each of the last `patience` iterations improved the best MAE by less than `min_delta`."""
    if stop.patience <= 0 or len(trace) <= stop.patience:
        return False

    steps = np.diff(np.asarray(trace[-stop.patience - 1:], dtype=float))

    return bool(np.all(-steps < stop.min_delta))


def calibrate(solver: Solver, surrogate: Surrogate, measured: SensorVector, state: OperatingState,
              cfg: CalibConfig = CalibConfig(), method: str = 'knowledge') -> CalibrationResult:
    measured.check(solver.layout)
    alpha = cfg.initial_guess(solver.layout.m)
    calls_before = solver.calls

    result = CalibrationResult(alpha.copy(), np.inf, measured, method)

    def abort(error: SolverError):
        result.solver_calls = solver.calls - calls_before
        raise CalibrationAbortedError('Calibration aborted after {} iterations: {}'.format(
            result.iterations, error), result) from error

    try:
        seeds = init_samples(solver, cfg.bounds, state)
    except SolverError as e:
        abort(e)

    if cfg.augment_batch > 0:
        dataset = augment(seeds, cfg.augment_batch, cfg.noise, component_seed(cfg.seed, 'augment'),
                          cfg.bounds, solver.layout.rated_powers)
    else:
        dataset = list(seeds)

    raw_samples = len(seeds)

    for iteration in range(1, cfg.max_iterations + 1):
        started = time.perf_counter()
        x = state.with_flow_rates(alpha)

        try:
            solved = solver.solve(x)
        except SolverError as e:
            abort(e)

        dataset.append(TrainingSample(x, solved))
        raw_samples += 1

        if iteration == 1:
            result.initial_prediction = solved

        error = mae(solved, measured)
        improved = error < result.best_mae

        if improved:
            result.flow_rates, result.best_mae, result.calibrated_prediction = alpha.copy(), error, solved

        losses = surrogate.fit(dataset)
        found = search_flow_rates(surrogate, measured, state, cfg, iteration, alpha)
        alpha = cfg.bounds.clip(found.x)

        result.solver_calls = solver.calls - calls_before
        result.traces.append(IterationTrace(
            iteration=iteration,
            validation_mae=error,
            best_mae=result.best_mae,
            mean_l2=found.mean_loss,
            mean_gradient=found.mean_gradient,
            train_l1=float(min(losses)),
            solver_calls=result.solver_calls,
            dataset_size=raw_samples,
            wall_time=time.perf_counter() - started,
            improved=improved,
        ))

        logger.info('Iteration %d: validation MAE %.4f degC, best %.4f, mean L2 %.4g, %d solver calls',
                    iteration, error, result.best_mae, found.mean_loss, result.solver_calls)

        if stalled(result.best_mae_trace, cfg.early_stop):
            logger.info('Best MAE moved less than %.3g degC in each of the last %d iterations, stopping',
                        cfg.early_stop.min_delta, cfg.early_stop.patience)
            result.stopped_early = True
            break

    return result
