"""
Heuristic baseline: a (1+1) evolution strategy run directly on the solver's
MAE, one solver call per candidate. Each evaluation is one trace entry, so
the traces count the solver calls a heuristic needs to reach a given error.
"""
import logging
import time

import numpy as np

from hallcal.errors import SolverError
from hallcal.hall.layout import OperatingState, SensorVector
from hallcal.search.bounds import Bounds
from hallcal.search.es import EsConfig, cmaes_1p1
from hallcal.solvers.base import Solver

from .engine import CalibrationAbortedError, CalibrationResult, IterationTrace, mae

logger = logging.getLogger(__name__)


def run_heuristic(solver: Solver, measured: SensorVector, state: OperatingState,
                  cfg: EsConfig = EsConfig(), bounds: Bounds = Bounds(), x0=None) -> CalibrationResult:
    measured.check(solver.layout)
    m = solver.layout.m
    x0 = np.full(m, bounds.midpoint) if x0 is None else bounds.clip(x0)
    calls_before = solver.calls

    result = CalibrationResult(x0.copy(), np.inf, measured, 'heuristic')

    def objective(alpha):
        started = time.perf_counter()
        solved = solver.solve(state.with_flow_rates(alpha))
        error = mae(solved, measured)
        improved = error < result.best_mae

        if result.initial_prediction is None:
            result.initial_prediction = solved

        if improved:
            result.flow_rates, result.best_mae, result.calibrated_prediction = np.array(alpha), error, solved

        result.solver_calls = solver.calls - calls_before
        result.traces.append(IterationTrace(
            iteration=len(result.traces) + 1,
            validation_mae=error,
            best_mae=result.best_mae,
            mean_l2=float('nan'),
            mean_gradient=float('nan'),
            train_l1=float('nan'),
            solver_calls=result.solver_calls,
            dataset_size=0,
            wall_time=time.perf_counter() - started,
            improved=improved,
        ))

        logger.debug('Heuristic evaluation %d: MAE %.4f degC, best %.4f', len(result.traces), error, result.best_mae)
        return error

    try:
        cmaes_1p1(objective, bounds, cfg, x0)
    except SolverError as e:
        result.solver_calls = solver.calls - calls_before
        raise CalibrationAbortedError('Heuristic search aborted after {} evaluations: {}'.format(
            result.iterations, e), result) from e

    logger.info('Heuristic search finished: best MAE %.4f degC after %d solver calls',
                result.best_mae, result.solver_calls)

    return result
