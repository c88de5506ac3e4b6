"""
Data-volume study: how test error falls as each surrogate sees a growing
share of a pool of solver samples drawn at uniformly random flow rates.
"""
import logging

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from hallcal.errors import DataError
from hallcal.hall.layout import OperatingState
from hallcal.solvers.base import Solver
from hallcal.surrogate.base import Surrogate, TrainingSample

logger = logging.getLogger(__name__)

DEFAULT_FRACTIONS = (0.05, 0.15, 0.30, 0.50)


class PoolTooSmallError(DataError):

    ERRMSG = 'A pool of {} samples leaves no training sample at the fraction {}.'


@dataclass(frozen=True)
class StudyCell:
    fraction: float
    train_samples: int
    errors: Dict[str, float] = field(default_factory=dict)


def build_pool(solver: Solver, state: OperatingState, size: int, seed: int,
               flow_rate_range: Tuple[float, float] = (0.1, 0.5)) -> List[TrainingSample]:
    """`size` solves, each at flow rates drawn uniformly and independently per server."""
    if size < 2:
        raise PoolTooSmallError('A sample pool needs at least 2 samples, got {}.'.format(size))

    rng = np.random.default_rng(seed)
    pool = []

    for _ in range(size):
        x = state.with_flow_rates(rng.uniform(*flow_rate_range, solver.layout.m))
        pool.append(TrainingSample(x, solver.solve(x)))

    logger.info('Sample pool of %d solves built', size)
    return pool


def split_pool(pool: Sequence[TrainingSample], test_fraction: float,
               seed: int) -> Tuple[List[TrainingSample], List[TrainingSample]]:
    """Shuffled train/test split; the test share is rounded, and never empty."""
    if not 0.0 < test_fraction < 1.0:
        raise DataError('The test fraction must lie in (0, 1), got {}.'.format(test_fraction))

    order = np.random.default_rng(seed).permutation(len(pool))
    n_test = min(max(1, int(round(test_fraction * len(pool)))), len(pool) - 1)
    shuffled = [pool[i] for i in order]

    return shuffled[n_test:], shuffled[:n_test]


def study_datavolume(train: Sequence[TrainingSample], test: Sequence[TrainingSample],
                     builders: Dict[str, Callable[[], Surrogate]],
                     fractions: Sequence[float] = DEFAULT_FRACTIONS) -> List[StudyCell]:
    """
    For every fraction, a fresh surrogate of each kind is fitted on the first
    round(fraction * len(train)) training samples and scored on the whole
    test split.
    """
    counts = [int(round(f * len(train))) for f in fractions]

    for fraction, count in zip(fractions, counts):
        if count < 1:
            raise PoolTooSmallError(PoolTooSmallError.ERRMSG.format(len(train) + len(test), fraction))

    table = []

    for fraction, count in zip(fractions, counts):
        errors = {}

        for name, build in builders.items():
            surrogate = build()
            surrogate.fit(train[:count])
            errors[name] = surrogate.predict_error(test)

        logger.info('Fraction %.2f (%d samples): %s', fraction, count,
                    ', '.join('{} {:.3f} degC'.format(k, v) for k, v in errors.items()))
        table.append(StudyCell(float(fraction), count, errors))

    return table
