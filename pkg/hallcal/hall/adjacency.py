"""
Knowledge priors of the surrogate: facility-to-sensor adjacency built from
normalized reciprocal distances, and the hot-aisle mask.

Matrices are laid out facility rows by sensor columns (W_cs is l x n,
W_ss is m x n) so column k holds everything that reaches sensor k.
"""
import logging

from dataclasses import dataclass

import numpy as np

from scipy.spatial.distance import cdist

from .layout import Aisle, HallLayout, HallModelError

logger = logging.getLogger(__name__)

DEFAULT_CUT_THRESHOLD = 0.01


class ZeroDistanceError(HallModelError):

    pass


class AllWeightsCutError(HallModelError):

    pass


ZERO_DISTANCE_ERRMSG = 'The {} "{}" sits on the sensor "{}", their distance is zero.'
ALL_WEIGHTS_CUT_ERRMSG = 'Every {} weight of the sensor "{}" fell below the cut threshold {}.'


@dataclass(frozen=True)
class AdjacencyPriors:
    w_cs: np.ndarray
    w_ss: np.ndarray
    e: np.ndarray
    power_scale: float = 1.0

    def __post_init__(self):
        for name in ('w_cs', 'w_ss', 'e'):
            array = np.array(getattr(self, name), dtype=float)
            array.flags.writeable = False
            object.__setattr__(self, name, array)

    @property
    def l(self) -> int:
        return self.w_cs.shape[0]

    @property
    def m(self) -> int:
        return self.w_ss.shape[0]

    @property
    def n(self) -> int:
        return self.e.shape[0]

    @property
    def support(self) -> np.ndarray:
        """CRAC/sensor pairs that take part in the cooling softmax."""
        return self.w_cs != 0

    def with_matrices(self, w_cs, w_ss) -> 'AdjacencyPriors':
        return AdjacencyPriors(w_cs, w_ss, self.e, self.power_scale)


def hot_aisle_mask(layout: HallLayout) -> np.ndarray:
    return np.array([1.0 if s.aisle is Aisle.HOT else 0.0 for s in layout.sensors])


def reciprocal_weights(facility_positions: np.ndarray, sensor_positions: np.ndarray,
                       cut_threshold: float = DEFAULT_CUT_THRESHOLD,
                       metric: str = 'euclidean',
                       facility_ids=None, sensor_ids=None, kind: str = 'facility') -> np.ndarray:
    """
    Per-sensor normalized 1/distance weights; weights whose normalized value
    is below cut_threshold are zeroed and the survivors renormalized.
    """
    distances = cdist(facility_positions, sensor_positions, metric=metric)

    if np.any(distances <= 0.0):
        i, k = np.argwhere(distances <= 0.0)[0]
        raise ZeroDistanceError(ZERO_DISTANCE_ERRMSG.format(
            kind, facility_ids[i] if facility_ids else i, sensor_ids[k] if sensor_ids else k
        ))

    weights = 1.0 / distances
    weights = weights / weights.sum(axis=0, keepdims=True)
    weights[weights < cut_threshold] = 0.0

    column_sums = weights.sum(axis=0, keepdims=True)

    if np.any(column_sums == 0.0):
        k = int(np.argmin(column_sums))
        raise AllWeightsCutError(ALL_WEIGHTS_CUT_ERRMSG.format(
            kind, sensor_ids[k] if sensor_ids else k, cut_threshold
        ))

    return weights / column_sums


def build_adjacency(layout: HallLayout, cut_threshold: float = DEFAULT_CUT_THRESHOLD,
                    metric: str = 'euclidean', power_scale: float = None) -> AdjacencyPriors:
    """
    Builds W_cs, W_ss and e for a validated layout.

    power_scale defaults to the mean rated server power, so the heating
    block sees P/p0 in units of rated load.
    """
    if cut_threshold < 0:
        raise ValueError('cut_threshold must be non negative, got {}'.format(cut_threshold))

    sensor_ids = [s.id for s in layout.sensors]
    sensor_positions = layout.sensor_positions

    w_cs = reciprocal_weights(layout.crac_positions, sensor_positions, cut_threshold, metric,
                              [c.id for c in layout.cracs], sensor_ids, 'CRAC')
    w_ss = reciprocal_weights(layout.server_positions, sensor_positions, cut_threshold, metric,
                              [s.id for s in layout.servers], sensor_ids, 'server')

    if power_scale is None:
        power_scale = float(np.mean(layout.rated_powers))

    logger.debug('Adjacency built: %d of %d CRAC and %d of %d server weights kept',
                 np.count_nonzero(w_cs), w_cs.size, np.count_nonzero(w_ss), w_ss.size)

    return AdjacencyPriors(w_cs, w_ss, hot_aisle_mask(layout), power_scale)
