from dataclasses import dataclass

import numpy as np

from hallcal.errors import DataError
from hallcal.hall.units import RISE_CONSTANT

from .base import check_flow_rates


@dataclass(frozen=True)
class PenaltyParams:
    """
    Empirical band [delta_t_lower, delta_t_upper] (degC) for the server air
    temperature rise kappa / alpha_j, and the weight of its hinge penalty.
    """
    delta_t_lower: float = 5.0
    delta_t_upper: float = 15.0
    regularization: float = 1.0
    rise_constant: float = None

    def __post_init__(self):
        if self.rise_constant is None:
            object.__setattr__(self, 'rise_constant', RISE_CONSTANT)

        if not 0 < self.delta_t_lower < self.delta_t_upper:
            raise DataError('The rise band needs 0 < lower < upper, got [{}, {}].'.format(
                self.delta_t_lower, self.delta_t_upper))

        if self.regularization < 0 or self.rise_constant <= 0:
            raise DataError('Penalty needs regularization >= 0 and rise_constant > 0.')


def server_rises(flow_rates, params: PenaltyParams) -> np.ndarray:
    flow_rates = np.asarray(flow_rates, dtype=float)
    check_flow_rates(flow_rates)
    return params.rise_constant / flow_rates


def penalty_h(flow_rates, powers, params: PenaltyParams) -> float:
    rises = server_rises(flow_rates, params)
    hinge = np.maximum(0.0, params.delta_t_lower - rises) + np.maximum(0.0, rises - params.delta_t_upper)
    return float(np.sum(hinge * np.asarray(powers, dtype=float)))


def penalty_h_grad(flow_rates, powers, params: PenaltyParams) -> np.ndarray:
    """Subgradient in alpha, zero on the band edges."""
    flow_rates = np.asarray(flow_rates, dtype=float)
    rises = server_rises(flow_rates, params)
    slope = (rises > params.delta_t_upper).astype(float) - (rises < params.delta_t_lower).astype(float)

    return np.asarray(powers, dtype=float) * slope * (-params.rise_constant / flow_rates ** 2)
