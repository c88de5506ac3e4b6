"""
Zonal data-hall simulator standing in for the CFD solver.

Every sensor location is a well-mixed zone. Cold zones receive CRAC supply
air, mixed by fan-law flow and inverse distance, plus the hot air leaking
back from the hot aisles. Hot zones receive the cold air drawn through the
servers plus the energy the servers dissipate, and a recirculated share of
cold-zone air. Sensors read their zone blended with their aisle neighbours.

The server heat term is the energy balance of the zone through-flow, with
server fans sized for rated power:

    R_h = kappa * sum_j w_jh P_j / sum_j w_jh alpha_j P_rated_j

so a zone heats up with power and cools down with flow, and at rated power it
is the flow-weighted mix of the kappa / alpha_j outlet rises.
"""
import logging

from dataclasses import dataclass, field

import numpy as np

from scipy.spatial.distance import cdist

from hallcal.hall.layout import (HallLayout, OperatingState,
                                 SensorRole, SensorVector, SystemInput,
                                 validate_layout)
from hallcal.hall.units import RISE_CONSTANT
from hallcal.search.bounds import Bounds

from .base import InvalidInputError, NoConvergenceError, Solver

logger = logging.getLogger(__name__)

MIN_DISTANCE = 0.1  # m, floor for coincident zone centres


@dataclass(frozen=True)
class Scenario:
    layout: HallLayout
    hidden_flow_rates: np.ndarray
    recirculation_fraction: float = 0.05
    fan_law_exponent: float = 1.0
    ambient: float = 25.0  # starting temperature of every zone
    sensor_noise_sd: float = 0.1
    seed: int = 0
    interpolation_weight: float = 0.1
    max_leakage: float = 0.5
    tolerance: float = 1e-6
    max_sweeps: int = 500
    damping: float = 0.5
    rise_constant: float = RISE_CONSTANT

    def __post_init__(self):
        validate_layout(self.layout)
        hidden = np.array(self.hidden_flow_rates, dtype=float)
        hidden.flags.writeable = False
        object.__setattr__(self, 'hidden_flow_rates', hidden)

        if len(hidden) != self.layout.m or not Bounds().contains(hidden):
            raise InvalidInputError('Hidden flow rates must be {} values inside [{}, {}].'.format(
                self.layout.m, Bounds().lower, Bounds().upper))

        if not 0.0 <= self.recirculation_fraction < 1.0:
            raise InvalidInputError('The recirculation fraction must lie in [0, 1), got {}.'.format(
                self.recirculation_fraction))

        if self.sensor_noise_sd < 0:
            raise InvalidInputError('The sensor noise sd cannot be negative.')


def _normalize_columns(weights: np.ndarray) -> np.ndarray:
    return weights / weights.sum(axis=0, keepdims=True)


@dataclass(frozen=True)
class ZonalGeometry:
    """Distance-derived couplings of a layout; independent of the input."""
    cold: np.ndarray
    hot: np.ndarray
    crac_to_cold: np.ndarray  # l x nc, 1/d
    hot_to_cold: np.ndarray  # nh x nc, columns sum to 1
    cold_to_hot: np.ndarray  # nc x nh, columns sum to 1
    server_to_hot: np.ndarray  # m x nh, 1/d^2, columns sum to 1
    readout: np.ndarray = field(repr=False)  # n x n, rows sum to 1

    @classmethod
    def of(cls, layout: HallLayout, interpolation_weight: float) -> 'ZonalGeometry':
        sensors = layout.sensor_positions
        hot_mask = layout.hot_sensors
        cold, hot = np.flatnonzero(~hot_mask), np.flatnonzero(hot_mask)

        def distances(a, b):
            return np.maximum(cdist(a, b), MIN_DISTANCE)

        zone_distances = distances(sensors, sensors)
        readout = np.eye(layout.n)

        for members in (cold, hot):
            if len(members) < 2:
                continue

            neighbours = 1.0 / zone_distances[np.ix_(members, members)]
            np.fill_diagonal(neighbours, 0.0)
            neighbours /= neighbours.sum(axis=1, keepdims=True)
            readout[np.ix_(members, members)] = (
                (1.0 - interpolation_weight) * np.eye(len(members)) + interpolation_weight * neighbours
            )

        return cls(
            cold=cold,
            hot=hot,
            crac_to_cold=1.0 / distances(layout.crac_positions, sensors[cold]),
            hot_to_cold=_normalize_columns(1.0 / zone_distances[np.ix_(hot, cold)]),
            cold_to_hot=_normalize_columns(1.0 / zone_distances[np.ix_(cold, hot)]),
            server_to_hot=_normalize_columns(distances(layout.server_positions, sensors[hot]) ** -2),
            readout=readout,
        )


def _check_input(x: SystemInput):
    if np.any(~np.isfinite(x.as_vector())):
        raise InvalidInputError('The solver input has non finite entries.')

    if np.any(x.flow_rates <= 0):
        raise InvalidInputError('Flow rates must be strictly positive, got a minimum of {}.'.format(
            x.flow_rates.min()))

    if np.any(x.powers < 0):
        raise InvalidInputError('Server powers cannot be negative.')

    if np.any((x.fan_speeds < 0) | (x.fan_speeds > 1)):
        raise InvalidInputError('Fan speed ratios must lie in [0, 1].')


def zonal_solve(scenario: Scenario, x: SystemInput, geometry: ZonalGeometry = None) -> np.ndarray:
    """
    Damped fixed-point sweep of the zone balances until the largest update is
    below the scenario tolerance.
    """
    x.check(scenario.layout)
    _check_input(x)

    if geometry is None:
        geometry = ZonalGeometry.of(scenario.layout, scenario.interpolation_weight)

    r = scenario.recirculation_fraction
    fan_flow = x.fan_speeds ** scenario.fan_law_exponent

    supply_weights = (fan_flow if fan_flow.sum() > 0 else np.ones_like(fan_flow))[:, None] * geometry.crac_to_cold
    supply = x.setpoints @ _normalize_columns(supply_weights)

    mean_flow = fan_flow.mean()
    leakage = min(r / mean_flow, scenario.max_leakage) if mean_flow > 0 else scenario.max_leakage

    rated_flow = x.flow_rates * scenario.layout.rated_powers
    heat = scenario.rise_constant * (x.powers @ geometry.server_to_hot) / (rated_flow @ geometry.server_to_hot)

    cold_zones = np.full(len(geometry.cold), scenario.ambient)
    hot_zones = np.full(len(geometry.hot), scenario.ambient)

    for sweep in range(1, scenario.max_sweeps + 1):
        cold_next = (1.0 - leakage) * supply + leakage * (hot_zones @ geometry.hot_to_cold)
        hot_next = cold_next @ geometry.cold_to_hot + (1.0 - r) * heat

        residual = max(np.max(np.abs(cold_next - cold_zones)), np.max(np.abs(hot_next - hot_zones)))

        if residual < scenario.tolerance:
            cold_zones, hot_zones = cold_next, hot_next
            break

        cold_zones = cold_zones + scenario.damping * (cold_next - cold_zones)
        hot_zones = hot_zones + scenario.damping * (hot_next - hot_zones)
    else:
        raise NoConvergenceError('The zonal balance did not converge in {} sweeps, residual {:.3g} degC.'.format(
            scenario.max_sweeps, residual))

    zones = np.empty(scenario.layout.n)
    zones[geometry.cold] = cold_zones
    zones[geometry.hot] = hot_zones

    return geometry.readout @ zones


def synthesize_measurements(scenario: Scenario, state: OperatingState, seed: int = None) -> SensorVector:
    """
    What the sensors of the real hall would read: the simulator at the hidden
    flow rates plus seeded Gaussian noise.
    """
    rng = np.random.default_rng(scenario.seed if seed is None else seed)
    clean = zonal_solve(scenario, state.with_flow_rates(scenario.hidden_flow_rates))
    noisy = clean + rng.normal(0.0, scenario.sensor_noise_sd, size=clean.shape)

    return SensorVector(noisy, SensorRole.MEASUREMENT, [s.id for s in scenario.layout.sensors])


class ZonalSolver(Solver):

    def __init__(self, scenario: Scenario):
        super().__init__(scenario.layout)
        self.scenario = scenario
        self.geometry = ZonalGeometry.of(scenario.layout, scenario.interpolation_weight)

    def _solve(self, x: SystemInput) -> np.ndarray:
        return zonal_solve(self.scenario, x, self.geometry)
