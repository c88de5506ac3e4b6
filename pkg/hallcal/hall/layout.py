"""
Data-hall domain types: the facility inventory of a hall and the vectors
that flow between the solver, the surrogates and the sensors.
"""
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from hallcal.errors import DataError, check_length


class HallModelError(DataError):

    pass


class DuplicateIdError(HallModelError):

    pass


class DuplicatePositionError(HallModelError):

    pass


class EmptyFacilityClassError(HallModelError):

    pass


class MissingAisleCoverageError(HallModelError):

    pass


class NonFinitePositionError(HallModelError):

    pass


class InvalidRatedPowerError(HallModelError):

    pass


DUPLICATE_ID_ERRMSG = 'The {} id "{}" is used more than once.'
DUPLICATE_POSITION_ERRMSG = 'The {}s "{}" and "{}" share the position {}.'
EMPTY_FACILITY_CLASS_ERRMSG = 'A hall needs at least {} {}, got {}.'
MISSING_AISLE_COVERAGE_ERRMSG = 'A hall needs at least one {} aisle sensor, none was found.'
NON_FINITE_POSITION_ERRMSG = 'The {} "{}" has a non finite or malformed position {}.'
INVALID_RATED_POWER_ERRMSG = 'The server "{}" must have a positive rated power, got {}.'


class Aisle(Enum):
    COLD = 'cold'
    HOT = 'hot'


class SensorRole(Enum):
    MEASUREMENT = 'measurement'
    SOLVER = 'solver'
    SURROGATE = 'surrogate'


def _frozen_array(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class Crac:
    id: str
    position: Tuple[float, float, float]


@dataclass(frozen=True)
class Server:
    id: str
    position: Tuple[float, float, float]
    type_tag: str = 'generic'
    rated_power: float = 1.0


@dataclass(frozen=True)
class Sensor:
    id: str
    position: Tuple[float, float, float]
    aisle: Aisle = Aisle.COLD


@dataclass(frozen=True)
class HallLayout:
    cracs: Tuple[Crac, ...]
    servers: Tuple[Server, ...]
    sensors: Tuple[Sensor, ...]
    containment: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'cracs', tuple(self.cracs))
        object.__setattr__(self, 'servers', tuple(self.servers))
        object.__setattr__(self, 'sensors', tuple(self.sensors))

    @property
    def l(self) -> int:
        return len(self.cracs)

    @property
    def m(self) -> int:
        return len(self.servers)

    @property
    def n(self) -> int:
        return len(self.sensors)

    @property
    def crac_positions(self) -> np.ndarray:
        return np.array([c.position for c in self.cracs], dtype=float).reshape(-1, 3)

    @property
    def server_positions(self) -> np.ndarray:
        return np.array([s.position for s in self.servers], dtype=float).reshape(-1, 3)

    @property
    def sensor_positions(self) -> np.ndarray:
        return np.array([s.position for s in self.sensors], dtype=float).reshape(-1, 3)

    @property
    def rated_powers(self) -> np.ndarray:
        return np.array([s.rated_power for s in self.servers], dtype=float)

    @property
    def hot_sensors(self) -> np.ndarray:
        return np.array([s.aisle is Aisle.HOT for s in self.sensors], dtype=bool)


def _check_ids(kind: str, facilities):
    counts = Counter(f.id for f in facilities)

    for facility_id, count in counts.items():
        if count > 1:
            raise DuplicateIdError(DUPLICATE_ID_ERRMSG.format(kind, facility_id))


def _check_positions(kind: str, facilities):
    seen = {}

    for facility in facilities:
        position = tuple(facility.position)

        if len(position) != 3 or not np.all(np.isfinite(np.array(position, dtype=float))):
            raise NonFinitePositionError(
                NON_FINITE_POSITION_ERRMSG.format(kind, facility.id, facility.position)
            )

        if position in seen:
            raise DuplicatePositionError(
                DUPLICATE_POSITION_ERRMSG.format(kind, seen[position], facility.id, position)
            )

        seen[position] = facility.id


def validate_layout(layout: HallLayout) -> HallLayout:
    """
    Returns the layout unchanged if it is a usable hall, raises otherwise.
    """
    for kind, facilities, minimum in (('CRAC', layout.cracs, 1),
                                      ('server', layout.servers, 1),
                                      ('sensor', layout.sensors, 2)):
        if len(facilities) < minimum:
            raise EmptyFacilityClassError(
                EMPTY_FACILITY_CLASS_ERRMSG.format(minimum, kind, len(facilities))
            )

        _check_ids(kind, facilities)
        _check_positions(kind, facilities)

    for aisle in Aisle:
        if not any(s.aisle is aisle for s in layout.sensors):
            raise MissingAisleCoverageError(MISSING_AISLE_COVERAGE_ERRMSG.format(aisle.value))

    for server in layout.servers:
        if not np.isfinite(server.rated_power) or server.rated_power <= 0:
            raise InvalidRatedPowerError(INVALID_RATED_POWER_ERRMSG.format(server.id, server.rated_power))

    return layout


@dataclass(frozen=True)
class SystemInput:
    """
    The input x = (T_c, V, P, alpha) shared by the solver and the surrogates.
    """
    setpoints: np.ndarray
    fan_speeds: np.ndarray
    powers: np.ndarray
    flow_rates: np.ndarray

    def __post_init__(self):
        for name in ('setpoints', 'fan_speeds', 'powers', 'flow_rates'):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))

        check_length('fan_speeds', self.fan_speeds, len(self.setpoints))
        check_length('flow_rates', self.flow_rates, len(self.powers))

    @property
    def l(self) -> int:
        return len(self.setpoints)

    @property
    def m(self) -> int:
        return len(self.powers)

    @property
    def state(self) -> 'OperatingState':
        return OperatingState(self.setpoints, self.fan_speeds, self.powers)

    def with_flow_rates(self, flow_rates) -> 'SystemInput':
        return SystemInput(self.setpoints, self.fan_speeds, self.powers, flow_rates)

    def check(self, layout: HallLayout) -> 'SystemInput':
        check_length('setpoints', self.setpoints, layout.l)
        check_length('powers', self.powers, layout.m)
        return self

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.setpoints, self.fan_speeds, self.powers, self.flow_rates])

    @classmethod
    def from_vector(cls, vector, l: int, m: int) -> 'SystemInput':
        vector = np.asarray(vector, dtype=float)
        check_length('input vector', vector, 2 * l + 2 * m)
        return cls(vector[:l], vector[l:2 * l], vector[2 * l:2 * l + m], vector[2 * l + m:])


@dataclass(frozen=True)
class OperatingState:
    """
    The measured free variables of a steady hall state: everything in a
    SystemInput except the flow rates being calibrated.
    """
    setpoints: np.ndarray
    fan_speeds: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        for name in ('setpoints', 'fan_speeds', 'powers'):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))

        check_length('fan_speeds', self.fan_speeds, len(self.setpoints))

    def with_flow_rates(self, flow_rates) -> SystemInput:
        return SystemInput(self.setpoints, self.fan_speeds, self.powers, flow_rates)


@dataclass(frozen=True)
class SensorVector:
    values: np.ndarray
    role: SensorRole = SensorRole.MEASUREMENT
    sensor_ids: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, 'values', _frozen_array(self.values))
        object.__setattr__(self, 'sensor_ids', tuple(self.sensor_ids))

        if not np.all(np.isfinite(self.values)):
            raise DataError('Sensor temperatures must be finite, got {}.'.format(self.values))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return len(self.values)

    def check(self, layout: HallLayout) -> 'SensorVector':
        check_length('sensor vector', self.values, layout.n)
        return self
