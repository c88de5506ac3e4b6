"""
Synthetic halls to calibrate against: a contained two-hot-aisle reference
hall and a small hall whose flow rates are identifiable one server at a time.
"""
from dataclasses import dataclass

import numpy as np

from hallcal.hall.layout import (Aisle, Crac, HallLayout, OperatingState,
                                 Sensor, Server, validate_layout)

from .zonal import Scenario

HOT_AISLES = (3.0, 9.0)  # m, y of the hot aisle centrelines
COLD_AISLES = (0.5, 6.0, 11.5)
HALL_WIDTH = 12.0
RACK_OFFSET = 1.0  # rack faces sit this far either side of a hot aisle
RATED_POWER_RANGE = (200.0, 600.0)  # W
HIDDEN_FLOW_RANGE = (0.12, 0.33)  # cfm/W, server rises of about 5 to 15 degC


@dataclass(frozen=True)
class HallSizes:
    cracs: int = 4
    servers: int = 64
    cold_sensors: int = 16
    hot_sensors: int = 8


def _split(count: int, parts: int):
    """`count` items over `parts` groups, earlier groups taking the remainder."""
    return [count // parts + (1 if i < count % parts else 0) for i in range(parts)]


def _along(count: int, length: float):
    return [length * (i + 0.5) / count for i in range(count)]


def reference_layout(sizes: HallSizes = HallSizes(), seed: int = 0) -> HallLayout:
    """
    Four rack rows face the two hot aisles, one server per metre of row.
    CRACs alternate between the two ends of the hall.
    """
    rng = np.random.default_rng(seed)
    per_row = max(_split(sizes.servers, 4) + [1])
    length = per_row + 2.0

    servers = []
    rows = [(aisle - RACK_OFFSET, aisle + RACK_OFFSET) for aisle in HOT_AISLES]

    for row, count in enumerate(_split(sizes.servers, 4)):
        y = rows[row // 2][row % 2]

        for x in range(count):
            servers.append(Server(
                's{:03d}'.format(len(servers)),
                (1.5 + x, y, 1.0),
                '1U',
                float(rng.uniform(*RATED_POWER_RANGE)),
            ))

    sensors = []

    for aisle, count in zip(COLD_AISLES, _split(sizes.cold_sensors, len(COLD_AISLES))):
        for x in _along(count, length):
            sensors.append(Sensor('c{:02d}'.format(len(sensors)), (x, aisle, 1.2), Aisle.COLD))

    hot = []

    for aisle, count in zip(HOT_AISLES, _split(sizes.hot_sensors, len(HOT_AISLES))):
        for x in _along(count, length):
            hot.append(Sensor('h{:02d}'.format(len(hot)), (x, aisle, 1.8), Aisle.HOT))

    cracs = []

    for end, count in zip((-1.0, length + 1.0), _split(sizes.cracs, 2)):
        for y in _along(count, HALL_WIDTH):
            cracs.append(Crac('crac{}'.format(len(cracs) + 1), (end, y, 1.5)))

    return validate_layout(HallLayout(cracs, servers, sensors + hot))


def identifiable_layout(servers: int = 6) -> HallLayout:
    """
    One hot aisle where every server sits 0.4 m from its own hot sensor and
    at least 3 m from the others, so each sensor is dominated by one server.
    """
    hall = [Server('s{:02d}'.format(j), (1.0 + 3.0 * j, 2.6, 1.0), '1U', 400.0) for j in range(servers)]
    sensors = [Sensor('c{:02d}'.format(j), (1.0 + 3.0 * j, 0.5, 1.0), Aisle.COLD) for j in range(servers)]
    sensors += [Sensor('h{:02d}'.format(j), (1.0 + 3.0 * j, 3.0, 1.0), Aisle.HOT) for j in range(servers)]
    cracs = [Crac('crac1', (-1.0, 0.5, 1.5)), Crac('crac2', (3.0 * servers + 1.0, 0.5, 1.5))]

    return validate_layout(HallLayout(cracs, hall, sensors))


def operating_state(layout: HallLayout, seed: int = 0) -> OperatingState:
    rng = np.random.default_rng(seed)

    return OperatingState(
        np.round(rng.uniform(18.0, 22.0, layout.l), 2),
        np.round(rng.uniform(0.6, 0.9, layout.l), 3),
        np.round(layout.rated_powers * rng.uniform(0.5, 0.95, layout.m), 1),
    )


def hidden_flow_rates(layout: HallLayout, seed: int = 0) -> np.ndarray:
    return np.round(np.random.default_rng(seed).uniform(*HIDDEN_FLOW_RANGE, layout.m), 4)


def reference_scenario(sizes: HallSizes = HallSizes(), seed: int = 0, sensor_noise_sd: float = 0.1,
                       recirculation_fraction: float = 0.05) -> Scenario:
    layout = reference_layout(sizes, seed)
    return Scenario(layout, hidden_flow_rates(layout, seed + 1), recirculation_fraction=recirculation_fraction,
                    sensor_noise_sd=sensor_noise_sd, seed=seed)


def identifiable_scenario(servers: int = 6, seed: int = 0, sensor_noise_sd: float = 0.0) -> Scenario:
    layout = identifiable_layout(servers)
    return Scenario(layout, hidden_flow_rates(layout, seed + 1), recirculation_fraction=0.0,
                    sensor_noise_sd=sensor_noise_sd, seed=seed)
