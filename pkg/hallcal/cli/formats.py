"""
On-disk formats. Layouts, scenarios and operating states are YAML documents
with explicit field names; sensor and flow-rate vectors are CSV files with a
header row.
"""
import csv
import os

import numpy as np
import yaml

from hallcal.errors import DataError
from hallcal.hall.layout import (Aisle, Crac, HallLayout, OperatingState,
                                 Sensor, SensorRole, SensorVector, Server,
                                 validate_layout)
from hallcal.solvers.external import ParseError, read_temperatures
from hallcal.solvers.zonal import Scenario


class FileFormatError(DataError):

    pass


MISSING_FIELD_ERRMSG = 'The file "{}" has no "{}" field.'
UNKNOWN_ID_ERRMSG = 'The file "{}" gives no {} for "{}".'
BAD_RECORD_ERRMSG = 'Line {} of "{}" is not a "{}" record: {!r}'

SCENARIO_FIELDS = ('recirculation_fraction', 'fan_law_exponent', 'ambient', 'sensor_noise_sd', 'seed',
                   'interpolation_weight', 'max_leakage', 'tolerance', 'max_sweeps', 'damping')


def _dump(path: str, document: dict):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)

    with open(path, 'w') as fp:
        yaml.safe_dump(document, fp, sort_keys=False, default_flow_style=None)


def _load(path: str) -> dict:
    try:
        with open(path, 'r') as fp:
            document = yaml.safe_load(fp.read())
    except yaml.YAMLError as e:
        raise FileFormatError('The file "{}" is not valid YAML: {}'.format(path, e))

    if not isinstance(document, dict):
        raise FileFormatError('The file "{}" is not a YAML mapping.'.format(path))

    return document


def _field(document: dict, name: str, path: str):
    try:
        return document[name]
    except KeyError:
        raise FileFormatError(MISSING_FIELD_ERRMSG.format(path, name))


def _position(values) -> tuple:
    return tuple(float(v) for v in values)


def _by_id(mapping: dict, ids, what: str, path: str) -> np.ndarray:
    try:
        return np.array([float(mapping[i]) for i in ids])
    except KeyError as e:
        raise FileFormatError(UNKNOWN_ID_ERRMSG.format(path, what, e.args[0]))
    except (TypeError, ValueError) as e:
        raise FileFormatError('The {} in "{}" must be numbers: {}'.format(what, path, e))


def write_layout(path: str, layout: HallLayout):
    _dump(path, {
        'containment': layout.containment,
        'cracs': [{'id': c.id, 'position': list(c.position)} for c in layout.cracs],
        'servers': [{'id': s.id, 'position': list(s.position), 'type': s.type_tag, 'rated_power': s.rated_power}
                    for s in layout.servers],
        'sensors': [{'id': s.id, 'position': list(s.position), 'aisle': s.aisle.value} for s in layout.sensors],
    })


def read_layout(path: str) -> HallLayout:
    document = _load(path)

    try:
        layout = HallLayout(
            [Crac(str(c['id']), _position(c['position'])) for c in _field(document, 'cracs', path) or []],
            [Server(str(s['id']), _position(s['position']), str(s.get('type', 'generic')),
                    float(s.get('rated_power', 1.0))) for s in _field(document, 'servers', path) or []],
            [Sensor(str(s['id']), _position(s['position']), Aisle(s.get('aisle', 'cold')))
             for s in _field(document, 'sensors', path) or []],
            bool(document.get('containment', True)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise FileFormatError('The layout "{}" has a malformed entry: {!r}'.format(path, e))

    return validate_layout(layout)


def write_scenario(path: str, scenario: Scenario):
    document = {name: getattr(scenario, name) for name in SCENARIO_FIELDS}
    document['hidden_flow_rates'] = {
        s.id: float(a) for s, a in zip(scenario.layout.servers, scenario.hidden_flow_rates)
    }
    _dump(path, document)


def read_scenario(path: str, layout: HallLayout) -> Scenario:
    document = _load(path)
    hidden = _by_id(_field(document, 'hidden_flow_rates', path), [s.id for s in layout.servers],
                    'hidden flow rate', path)

    return Scenario(layout, hidden, **{k: document[k] for k in SCENARIO_FIELDS if k in document})


def write_state(path: str, layout: HallLayout, state: OperatingState):
    _dump(path, {
        'setpoints': {c.id: float(v) for c, v in zip(layout.cracs, state.setpoints)},
        'fan_speeds': {c.id: float(v) for c, v in zip(layout.cracs, state.fan_speeds)},
        'powers': {s.id: float(v) for s, v in zip(layout.servers, state.powers)},
    })


def read_state(path: str, layout: HallLayout) -> OperatingState:
    document = _load(path)
    crac_ids = [c.id for c in layout.cracs]

    return OperatingState(
        _by_id(_field(document, 'setpoints', path), crac_ids, 'setpoint', path),
        _by_id(_field(document, 'fan_speeds', path), crac_ids, 'fan speed', path),
        _by_id(_field(document, 'powers', path), [s.id for s in layout.servers], 'power', path),
    )


def write_sensor_vector(path: str, vector: SensorVector, layout: HallLayout):
    with open(path, 'w', newline='') as fp:
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow(['sensor_id', 'temperature'])
        writer.writerows([s.id, repr(float(v))] for s, v in zip(layout.sensors, vector.values))


def read_measurements(path: str, layout: HallLayout) -> SensorVector:
    """Measured temperatures in the layout's sensor order, whatever the file order."""
    try:
        values = read_temperatures(path, layout)
    except ParseError as e:
        raise FileFormatError(str(e))

    return SensorVector(values, SensorRole.MEASUREMENT, [s.id for s in layout.sensors])


def write_flow_rates(path: str, layout: HallLayout, columns: dict):
    """One row per server, one column per named flow-rate vector."""
    names = list(columns)

    with open(path, 'w', newline='') as fp:
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow(['server_id'] + names)

        for j, server in enumerate(layout.servers):
            writer.writerow([server.id] + [repr(float(columns[name][j])) for name in names])


def read_flow_rates(path: str, layout: HallLayout, column: str = None) -> np.ndarray:
    """The named column (default: the first after server_id) in the layout's server order."""
    index = {s.id: j for j, s in enumerate(layout.servers)}
    values = np.full(layout.m, np.nan)

    try:
        fp = open(path, 'r', newline='')
    except OSError as e:
        raise FileFormatError('Cannot read "{}": {}'.format(path, e))

    with fp:
        reader = csv.reader(fp)
        header = [h.strip() for h in next(reader, [])]

        if len(header) < 2 or header[0] != 'server_id':
            raise FileFormatError(BAD_RECORD_ERRMSG.format(1, path, 'server_id, ...', ','.join(header)))

        col = header.index(column) if column in header else 1

        for number, row in enumerate(reader, start=2):
            if not row:
                continue

            try:
                values[index[row[0].strip()]] = float(row[col])
            except (KeyError, IndexError, ValueError):
                raise FileFormatError(BAD_RECORD_ERRMSG.format(number, path, ', '.join(header), ','.join(row)))

    missing = [layout.servers[j].id for j in np.flatnonzero(np.isnan(values))]

    if missing:
        raise FileFormatError('The file "{}" has no flow rate for the servers {}.'.format(path, missing))

    return values
