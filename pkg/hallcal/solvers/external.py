"""
Bridge to a third-party thermal solver run as a subprocess.

Per call the flow rates are written as one "server_id, alpha" record per line
and the operating state as "facility_id, quantity, value" records, the command
is run with the working directory as its last argument, and the result file
("sensor_id, temperature" records) is parsed back in the hall's sensor order.
File names are templates; `{call}` expands to the call number.
"""
import logging
import os
import shlex
import subprocess
import threading

from collections import defaultdict
from typing import List, Sequence, Union

import numpy as np

from hallcal.errors import SolverError
from hallcal.hall.layout import HallLayout, SystemInput

from .base import Solver

logger = logging.getLogger(__name__)


class SolverTimeoutError(SolverError):

    ERRMSG = 'The solver command {} did not finish within {} s.'


class CommandFailedError(SolverError):

    ERRMSG = 'The solver command {} exited with status {}: {}'


class ParseError(SolverError):

    pass


MISSING_OUTPUT_ERRMSG = 'The solver did not write its result file "{}".'
MALFORMED_LINE_ERRMSG = 'Line {} of "{}" is not a "sensor_id, temperature" record: {!r}'
UNKNOWN_SENSOR_ERRMSG = 'Line {} of "{}" names the unknown sensor "{}".'
MISSING_SENSORS_ERRMSG = 'The result file "{}" has no temperature for the sensors {}.'

_workdir_locks = defaultdict(threading.Lock)
_workdir_locks_guard = threading.Lock()


def workdir_lock(workdir: str) -> threading.Lock:
    """One lock per working directory, shared by every solver using it."""
    with _workdir_locks_guard:
        return _workdir_locks[os.path.realpath(workdir)]


def write_flow_rates(path: str, layout: HallLayout, flow_rates):
    with open(path, 'w') as f:
        for server, alpha in zip(layout.servers, flow_rates):
            f.write('{}, {!r}\n'.format(server.id, float(alpha)))


def write_state(path: str, layout: HallLayout, x: SystemInput):
    with open(path, 'w') as f:
        for crac, setpoint, fan in zip(layout.cracs, x.setpoints, x.fan_speeds):
            f.write('{}, setpoint, {!r}\n'.format(crac.id, float(setpoint)))
            f.write('{}, fan_speed, {!r}\n'.format(crac.id, float(fan)))

        for server, power in zip(layout.servers, x.powers):
            f.write('{}, power, {!r}\n'.format(server.id, float(power)))


def read_temperatures(path: str, layout: HallLayout) -> np.ndarray:
    if not os.path.isfile(path):
        raise ParseError(MISSING_OUTPUT_ERRMSG.format(path))

    index = {sensor.id: k for k, sensor in enumerate(layout.sensors)}
    values = np.full(layout.n, np.nan)

    with open(path) as f:
        for number, line in enumerate(f, start=1):
            text = line.strip()

            if not text or text.startswith('#'):
                continue

            fields = [part.strip() for part in text.split(',')]

            if number == 1 and fields[0] == 'sensor_id':
                continue

            try:
                sensor_id, temperature = fields
                temperature = float(temperature)
            except ValueError:
                raise ParseError(MALFORMED_LINE_ERRMSG.format(number, path, text))

            if sensor_id not in index:
                raise ParseError(UNKNOWN_SENSOR_ERRMSG.format(number, path, sensor_id))

            if not np.isfinite(temperature):
                raise ParseError(MALFORMED_LINE_ERRMSG.format(number, path, text))

            values[index[sensor_id]] = temperature

    missing = [layout.sensors[k].id for k in np.flatnonzero(np.isnan(values))]

    if missing:
        raise ParseError(MISSING_SENSORS_ERRMSG.format(path, missing))

    return values


class ExternalSolver(Solver):

    def __init__(self, layout: HallLayout, workdir: str, command: Union[str, Sequence[str]],
                 config_name: str = 'flow_rates.csv', state_name: str = 'state.csv',
                 output_name: str = 'results.csv', timeout: float = 3600.0):
        super().__init__(layout)

        if not command:
            raise SolverError('The external solver needs a command to run.')

        self.workdir = workdir
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.config_name = config_name
        self.state_name = state_name
        self.output_name = output_name
        self.timeout = float(timeout)

    def _path(self, template: str) -> str:
        return os.path.join(self.workdir, template.format(call=self.calls))

    def _run(self) -> subprocess.CompletedProcess:
        args: List[str] = self.command + [self.workdir]

        try:
            process = subprocess.run(args, capture_output=True, text=True, timeout=self.timeout)
        except subprocess.TimeoutExpired:
            raise SolverTimeoutError(SolverTimeoutError.ERRMSG.format(args, self.timeout))
        except OSError as e:
            raise CommandFailedError(CommandFailedError.ERRMSG.format(args, None, e))

        if process.returncode != 0:
            raise CommandFailedError(CommandFailedError.ERRMSG.format(
                args, process.returncode, process.stderr.strip()))

        return process

    def _solve(self, x: SystemInput) -> np.ndarray:
        os.makedirs(self.workdir, exist_ok=True)

        with workdir_lock(self.workdir):
            output = self._path(self.output_name)

            if os.path.exists(output):
                os.remove(output)

            write_flow_rates(self._path(self.config_name), self.layout, x.flow_rates)
            write_state(self._path(self.state_name), self.layout, x)

            logger.info('Solver call %d: running %s in %s', self.calls, self.command, self.workdir)
            self._run()

            return read_temperatures(output, self.layout)


class ExternalSolverFactory:

    def build(self, layout: HallLayout, workdir: str, command, config_name: str = 'flow_rates.csv',
              state_name: str = 'state.csv', output_name: str = 'results.csv',
              timeout: float = 3600.0) -> ExternalSolver:
        return ExternalSolver(layout, workdir, command, config_name, state_name, output_name, float(timeout))
