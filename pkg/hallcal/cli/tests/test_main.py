import contextlib
import io
import os
import sys
import tempfile
import unittest

import yaml

from hallcal.cli import formats
from hallcal.cli.main import (EXIT_DATA, EXIT_OK, EXIT_SOLVER, EXIT_USAGE,
                              UnknownMethodError, main, resolve_log_level,
                              run_method)
from hallcal.cli.reports import read_traces
from hallcal.components.factories import load_run_config
from hallcal.solvers import echo_solver

SMALL_HALL = ['--cracs', '2', '--servers', '8', '--cold-sensors', '3', '--hot-sensors', '3']

QUICK_RUN = """
calibration:
  augment_batch: 4
de:
  population_size: 6
  max_iterations: 5
adam:
  steps: 10
training:
  knowledge:
    epochs: 20
    learning_rate: 0.05
  vanilla:
    epochs: 5
study:
  pool_size: 20
  fractions: [0.25, 0.5]
"""


def run(*argv):
    stderr = io.StringIO()

    with contextlib.redirect_stderr(stderr):
        code = main(list(argv))

    return code, stderr.getvalue()


class CliTest(unittest.TestCase):

    maxDiff = None

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.hall = self.path('hall')
        self.config = self.path('quick.yaml')

        with open(self.config, 'w') as fp:
            fp.write(QUICK_RUN)

        code, _ = run('generate', '--seed', '3', '--out-dir', self.hall, *SMALL_HALL)
        self.assertEqual(EXIT_OK, code)

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, *parts) -> str:
        return os.path.join(self.tmp.name, *parts)

    def hall_args(self, measurements: bool = True):
        args = ['--layout', os.path.join(self.hall, 'layout.yaml'),
                '--state', os.path.join(self.hall, 'state.yaml'),
                '--scenario', os.path.join(self.hall, 'scenario.yaml'),
                '--config', self.config]

        if measurements:
            args += ['--measurements', os.path.join(self.hall, 'measurements.csv')]

        return args

    def read(self, *parts) -> bytes:
        with open(self.path(*parts), 'rb') as fp:
            return fp.read()

    def test_generate_reference_sizes(self):
        # When...
        code, _ = run('generate', '--out-dir', self.path('reference'))
        # Then...
        self.assertEqual(EXIT_OK, code)
        layout = formats.read_layout(self.path('reference', 'layout.yaml'))
        self.assertEqual((4, 64, 24), (layout.l, layout.m, layout.n))

    def test_generate_is_repeatable(self):
        run('generate', '--seed', '3', '--out-dir', self.path('again'), *SMALL_HALL)

        for name in ('layout.yaml', 'scenario.yaml', 'state.yaml', 'measurements.csv'):
            self.assertEqual(self.read('hall', name), self.read('again', name), name)

    def test_generate_without_servers(self):
        code, stderr = run('generate', '--out-dir', self.path('empty'), '--servers', '0')

        self.assertEqual(EXIT_DATA, code)
        self.assertIn('server', stderr)

    def test_calibrate_knowledge(self):
        # When...
        code, _ = run('calibrate', *self.hall_args(), '--iters', '3', '--out-dir', self.path('report'))
        # Then...
        self.assertEqual(EXIT_OK, code)
        traces = read_traces(self.path('report', 'traces.csv'))
        self.assertEqual(['4', '5', '6'], [t['solver_calls'] for t in traces])
        best = [float(t['best_mae']) for t in traces]
        self.assertEqual(sorted(best, reverse=True), best)

        with open(self.path('report', 'report.yaml')) as fp:
            report = yaml.safe_load(fp)
        self.assertEqual('knowledge', report['summary']['method'])
        self.assertEqual(6, report['summary']['solver_calls'])
        self.assertEqual(3, report['config']['calibration']['max_iterations'])

        for name in ('flow_rates.csv', 'sensors.csv', 'timing.csv'):
            self.assertTrue(os.path.isfile(self.path('report', name)), name)

    def test_calibrate_is_reproducible(self):
        for out in ('first', 'second'):
            run('calibrate', *self.hall_args(), '--iters', '2', '--seed', '7', '--out-dir', self.path(out))

        for name in ('report.yaml', 'traces.csv', 'flow_rates.csv', 'sensors.csv'):
            self.assertEqual(self.read('first', name), self.read('second', name), name)

    def test_calibrate_heuristic(self):
        code, _ = run('calibrate', *self.hall_args(), '--method', 'heuristic', '--evals', '6',
                      '--out-dir', self.path('heuristic'))

        self.assertEqual(EXIT_OK, code)
        self.assertEqual(6, len(read_traces(self.path('heuristic', 'traces.csv'))))

    def test_calibrate_vanilla(self):
        code, _ = run('calibrate', *self.hall_args(), '--method', 'vanilla', '--iters', '2',
                      '--out-dir', self.path('vanilla'))

        self.assertEqual(EXIT_OK, code)
        self.assertEqual(2, len(read_traces(self.path('vanilla', 'traces.csv'))))

    def test_calibrate_kalibre_alias(self):
        # When...
        code, _ = run('calibrate', *self.hall_args(), '--method', 'kalibre', '--iters', '2',
                      '--out-dir', self.path('kalibre'))
        # Then...
        self.assertEqual(EXIT_OK, code)

        with open(self.path('kalibre', 'report.yaml')) as fp:
            report = yaml.safe_load(fp)
        self.assertEqual('knowledge', report['summary']['method'])
        self.assertEqual('knowledge', report['config']['run']['method'])
        self.assertEqual(2, len(read_traces(self.path('kalibre', 'traces.csv'))))

    def test_unknown_method(self):
        code, stderr = run('calibrate', *self.hall_args(), '--method', 'manual')

        self.assertEqual(EXIT_USAGE, code)
        self.assertIn('manual', stderr)

    def test_unknown_method_programmatically(self):
        with self.assertRaises(UnknownMethodError):
            run_method('manual', None, None, None, None, {}, 0)

    def test_usage_errors(self):
        self.assertEqual(EXIT_USAGE, run()[0])
        self.assertEqual(EXIT_USAGE, run('calibrate', *self.hall_args(), '--solver', 'cfd')[0])
        self.assertEqual(EXIT_USAGE, run('solve', '--layout', 'x.yaml')[0])

    def test_zonal_solver_needs_a_scenario(self):
        args = self.hall_args()
        del args[4:6]

        self.assertEqual(EXIT_USAGE, run('calibrate', *args)[0])

    def test_malformed_measurements(self):
        # Given...
        bad = self.path('bad.csv')
        with open(bad, 'w') as fp:
            fp.write('sensor_id, temperature\nc00, 20.5, 3\n')
        args = self.hall_args(measurements=False) + ['--measurements', bad]
        # When...
        code, stderr = run('calibrate', *args)
        # Then...
        self.assertEqual(EXIT_DATA, code)
        self.assertIn('Line 2 of', stderr)

    def test_solver_failure_still_writes_a_report(self):
        args = self.hall_args() + ['--solver', 'external', '--workdir', self.path('work'),
                                   '--command', '{} {} --sensors x --fail'.format(sys.executable, echo_solver.__file__)]

        code, stderr = run('calibrate', *args, '--out-dir', self.path('aborted'))

        self.assertEqual(EXIT_SOLVER, code)
        self.assertIn('echo solver asked to fail', stderr)

        with open(self.path('aborted', 'report.yaml')) as fp:
            report = yaml.safe_load(fp)
        self.assertEqual(1, report['summary']['solver_calls'])
        self.assertIn('aborted', report['summary'])

    def test_solve_through_the_external_bridge(self):
        # Given...
        layout = formats.read_layout(os.path.join(self.hall, 'layout.yaml'))
        sensors = ','.join(s.id for s in layout.sensors)
        command = '{} {} --sensors {}'.format(sys.executable, echo_solver.__file__, sensors)
        # When...
        code, _ = run('solve', *self.hall_args(measurements=False), '--solver', 'external',
                      '--workdir', self.path('work'), '--command', command, '--out', self.path('solved.csv'))
        # Then...
        self.assertEqual(EXIT_OK, code)
        scenario = formats.read_scenario(os.path.join(self.hall, 'scenario.yaml'), layout)
        solved = formats.read_measurements(self.path('solved.csv'), layout)
        self.assertEqual([scenario.hidden_flow_rates[k % layout.m] for k in range(layout.n)], list(solved.values))

    def test_study_datavolume(self):
        code, _ = run('study-datavolume', *self.hall_args(measurements=False), '--out-dir', self.path('study'))

        self.assertEqual(EXIT_OK, code)
        rows = read_traces(self.path('study', 'study.csv'))
        self.assertEqual(['0.25', '0.5'], [r['fraction'] for r in rows])
        self.assertEqual(['fraction', 'train_samples', 'knowledge_fixed', 'knowledge_trainable', 'vanilla'],
                         list(rows[0]))

    def test_study_fractions_flag(self):
        code, stderr = run('study-datavolume', *self.hall_args(measurements=False), '--fractions', '0.1,abc')

        self.assertEqual(EXIT_USAGE, code)
        self.assertIn('comma separated', stderr)


class LogLevelTest(unittest.TestCase):

    def setUp(self):
        self.env = os.environ.pop('HALLCAL_LOG_LEVEL', None)

    def tearDown(self):
        os.environ.pop('HALLCAL_LOG_LEVEL', None)

        if self.env is not None:
            os.environ['HALLCAL_LOG_LEVEL'] = self.env

    def test_level_from_the_run_configuration(self):
        self.assertEqual('WARNING', resolve_log_level(False, {'run': {'log_level': 'warning'}}))
        self.assertEqual('INFO', resolve_log_level(False, {}))

    def test_environment_beats_the_configuration(self):
        os.environ['HALLCAL_LOG_LEVEL'] = 'error'

        self.assertEqual('ERROR', resolve_log_level(False, {'run': {'log_level': 'WARNING'}}))

    def test_verbose_beats_everything(self):
        os.environ['HALLCAL_LOG_LEVEL'] = 'ERROR'

        self.assertEqual('DEBUG', resolve_log_level(True, {'run': {'log_level': 'WARNING'}}))

    def test_packaged_default(self):
        self.assertEqual('INFO', resolve_log_level(False, load_run_config()))


if __name__ == '__main__':
    unittest.main()
