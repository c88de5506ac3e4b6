import os
import tempfile
import unittest

import numpy as np

from hallcal.components.factories import (ConfigFileError, load_run_config,
                                          provider_from_yaml)
from hallcal.solvers.external import ExternalSolver
from hallcal.solvers.tests.test_zonal import row_layout
from hallcal.solvers.zonal import Scenario, ZonalSolver
from hallcal.surrogate.knowledge import KnowledgeSurrogate
from hallcal.surrogate.vanilla import VanillaSurrogate


class LoadRunConfigTest(unittest.TestCase):

    maxDiff = None

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, text: str) -> str:
        path = os.path.join(self.tmp.name, 'run.yaml')
        with open(path, 'w') as fp:
            fp.write(text)
        return path

    def test_defaults_hold_the_published_hyperparameters(self):
        conf = load_run_config()

        self.assertEqual({'lower': 0.01, 'upper': 3.0}, conf['calibration']['bounds'])
        self.assertEqual(16, conf['calibration']['augment_batch'])
        self.assertEqual(10, conf['de']['population_size'])
        self.assertEqual(0.6, conf['de']['crossover_rate'])
        self.assertEqual(100, conf['de']['max_iterations'])
        self.assertEqual({'epochs': 150, 'learning_rate': 0.1, 'decay': 0.8, 'decay_every': 50},
                         conf['training']['knowledge'])
        self.assertEqual(1.0, conf['penalty']['regularization'])
        self.assertEqual(5.0, conf['heuristic']['sigma0'])

    def test_user_file_is_deep_merged(self):
        # Given...
        path = self.write('calibration:\n  max_iterations: 4\nde:\n  population_size: 20\n')
        # When...
        conf = load_run_config(path)
        # Then...
        self.assertEqual(4, conf['calibration']['max_iterations'])
        self.assertEqual(16, conf['calibration']['augment_batch'])
        self.assertEqual(20, conf['de']['population_size'])
        self.assertEqual(0.6, conf['de']['crossover_rate'])

    def test_overrides_win(self):
        path = self.write('run:\n  seed: 4\n')

        conf = load_run_config(path, {'run': {'seed': 9}})

        self.assertEqual(9, conf['run']['seed'])
        self.assertEqual('INFO', conf['run']['log_level'])

    def test_empty_file(self):
        self.assertEqual(load_run_config(), load_run_config(self.write('')))

    def test_file_that_is_not_a_mapping(self):
        with self.assertRaises(ConfigFileError):
            load_run_config(self.write('- 1\n- 2\n'))


class PackagedComponentsTest(unittest.TestCase):

    def setUp(self):
        self.layout = row_layout()
        self.provider = provider_from_yaml()
        self.provider.set('layout', self.layout)

    def tearDown(self):
        os.environ.pop('HALLCAL_SOLVER_TIMEOUT', None)

    def test_zonal_solver(self):
        scenario = Scenario(self.layout, np.full(self.layout.m, 0.2))
        self.provider.set('scenario', scenario)

        solver = self.provider.get('solver.zonal')

        self.assertIsInstance(solver, ZonalSolver)
        self.assertIs(scenario, solver.scenario)

    def test_knowledge_surrogates(self):
        fixed = self.provider.get('surrogate.knowledge')
        trainable = self.provider.get('surrogate.knowledge_trainable')

        self.assertIsInstance(fixed, KnowledgeSurrogate)
        self.assertEqual(4 * self.layout.n, fixed.parameter_count)
        self.assertGreater(trainable.parameter_count, fixed.parameter_count)
        self.assertEqual(150, fixed.hyper.epochs)

    def test_vanilla_surrogate_takes_a_seed(self):
        first = self.provider.get('surrogate.vanilla', seed=3)
        second = self.provider.get('surrogate.vanilla', seed=3)

        self.assertIsInstance(first, VanillaSurrogate)
        np.testing.assert_array_equal(first.snapshot(), second.snapshot())
        self.assertEqual(300, first.hyper.epochs)

    def test_external_solver_timeout_from_the_environment(self):
        # Given...
        os.environ['HALLCAL_SOLVER_TIMEOUT'] = '42'
        # When...
        solver = self.provider.get('solver.external', workdir='/tmp', command='run-cfd')
        # Then...
        self.assertIsInstance(solver, ExternalSolver)
        self.assertEqual(42.0, solver.timeout)
        self.assertEqual(['run-cfd'], solver.command)


if __name__ == '__main__':
    unittest.main()
