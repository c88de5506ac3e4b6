import unittest

from hallcal.calibration.study import (PoolTooSmallError, build_pool,
                                       split_pool, study_datavolume)
from hallcal.calibration.tests.test_engine import knowledge_surrogate, reference_case
from hallcal.errors import DataError
from hallcal.solvers.zonal import ZonalSolver
from hallcal.surrogate.base import TrainHyper
from hallcal.surrogate.vanilla import VanillaSurrogate


class StudyTest(unittest.TestCase):

    maxDiff = None

    def setUp(self):
        self.scenario, self.state, _ = reference_case(2)
        self.layout = self.scenario.layout
        self.solver = ZonalSolver(self.scenario)

    def test_pool_costs_one_solve_per_sample(self):
        # When...
        pool = build_pool(self.solver, self.state, 20, seed=0, flow_rate_range=(0.1, 0.5))
        # Then...
        self.assertEqual(20, len(pool))
        self.assertEqual(20, self.solver.calls)

        for s in pool:
            self.assertTrue(((s.input.flow_rates >= 0.1) & (s.input.flow_rates <= 0.5)).all())

    def test_split_is_eight_to_two(self):
        pool = build_pool(self.solver, self.state, 20, seed=0)

        train, test = split_pool(pool, 0.2, seed=1)

        self.assertEqual((16, 4), (len(train), len(test)))
        self.assertEqual(set(map(id, pool)), set(map(id, train + test)))

    def test_bad_test_fraction(self):
        with self.assertRaises(DataError):
            split_pool([], 1.0, seed=0)

    def test_table_has_one_cell_per_fraction_and_surrogate(self):
        # Given...
        train, test = split_pool(build_pool(self.solver, self.state, 25, seed=0), 0.2, seed=0)
        builders = {
            'knowledge_fixed': lambda: knowledge_surrogate(self.layout),
            'vanilla': lambda: VanillaSurrogate(2 * self.layout.l + 2 * self.layout.m, self.layout.n,
                                                hyper=TrainHyper(epochs=5, learning_rate=1e-3)),
        }
        # When...
        table = study_datavolume(train, test, builders, (0.25, 0.5))
        # Then...
        self.assertEqual([0.25, 0.5], [cell.fraction for cell in table])
        self.assertEqual([5, 10], [cell.train_samples for cell in table])
        self.assertEqual(['knowledge_fixed', 'vanilla'], list(table[0].errors))
        self.assertTrue(all(v >= 0 for cell in table for v in cell.errors.values()))

    def test_fraction_too_small_for_the_pool(self):
        train, test = split_pool(build_pool(self.solver, self.state, 10, seed=0), 0.2, seed=0)

        with self.assertRaises(PoolTooSmallError):
            study_datavolume(train, test, {'knowledge_fixed': lambda: knowledge_surrogate(self.layout)}, (0.05,))

    def test_pool_of_one(self):
        with self.assertRaises(PoolTooSmallError):
            build_pool(self.solver, self.state, 1, seed=0)


if __name__ == '__main__':
    unittest.main()
