import unittest

import numpy as np

from hypothesis import given, settings
from hypothesis import strategies as st

from hallcal.hall.adjacency import (AllWeightsCutError, ZeroDistanceError,
                                    build_adjacency, hot_aisle_mask)
from hallcal.hall.layout import Aisle, Crac, HallLayout, Sensor, Server


def random_layout(seed: int, l: int = 3, m: int = 8, n: int = 6) -> HallLayout:
    rng = np.random.default_rng(seed)
    cracs = [Crac('c{}'.format(i), tuple(rng.uniform(0, 20, 3))) for i in range(l)]
    servers = [Server('s{}'.format(j), tuple(rng.uniform(0, 20, 3)), '1U', 300.0) for j in range(m)]
    sensors = [Sensor('t{}'.format(k), tuple(rng.uniform(0, 20, 3)), Aisle.HOT if k % 2 else Aisle.COLD)
               for k in range(n)]
    return HallLayout(cracs, servers, sensors)


class BuildAdjacencyTest(unittest.TestCase):

    maxDiff = None

    def test_equidistant_cracs_share_the_sensor(self):
        # Given...
        layout = HallLayout(
            [Crac('c1', (-2.0, 0.0, 0.0)), Crac('c2', (2.0, 0.0, 0.0))],
            [Server('s1', (0.0, 5.0, 0.0))],
            [Sensor('t1', (0.0, 0.0, 0.0), Aisle.COLD), Sensor('t2', (0.0, 4.0, 0.0), Aisle.HOT)],
        )
        # When...
        priors = build_adjacency(layout, cut_threshold=0.0)
        # Then...
        np.testing.assert_allclose([0.5, 0.5], priors.w_cs[:, 0], rtol=0, atol=1e-15)

    def test_weights_follow_reciprocal_distance(self):
        layout = HallLayout(
            [Crac('c1', (1.0, 0.0, 0.0)), Crac('c2', (-3.0, 0.0, 0.0))],
            [Server('s1', (0.0, 5.0, 0.0))],
            [Sensor('t1', (0.0, 0.0, 0.0), Aisle.COLD), Sensor('t2', (0.0, 4.0, 0.0), Aisle.HOT)],
        )

        priors = build_adjacency(layout, cut_threshold=0.0)

        np.testing.assert_allclose([0.75, 0.25], priors.w_cs[:, 0], atol=1e-15)

    def test_sensor_on_a_server(self):
        layout = HallLayout(
            [Crac('c1', (1.0, 0.0, 0.0))],
            [Server('s1', (0.0, 4.0, 0.0))],
            [Sensor('t1', (0.0, 0.0, 0.0), Aisle.COLD), Sensor('t2', (0.0, 4.0, 0.0), Aisle.HOT)],
        )

        with self.assertRaises(ZeroDistanceError) as context:
            build_adjacency(layout)

        self.assertEqual('The server "s1" sits on the sensor "t2", their distance is zero.',
                         str(context.exception))

    def test_cut_threshold_zeroes_far_facilities_and_renormalizes(self):
        layout = HallLayout(
            [Crac('c1', (1.0, 0.0, 0.0)), Crac('c2', (-99.0, 0.0, 0.0))],
            [Server('s1', (0.0, 5.0, 0.0))],
            [Sensor('t1', (0.0, 0.0, 0.0), Aisle.COLD), Sensor('t2', (0.0, 4.0, 0.0), Aisle.HOT)],
        )

        priors = build_adjacency(layout, cut_threshold=0.05)

        # 1/99 normalizes to 0.0099 < 0.05
        np.testing.assert_array_equal([1.0, 0.0], priors.w_cs[:, 0])
        self.assertFalse(priors.support[1, 0])

    def test_threshold_above_every_weight(self):
        layout = HallLayout(
            [Crac('c1', (-2.0, 0.0, 0.0)), Crac('c2', (2.0, 0.0, 0.0))],
            [Server('s1', (0.0, 5.0, 0.0))],
            [Sensor('t1', (0.0, 0.0, 0.0), Aisle.COLD), Sensor('t2', (0.0, 4.0, 0.0), Aisle.HOT)],
        )

        with self.assertRaises(AllWeightsCutError):
            build_adjacency(layout, cut_threshold=0.9)

    def test_power_scale_defaults_to_mean_rated_power(self):
        layout = HallLayout(
            [Crac('c1', (1.0, 0.0, 0.0))],
            [Server('s1', (0.0, 5.0, 0.0), rated_power=200.0), Server('s2', (1.0, 5.0, 0.0), rated_power=400.0)],
            [Sensor('t1', (0.0, 0.0, 0.0), Aisle.COLD), Sensor('t2', (0.0, 4.0, 0.0), Aisle.HOT)],
        )

        self.assertEqual(300.0, build_adjacency(layout).power_scale)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 31))
    def test_columns_sum_to_one(self, seed):
        priors = build_adjacency(random_layout(seed), cut_threshold=0.0)

        np.testing.assert_allclose(1.0, priors.w_cs.sum(axis=0), rtol=0, atol=1e-12)
        np.testing.assert_allclose(1.0, priors.w_ss.sum(axis=0), rtol=0, atol=1e-12)
        self.assertTrue(np.all(priors.w_cs >= 0))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 31))
    def test_nearer_facilities_weigh_more(self, seed):
        layout = random_layout(seed)
        priors = build_adjacency(layout, cut_threshold=0.0)
        distances = np.linalg.norm(layout.server_positions[:, None, :] - layout.sensor_positions[None, :, :],
                                   axis=2)

        for k in range(layout.n):
            order = np.argsort(distances[:, k], kind='stable')
            self.assertTrue(np.all(np.diff(priors.w_ss[order, k]) <= 0))

    def test_deterministic(self):
        first = build_adjacency(random_layout(7))
        second = build_adjacency(random_layout(7))

        self.assertEqual(first.w_cs.tobytes(), second.w_cs.tobytes())
        self.assertEqual(first.w_ss.tobytes(), second.w_ss.tobytes())


class HotAisleMaskTest(unittest.TestCase):

    def test_mask_maps_aisle_tags(self):
        layout = HallLayout(
            [Crac('c1', (1.0, 0.0, 0.0))],
            [Server('s1', (0.0, 5.0, 0.0))],
            [Sensor('t1', (0.0, 0.0, 0.0), Aisle.COLD), Sensor('t2', (0.0, 4.0, 0.0), Aisle.HOT),
             Sensor('t3', (1.0, 4.0, 0.0), Aisle.HOT)],
        )

        np.testing.assert_array_equal([0, 1, 1], hot_aisle_mask(layout))

    def test_mask_length_matches_sensor_count(self):
        layout = random_layout(3, n=24)

        self.assertEqual(24, len(hot_aisle_mask(layout)))
        self.assertEqual(12, int(hot_aisle_mask(layout).sum()))


if __name__ == '__main__':
    unittest.main()
