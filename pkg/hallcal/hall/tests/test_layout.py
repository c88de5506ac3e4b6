import unittest

import numpy as np

from hallcal.errors import DimensionMismatchError
from hallcal.hall.layout import (Aisle, Crac, DuplicateIdError,
                                 DuplicatePositionError,
                                 EmptyFacilityClassError, HallLayout,
                                 InvalidRatedPowerError,
                                 MissingAisleCoverageError,
                                 NonFinitePositionError, OperatingState,
                                 Sensor, Server, SystemInput, validate_layout)


def minimal_layout(**overrides):
    parts = dict(
        cracs=[Crac('c1', (0.0, 0.0, 1.0)), Crac('c2', (10.0, 0.0, 1.0))],
        servers=[Server('s{}'.format(i), (2.0 + i, 2.0, 1.0), '1U', 300.0) for i in range(4)],
        sensors=[Sensor('t1', (3.0, 1.0, 1.0), Aisle.COLD), Sensor('t2', (3.0, 3.0, 1.5), Aisle.HOT)],
    )
    parts.update(overrides)
    return HallLayout(**parts)


class ValidateLayoutTest(unittest.TestCase):

    maxDiff = None

    def test_minimal_valid_layout_is_returned_unchanged(self):
        # Given...
        layout = minimal_layout()
        # When...
        validated = validate_layout(layout)
        # Then...
        self.assertIs(layout, validated)
        self.assertEqual((2, 4, 2), (layout.l, layout.m, layout.n))

    def test_duplicate_server_id(self):
        servers = [Server('s1', (1.0, 2.0, 1.0)), Server('s1', (2.0, 2.0, 1.0))]

        with self.assertRaises(DuplicateIdError) as context:
            validate_layout(minimal_layout(servers=servers))

        self.assertEqual('The server id "s1" is used more than once.', str(context.exception))

    def test_only_cold_sensors(self):
        sensors = [Sensor('t1', (3.0, 1.0, 1.0)), Sensor('t2', (4.0, 1.0, 1.0))]

        with self.assertRaises(MissingAisleCoverageError) as context:
            validate_layout(minimal_layout(sensors=sensors))

        self.assertEqual('A hall needs at least one hot aisle sensor, none was found.',
                         str(context.exception))

    def test_no_servers(self):
        with self.assertRaises(EmptyFacilityClassError):
            validate_layout(minimal_layout(servers=[]))

    def test_single_sensor(self):
        with self.assertRaises(EmptyFacilityClassError):
            validate_layout(minimal_layout(sensors=[Sensor('t1', (3.0, 3.0, 1.0), Aisle.HOT)]))

    def test_non_finite_position(self):
        cracs = [Crac('c1', (0.0, float('nan'), 1.0))]

        with self.assertRaises(NonFinitePositionError):
            validate_layout(minimal_layout(cracs=cracs))

    def test_shared_position_within_a_class(self):
        cracs = [Crac('c1', (0.0, 0.0, 1.0)), Crac('c2', (0.0, 0.0, 1.0))]

        with self.assertRaises(DuplicatePositionError):
            validate_layout(minimal_layout(cracs=cracs))

    def test_zero_rated_power(self):
        with self.assertRaises(InvalidRatedPowerError):
            validate_layout(minimal_layout(servers=[Server('s1', (1.0, 2.0, 1.0), rated_power=0.0)]))


class SystemInputTest(unittest.TestCase):

    def test_vector_round_trip_keeps_field_order(self):
        # Given...
        x = SystemInput([20.0, 21.0], [0.5, 0.6], [100.0, 200.0, 300.0], [0.1, 0.2, 0.3])
        # When...
        vector = x.as_vector()
        back = SystemInput.from_vector(vector, 2, 3)
        # Then...
        np.testing.assert_array_equal([20.0, 21.0, 0.5, 0.6, 100.0, 200.0, 300.0, 0.1, 0.2, 0.3], vector)
        np.testing.assert_array_equal(x.flow_rates, back.flow_rates)

    def test_state_configures_flow_rates(self):
        state = OperatingState([20.0], [0.5], [100.0, 200.0])

        x = state.with_flow_rates([0.2, 0.3])

        np.testing.assert_array_equal([0.2, 0.3], x.flow_rates)
        np.testing.assert_array_equal(state.powers, x.state.powers)

    def test_mismatched_flow_rates(self):
        with self.assertRaises(DimensionMismatchError):
            SystemInput([20.0], [0.5], [100.0, 200.0], [0.2])

    def test_arrays_are_read_only(self):
        x = SystemInput([20.0], [0.5], [100.0], [0.2])

        with self.assertRaises(ValueError):
            x.flow_rates[0] = 1.0

    def test_check_against_layout(self):
        layout = minimal_layout()
        x = SystemInput([20.0, 20.0], [0.5, 0.5], [100.0], [0.2])

        with self.assertRaises(DimensionMismatchError):
            x.check(layout)


if __name__ == '__main__':
    unittest.main()
