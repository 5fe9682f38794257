import numpy as np
import pytest

from core.exceptions import ParameterIndexError, RestrictionShapeError
from objects.parameter_graph import (build_parameter_graph, clb2_restriction_sets, find_parameters,
                                     level_restriction, parameters_with_factors, pg_size, restriction_label,
                                     restriction_labels, restriction_level)


class TestParameterGraph:
    def test_toggle_size(self, toggle_pg):
        assert toggle_pg.radices == (3, 3)
        assert toggle_pg.size == 9

    def test_three_node_size(self, three_node_pg):
        assert three_node_pg.radices == (6, 12, 3)
        assert three_node_pg.size == 216
        assert three_node_pg.certified

    def test_index_round_trip(self, three_node_pg):
        for k in (0, 1, 71, 72, 215):
            assert three_node_pg.tuple_to_index(three_node_pg.index_to_tuple(k)) == k

    def test_node_zero_is_least_significant(self, three_node_pg):
        assert three_node_pg.index_to_tuple(1) == (1, 0, 0)
        assert three_node_pg.index_to_tuple(6) == (0, 1, 0)
        assert three_node_pg.index_to_tuple(72) == (0, 0, 1)

    def test_out_of_range(self, three_node_pg):
        with pytest.raises(ParameterIndexError):
            three_node_pg.index_to_tuple(216)
        with pytest.raises(ParameterIndexError):
            three_node_pg.index_to_tuple(-1)
        with pytest.raises(ParameterIndexError):
            three_node_pg.tuple_to_index((6, 0, 0))

    def test_adjacency_changes_one_coordinate(self, three_node_pg):
        k = 100
        digits = three_node_pg.index_to_tuple(k)
        for other in three_node_pg.adjacent(k):
            changed = [a != b for a, b in zip(digits, three_node_pg.index_to_tuple(other))]
            assert sum(changed) == 1
            assert k in three_node_pg.adjacent(other)

    def test_toggle_adjacency(self, toggle_pg):
        # factor 1 of X1 is adjacent to factors 0 and 2
        assert toggle_pg.adjacent(toggle_pg.tuple_to_index((1, 1))) == [
            toggle_pg.tuple_to_index((1, 0)), toggle_pg.tuple_to_index((0, 1)),
            toggle_pg.tuple_to_index((2, 1)), toggle_pg.tuple_to_index((1, 2))]

    def test_remainder(self, three_node_pg):
        assert three_node_pg.remainder_size(2) == 72
        k = three_node_pg.tuple_to_index((4, 7, 2))
        assert three_node_pg.remainder_of(k, 2) == (4, 7)
        assert three_node_pg.remainder_index(k, 2) == 4 + 6 * 7
        assert three_node_pg.remainder_index(k, 0) == 7 + 12 * 2

    def test_inequalities_per_node(self, toggle_pg):
        chains = toggle_pg.inequalities(1)
        assert set(chains) == {'X1', 'X2'}
        assert chains['X2'] == '{l[X1->X2], h[X1->X2]} < θ[X1->X2]'

    def test_pg_size(self, toggle):
        assert pg_size(toggle) == 9

    def test_every_three_node_index_round_trips(self, three_node_pg):
        assert [three_node_pg.tuple_to_index(three_node_pg.index_to_tuple(k)) for k in range(216)] == \
            list(range(216))


@pytest.mark.slow
class TestMiniWavepool:
    def test_size(self, wavepool_pg):
        """
        Pinned size of the bundled wiring.

        The reference total 275,466,240 factors as 2^11 3^2 5 7^2 61, while the N, W and
        C radices alone contribute 3^3, so that total cannot come from this network shape.
        """
        names = wavepool_pg.net.names
        assert list(names) == ['S', 'N', 'D', 'W', 'C']
        assert wavepool_pg.radices == (212208, 3, 40, 6, 60)
        assert wavepool_pg.size == 9_167_385_600
        assert wavepool_pg.size == wavepool_pg.remainder_size(names.index('C')) * 60

    def test_random_index_round_trips(self, wavepool_pg):
        rng = np.random.default_rng(11)
        for k in rng.integers(0, wavepool_pg.size, size=10_000):
            digits = wavepool_pg.index_to_tuple(int(k))
            assert all(0 <= d < r for d, r in zip(digits, wavepool_pg.radices))
            assert wavepool_pg.tuple_to_index(digits) == int(k)


class TestRestrictions:
    def test_clb2_partition(self, fan_out):
        pg = build_parameter_graph(fan_out)
        labels = clb2_restriction_sets(pg, 0)
        assert len(labels) == 60
        counts = {label: labels.count(label) for label in set(labels)}
        assert counts == {'WT': 36, 'ON': 6, 'OFF': 6, 'INT_H': 6, 'INT_L': 6}

    def test_clb2_shape(self, toggle_pg):
        with pytest.raises(RestrictionShapeError):
            clb2_restriction_sets(toggle_pg, 0)

    def test_level_restriction_needs_one_input(self, three_node_pg):
        with pytest.raises(RestrictionShapeError):
            level_restriction(three_node_pg, 0)

    def test_single_threshold_labels(self, toggle_pg):
        assert restriction_labels(toggle_pg, 0) == ['OFF', 'WT', 'ON']

    @pytest.mark.parametrize("label, m, level", [
        ('OFF', 3, 0), ('INT_L', 3, 1), ('INT_H', 3, 2), ('ON', 3, 3), ('WT', 3, None),
        ('ON', 1, 1), ('INT_1', 2, 1),
    ])
    def test_labels_and_levels(self, label, m, level):
        assert restriction_level(label, m) == level
        assert restriction_label(level, m) == label

    def test_intermediate_label_needs_three_thresholds(self):
        with pytest.raises(RestrictionShapeError):
            restriction_level('INT_H', 1)


class TestFindParameters:
    def test_band_filters(self, toggle_pg):
        assert list(find_parameters(toggle_pg, {0: {'band': (0, 1)}, 1: {'band': (0, 0)}})) == [1]

    def test_label_filter(self, toggle_pg):
        found = list(find_parameters(toggle_pg, {1: {'label': 'OFF'}}))
        assert found == [0, 1, 2]

    def test_ascending_and_complete(self, three_node_pg):
        found = list(find_parameters(three_node_pg, {1: {'perm': (1, 0)}}))
        assert found == sorted(found)
        assert len(found) == 6 * 6 * 3

    def test_no_filters_enumerates_everything(self, toggle_pg):
        assert list(find_parameters(toggle_pg, {})) == list(range(9))

    def test_parameters_with_factors(self, toggle_pg):
        assert sorted(parameters_with_factors(toggle_pg, 0, [2])) == [2, 5, 8]
