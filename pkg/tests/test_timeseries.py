import numpy as np
import pytest

from core.exceptions import PatternError, TimeSeriesError
from objects.timeseries import (PROXY_SETS, PatternDiagram, PatternEvent, TimeSeries, build_pattern_diagram,
                                count_linear_extensions, discretize, extremal_intervals, linear_extensions,
                                load_csv)

TRIANGLE = [0, 1, 2, 3, 4, 3, 2, 1, 0]


def triangle_series():
    times = np.arange(9, dtype=float)
    return TimeSeries(times, {'X': np.array(TRIANGLE, dtype=float),
                              'Y': 4.0 - np.array(TRIANGLE, dtype=float)})


class TestTimeSeries:
    def test_needs_three_samples(self):
        with pytest.raises(TimeSeriesError):
            TimeSeries([0.0, 1.0], {'X': [1.0, 2.0]})

    def test_time_must_increase(self):
        with pytest.raises(TimeSeriesError):
            TimeSeries([0.0, 2.0, 1.0], {'X': [1.0, 2.0, 3.0]})

    def test_non_finite(self):
        with pytest.raises(TimeSeriesError):
            TimeSeries([0.0, 1.0, 2.0], {'X': [1.0, np.nan, 3.0]})

    def test_proxies_rename_columns(self):
        genes = sorted(set(PROXY_SETS['Swi5-Nrm1'].values()))
        ts = TimeSeries([0.0, 1.0, 2.0], {g: [1.0, 2.0, 3.0] for g in genes})
        renamed = ts.with_proxies(PROXY_SETS['Swi5-Nrm1'])
        assert renamed.genes == ['S', 'N', 'D', 'W', 'C']


class TestLoadCsv:
    def test_load(self, tmp_path):
        path = tmp_path / 'series.csv'
        path.write_text("time,A,B\n0,1,5\n1,2,4\n2,3,3\n3,2,4\n")
        ts = load_csv(str(path))
        assert ts.genes == ['A', 'B']
        assert list(ts.values['A']) == [1.0, 2.0, 3.0, 2.0]

    def test_gene_subset(self, tmp_path):
        path = tmp_path / 'series.csv'
        path.write_text("time,A,B\n0,1,5\n1,2,4\n2,3,3\n")
        assert load_csv(str(path), genes=['B']).genes == ['B']

    @pytest.mark.parametrize("content", [
        "time,A\n0,1\n1,2\n",
        "time,A,B\n0,1,2\n1,2\n2,3,4\n",
        "time,A\n0,1\n1,x\n2,3\n",
        "t,A\n0,1\n1,2\n2,3\n",
        "time,A\n0,1\n2,2\n1,3\n",
        "",
    ])
    def test_malformed(self, tmp_path, content):
        path = tmp_path / 'bad.csv'
        path.write_text(content)
        with pytest.raises(TimeSeriesError):
            load_csv(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(TimeSeriesError):
            load_csv(str(tmp_path / 'absent.csv'))


class TestExtremalIntervals:
    def test_triangle(self):
        intervals = extremal_intervals(triangle_series(), 'X', 0.10)
        assert [i.kind for i in intervals] == ['min', 'max', 'min']
        assert [i.time for i in intervals] == [0.0, 4.0, 8.0]
        assert intervals[0].t_lo == 0.0
        assert intervals[0].t_hi == pytest.approx(0.8)
        assert (intervals[1].t_lo, intervals[1].t_hi) == (pytest.approx(3.2), pytest.approx(4.8))
        assert intervals[2].t_lo == pytest.approx(7.2)

    def test_monotone_series_has_endpoint_extrema(self):
        ts = TimeSeries(np.arange(5.0), {'X': np.arange(5.0)})
        intervals = extremal_intervals(ts, 'X', 0.10)
        assert [(i.kind, i.time) for i in intervals] == [('min', 0.0), ('max', 4.0)]

    def test_constant_series_has_no_extrema(self):
        ts = TimeSeries(np.arange(5.0), {'X': np.ones(5)})
        assert extremal_intervals(ts, 'X', 0.10) == []

    def test_small_wiggles_are_noise(self):
        values = np.array([0, 1, 2, 3, 4, 3.9, 4.0, 3, 2, 1, 0], dtype=float)
        ts = TimeSeries(np.arange(values.size, dtype=float), {'X': values})
        assert [i.kind for i in extremal_intervals(ts, 'X', 0.10)] == ['min', 'max', 'min']

    def test_larger_noise_widens_intervals(self):
        narrow = extremal_intervals(triangle_series(), 'X', 0.05)[1]
        wide = extremal_intervals(triangle_series(), 'X', 0.20)[1]
        assert wide.t_lo < narrow.t_lo and narrow.t_hi < wide.t_hi

    @pytest.mark.parametrize("epsilon", [0.0, 0.5, -0.1])
    def test_noise_level_range(self, epsilon):
        with pytest.raises(TimeSeriesError):
            extremal_intervals(triangle_series(), 'X', epsilon)

    def test_unknown_gene(self):
        with pytest.raises(TimeSeriesError):
            extremal_intervals(triangle_series(), 'Q')


class TestPatternDiagram:
    def test_triangle_and_mirror(self):
        diagram = discretize(triangle_series(), 0.10)
        keys = sorted(e.key for e in diagram.events)
        assert keys == ['X_max', 'X_min', 'X_min2', 'Y_max', 'Y_max2', 'Y_min']
        assert diagram.less(diagram.index('X_min'), diagram.index('Y_min'))
        assert not diagram.less(diagram.index('X_min'), diagram.index('Y_max'))
        assert not diagram.less(diagram.index('Y_max'), diagram.index('X_min'))
        assert count_linear_extensions(diagram) == 8

    def test_gene_chain(self):
        diagram = discretize(triangle_series(), 0.10, genes=['X'])
        chain = diagram.gene_chain('X')
        assert [diagram.events[i].key for i in chain] == ['X_min', 'X_max', 'X_min2']
        assert count_linear_extensions(diagram) == 1

    def test_max_events_per_gene(self):
        diagram = discretize(triangle_series(), 0.10, max_events_per_gene=2)
        assert len(diagram) == 4

    def test_left_and_right_patterns(self, xy_left, xy_right):
        assert count_linear_extensions(xy_left) == 2
        assert count_linear_extensions(xy_right) == 2
        assert xy_left.variables == ['X', 'Y']
        assert len(xy_left.covers()) == 4

    def test_cycle_in_order_is_rejected(self):
        events = [PatternEvent('X', 'min'), PatternEvent('X', 'max')]
        with pytest.raises(PatternError):
            PatternDiagram(events, frozenset({(0, 1), (1, 0)}))

    def test_duplicate_events(self):
        events = [PatternEvent('X', 'min'), PatternEvent('X', 'min')]
        with pytest.raises(PatternError):
            PatternDiagram(events, frozenset())

    def test_order_is_transitively_closed(self):
        events = [PatternEvent('X', 'min'), PatternEvent('X', 'max'), PatternEvent('X', 'min', 2)]
        diagram = PatternDiagram(events, frozenset({(0, 1), (1, 2)}))
        assert diagram.less(0, 2)
        assert diagram.covers() == [(0, 1), (1, 2)]

    def test_save_and_load(self, tmp_path, xy_left):
        path = str(tmp_path / 'pattern.yaml')
        xy_left.save(path)
        loaded = PatternDiagram.load(path)
        assert loaded.events == xy_left.events
        assert loaded.order == xy_left.order

    def test_invalid_document(self):
        with pytest.raises(PatternError):
            PatternDiagram.from_dict({'events': [{'gene': 'X', 'kind': 'peak'}]})
        with pytest.raises(PatternError):
            PatternDiagram.from_dict({'events': [{'gene': 'X', 'kind': 'min'}], 'order': [['X_min', 'Y_max']]})

    def test_intervals_in_metadata(self):
        diagram = build_pattern_diagram(extremal_intervals(triangle_series(), 'X', 0.10))
        assert diagram.metadata['intervals']['X_max'] == [pytest.approx(3.2), pytest.approx(4.8)]


class TestLinearExtensions:
    def test_enumeration_matches_count(self):
        diagram = discretize(triangle_series(), 0.10)
        extensions = list(linear_extensions(diagram, cap=100))
        assert len(extensions) == count_linear_extensions(diagram)
        assert len(set(extensions)) == len(extensions)

    def test_cap(self):
        diagram = discretize(triangle_series(), 0.10)
        enumerator = linear_extensions(diagram, cap=3)
        assert len(list(enumerator)) == 3
        assert enumerator.capped

    def test_antichain(self):
        events = [PatternEvent(g, 'min') for g in 'ABCD']
        assert count_linear_extensions(PatternDiagram(events, frozenset())) == 24

    def test_empty(self):
        assert count_linear_extensions(PatternDiagram([], frozenset())) == 1
