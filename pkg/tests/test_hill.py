import numpy as np
import pytest

from core.exceptions import NoOscillationError, SimulationError, WitnessError
from objects.dynamics import build_stg, morse_graph
from objects.hill import (HillSystem, RealParameterization, Trajectory, check_witness, domain_of_state,
                          extrema_order, is_cyclic_extension, random_initial_conditions, refine_equilibrium,
                          sample_region, simulate, subthreshold_oscillations)
from objects.phenotypes import PhenotypeSpec, run_sweep
from objects.timeseries import PatternDiagram

# Peaks of the cell-cycle wave: S first, then N and D, then W and C.
WAVE_TIERS = [('S',), ('N', 'D'), ('W', 'C')]
WAVE_PATTERN = {
    'events': [{'gene': gene, 'kind': kind} for gene, kind in [
        ('S', 'max'), ('S', 'min'), ('N', 'max'), ('N', 'min'), ('D', 'max'), ('D', 'min'),
        ('W', 'min'), ('W', 'max'), ('C', 'min'), ('C', 'max')]],
    'order': [['S_max', 'S_min'], ['N_max', 'N_min'], ['D_max', 'D_min'], ['W_min', 'W_max'],
              ['C_min', 'C_max'], ['S_max', 'N_max'], ['S_max', 'D_max'], ['N_max', 'W_max'],
              ['N_max', 'C_max'], ['D_max', 'W_max'], ['D_max', 'C_max']],
}


def sine_trajectory():
    times = np.arange(4001) * 0.01
    values = np.column_stack([2.0 + np.sin(times), 2.0 + np.cos(times)])
    return Trajectory(times, values, ['X', 'Y'])


def single_fixed_point(net, pg, k):
    """Coordinates of the only Morse set when it is a fixed point, else None."""
    mg = morse_graph(build_stg(net, pg, k))
    if len(mg.sets) == 1 and mg.sets[0].kind == 'FP':
        return mg.sets[0].coords
    return None


def peaks_in_wave_order(order):
    first_peak = {}
    for position, (gene, kind) in enumerate(order):
        if kind == 'max':
            first_peak.setdefault(gene, position)
    if any(gene not in first_peak for tier in WAVE_TIERS for gene in tier):
        return False
    positions = [[first_peak[gene] for gene in tier] for tier in WAVE_TIERS]
    return all(max(a) < min(b) for a, b in zip(positions, positions[1:]))


@pytest.fixture
def toggle_witness(toggle, toggle_pg):
    return sample_region(toggle, toggle_pg, 1, seed=0)


class TestSampleRegion:
    def test_witness_satisfies_its_parameter(self, toggle_pg, toggle_witness):
        assert toggle_witness.parameter == 1
        assert check_witness(toggle_pg, toggle_witness) == []

    def test_every_toggle_parameter(self, toggle, toggle_pg):
        for k in range(toggle_pg.size):
            assert check_witness(toggle_pg, sample_region(toggle, toggle_pg, k, seed=3)) == []

    def test_seeded(self, toggle, toggle_pg):
        a = sample_region(toggle, toggle_pg, 4, seed=11)
        b = sample_region(toggle, toggle_pg, 4, seed=11)
        assert np.array_equal(a.theta, b.theta)
        assert np.array_equal(a.high, b.high)

    def test_tampered_witness(self, toggle_pg, toggle_witness):
        toggle_witness.low[0], toggle_witness.high[0] = toggle_witness.high[0], toggle_witness.low[0]
        assert check_witness(toggle_pg, toggle_witness)


class TestRealParameterization:
    def test_save_and_load(self, tmp_path, toggle, toggle_witness):
        path = str(tmp_path / 'witness.yaml')
        toggle_witness.save(path)
        loaded = RealParameterization.load(toggle, path)
        assert loaded.parameter == 1
        assert np.allclose(loaded.low, toggle_witness.low)
        assert np.allclose(loaded.high, toggle_witness.high)
        assert np.allclose(loaded.theta, toggle_witness.theta)

    def test_other_network(self, tmp_path, three_node, toggle_witness):
        path = str(tmp_path / 'witness.yaml')
        toggle_witness.save(path)
        with pytest.raises(WitnessError):
            RealParameterization.load(three_node, path)

    def test_thresholds_follow_out_edges(self, toggle, toggle_witness):
        assert toggle_witness.thresholds(0).shape == (toggle.out_degree(0),)
        assert toggle_witness.interaction_values(0).shape == (2,)


class TestSimulate:
    def test_converges_to_the_stable_domain(self, toggle, toggle_witness):
        x0 = random_initial_conditions(toggle_witness, 1, seed=0)[0]
        traj = simulate(toggle, toggle_witness, x0, t_end=30.0, dt=0.01)
        assert traj.values.shape == (3001, 2)
        assert domain_of_state(toggle_witness, traj.final_state) == (1, 0)

    def test_refine_equilibrium(self, toggle, toggle_witness):
        x0 = random_initial_conditions(toggle_witness, 1, seed=0)[0]
        traj = simulate(toggle, toggle_witness, x0, t_end=30.0, dt=0.01)
        equilibrium = refine_equilibrium(toggle_witness, traj.final_state)
        assert np.max(np.abs(HillSystem(toggle_witness)(equilibrium))) < 1e-8
        assert domain_of_state(toggle_witness, equilibrium) == (1, 0)

    def test_fourth_order_step_halving(self, toggle, toggle_witness):
        x0 = random_initial_conditions(toggle_witness, 1, seed=0)[0]
        runs = [simulate(toggle, toggle_witness, x0, t_end=4.0, dt=dt).values for dt in (0.004, 0.002, 0.001)]
        coarse = np.max(np.abs(runs[0] - runs[1][::2]))
        fine = np.max(np.abs(runs[1] - runs[2][::2]))
        assert 0 < fine < coarse
        # halving the step divides a 4th-order error by about 16
        assert coarse / fine > 10

    def test_runs_settle_in_the_predicted_domain(self, toggle, toggle_pg):
        checked = 0
        for k in range(toggle_pg.size):
            expected = single_fixed_point(toggle, toggle_pg, k)
            if expected is None:
                continue
            rp = sample_region(toggle, toggle_pg, k, seed=k)
            for x0 in random_initial_conditions(rp, 20, seed=k):
                traj = simulate(toggle, rp, x0, t_end=30.0, dt=0.05)
                assert domain_of_state(rp, traj.final_state) == expected, (k, x0)
            checked += 1
            if checked == 3:
                break
        assert checked == 3

    def test_initial_conditions(self, toggle_witness):
        starts = random_initial_conditions(toggle_witness, 5, seed=2)
        assert starts.shape == (5, 2)
        assert np.all(starts > 0)
        assert np.array_equal(starts, random_initial_conditions(toggle_witness, 5, seed=2))

    @pytest.mark.parametrize("x0", [[0.0, 1.0], [1.0, -1.0], [1.0, 1.0, 1.0]])
    def test_bad_initial_state(self, toggle, toggle_witness, x0):
        with pytest.raises(SimulationError):
            simulate(toggle, toggle_witness, x0, t_end=1.0)

    def test_trajectory_frame(self, tmp_path, toggle, toggle_witness):
        traj = simulate(toggle, toggle_witness, [1.0, 1.0], t_end=1.0, dt=0.1)
        frame = traj.to_frame()
        assert list(frame.columns) == ['time', 'X1', 'X2']
        path = tmp_path / 'run.csv'
        traj.to_csv(str(path))
        assert path.read_text().splitlines()[0] == 'time,X1,X2'


class TestExtremaOrder:
    def test_one_period(self):
        order = extrema_order(sine_trajectory(), epsilon=0.1, transient=0.5)
        assert order == [('X', 'max'), ('Y', 'min'), ('X', 'min'), ('Y', 'max')]

    def test_cyclic_extension(self, xy_left, xy_right):
        order = extrema_order(sine_trajectory(), epsilon=0.1, transient=0.5)
        assert is_cyclic_extension(order, xy_left)
        assert not is_cyclic_extension(order, xy_right)

    def test_constant_run_does_not_oscillate(self):
        times = np.arange(100) * 0.1
        traj = Trajectory(times, np.ones((100, 2)), ['X', 'Y'])
        with pytest.raises(NoOscillationError):
            extrema_order(traj, epsilon=0.1, transient=0.5)

    def test_wrong_event_set(self, xy_left):
        assert not is_cyclic_extension([('X', 'max'), ('X', 'min')], xy_left)

    def test_subthreshold_oscillation(self, toggle_witness):
        times = np.arange(2001) * 0.01
        above = toggle_witness.thresholds(0)[0] * (3.0 + np.sin(times))
        crossing = toggle_witness.thresholds(1)[0] * (1.0 + 0.5 * np.sin(times))
        traj = Trajectory(times, np.column_stack([above, crossing]), ['X1', 'X2'])
        assert subthreshold_oscillations(toggle_witness, traj, epsilon=0.1, transient=0.5) == ['X1']


@pytest.mark.slow
class TestMiniWavepoolWave:
    def test_matching_witnesses_peak_in_wave_order(self, wavepool_pg):
        net = wavepool_pg.net
        pattern = PatternDiagram.from_dict(WAVE_PATTERN)
        spec = PhenotypeSpec.from_dict({'name': 'wave', 'kind': 'WT_CYCLING'}, pattern=pattern)
        matches = run_sweep(wavepool_pg, spec, sample=(40000, 3)).matches
        assert len(matches) >= 3

        in_order = 0
        for record in matches[:20]:
            rp = sample_region(net, wavepool_pg, record['parameter'], seed=0)
            x0 = random_initial_conditions(rp, 1, seed=0)[0]
            traj = simulate(net, rp, x0, t_end=200.0, dt=0.01)
            try:
                order = extrema_order(traj, transient=0.5)
            except NoOscillationError:
                continue
            if peaks_in_wave_order(order):
                in_order += 1
            if in_order == 3:
                break
        assert in_order >= 3
