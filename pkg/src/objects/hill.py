"""
Real-valued witnesses for parameter nodes and Hill-function ODE simulation.

A witness assigns every edge a low value l, a high value h and a threshold θ so
that all strict inequalities of the parameter node hold. Witnesses come from the
same linear systems the factor-graph enumeration decides: the interior point of
maximal slack is blended with a seeded random vertex of the slack-bounded region.

The ODE for node i is ``x_i' = -x_i + prod_groups sum_edges H_e(x_source)`` with
``H+ = l + (h - l) x^n / (θ^n + x^n)`` for activation and
``H- = l + (h - l) θ^n / (θ^n + x^n)`` for repression.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import fsolve

from core.error_handler import handle_errors
from core.exceptions import ConsistencyError, NoOscillationError, SimulationError, WitnessError
from core.records import load_yaml, save_yaml, write_text
from core.settings import get_settings
from utils.linear_feasibility import max_slack
from .dynamics import MAX
from .factor_graph import FactorParameter, product_system, sum_system
from .network import RegulatoryNetwork
from .parameter_graph import ParameterGraph
from .timeseries import PatternDiagram, TimeSeries, extremal_intervals

logger = logging.getLogger(__name__)

LOG_SCALE_LIMIT = 6.0


@dataclass
class RealParameterization:
    """
    Per-edge l, h, θ (indexed like ``net.edges``), Hill exponent and decay rates.

    ``theta[e]`` is the threshold the source of edge e uses for that edge.
    """
    net: RegulatoryNetwork
    parameter: int
    low: np.ndarray
    high: np.ndarray
    theta: np.ndarray
    hill_exponent: float = 10.0
    decay: Optional[np.ndarray] = None
    seed: Optional[int] = None

    def __post_init__(self):
        self.low = np.asarray(self.low, dtype=float)
        self.high = np.asarray(self.high, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        if self.decay is None:
            self.decay = np.ones(self.net.size)
        self.decay = np.asarray(self.decay, dtype=float)

    def interaction_value(self, i: int, state: int) -> float:
        """Value of node i's interaction function in an activation state."""
        position = {e: k for k, e in enumerate(self.net.in_edges(i))}
        total = 1.0
        for group in self.net.interaction[i]:
            total *= sum(self.high[e] if state & (1 << position[e]) else self.low[e] for e in group)
        return total

    def interaction_values(self, i: int) -> np.ndarray:
        return np.array([self.interaction_value(i, s) for s in range(1 << self.net.in_degree(i))])

    def thresholds(self, i: int) -> np.ndarray:
        """Node i's thresholds in out_order."""
        return self.theta[list(self.net.out_edges(i))]

    def to_dict(self) -> Dict[str, Any]:
        names = self.net.names
        return {
            'network': self.net.fingerprint(),
            'parameter': self.parameter,
            'seed': self.seed,
            'hill_exponent': float(self.hill_exponent),
            'decay': [float(d) for d in self.decay],
            'edges': [{'source': names[edge.source], 'target': names[edge.target],
                       'l': float(self.low[e]), 'h': float(self.high[e]), 'theta': float(self.theta[e])}
                      for e, edge in enumerate(self.net.edges)],
        }

    @classmethod
    def from_dict(cls, net: RegulatoryNetwork, data: Dict[str, Any]) -> 'RealParameterization':
        if data.get('network') != net.fingerprint():
            raise WitnessError("Witness was sampled for a different network", data.get('parameter'))
        low = np.zeros(len(net.edges))
        high = np.zeros(len(net.edges))
        theta = np.zeros(len(net.edges))
        for entry in data['edges']:
            e = net.edge_between(net.index(entry['source']), net.index(entry['target']))
            if e is None:
                raise WitnessError(f"No edge {entry['source']} -> {entry['target']}", data.get('parameter'))
            low[e], high[e], theta[e] = entry['l'], entry['h'], entry['theta']
        return cls(net, int(data['parameter']), low, high, theta, float(data.get('hill_exponent', 10.0)),
                   np.asarray(data.get('decay') or np.ones(net.size)), data.get('seed'))

    def save(self, path: str, manifest: Optional[str] = None):
        document = self.to_dict()
        if manifest is not None:
            document['manifest'] = manifest
        save_yaml(document, path)

    @classmethod
    def load(cls, net: RegulatoryNetwork, path: str) -> 'RealParameterization':
        return cls.from_dict(net, load_yaml(path))


def _blend(system, rng: np.random.Generator, margin: float) -> np.ndarray:
    interior = max_slack(system, margin)
    if not interior.feasible:
        raise ConsistencyError("Enumerated parameter has an infeasible inequality system",
                               {'slack': interior.slack})
    vertex = max_slack(system, margin, objective=rng.normal(size=system.n_vars), min_slack=interior.slack / 2)
    if not vertex.feasible:
        return interior.x
    weight = rng.uniform(0.2, 0.8)
    return weight * interior.x + (1.0 - weight) * vertex.x


def _sampled_node(group_sizes: Sequence[int], band: Sequence[int], m: int, rng: np.random.Generator,
                  budget: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = sum(group_sizes)
    band = np.asarray(band)
    chunk = 10_000
    drawn = 0
    while drawn < budget:
        size = min(chunk, budget - drawn)
        drawn += size
        a = 10.0 ** rng.uniform(-3, 3, size=(size, n))
        b = 10.0 ** rng.uniform(-3, 3, size=(size, n))
        low, high = np.minimum(a, b), np.maximum(a, b)
        for row in range(size):
            values = _values_for(group_sizes, low[row], high[row])
            thresholds = _separating_thresholds(values, band, m)
            if thresholds is not None:
                return low[row], high[row], thresholds
    raise WitnessError(f"No witness found in {budget} samples for interaction shape {tuple(group_sizes)}")


def _values_for(group_sizes: Sequence[int], low: np.ndarray, high: np.ndarray) -> np.ndarray:
    n = sum(group_sizes)
    values = np.empty(1 << n)
    for s in range(1 << n):
        chosen = np.where([(s >> k) & 1 for k in range(n)], high, low)
        total, start = 1.0, 0
        for size in group_sizes:
            total *= chosen[start:start + size].sum()
            start += size
        values[s] = total
    return values


def _separating_thresholds(values: np.ndarray, band: np.ndarray, m: int) -> Optional[np.ndarray]:
    """Sorted thresholds inducing ``band`` from ``values``, or None when the values are not separable."""
    thresholds = []
    for j in range(1, m + 1):
        below, above = values[band < j], values[band >= j]
        lo = below.max() if below.size else values.min() / 10.0
        hi = above.min() if above.size else values.max() * 10.0
        if lo >= hi:
            return None
        fraction = j / (m + 1)
        thresholds.append(np.exp((1 - fraction) * np.log(lo) + fraction * np.log(hi)))
    return np.array(thresholds)


def _node_witness(net: RegulatoryNetwork, i: int, param: FactorParameter, rng: np.random.Generator,
                  margin: float, budget: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, m = net.in_degree(i), net.out_degree(i)
    band = param.logic.band
    if net.is_pure_product(i):
        x = _blend(product_system(n, band, m), rng, margin)
        peak = np.abs(x).max() if x.size else 0.0
        if peak > LOG_SCALE_LIMIT:
            x = x * (LOG_SCALE_LIMIT / peak)
        x = np.exp(x)
    elif net.is_pure_sum(i):
        x = _blend(sum_system(n, band, m), rng, margin)
    else:
        group_sizes = [len(g) for g in net.interaction[i]]
        return _sampled_node(group_sizes, band, m, rng, budget)
    return x[:n], x[n:2 * n], x[2 * n:2 * n + m]


@handle_errors()
def sample_region(net: RegulatoryNetwork, pg: ParameterGraph, k: int, seed: int = 0) -> RealParameterization:
    """
    A real witness of parameter node k.

    Node systems are independent: node i's system involves the l, h of its
    in-edges and the thresholds of its out-edges only.

    Raises:
        ConsistencyError: an enumerated node turned out infeasible or the witness fails re-verification
        WitnessError: the sampling fallback found no witness
    """
    settings = get_settings()
    rng = np.random.default_rng(seed)
    params = pg.factor_parameters(k)
    low = np.zeros(len(net.edges))
    high = np.zeros(len(net.edges))
    theta = np.zeros(len(net.edges))
    for i, param in enumerate(params):
        l_values, h_values, sorted_thresholds = _node_witness(net, i, param, rng, settings.lp_margin,
                                                              settings.sample_count)
        for position, e in enumerate(net.in_edges(i)):
            low[e], high[e] = l_values[position], h_values[position]
        out_edges = net.out_edges(i)
        for rank, out_position in enumerate(param.order.perm):
            theta[out_edges[out_position]] = sorted_thresholds[rank]

    rp = RealParameterization(net, k, low, high, theta, settings.hill_exponent, seed=seed)
    problems = check_witness(pg, rp)
    if problems:
        raise ConsistencyError(f"Sampled witness for parameter {k} violates its inequalities",
                               {'parameter': k, 'problems': problems})
    logger.debug(f"Witness for parameter {k} (seed {seed}) verified")
    return rp


def check_witness(pg: ParameterGraph, rp: RealParameterization) -> List[str]:
    """Re-derive every node's band map and threshold order from real values; list disagreements."""
    net = pg.net
    problems = []
    for e, edge in enumerate(net.edges):
        if not 0 < rp.low[e] < rp.high[e]:
            problems.append(f"edge {net.names[edge.source]}->{net.names[edge.target]}: need 0 < l < h")
        if not rp.theta[e] > 0:
            problems.append(f"edge {net.names[edge.source]}->{net.names[edge.target]}: threshold not positive")
    for i, param in enumerate(pg.factor_parameters(rp.parameter)):
        thresholds = rp.thresholds(i)
        perm = tuple(int(p) for p in np.argsort(thresholds, kind='stable'))
        if len(set(thresholds.tolist())) != len(thresholds) or perm != param.order.perm:
            problems.append(f"{net.names[i]}: threshold order {perm} != {param.order.perm}")
        ranked = np.sort(thresholds)
        for s, value in enumerate(rp.interaction_values(i)):
            if np.any(np.isclose(value, ranked, rtol=1e-12, atol=0.0)):
                problems.append(f"{net.names[i]}: state {s} sits on a threshold")
            band = int(np.count_nonzero(ranked < value))
            if band != param.logic.band[s]:
                problems.append(f"{net.names[i]}: state {s} has band {band}, expected {param.logic.band[s]}")
    return problems


class HillSystem:
    """Vectorized right-hand side of the Hill ODE for one witness."""

    def __init__(self, rp: RealParameterization, hill_exponent: Optional[float] = None):
        net = rp.net
        self.rp = rp
        self.n = float(hill_exponent if hill_exponent is not None else rp.hill_exponent)
        self.sources = np.array([edge.source for edge in net.edges], dtype=int)
        self.activating = np.array([edge.activating for edge in net.edges], dtype=bool)
        self.groups = [[list(group) for group in net.interaction[i]] for i in range(net.size)]

    def edge_values(self, x: np.ndarray) -> np.ndarray:
        rp = self.rp
        with np.errstate(over='ignore', divide='ignore', invalid='ignore'):
            ratio = np.power(x[self.sources] / rp.theta, self.n)
            up = np.where(np.isinf(ratio), 1.0, ratio / (1.0 + ratio))
        fraction = np.where(self.activating, up, 1.0 - up)
        return rp.low + (rp.high - rp.low) * fraction

    def __call__(self, x: np.ndarray) -> np.ndarray:
        values = self.edge_values(x)
        production = np.array([np.prod([values[group].sum() for group in groups]) for groups in self.groups])
        return -self.rp.decay * x + production


@dataclass
class Trajectory:
    times: np.ndarray
    values: np.ndarray
    names: List[str]
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def final_state(self) -> np.ndarray:
        return self.values[-1]

    def tail(self, transient: float) -> 'Trajectory':
        """The part of the run after the first ``transient`` fraction of the time span."""
        cutoff = self.times[0] + transient * (self.times[-1] - self.times[0])
        keep = self.times >= cutoff
        return Trajectory(self.times[keep], self.values[keep], list(self.names), dict(self.metadata))

    def as_timeseries(self) -> TimeSeries:
        return TimeSeries(self.times, {name: self.values[:, i] for i, name in enumerate(self.names)})

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=self.names)
        frame.insert(0, 'time', self.times)
        return frame

    def to_csv(self, path: str, comment: Optional[str] = None):
        """Write ``time,<names>``; ``comment`` becomes a leading ``#`` line."""
        text = self.to_frame().to_csv(index=False)
        write_text(text if comment is None else f"# {comment}\n{text}", path)
        logger.info(f"Trajectory with {len(self.times)} samples written to {path}")


def simulate(net: RegulatoryNetwork, rp: RealParameterization, x0: Sequence[float],
             t_end: Optional[float] = None, dt: Optional[float] = None,
             hill_exponent: Optional[float] = None) -> Trajectory:
    """
    Classical fixed-step 4th-order Runge-Kutta integration.

    Raises:
        SimulationError: non-positive initial state, or a non-finite state (reported with its time)
    """
    settings = get_settings()
    t_end = settings.t_end if t_end is None else t_end
    dt = settings.dt if dt is None else dt
    if dt <= 0 or t_end <= 0:
        raise SimulationError(f"Step {dt} and horizon {t_end} must be positive", time=0.0, step=0)
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (net.size,) or np.any(x <= 0):
        raise SimulationError("Initial state must be positive in every component", time=0.0, step=0)

    rhs = HillSystem(rp, hill_exponent)
    steps = int(round(t_end / dt))
    times = np.arange(steps + 1) * dt
    values = np.empty((steps + 1, net.size))
    values[0] = x
    for step in range(1, steps + 1):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * dt * k1)
        k3 = rhs(x + 0.5 * dt * k2)
        k4 = rhs(x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise SimulationError(f"Non-finite state at t = {times[step]:.4g}; reduce the step size",
                                  time=float(times[step]), step=step)
        values[step] = x
    return Trajectory(times, values, list(net.names),
                      {'parameter': rp.parameter, 'dt': dt, 't_end': t_end, 'hill_exponent': rhs.n})


@handle_errors()
def refine_equilibrium(rp: RealParameterization, x_guess: Sequence[float]) -> np.ndarray:
    """Root of the vector field near ``x_guess``."""
    rhs = HillSystem(rp)
    solution, info, ier, message = fsolve(rhs, np.asarray(x_guess, dtype=float), full_output=True, xtol=1e-12)
    if ier != 1 or np.any(solution <= 0) or np.max(np.abs(rhs(solution))) > 1e-8:
        raise SimulationError(f"Equilibrium refinement failed: {message}")
    return solution


def random_initial_conditions(rp: RealParameterization, count: int, seed: int = 0) -> np.ndarray:
    """Log-uniform initial states inside the box spanned by thresholds and interaction values."""
    rng = np.random.default_rng(seed)
    net = rp.net
    lower, upper = np.empty(net.size), np.empty(net.size)
    for i in range(net.size):
        marks = np.concatenate([rp.interaction_values(i) / rp.decay[i], rp.thresholds(i)])
        lower[i] = 0.5 * marks.min()
        upper[i] = 2.0 * marks.max()
    return np.exp(rng.uniform(np.log(lower), np.log(upper), size=(count, net.size)))


def domain_of_state(rp: RealParameterization, x: Sequence[float]) -> Tuple[int, ...]:
    """Domain coordinates: the number of each node's thresholds below its value."""
    return tuple(int(np.count_nonzero(rp.thresholds(i) < x[i])) for i in range(rp.net.size))


def extrema_order(traj: Trajectory, epsilon: Optional[float] = None,
                  transient: Optional[float] = None) -> List[Tuple[str, str]]:
    """
    Cyclic order of extrema over one period after the transient.

    The period is delimited by two consecutive interior maxima of the first
    oscillating variable; the returned sequence starts at the first of them.
    Variables whose post-transient amplitude is below ε times their overall range
    are left out.

    Raises:
        NoOscillationError: no variable oscillates above the noise level
    """
    settings = get_settings()
    epsilon = settings.epsilon if epsilon is None else epsilon
    transient = settings.transient if transient is None else transient
    tail = traj.tail(transient)

    amplitudes = {}
    oscillating = []
    for i, name in enumerate(traj.names):
        overall = float(np.ptp(traj.values[:, i]))
        amplitude = float(np.ptp(tail.values[:, i]))
        amplitudes[name] = amplitude
        if overall > 0 and amplitude > epsilon * overall:
            oscillating.append(name)
    if not oscillating:
        raise NoOscillationError("No variable oscillates above the noise level", amplitudes, epsilon)

    series = tail.as_timeseries().select(oscillating)
    first, last = series.times[0], series.times[-1]
    events = []
    for name in oscillating:
        for interval in extremal_intervals(series, name, epsilon):
            if first < interval.time < last:
                events.append((interval.time, name, interval.kind))
    events.sort()

    reference = [t for t, name, kind in events if name == oscillating[0] and kind == MAX]
    if len(reference) < 2:
        raise NoOscillationError(f"Fewer than two maxima of {oscillating[0]} after the transient",
                                 amplitudes, epsilon)
    start, stop = reference[0], reference[1]
    return [(name, kind) for t, name, kind in events if start <= t < stop]


def subthreshold_oscillations(rp: RealParameterization, traj: Trajectory, epsilon: Optional[float] = None,
                              transient: Optional[float] = None) -> List[str]:
    """
    Variables that oscillate above the noise level without crossing any of their thresholds.

    Such oscillations are invisible to the switching system, so a Morse set that
    fixes the variable can still show it oscillating in simulation.
    """
    settings = get_settings()
    epsilon = settings.epsilon if epsilon is None else epsilon
    tail = traj.tail(settings.transient if transient is None else transient)
    flagged = []
    for i, name in enumerate(traj.names):
        overall = float(np.ptp(traj.values[:, i]))
        if overall == 0 or float(np.ptp(tail.values[:, i])) <= epsilon * overall:
            continue
        levels = {int(np.count_nonzero(rp.thresholds(i) < x)) for x in tail.values[:, i]}
        if len(levels) == 1:
            flagged.append(name)
    return flagged


def is_cyclic_extension(order: Sequence[Tuple[str, str]], diagram: PatternDiagram) -> bool:
    """Whether some rotation of a one-period extrema sequence is a linear extension of the diagram."""
    expected = sorted(e.key for e in diagram.events)
    for shift in range(max(len(order), 1)):
        rotated = list(order[shift:]) + list(order[:shift])
        counts: Dict[Tuple[str, str], int] = {}
        keys = []
        for gene, kind in rotated:
            counts[(gene, kind)] = counts.get((gene, kind), 0) + 1
            ordinal = counts[(gene, kind)]
            keys.append(f"{gene}_{kind}" + ('' if ordinal == 1 else str(ordinal)))
        if sorted(keys) != expected:
            continue
        position = {key: p for p, key in enumerate(keys)}
        if all(position[diagram.events[a].key] < position[diagram.events[b].key] for a, b in diagram.order):
            return True
    return False
