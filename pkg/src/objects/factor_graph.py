"""
Factor parameters and factor graphs for a single node.

A logic parameter assigns every activation state of a node's inputs an output
band: the number of the node's thresholds lying below the interaction value in
that state. Activation state ``s`` is a bitmask over the node's inputs (in
input order); bit k is set when input k sits on the side of its threshold that
contributes ``h`` (above it for an activating edge, below it for a repressing
one). An order parameter lists the node's out-edges by ascending threshold.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import ConsistencyError, EnumerationGuardError, ParameterIndexError
from core.settings import get_settings
from utils.linear_feasibility import StrictSystem, max_slack
from .network import RegulatoryNetwork

logger = logging.getLogger(__name__)

SAMPLE_LOG_RANGE = (-3.0, 3.0)


@dataclass(frozen=True, order=True)
class LogicParameter:
    """Band map indexed by activation state bitmask."""
    band: Tuple[int, ...]

    @property
    def n_inputs(self) -> int:
        return len(self.band).bit_length() - 1

    def is_monotone(self) -> bool:
        return is_monotone(self.band)

    def is_constant(self) -> bool:
        return len(set(self.band)) == 1

    def describe(self, state_labels: Sequence[str], threshold_labels: Sequence[str]) -> str:
        """
        Inequality chain such as ``l[X->Y] < θ[Y->X] < h[X->Y]``.

        Args:
            state_labels: interaction value label per activation state
            threshold_labels: threshold labels in ascending (sorted) order
        """
        parts = []
        for b in range(len(threshold_labels) + 1):
            block = [state_labels[s] for s, band in enumerate(self.band) if band == b]
            if len(block) == 1:
                parts.append(block[0])
            elif block:
                parts.append('{' + ', '.join(block) + '}')
            if b < len(threshold_labels):
                parts.append(threshold_labels[b])
        return ' < '.join(parts)


@dataclass(frozen=True, order=True)
class OrderParameter:
    """Out-edge positions (indices into the node's out_order) in ascending threshold order."""
    perm: Tuple[int, ...]

    def position(self, out_position: int) -> int:
        """0-based sorted position of the threshold belonging to out-edge ``out_position``."""
        return self.perm.index(out_position)


@dataclass(frozen=True)
class FactorParameter:
    """A (logic, order) pair for one node."""
    logic: LogicParameter
    order: OrderParameter

    def threshold_position(self, out_position: int) -> int:
        return self.order.position(out_position)

    def inequalities(self, net: RegulatoryNetwork, i: int) -> str:
        """Human-readable inequality chain for node i."""
        return self.logic.describe(state_labels(net, i),
                                   [threshold_labels(net, i)[p] for p in self.order.perm])


@dataclass
class FactorGraph:
    """
    All realizable factor parameters of one node, with single-inequality adjacency.

    ``params`` is ordered by order permutation first, then by band map.
    """
    node: int
    params: List[FactorParameter]
    adjacency: List[Tuple[int, ...]]
    logics: List[LogicParameter]
    orders: List[OrderParameter]
    certified: bool = True
    _lookup: Dict[FactorParameter, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._lookup = {param: k for k, param in enumerate(self.params)}

    @property
    def size(self) -> int:
        return len(self.params)

    def __len__(self) -> int:
        return len(self.params)

    def __getitem__(self, k: int) -> FactorParameter:
        if not 0 <= k < len(self.params):
            raise ParameterIndexError(f"Factor index {k} out of range for node {self.node}",
                                      index=k, size=len(self.params))
        return self.params[k]

    def index_of(self, param: FactorParameter) -> int:
        try:
            return self._lookup[param]
        except KeyError:
            raise ParameterIndexError(f"Factor parameter {param} not realizable at node {self.node}",
                                      index=str(param), size=len(self.params))

    def find(self, band: Sequence[int], perm: Optional[Sequence[int]] = None) -> int:
        """Index of the parameter with the given band map (and order, default identity)."""
        order = OrderParameter(tuple(perm) if perm is not None else tuple(range(len(self.orders[0].perm))))
        return self.index_of(FactorParameter(LogicParameter(tuple(band)), order))

    def edges(self) -> Iterator[Tuple[int, int]]:
        for a, neighbors in enumerate(self.adjacency):
            for b in neighbors:
                if a < b:
                    yield a, b

    def degree(self, k: int) -> int:
        return len(self.adjacency[k])


def is_monotone(band: Sequence[int]) -> bool:
    n = len(band).bit_length() - 1
    for s in range(len(band)):
        for k in range(n):
            if not s & (1 << k) and band[s] > band[s | (1 << k)]:
                return False
    return True


def monotone_maps(n_inputs: int, m: int) -> Iterator[Tuple[int, ...]]:
    """All monotone band maps from the 2^n activation states to {0..m}, in lexicographic order."""
    size = 1 << n_inputs
    band = [0] * size

    def assign(s: int):
        if s == size:
            yield tuple(band)
            return
        low = 0
        for k in range(n_inputs):
            if s & (1 << k):
                low = max(low, band[s ^ (1 << k)])
        for b in range(low, m + 1):
            band[s] = b
            yield from assign(s + 1)

    yield from assign(0)


def state_labels(net: RegulatoryNetwork, i: int) -> List[str]:
    """Interaction value labels per activation state, e.g. ``l[Y->X]*h[Z->X]`` or ``(l[A->X]+h[B->X])``."""
    inputs = net.in_edges(i)
    position = {e: k for k, e in enumerate(inputs)}
    labels = []
    for s in range(1 << len(inputs)):
        factors = []
        for group in net.interaction[i]:
            terms = []
            for e in group:
                kind = 'h' if s & (1 << position[e]) else 'l'
                terms.append(f"{kind}[{net.names[net.edges[e].source]}->{net.names[i]}]")
            factors.append(terms[0] if len(terms) == 1 else '(' + '+'.join(terms) + ')')
        labels.append('*'.join(factors))
    return labels


def threshold_labels(net: RegulatoryNetwork, i: int) -> List[str]:
    """Threshold labels per out-edge position, ``θ[target->source]``."""
    return [f"θ[{net.names[net.edges[e].target]}->{net.names[i]}]" for e in net.out_edges(i)]


def _band_constraints(system: StrictSystem, band: Sequence[int], m: int, t0: int, value_terms):
    for j in range(m - 1):
        system.less([(t0 + j, 1.0)], [(t0 + j + 1, 1.0)])
    for s, b in enumerate(band):
        terms = value_terms(s)
        if b >= 1:
            system.less([(t0 + b - 1, 1.0)], terms)
        if b < m:
            system.less(terms, [(t0 + b, 1.0)])


def product_system(n_inputs: int, band: Sequence[int], m: int) -> StrictSystem:
    """
    Log-space inequality system for a pure-product node.

    Variables: ``log l_k`` (0..n-1), ``log h_k`` (n..2n-1), sorted ``log θ_j`` (2n..2n+m-1).
    """
    system = StrictSystem.create(2 * n_inputs + m)
    for k in range(n_inputs):
        system.less([(k, 1.0)], [(n_inputs + k, 1.0)])

    def value_terms(s):
        return [((n_inputs + k) if s & (1 << k) else k, 1.0) for k in range(n_inputs)]

    _band_constraints(system, band, m, 2 * n_inputs, value_terms)
    return system


def sum_system(n_inputs: int, band: Sequence[int], m: int) -> StrictSystem:
    """
    Linear inequality system for a single sum-group node, in the original (positive) variables.

    Variables: ``l_k``, ``h_k``, sorted ``θ_j`` with the same layout as product_system.
    """
    n_vars = 2 * n_inputs + m
    system = StrictSystem.create(n_vars, bounds=[(0.0, 10.0)] * n_vars)
    for k in range(n_inputs):
        system.less([], [(k, 1.0)])
        system.less([(k, 1.0)], [(n_inputs + k, 1.0)])
    if m:
        system.less([], [(2 * n_inputs, 1.0)])

    def value_terms(s):
        return [((n_inputs + k) if s & (1 << k) else k, 1.0) for k in range(n_inputs)]

    _band_constraints(system, band, m, 2 * n_inputs, value_terms)
    return system


def sample_values(group_sizes: Sequence[int], n_samples: int, rng: np.random.Generator,
                  log_range: Tuple[float, float] = SAMPLE_LOG_RANGE) -> np.ndarray:
    """
    Interaction values for random log-uniform (l, h) draws.

    Returns:
        array of shape (n_samples, 2^n) with the value at every activation state
    """
    n = sum(group_sizes)
    a = 10.0 ** rng.uniform(*log_range, size=(n_samples, n))
    b = 10.0 ** rng.uniform(*log_range, size=(n_samples, n))
    low = np.minimum(a, b)
    high = np.maximum(a, b)
    values = np.empty((n_samples, 1 << n))
    for s in range(1 << n):
        bits = np.array([(s >> k) & 1 for k in range(n)], dtype=bool)
        chosen = np.where(bits, high, low)
        total = np.ones(n_samples)
        start = 0
        for size in group_sizes:
            total = total * chosen[:, start:start + size].sum(axis=1)
            start += size
        values[:, s] = total
    return values


def separable(values: np.ndarray, band: Sequence[int], m: int) -> np.ndarray:
    """
    Per sample, whether thresholds can be placed to induce ``band`` from ``values``.

    Thresholds t_1 < ... < t_m exist iff for every k the values of states with
    band < k all lie below the values of states with band >= k.
    """
    band = np.asarray(band)
    ok = np.ones(values.shape[0], dtype=bool)
    for k in range(1, m + 1):
        below = band < k
        if below.all() or not below.any():
            continue
        ok &= values[:, below].max(axis=1) < values[:, ~below].min(axis=1)
    return ok


def sampled_band_maps(group_sizes: Sequence[int], m: int, n_samples: int, seed: int = 0) -> FrozenSet[Tuple[int, ...]]:
    """
    Brute-force oracle: band maps induced by random (l, h, θ) draws in log space.

    Thresholds are drawn too and sorted, so the result is the set of classes a
    random real parameter falls into.
    """
    rng = np.random.default_rng(seed)
    found = set()
    chunk = 100_000
    remaining = n_samples
    while remaining > 0:
        size = min(chunk, remaining)
        values = sample_values(group_sizes, size, rng)
        thresholds = np.sort(10.0 ** rng.uniform(*SAMPLE_LOG_RANGE, size=(size, m)), axis=1)
        bands = (values[:, :, None] > thresholds[:, None, :]).sum(axis=2)
        found.update(map(tuple, np.unique(bands, axis=0).tolist()))
        remaining -= size
    return frozenset(found)


def _realizable_band(group_sizes: Tuple[int, ...], band: Tuple[int, ...], m: int, margin: float,
                     samples: Optional[np.ndarray]) -> bool:
    n = sum(group_sizes)
    if m == 0:
        return True
    if all(size == 1 for size in group_sizes):
        return max_slack(product_system(n, band, m), margin).feasible
    if len(group_sizes) == 1:
        return max_slack(sum_system(n, band, m), margin).feasible
    return bool(separable(samples, band, m).any())


@lru_cache(maxsize=None)
def realizable_logics(group_sizes: Tuple[int, ...], m: int, margin: float = 1e-6,
                      sample_count: int = 1_000_000, seed: int = 0) -> Tuple[Tuple[Tuple[int, ...], ...], bool]:
    """
    All realizable band maps for an interaction shape, sorted lexicographically.

    Candidates are built as nested upsets U_1 ⊇ U_2 ⊇ ... (U_k = states with
    band >= k); a prefix that is not realizable with its own thresholds cannot be
    extended, which prunes the search.

    Returns:
        (band maps, certified) where certified is False for sampled product-of-sums shapes
    """
    n = sum(group_sizes)
    size = 1 << n
    certified = all(g == 1 for g in group_sizes) or len(group_sizes) == 1
    samples = None
    if not certified:
        logger.warning(f"Interaction shape {group_sizes} is a product of sums; "
                       f"realizability is sampled ({sample_count} draws), not certified")
        samples = sample_values(group_sizes, sample_count, np.random.default_rng(seed))

    if m == 0:
        return (tuple([0] * size),), certified

    upsets = [frozenset(s for s in range(size) if band[s]) for band in monotone_maps(n, 1)]
    results = []

    def extend(chain: List[FrozenSet[int]]):
        if len(chain) == m:
            results.append(tuple(sum(1 for u in chain if s in u) for s in range(size)))
            return
        for upset in upsets:
            if chain and not upset <= chain[-1]:
                continue
            candidate = chain + [upset]
            band = tuple(sum(1 for u in candidate if s in u) for s in range(size))
            if _realizable_band(group_sizes, band, len(candidate), margin, samples):
                extend(candidate)

    extend([])
    results.sort()
    logger.debug(f"Shape {group_sizes} with {m} thresholds: {len(results)} realizable logic parameters")
    return tuple(results), certified


def check_realizable(net: RegulatoryNetwork, i: int, order: OrderParameter, logic: LogicParameter) -> bool:
    """
    Decide whether a monotone band map is realizable at node i.

    The threshold identification given by ``order`` does not affect feasibility,
    since thresholds enter the system only through their sorted positions.

    Args:
        net: the network
        i: node index
        order: order parameter (validated, otherwise unused)
        logic: a monotone band map

    Returns:
        True iff a strict real witness exists
    """
    m = net.out_degree(i)
    if sorted(order.perm) != list(range(m)):
        raise ParameterIndexError(f"Order {order.perm} is not a permutation of {m} out-edges",
                                  index=order.perm, size=m)
    if len(logic.band) != 1 << net.in_degree(i) or any(b < 0 or b > m for b in logic.band):
        return False
    if not logic.is_monotone():
        return False
    settings = get_settings()
    group_sizes = tuple(len(g) for g in net.interaction[i])
    samples = None
    if len(group_sizes) > 1 and any(g > 1 for g in group_sizes):
        samples = sample_values(group_sizes, settings.sample_count,
                                np.random.default_rng(settings.sample_seed))
    return _realizable_band(group_sizes, logic.band, m, settings.lp_margin, samples)


def _logic_adjacency(bands: Sequence[Tuple[int, ...]]) -> List[List[int]]:
    lookup = {band: k for k, band in enumerate(bands)}
    adjacency = []
    for band in bands:
        neighbors = []
        for s in range(len(band)):
            for delta in (-1, 1):
                changed = band[:s] + (band[s] + delta,) + band[s + 1:]
                k = lookup.get(changed)
                if k is not None:
                    neighbors.append(k)
        adjacency.append(sorted(neighbors))
    return adjacency


def _swap_allowed(band: Sequence[int], k: int) -> bool:
    """Sorted thresholds k and k+1 (1-based k) may swap iff no state has band exactly k."""
    return all(b != k for b in band)


def enumerate_factor_parameters(net: RegulatoryNetwork, i: int, max_in: Optional[int] = None,
                                max_out: Optional[int] = None) -> FactorGraph:
    """
    Enumerate every realizable factor parameter of node i with its adjacency.

    Args:
        net: the network
        i: node index
        max_in: in-degree guard (default from settings)
        max_out: out-degree guard (default from settings)

    Returns:
        FactorGraph ordered by order permutation, then band map

    Raises:
        EnumerationGuardError: when the node exceeds a degree guard
    """
    settings = get_settings()
    max_in = settings.max_in_edges if max_in is None else max_in
    max_out = settings.max_out_edges if max_out is None else max_out
    n = net.in_degree(i)
    m = net.out_degree(i)
    if n > max_in or m > max_out:
        raise EnumerationGuardError(
            f"Node {net.names[i]} has {n} in-edges and {m} out-edges; limits are {max_in}/{max_out}",
            node=net.names[i], in_degree=n, out_degree=m, max_in=max_in, max_out=max_out)

    group_sizes = tuple(len(g) for g in net.interaction[i])
    bands, certified = realizable_logics(group_sizes, m, settings.lp_margin,
                                         settings.sample_count, settings.sample_seed)
    if not bands:
        raise ConsistencyError(f"Node {net.names[i]} has no realizable logic parameter",
                               {'node': net.names[i], 'group_sizes': group_sizes})

    logics = [LogicParameter(band) for band in bands]
    orders = [OrderParameter(perm) for perm in itertools.permutations(range(m))]
    order_index = {order.perm: k for k, order in enumerate(orders)}
    n_logic = len(logics)
    logic_adjacency = _logic_adjacency(bands)

    params = []
    adjacency = []
    for o, order in enumerate(orders):
        for l, logic in enumerate(logics):
            params.append(FactorParameter(logic, order))
            neighbors = [o * n_logic + other for other in logic_adjacency[l]]
            for k in range(1, m):
                if not _swap_allowed(logic.band, k):
                    continue
                perm = list(order.perm)
                perm[k - 1], perm[k] = perm[k], perm[k - 1]
                neighbors.append(order_index[tuple(perm)] * n_logic + l)
            adjacency.append(tuple(sorted(neighbors)))

    graph = FactorGraph(node=i, params=params, adjacency=adjacency, logics=logics,
                        orders=orders, certified=certified)
    logger.debug(f"Node {net.names[i]}: {len(logics)} logic x {len(orders)} order = {graph.size} factor parameters")
    return graph
