"""
State transition graphs and Morse graphs for one parameter node.

Domains are indexed in mixed radix over the per-node state counts (node 0 least
significant), the same convention as parameter indices.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from core.exceptions import ConsistencyError, ParameterIndexError
from .factor_graph import FactorParameter
from .network import RegulatoryNetwork
from .parameter_graph import ParameterGraph

logger = logging.getLogger(__name__)

INCREASING = 1
DECREASING = -1
EITHER = 0
SIGN_CHARS = {INCREASING: 'I', DECREASING: 'D', EITHER: '*'}

MIN = 'min'
MAX = 'max'


@dataclass(frozen=True)
class EdgeEvent:
    """A possible extremum of ``variable`` on an STG edge; forced when both endpoint signs are strict."""
    variable: int
    kind: str
    forced: bool


def domain_radices(net: RegulatoryNetwork) -> Tuple[int, ...]:
    return tuple(net.out_degree(i) + 1 for i in range(net.size))


def domain_coords(radices: Sequence[int], index: int) -> Tuple[int, ...]:
    coords = []
    for radix in radices:
        index, digit = divmod(index, radix)
        coords.append(digit)
    return tuple(coords)


def domain_index(radices: Sequence[int], coords: Sequence[int]) -> int:
    index = 0
    for digit, radix in zip(reversed(coords), reversed(radices)):
        if not 0 <= digit < radix:
            raise ParameterIndexError(f"Domain coordinate {digit} out of range [0, {radix})",
                                      index=tuple(coords), size=radix)
        index = index * radix + digit
    return index


def _all_coords(radices: Sequence[int]) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(r) for r in radices], indexing='ij')
    # node 0 varies fastest
    stacked = np.stack([g.reshape(-1, order='F') for g in grids], axis=1)
    return stacked


def targets_for(net: RegulatoryNetwork, params: Sequence[FactorParameter], coords: np.ndarray) -> np.ndarray:
    """
    Target band of every node in every domain.

    Args:
        net: the network
        params: factor parameter per node
        coords: domain coordinates, shape (domains, nodes)

    Returns:
        integer array of the same shape
    """
    targets = np.zeros_like(coords)
    for i, param in enumerate(params):
        state = np.zeros(coords.shape[0], dtype=np.int64)
        for k, e in enumerate(net.in_edges(i)):
            edge = net.edges[e]
            j = edge.source
            out_position = net.out_order[j].index(e)
            position = params[j].threshold_position(out_position)
            if edge.activating:
                active = coords[:, j] >= position + 1
            else:
                active = coords[:, j] <= position
            state |= active.astype(np.int64) << k
        targets[:, i] = np.asarray(param.logic.band)[state]
    return targets


@dataclass
class StateTransitionGraph:
    """
    Domains, flow edges and sign labels for one parameter node.

    ``successors[d]`` lists the domains reachable in one step from d (including d
    itself when d carries a self-edge).
    """
    net: RegulatoryNetwork
    parameter: int
    radices: Tuple[int, ...]
    coords: np.ndarray
    targets: np.ndarray
    signs: np.ndarray
    successors: List[Tuple[int, ...]]

    @property
    def domain_count(self) -> int:
        return self.coords.shape[0]

    def has_self_edge(self, d: int) -> bool:
        return d in self.successors[d]

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, v) for u, targets in enumerate(self.successors) for v in targets]

    def sign_label(self, d: int) -> str:
        return ''.join(SIGN_CHARS[int(s)] for s in self.signs[d])

    def coordinate_label(self, d: int) -> str:
        return format_coords(self.coords[d])

    def moving_coordinate(self, u: int, v: int) -> Optional[int]:
        if u == v:
            return None
        diff = np.nonzero(self.coords[u] != self.coords[v])[0]
        return int(diff[0])

    def events(self, u: int, v: int) -> Tuple[EdgeEvent, ...]:
        """
        Possible extrema on edge u -> v.

        A variable can only turn when its sign changes between the endpoints; the
        moving coordinate carries no event unless it regulates itself.
        """
        moving = self.moving_coordinate(u, v)
        if moving is None:
            return ()
        found = []
        for j in range(self.net.size):
            if j == moving and not self.net.regulates_itself(j):
                continue
            su, sv = int(self.signs[u, j]), int(self.signs[v, j])
            if su == sv:
                continue
            if su in (INCREASING, EITHER) and sv in (DECREASING, EITHER):
                found.append(EdgeEvent(j, MAX, su == INCREASING and sv == DECREASING))
            if su in (DECREASING, EITHER) and sv in (INCREASING, EITHER):
                found.append(EdgeEvent(j, MIN, su == DECREASING and sv == INCREASING))
        return tuple(found)

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.domain_count))
        graph.add_edges_from(self.edges())
        return graph


def format_coords(coords: Sequence[int]) -> str:
    values = [int(c) for c in coords]
    if all(c < 10 for c in values):
        return ''.join(str(c) for c in values)
    return ','.join(str(c) for c in values)


def build_stg(net: RegulatoryNetwork, pg: ParameterGraph, k: int) -> StateTransitionGraph:
    """
    State transition graph of parameter k.

    Raises:
        ConsistencyError: when both directions are computed on one wall
    """
    params = pg.factor_parameters(k)
    radices = domain_radices(net)
    coords = _all_coords(radices)
    targets = targets_for(net, params, coords)
    signs = np.sign(targets - coords).astype(np.int8)

    count = coords.shape[0]
    successors: List[List[int]] = [[] for _ in range(count)]
    stride = 1
    for i, radix in enumerate(radices):
        lower = np.nonzero(coords[:, i] < radix - 1)[0]
        upper = lower + stride
        up = targets[lower, i] > coords[lower, i]
        down = targets[upper, i] < coords[upper, i]
        clash = np.nonzero(up & down)[0]
        if clash.size:
            d = int(lower[clash[0]])
            raise ConsistencyError(
                f"Opposing flow on the wall between domains {format_coords(coords[d])} and "
                f"{format_coords(coords[d + stride])} in {net.names[i]}",
                {'parameter': k, 'node': net.names[i], 'domain': coords[d].tolist()})
        for d in lower[up]:
            successors[int(d)].append(int(d) + stride)
        for d in upper[down]:
            successors[int(d)].append(int(d) - stride)
        stride *= radix

    for d in range(count):
        if not successors[d]:
            successors[d].append(d)

    return StateTransitionGraph(net=net, parameter=k, radices=radices, coords=coords, targets=targets,
                                signs=signs, successors=[tuple(sorted(s)) for s in successors])


@dataclass
class MorseSet:
    """A recurrent component of the STG with its annotation."""
    id: int
    domains: Tuple[int, ...]
    kind: str
    variables: Tuple[int, ...]
    stable: bool = False
    coords: Optional[Tuple[int, ...]] = None

    def label(self, names: Sequence[str]) -> str:
        if self.kind == 'FP':
            return f"FP({format_coords(self.coords)})"
        if self.kind == 'FC':
            return 'FC'
        return 'PC{' + ','.join(names[v] for v in self.variables) + '}'

    @property
    def oscillating_variables(self) -> Tuple[int, ...]:
        return self.variables


@dataclass
class MorseGraph:
    """Acyclic reachability graph on Morse sets, transitively reduced."""
    stg: StateTransitionGraph
    sets: List[MorseSet]
    edges: List[Tuple[int, int]]
    domain_to_set: Dict[int, int] = field(default_factory=dict)

    def stable_sets(self) -> List[MorseSet]:
        return [s for s in self.sets if s.stable]

    def successors(self, set_id: int) -> List[int]:
        return [b for a, b in self.edges if a == set_id]

    def summary(self) -> Dict:
        names = self.stg.net.names
        return {
            'parameter': self.stg.parameter,
            'sets': [{'id': s.id, 'label': s.label(names), 'stable': s.stable, 'size': len(s.domains)}
                     for s in self.sets],
            'edges': [list(edge) for edge in self.edges],
        }


def morse_graph(stg: StateTransitionGraph) -> MorseGraph:
    """Condense the STG to its recurrent components, annotate them and flag stability."""
    graph = stg.to_networkx()
    components = list(nx.strongly_connected_components(graph))
    condensed = nx.condensation(graph, scc=components)
    mapping = condensed.graph['mapping']

    recurrent = []
    for c in condensed.nodes:
        members = condensed.nodes[c]['members']
        if len(members) > 1 or stg.has_self_edge(next(iter(members))):
            recurrent.append(c)
    recurrent.sort(key=lambda c: min(condensed.nodes[c]['members']))
    set_of = {c: n for n, c in enumerate(recurrent)}

    n_vars = stg.net.size
    sets = []
    for n, c in enumerate(recurrent):
        domains = tuple(sorted(condensed.nodes[c]['members']))
        if len(domains) == 1:
            sets.append(MorseSet(n, domains, 'FP', (), coords=tuple(int(x) for x in stg.coords[domains[0]])))
            continue
        values = stg.coords[list(domains)]
        spanned = tuple(v for v in range(n_vars) if len(np.unique(values[:, v])) > 1)
        kind = 'FC' if len(spanned) == n_vars else 'PC'
        sets.append(MorseSet(n, domains, kind, spanned))

    reach = nx.DiGraph()
    reach.add_nodes_from(range(len(recurrent)))
    for c in recurrent:
        for other in nx.descendants(condensed, c):
            if other in set_of:
                reach.add_edge(set_of[c], set_of[other])
    reduced = nx.transitive_reduction(reach)
    edges = sorted(reduced.edges())

    for s in sets:
        s.stable = reduced.out_degree(s.id) == 0

    domain_to_set = {d: s.id for s in sets for d in s.domains}
    mg = MorseGraph(stg=stg, sets=sets, edges=edges, domain_to_set=domain_to_set)
    logger.debug(f"Parameter {stg.parameter}: {len(sets)} Morse sets, {len(edges)} edges")
    return mg


def stable_fixed_points(mg: MorseGraph) -> List[Tuple[int, ...]]:
    """Domain coordinates of every stable FP Morse set."""
    return [s.coords for s in mg.sets if s.kind == 'FP' and s.stable]
