"""
The parameter graph: product of all factor graphs with a mixed-radix index.

Parameter index k encodes one factor index per node, node 0 being the least
significant digit.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from core.exceptions import ParameterIndexError, RestrictionShapeError
from .factor_graph import FactorGraph, FactorParameter, enumerate_factor_parameters
from .network import RegulatoryNetwork

logger = logging.getLogger(__name__)

CLB2_LABELS = ('OFF', 'INT_L', 'INT_H', 'ON')
WT_LABEL = 'WT'


@dataclass
class ParameterGraph:
    """Factor graphs of every node and the mixed-radix index over their product."""
    net: RegulatoryNetwork
    factors: List[FactorGraph]

    @property
    def radices(self) -> Tuple[int, ...]:
        return tuple(graph.size for graph in self.factors)

    @property
    def size(self) -> int:
        return math.prod(self.radices)

    @property
    def certified(self) -> bool:
        return all(graph.certified for graph in self.factors)

    def _check_index(self, k: int):
        if not 0 <= k < self.size:
            raise ParameterIndexError(f"Parameter index {k} out of range [0, {self.size})",
                                      index=k, size=self.size)

    def index_to_tuple(self, k: int) -> Tuple[int, ...]:
        """Factor index per node for parameter k."""
        self._check_index(k)
        digits = []
        for radix in self.radices:
            k, digit = divmod(k, radix)
            digits.append(digit)
        return tuple(digits)

    def tuple_to_index(self, digits: Sequence[int]) -> int:
        """Parameter index for a factor index tuple."""
        radices = self.radices
        if len(digits) != len(radices):
            raise ParameterIndexError(f"Expected {len(radices)} factor indices, got {len(digits)}",
                                      index=tuple(digits), size=len(radices))
        k = 0
        for digit, radix in zip(reversed(digits), reversed(radices)):
            if not 0 <= digit < radix:
                raise ParameterIndexError(f"Factor index {digit} out of range [0, {radix})",
                                          index=tuple(digits), size=radix)
            k = k * radix + digit
        return k

    def factor_parameters(self, k: int) -> List[FactorParameter]:
        return [graph.params[digit] for graph, digit in zip(self.factors, self.index_to_tuple(k))]

    def adjacent(self, k: int) -> List[int]:
        """Parameter nodes differing from k in one coordinate by a factor-graph edge."""
        digits = list(self.index_to_tuple(k))
        neighbors = []
        for i, graph in enumerate(self.factors):
            original = digits[i]
            for other in graph.adjacency[original]:
                digits[i] = other
                neighbors.append(self.tuple_to_index(digits))
            digits[i] = original
        return sorted(neighbors)

    def remainder_of(self, k: int, excluded: int) -> Tuple[int, ...]:
        """Factor indices of every node except ``excluded``."""
        digits = self.index_to_tuple(k)
        if not 0 <= excluded < len(digits):
            raise ParameterIndexError(f"Excluded node {excluded} out of range", index=excluded,
                                      size=len(digits))
        return digits[:excluded] + digits[excluded + 1:]

    def remainder_index(self, k: int, excluded: int) -> int:
        """Mixed-radix index of the remainder parameter of k."""
        remainder = self.remainder_of(k, excluded)
        radices = self.radices[:excluded] + self.radices[excluded + 1:]
        index = 0
        for digit, radix in zip(reversed(remainder), reversed(radices)):
            index = index * radix + digit
        return index

    def remainder_size(self, excluded: int) -> int:
        return self.size // self.radices[excluded]

    def inequalities(self, k: int) -> Dict[str, str]:
        """Per-node inequality chains of parameter k."""
        return {self.net.names[i]: param.inequalities(self.net, i)
                for i, param in enumerate(self.factor_parameters(k))}


def build_parameter_graph(net: RegulatoryNetwork, max_in: Optional[int] = None,
                          max_out: Optional[int] = None) -> ParameterGraph:
    """Enumerate every node's factor graph."""
    factors = [enumerate_factor_parameters(net, i, max_in, max_out) for i in range(net.size)]
    pg = ParameterGraph(net, factors)
    logger.info(f"Parameter graph: radices {pg.radices}, size {pg.size}")
    return pg


def pg_size(net: RegulatoryNetwork) -> int:
    """Product of all factor-graph sizes (Python integers, no overflow)."""
    return build_parameter_graph(net).size


def level_restriction(pg: ParameterGraph, node: int) -> List[Optional[int]]:
    """
    Per factor parameter of a single-input node: the constant output level, or None.

    A constant band map pins the node to one level whatever its input does; any
    other band map lets the node change level (the wild-type class).
    """
    net = pg.net
    if net.in_degree(node) != 1:
        raise RestrictionShapeError(f"Level restrictions need exactly 1 in-edge at {net.names[node]}",
                                    node=net.names[node], in_degree=net.in_degree(node),
                                    out_degree=net.out_degree(node))
    levels = []
    for param in pg.factors[node].params:
        band = param.logic.band
        levels.append(band[0] if band[0] == band[1] else None)
    return levels


def restriction_label(level: Optional[int], m: int) -> str:
    if level is None:
        return WT_LABEL
    if level == 0:
        return 'OFF'
    if level == m:
        return 'ON'
    if m == 3:
        return CLB2_LABELS[level]
    return f'INT_{level}'


def restriction_level(label: str, m: int) -> Optional[int]:
    """Inverse of restriction_label: ON->m, OFF->0, INT_L->1, INT_H->2 (for m=3), WT->None."""
    if label == WT_LABEL:
        return None
    if label == 'OFF':
        return 0
    if label == 'ON':
        return m
    if m == 3 and label in CLB2_LABELS:
        return CLB2_LABELS.index(label)
    if label.startswith('INT_') and label[4:].isdigit() and 0 < int(label[4:]) < m:
        return int(label[4:])
    raise RestrictionShapeError(f"Restriction label {label} does not apply to a node with {m} thresholds",
                                out_degree=m)


def clb2_restriction_sets(pg: ParameterGraph, node: int) -> List[str]:
    """
    Partition of a 1-in/3-out node's factor parameters into ON, OFF, INT_H, INT_L and WT.

    Returns:
        label per factor parameter index
    """
    net = pg.net
    if net.in_degree(node) != 1 or net.out_degree(node) != 3:
        raise RestrictionShapeError(
            f"Node {net.names[node]} has {net.in_degree(node)} in-edges and {net.out_degree(node)} "
            f"out-edges; the Clb2 partition needs 1 and 3",
            node=net.names[node], in_degree=net.in_degree(node), out_degree=net.out_degree(node))
    return [restriction_label(level, 3) for level in level_restriction(pg, node)]


def restriction_labels(pg: ParameterGraph, node: int) -> List[str]:
    """Restriction label per factor parameter of any single-input node."""
    m = pg.net.out_degree(node)
    return [restriction_label(level, m) for level in level_restriction(pg, node)]


def find_parameters(pg: ParameterGraph, filters: Dict[int, Dict]) -> Iterator[int]:
    """
    Parameter indices matching per-node filters.

    Each filter may give ``band`` (tuple), ``perm`` (tuple), ``label`` (restriction
    label) or ``factor`` (explicit factor index). Unfiltered nodes range freely.
    """
    choices = []
    for i, graph in enumerate(pg.factors):
        spec = filters.get(i)
        if not spec:
            choices.append(range(graph.size))
            continue
        labels = restriction_labels(pg, i) if 'label' in spec else None
        allowed = []
        for f, param in enumerate(graph.params):
            if 'factor' in spec and f != spec['factor']:
                continue
            if 'band' in spec and param.logic.band != tuple(spec['band']):
                continue
            if 'perm' in spec and param.order.perm != tuple(spec['perm']):
                continue
            if labels is not None and labels[f] != spec['label']:
                continue
            allowed.append(f)
        choices.append(allowed)

    def walk(i: int, digits: List[int]):
        if i < 0:
            yield pg.tuple_to_index(digits)
            return
        for f in choices[i]:
            digits[i] = f
            yield from walk(i - 1, digits)

    # most significant node outermost keeps indices ascending
    yield from walk(len(choices) - 1, [0] * len(choices))


def parameters_with_factors(pg: ParameterGraph, node: int, factors: Iterable[int]) -> Iterator[int]:
    """All parameter indices whose coordinate at ``node`` lies in ``factors``."""
    allowed = set(factors)
    for f in sorted(allowed):
        yield from find_parameters(pg, {node: {'factor': f}})
