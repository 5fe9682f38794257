"""
Regulatory network model and its text format.

A network file has one line per node::

    S : (S)(W)(~N)(~C)
    N : (S)

The right-hand side is a product of parenthesized sum-groups; inside a group,
inputs are separated by ``+`` and a ``~`` prefix marks repression. Blank lines
and ``#`` comments are ignored.
"""

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from core.exceptions import NetworkParseError, NetworkValidationError, ParameterIndexError
from core.records import read_text, text_hash

logger = logging.getLogger(__name__)

_NAME_PATTERN = re.compile(r'^[A-Za-z_][A-Za-z0-9_./-]*$')
_LINE_PATTERN = re.compile(r'^\s*([^:]+?)\s*:\s*(.*?)\s*$')


class Sign(Enum):
    """Edge sign."""
    ACTIVATING = '+'
    REPRESSING = '-'


@dataclass(frozen=True)
class Edge:
    """A regulatory edge source -> target."""
    source: int
    target: int
    sign: Sign

    @property
    def activating(self) -> bool:
        return self.sign is Sign.ACTIVATING


@dataclass(frozen=True)
class RegulatoryNetwork:
    """
    Immutable signed network with per-node interaction structure.

    Attributes:
        names: node names in declaration order (node index = position)
        edges: all edges, grouped by target in declaration order
        interaction: per target, the sum-groups as tuples of edge indices into ``edges``
        out_order: per source, its out-edge indices into ``edges`` in canonical order
    """
    names: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    interaction: Tuple[Tuple[Tuple[int, ...], ...], ...]
    out_order: Tuple[Tuple[int, ...], ...]
    _index: Dict[str, int] = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, '_index', {name: i for i, name in enumerate(self.names)})

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        """Node index for a name."""
        try:
            return self._index[name]
        except KeyError:
            raise NetworkValidationError(f"Unknown node '{name}'", node=name)

    def resolve(self, node) -> int:
        """Accept a node name or index and return a validated index."""
        if isinstance(node, str):
            return self.index(node)
        self._check_node(node)
        return int(node)

    def _check_node(self, i: int):
        if not 0 <= i < self.size:
            raise ParameterIndexError(f"Node index {i} out of range", index=i, size=self.size)

    def in_edges(self, i: int) -> Tuple[int, ...]:
        """Edge indices entering node i, in group order (the node's input order)."""
        self._check_node(i)
        return tuple(e for group in self.interaction[i] for e in group)

    def out_edges(self, i: int) -> Tuple[int, ...]:
        self._check_node(i)
        return self.out_order[i]

    def in_degree(self, i: int) -> int:
        return len(self.in_edges(i))

    def out_degree(self, i: int) -> int:
        return len(self.out_edges(i))

    def inputs(self, i: int) -> List[int]:
        """Source node indices of i's in-edges, in input order."""
        return [self.edges[e].source for e in self.in_edges(i)]

    def outputs(self, i: int) -> List[int]:
        """Target node indices of i's out-edges, in canonical threshold order."""
        return [self.edges[e].target for e in self.out_edges(i)]

    def edge_between(self, source: int, target: int) -> Optional[int]:
        for e, edge in enumerate(self.edges):
            if edge.source == source and edge.target == target:
                return e
        return None

    def threshold_position(self, source: int, target: int) -> int:
        """Position of the out-edge source -> target within source's out_order."""
        e = self.edge_between(source, target)
        if e is None:
            raise NetworkValidationError(f"No edge {self.names[source]} -> {self.names[target]}")
        return self.out_order[source].index(e)

    def is_pure_product(self, i: int) -> bool:
        return all(len(group) == 1 for group in self.interaction[i])

    def is_pure_sum(self, i: int) -> bool:
        return len(self.interaction[i]) == 1

    def regulates_itself(self, i: int) -> bool:
        return self.edge_between(i, i) is not None

    def fingerprint(self) -> str:
        """Content hash of the canonical serialization."""
        return text_hash(serialize(self))


def node_state_count(net: RegulatoryNetwork, i: int) -> int:
    """
    Number of discrete states of node i (one more than its out-degree).

    Args:
        net: the network
        i: node index

    Returns:
        out-degree(i) + 1
    """
    return net.out_degree(i) + 1


def _parse_expression(expr: str, line_number: int, line: str) -> List[List[Tuple[str, Sign]]]:
    if not expr:
        raise NetworkParseError("empty expression", line_number, line)

    groups = []
    position = 0
    text = expr.replace(' ', '').replace('\t', '')
    while position < len(text):
        if text[position] != '(':
            raise NetworkParseError(f"expected '(' at column {position + 1} of '{expr}'", line_number, line)
        close = text.find(')', position)
        if close < 0:
            raise NetworkParseError(f"unbalanced parenthesis in '{expr}'", line_number, line)
        body = text[position + 1:close]
        if not body:
            raise NetworkParseError("empty sum-group '()'", line_number, line)
        group = []
        for term in body.split('+'):
            sign = Sign.ACTIVATING
            if term.startswith('~'):
                sign = Sign.REPRESSING
                term = term[1:]
            if not term or not _NAME_PATTERN.match(term):
                raise NetworkParseError(f"malformed input name '{term}'", line_number, line)
            group.append((term, sign))
        groups.append(group)
        position = close + 1
    return groups


def parse_network(text: str) -> RegulatoryNetwork:
    """
    Parse a network description into a validated RegulatoryNetwork.

    Node indices follow declaration order. A source's out-edges are ordered by the
    order in which the targets that mention it appear, top to bottom.

    Args:
        text: network description

    Returns:
        The parsed network

    Raises:
        NetworkParseError: syntax errors, unknown or duplicate names, duplicate edges,
            empty expressions (each with its line number)
    """
    declarations = []
    seen: Dict[str, int] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        match = _LINE_PATTERN.match(line)
        if not match:
            raise NetworkParseError("expected 'Name : expression'", line_number, raw)
        name, expr = match.group(1), match.group(2)
        if not _NAME_PATTERN.match(name):
            raise NetworkParseError(f"invalid node name '{name}'", line_number, raw)
        if name in seen:
            raise NetworkParseError(
                f"duplicate node declaration '{name}' (first declared on line {seen[name]})",
                line_number, raw)
        seen[name] = line_number
        declarations.append((name, expr, line_number, raw))

    if not declarations:
        raise NetworkParseError("network description declares no nodes")

    names = tuple(name for name, _, _, _ in declarations)
    index = {name: i for i, name in enumerate(names)}

    edges: List[Edge] = []
    interaction = []
    for target, (name, expr, line_number, raw) in enumerate(declarations):
        groups = _parse_expression(expr, line_number, raw)
        sources_seen = set()
        target_groups = []
        for group in groups:
            group_edges = []
            for source_name, sign in group:
                if source_name not in index:
                    raise NetworkParseError(f"unknown node name '{source_name}'", line_number, raw)
                source = index[source_name]
                if source in sources_seen:
                    raise NetworkParseError(
                        f"duplicate edge {source_name} -> {name}", line_number, raw)
                sources_seen.add(source)
                group_edges.append(len(edges))
                edges.append(Edge(source, target, sign))
            target_groups.append(tuple(group_edges))
        interaction.append(tuple(target_groups))

    out_order = [[] for _ in names]
    for e, edge in enumerate(edges):
        out_order[edge.source].append(e)

    net = RegulatoryNetwork(
        names=names,
        edges=tuple(edges),
        interaction=tuple(interaction),
        out_order=tuple(tuple(order) for order in out_order),
    )
    logger.debug(f"Parsed network with {net.size} nodes and {len(net.edges)} edges")
    return net


def serialize(net: RegulatoryNetwork) -> str:
    """Canonical text form; parse_network(serialize(net)) reproduces net exactly."""
    lines = []
    for i, name in enumerate(net.names):
        groups = []
        for group in net.interaction[i]:
            terms = []
            for e in group:
                edge = net.edges[e]
                prefix = '' if edge.activating else '~'
                terms.append(prefix + net.names[edge.source])
            groups.append('(' + ' + '.join(terms) + ')')
        lines.append(f"{name} : {''.join(groups)}")
    return '\n'.join(lines) + '\n'


def load_network(path: str) -> RegulatoryNetwork:
    """Read and parse a network file."""
    net = parse_network(read_text(path))
    logger.info(f"Loaded network {path}: {', '.join(net.names)}")
    return net
