"""
Pattern matching of extrema posets against event-labeled state transition graphs.

The search runs on the product of a Morse set's domains with the down-sets of
the pattern diagram. Each pattern variable carries a direction (decreasing
before a min, increasing after it, and the reverse for a max); a walk may only
enter domains whose sign for that variable agrees with its direction or is *.
Consuming a pattern event needs the matching event on the traversed edge and
flips the variable's direction.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from core.exceptions import NetworkValidationError, PatternError
from .dynamics import EITHER, DECREASING, INCREASING, MIN, EdgeEvent, MorseGraph, MorseSet, StateTransitionGraph
from .timeseries import PatternDiagram

logger = logging.getLogger(__name__)


@dataclass
class EventLabeledSubgraph:
    """The restriction of an STG to one Morse set, with the events of every edge."""
    stg: StateTransitionGraph
    domains: Tuple[int, ...]
    successors: Dict[int, Tuple[int, ...]]
    events: Dict[Tuple[int, int], Tuple[EdgeEvent, ...]]
    morse_set: Optional[int] = None

    def edge_labels(self) -> Dict[Tuple[str, str], List[str]]:
        """Readable labels keyed by (coordinate label, coordinate label)."""
        names = self.stg.net.names
        labels = {}
        for (u, v), found in self.events.items():
            labels[(self.stg.coordinate_label(u), self.stg.coordinate_label(v))] = [
                f"{names[e.variable]}_{e.kind}" + ('' if e.forced else '?') for e in found]
        return labels


@dataclass
class MatchResult:
    matched: bool
    morse_set: Optional[int] = None
    witness: List[int] = field(default_factory=list)
    steps: List[Tuple[str, ...]] = field(default_factory=list)
    extension: Tuple[str, ...] = ()

    def to_dict(self, stg: Optional[StateTransitionGraph] = None) -> Dict:
        record = {'matched': self.matched, 'morse_set': self.morse_set, 'extension': list(self.extension)}
        if stg is not None and self.witness:
            record['witness'] = [{'domain': stg.coordinate_label(d), 'events': list(e)}
                                 for d, e in zip(self.witness, [()] + self.steps)]
        return record


def label_events(stg: StateTransitionGraph, morse_set=None) -> EventLabeledSubgraph:
    """
    Label every edge inside a Morse set (or the whole STG) with its possible extrema.

    Args:
        stg: the state transition graph
        morse_set: a MorseSet, a collection of domain indices, or None for all domains
    """
    set_id = None
    if morse_set is None:
        domains = tuple(range(stg.domain_count))
    elif isinstance(morse_set, MorseSet):
        domains, set_id = morse_set.domains, morse_set.id
    else:
        domains = tuple(sorted(morse_set))
    inside = set(domains)
    successors = {}
    events = {}
    for u in domains:
        targets = tuple(v for v in stg.successors[u] if v in inside and v != u)
        successors[u] = targets
        for v in targets:
            events[(u, v)] = stg.events(u, v)
    return EventLabeledSubgraph(stg, domains, successors, events, set_id)


class _CompiledPattern:
    """Pattern events resolved to network variables, with bitmask bookkeeping."""

    def __init__(self, pd: PatternDiagram, stg: StateTransitionGraph):
        self.pd = pd
        net = stg.net
        unknown = [gene for gene in pd.variables if gene not in net.names]
        if unknown:
            raise PatternError(f"Pattern variables not in network: {', '.join(unknown)}", variables=unknown)
        try:
            self.var_of = [net.index(e.gene) for e in pd.events]
        except NetworkValidationError as e:
            raise PatternError(str(e), variables=pd.variables, cause=e)
        self.kind_of = [e.kind for e in pd.events]
        self.full = (1 << len(pd.events)) - 1
        self.pred_mask = [sum(1 << a for a in pd.predecessors(b)) for b in range(len(pd.events))]

        self.chains: Dict[int, List[int]] = {}
        for gene in pd.variables:
            chain = pd.gene_chain(gene)
            for a, b in zip(chain, chain[1:]):
                if not pd.less(a, b):
                    raise PatternError(f"Events of {gene} are not totally ordered", variables=[gene])
                if pd.events[a].kind == pd.events[b].kind:
                    raise PatternError(f"Events of {gene} do not alternate min/max", variables=[gene])
            self.chains[net.index(gene)] = chain
        self.chain_mask = {v: sum(1 << b for b in chain) for v, chain in self.chains.items()}

    def directions(self, mask: int, cyclic: bool) -> Dict[int, Optional[int]]:
        dirs = {}
        for v, chain in self.chains.items():
            consumed = bin(mask & self.chain_mask[v]).count('1')
            if consumed == 0:
                dirs[v] = DECREASING if self.kind_of[chain[0]] == MIN else INCREASING
                continue
            if cyclic and consumed == len(chain) and self.kind_of[chain[0]] == self.kind_of[chain[-1]]:
                dirs[v] = None
                continue
            dirs[v] = INCREASING if self.kind_of[chain[consumed - 1]] == MIN else DECREASING
        return dirs

    def next_event(self, var: int, mask: int) -> Optional[int]:
        chain = self.chains.get(var)
        if chain is None:
            return None
        consumed = bin(mask & self.chain_mask[var]).count('1')
        return chain[consumed] if consumed < len(chain) else None


def _compatible(stg: StateTransitionGraph, d: int, dirs: Dict[int, Optional[int]]) -> bool:
    for v, direction in dirs.items():
        if direction is None:
            continue
        sign = int(stg.signs[d, v])
        if sign != EITHER and sign != direction:
            return False
    return True


def _moves(labeled: EventLabeledSubgraph, pattern: _CompiledPattern, u: int, mask: int, cyclic: bool):
    """Successor states of (u, mask) with the pattern events consumed on the way."""
    stg = labeled.stg
    for v in labeled.successors[u]:
        candidates = []
        for event in labeled.events[(u, v)]:
            b = pattern.next_event(event.variable, mask)
            if b is None or pattern.kind_of[b] != event.kind:
                continue
            if pattern.pred_mask[b] & mask == pattern.pred_mask[b]:
                candidates.append(b)
        for size in range(len(candidates) + 1):
            for chosen in combinations(candidates, size):
                new_mask = mask
                for b in chosen:
                    new_mask |= 1 << b
                if _compatible(stg, v, pattern.directions(new_mask, cyclic)):
                    yield v, new_mask, chosen


def _search(labeled: EventLabeledSubgraph, pattern: _CompiledPattern, starts: Sequence[int],
            goal, cyclic: bool) -> Optional[List[Tuple[int, int, Tuple[int, ...]]]]:
    queue = deque()
    parent = {}
    for d in starts:
        state = (d, 0)
        parent[state] = None
        queue.append(state)
    while queue:
        state = queue.popleft()
        u, mask = state
        for v, new_mask, chosen in _moves(labeled, pattern, u, mask, cyclic):
            nxt = (v, new_mask)
            if goal(nxt):
                path = [(v, new_mask, chosen)]
                while state is not None:
                    previous = parent[state]
                    if previous is None:
                        path.append((state[0], state[1], ()))
                    else:
                        path.append((state[0], state[1], previous[1]))
                    state = previous[0] if previous is not None else None
                path.reverse()
                return path
            if nxt not in parent:
                parent[nxt] = (state, chosen)
                queue.append(nxt)
    return None


def _result(labeled: EventLabeledSubgraph, pattern: _CompiledPattern, path) -> MatchResult:
    keys = [e.key for e in pattern.pd.events]
    witness = [d for d, _, _ in path]
    steps = [tuple(keys[b] for b in chosen) for _, _, chosen in path[1:]]
    extension = tuple(key for step in steps for key in step)
    return MatchResult(True, labeled.morse_set, witness, steps, extension)


def _absent_events(labeled: EventLabeledSubgraph, pattern: _CompiledPattern) -> List[str]:
    available = {(e.variable, e.kind) for found in labeled.events.values() for e in found}
    return [pattern.pd.events[b].key for b in range(len(pattern.pd.events))
            if (pattern.var_of[b], pattern.kind_of[b]) not in available]


def match_cycle(labeled: EventLabeledSubgraph, pd: PatternDiagram) -> MatchResult:
    """
    Decide whether a closed walk in the labeled subgraph realizes the pattern.

    The walk starts and ends at the same domain and consumes every pattern event
    exactly once in an order extending the pattern diagram.

    Raises:
        PatternError: the pattern names a variable absent from the network
    """
    pattern = _CompiledPattern(pd, labeled.stg)
    if not pd.events:
        has_cycle = any(labeled.successors[d] for d in labeled.domains)
        start = labeled.domains[:1] if has_cycle else []
        return MatchResult(has_cycle, labeled.morse_set, list(start))
    missing = _absent_events(labeled, pattern)
    if missing:
        logger.debug(f"Events absent from every edge: {missing}")
        return MatchResult(False, labeled.morse_set)

    initial = pattern.directions(0, cyclic=True)
    for d0 in labeled.domains:
        if not _compatible(labeled.stg, d0, initial):
            continue
        path = _search(labeled, pattern, [d0], lambda s, d0=d0: s == (d0, pattern.full), cyclic=True)
        if path is not None:
            return _result(labeled, pattern, path)
    return MatchResult(False, labeled.morse_set)


def match_path(labeled: EventLabeledSubgraph, pd: PatternDiagram) -> MatchResult:
    """Decide whether an open walk consumes every pattern event in an order extending the diagram."""
    pattern = _CompiledPattern(pd, labeled.stg)
    if not pd.events:
        return MatchResult(True, labeled.morse_set, list(labeled.domains[:1]))
    if _absent_events(labeled, pattern):
        return MatchResult(False, labeled.morse_set)
    initial = pattern.directions(0, cyclic=False)
    starts = [d for d in labeled.domains if _compatible(labeled.stg, d, initial)]
    path = _search(labeled, pattern, starts, lambda s: s[1] == pattern.full, cyclic=False)
    if path is None:
        return MatchResult(False, labeled.morse_set)
    return _result(labeled, pattern, path)


def verify_witness(labeled: EventLabeledSubgraph, pd: PatternDiagram, result: MatchResult,
                   cyclic: bool = True) -> List[str]:
    """
    Replay a witness walk.

    Returns:
        list of problems; empty when the witness is sound
    """
    problems = []
    if not result.matched:
        return problems
    if not pd.events:
        return problems
    keys = {e.key: b for b, e in enumerate(pd.events)}
    walk = result.witness
    consumed = set()
    for (u, v), step in zip(zip(walk, walk[1:]), result.steps):
        if v not in labeled.successors.get(u, ()):
            problems.append(f"{u} -> {v} is not an edge of the subgraph")
            continue
        available = {(labeled.stg.net.names[e.variable], e.kind) for e in labeled.events[(u, v)]}
        for key in step:
            event = pd.events[keys[key]]
            if (event.gene, event.kind) not in available:
                problems.append(f"{key} not available on {u} -> {v}")
            if key in consumed:
                problems.append(f"{key} consumed twice")
            for a in pd.predecessors(keys[key]):
                if pd.events[a].key not in consumed:
                    problems.append(f"{key} consumed before {pd.events[a].key}")
        consumed.update(step)
    if consumed != set(keys):
        problems.append(f"events never consumed: {sorted(set(keys) - consumed)}")
    if cyclic and walk and walk[0] != walk[-1]:
        problems.append("witness walk is not closed")
    return problems


def match_morse_graph(mg: MorseGraph, pd: PatternDiagram, cycle: bool = True,
                      stable_only: bool = True) -> List[MatchResult]:
    """
    Match a pattern against every eligible Morse set.

    Cycle matching skips fixed points. Unstable sets are only searched with
    ``stable_only=False`` (diagnostic use).
    """
    results = []
    for morse_set in mg.sets:
        if stable_only and not morse_set.stable:
            continue
        if cycle and morse_set.kind == 'FP':
            continue
        labeled = label_events(mg.stg, morse_set)
        result = match_cycle(labeled, pd) if cycle else match_path(labeled, pd)
        results.append(result)
    return results
