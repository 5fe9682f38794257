"""
Time-series ingestion, ε-noise extremal intervals and pattern diagrams.

An extremal interval is the window in which any perturbation of the curve by at
most ε times the series range must still have its extremum. A pattern diagram is
the partial order on extrema induced by disjoint intervals.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np
import pandas as pd

from core.exceptions import PatternError, TimeSeriesError
from core.records import load_yaml, save_yaml
from core.validation import validate_pattern_document
from .dynamics import MAX, MIN

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.10

# Mini wavepool node -> gene column, per proxy choice.
PROXY_SETS: Dict[str, Dict[str, str]] = {
    'Swi5-Nrm1': {'S': 'Swi4', 'N': 'Nrm1', 'D': 'Ndd1', 'W': 'Swi5', 'C': 'Clb2'},
    'Swi5-Yox1': {'S': 'Swi4', 'N': 'Yox1', 'D': 'Ndd1', 'W': 'Swi5', 'C': 'Clb2'},
    'Ace2-Nrm1': {'S': 'Swi4', 'N': 'Nrm1', 'D': 'Ndd1', 'W': 'Ace2', 'C': 'Clb2'},
    'Ace2-Yox1': {'S': 'Swi4', 'N': 'Yox1', 'D': 'Ndd1', 'W': 'Ace2', 'C': 'Clb2'},
}


@dataclass
class TimeSeries:
    """Sampled expression values per gene on a shared, strictly increasing time grid."""
    times: np.ndarray
    values: Dict[str, np.ndarray]

    @property
    def genes(self) -> List[str]:
        return list(self.values)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or self.times.size < 3:
            raise TimeSeriesError(f"A time series needs at least 3 samples, got {self.times.size}")
        if np.any(np.diff(self.times) <= 0):
            raise TimeSeriesError("Time stamps must be strictly increasing")
        for gene, series in list(self.values.items()):
            series = np.asarray(series, dtype=float)
            if series.shape != self.times.shape:
                raise TimeSeriesError(f"Gene {gene} has {series.size} values for {self.times.size} times",
                                      gene=gene)
            if not np.all(np.isfinite(series)):
                raise TimeSeriesError(f"Gene {gene} has missing or non-finite values", gene=gene)
            self.values[gene] = series

    def select(self, genes: Sequence[str]) -> 'TimeSeries':
        missing = [g for g in genes if g not in self.values]
        if missing:
            raise TimeSeriesError(f"Genes not in series: {', '.join(missing)}")
        return TimeSeries(self.times, {g: self.values[g] for g in genes})

    def with_proxies(self, proxies: Mapping[str, str]) -> 'TimeSeries':
        """Select proxy gene columns and rename them to network node names."""
        selected = self.select(list(proxies.values()))
        return TimeSeries(self.times, {node: selected.values[gene] for node, gene in proxies.items()})


def load_csv(path: str, genes: Optional[Sequence[str]] = None,
             proxies: Optional[Mapping[str, str]] = None) -> TimeSeries:
    """
    Read a ``time,<gene1>,<gene2>,...`` CSV; lines starting with ``#`` are skipped.

    Args:
        path: CSV file
        genes: optional subset of gene columns
        proxies: optional node -> gene map; columns are renamed to node names

    Raises:
        TimeSeriesError: ragged rows, non-numeric cells, non-monotone time, fewer than 3 rows
    """
    try:
        frame = pd.read_csv(path, skipinitialspace=True, comment='#')
    except FileNotFoundError as e:
        raise TimeSeriesError(f"Time series file not found: {path}", file_path=path, cause=e)
    except pd.errors.ParserError as e:
        raise TimeSeriesError(f"Ragged or malformed CSV: {path}", file_path=path, cause=e)
    except pd.errors.EmptyDataError as e:
        raise TimeSeriesError(f"Empty CSV: {path}", file_path=path, cause=e)

    if frame.columns.size < 2 or str(frame.columns[0]).strip().lower() != 'time':
        raise TimeSeriesError("CSV header must start with 'time' followed by gene names", file_path=path)
    if frame.isna().any().any():
        raise TimeSeriesError("CSV has missing cells (ragged rows)", file_path=path)
    try:
        frame = frame.apply(pd.to_numeric)
    except (ValueError, TypeError) as e:
        raise TimeSeriesError(f"Non-numeric value in {path}", file_path=path, cause=e)
    if len(frame) < 3:
        raise TimeSeriesError(f"Need at least 3 rows, found {len(frame)}", file_path=path)

    times = frame.iloc[:, 0].to_numpy(dtype=float)
    if np.any(np.diff(times) <= 0):
        raise TimeSeriesError("Time column is not strictly increasing", file_path=path)

    values = {str(column).strip(): frame[column].to_numpy(dtype=float) for column in frame.columns[1:]}
    series = TimeSeries(times, values)
    if genes:
        series = series.select(genes)
    if proxies:
        series = series.with_proxies(proxies)
    logger.info(f"Loaded {len(series.times)} samples for {len(series.values)} genes from {path}")
    return series


@dataclass(frozen=True)
class ExtremalInterval:
    gene: str
    kind: str
    t_lo: float
    t_hi: float
    epsilon: float
    time: float
    value: float

    def overlaps(self, other: 'ExtremalInterval') -> bool:
        """Closed-interval overlap; touching counts."""
        return self.t_lo <= other.t_hi and other.t_lo <= self.t_hi

    def precedes(self, other: 'ExtremalInterval') -> bool:
        return self.t_hi < other.t_lo


def _zigzag(values: np.ndarray, hysteresis: float) -> List[Tuple[int, str]]:
    """Alternating extrema whose successive differences reach ``hysteresis``; the endpoints' running extremes are kept."""
    extrema = []
    trend = None
    low = high = candidate = 0
    for i in range(1, len(values)):
        v = values[i]
        if trend is None:
            if v < values[low]:
                low = i
            if v > values[high]:
                high = i
            if v - values[low] >= hysteresis and low < i:
                extrema.append((low, MIN))
                trend, candidate = 'up', i
            elif values[high] - v >= hysteresis and high < i:
                extrema.append((high, MAX))
                trend, candidate = 'down', i
        elif trend == 'up':
            if v > values[candidate]:
                candidate = i
            elif values[candidate] - v >= hysteresis:
                extrema.append((candidate, MAX))
                trend, candidate = 'down', i
        else:
            if v < values[candidate]:
                candidate = i
            elif v - values[candidate] >= hysteresis:
                extrema.append((candidate, MIN))
                trend, candidate = 'up', i
    if trend == 'up':
        extrema.append((candidate, MAX))
    elif trend == 'down':
        extrema.append((candidate, MIN))
    return extrema


def _crossing(t0: float, f0: float, t1: float, f1: float, level: float) -> float:
    if f1 == f0:
        return t1
    return t0 + (level - f0) * (t1 - t0) / (f1 - f0)


def _interval(times: np.ndarray, values: np.ndarray, p: int, level: float, below: bool) -> Tuple[float, float]:
    inside = (values < level) if below else (values > level)
    lo = p
    while lo > 0 and inside[lo - 1]:
        lo -= 1
    hi = p
    while hi < len(values) - 1 and inside[hi + 1]:
        hi += 1
    t_lo = times[0] if lo == 0 else _crossing(times[lo - 1], values[lo - 1], times[lo], values[lo], level)
    t_hi = times[-1] if hi == len(values) - 1 else _crossing(times[hi], values[hi], times[hi + 1], values[hi + 1], level)
    return float(t_lo), float(t_hi)


def extremal_intervals(ts: TimeSeries, gene: str, epsilon: float = DEFAULT_EPSILON) -> List[ExtremalInterval]:
    """
    Extremal intervals of one gene at noise level ε.

    Extrema whose prominence is below 2ε·range are merged into their neighbours.
    For a surviving minimum of value v the interval is the connected stretch of the
    linearly interpolated curve around it that stays below v + 2ε·range (where the
    curve's lower ε band meets the upper band value at the minimum); maxima are
    symmetric. Series endpoints count as extrema.

    Raises:
        TimeSeriesError: ε outside (0, 0.5) or unknown gene
    """
    if not 0 < epsilon < 0.5:
        raise TimeSeriesError(f"Noise level must lie in (0, 0.5), got {epsilon}", gene=gene)
    if gene not in ts.values:
        raise TimeSeriesError(f"Unknown gene {gene}", gene=gene)

    values = ts.values[gene]
    spread = float(values.max() - values.min())
    if spread == 0.0:
        return []
    band = 2.0 * epsilon * spread

    intervals = []
    for p, kind in _zigzag(values, band):
        v = float(values[p])
        if kind == MIN:
            t_lo, t_hi = _interval(ts.times, values, p, v + band, below=True)
        else:
            t_lo, t_hi = _interval(ts.times, values, p, v - band, below=False)
        intervals.append(ExtremalInterval(gene, kind, t_lo, t_hi, epsilon, float(ts.times[p]), v))
    return intervals


@dataclass(frozen=True, order=True)
class PatternEvent:
    gene: str
    kind: str
    ordinal: int = 1

    @property
    def key(self) -> str:
        suffix = '' if self.ordinal == 1 else str(self.ordinal)
        return f"{self.gene}_{self.kind}{suffix}"


@dataclass
class PatternDiagram:
    """
    Events and a strict partial order on them.

    ``order`` holds pairs (a, b) of event indices with a < b and is transitively closed.
    """
    events: List[PatternEvent]
    order: FrozenSet[Tuple[int, int]]
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        graph = nx.DiGraph()
        graph.add_nodes_from(range(len(self.events)))
        graph.add_edges_from(self.order)
        if any(a == b for a, b in self.order) or not nx.is_directed_acyclic_graph(graph):
            raise PatternError("Pattern order is not a strict partial order")
        closed = nx.transitive_closure_dag(graph)
        self.order = frozenset(closed.edges())
        keys = [e.key for e in self.events]
        if len(set(keys)) != len(keys):
            raise PatternError(f"Duplicate pattern events: {keys}")
        self._predecessors = [frozenset(a for a, b in self.order if b == j) for j in range(len(self.events))]

    def __len__(self) -> int:
        return len(self.events)

    @property
    def variables(self) -> List[str]:
        seen = []
        for event in self.events:
            if event.gene not in seen:
                seen.append(event.gene)
        return seen

    def less(self, a: int, b: int) -> bool:
        return (a, b) in self.order

    def predecessors(self, b: int) -> FrozenSet[int]:
        return self._predecessors[b]

    def covers(self) -> List[Tuple[int, int]]:
        """Hasse diagram edges."""
        graph = nx.DiGraph()
        graph.add_nodes_from(range(len(self.events)))
        graph.add_edges_from(self.order)
        return sorted(nx.transitive_reduction(graph).edges())

    def gene_chain(self, gene: str) -> List[int]:
        """Indices of a gene's events in chain order."""
        members = [i for i, e in enumerate(self.events) if e.gene == gene]
        return sorted(members, key=lambda i: sum(1 for j in members if self.less(j, i)))

    def index(self, key: str) -> int:
        for i, event in enumerate(self.events):
            if event.key == key:
                return i
        raise PatternError(f"Unknown pattern event {key}")

    def to_dict(self) -> Dict:
        return {
            'events': [{'gene': e.gene, 'kind': e.kind, 'ordinal': e.ordinal} for e in self.events],
            'order': [[self.events[a].key, self.events[b].key] for a, b in self.covers()],
            'metadata': dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> 'PatternDiagram':
        errors = validate_pattern_document(data)
        if errors:
            raise PatternError("Invalid pattern document", errors=errors)
        events = []
        counts: Dict[Tuple[str, str], int] = {}
        for entry in data['events']:
            gene, kind = str(entry['gene']), str(entry['kind'])
            counts[(gene, kind)] = counts.get((gene, kind), 0) + 1
            events.append(PatternEvent(gene, kind, int(entry.get('ordinal', counts[(gene, kind)]))))
        keys = {e.key: i for i, e in enumerate(events)}
        order = set()
        for pair in data.get('order') or []:
            try:
                order.add((keys[str(pair[0])], keys[str(pair[1])]))
            except KeyError as e:
                raise PatternError(f"Order refers to unknown event {e}")
        return cls(events, frozenset(order), dict(data.get('metadata') or {}))

    def save(self, path: str):
        save_yaml(self.to_dict(), path)

    @classmethod
    def load(cls, path: str) -> 'PatternDiagram':
        return cls.from_dict(load_yaml(path))


def build_pattern_diagram(intervals: Sequence[ExtremalInterval],
                          max_events_per_gene: Optional[int] = None) -> PatternDiagram:
    """
    Partial order on extrema from their intervals.

    Events of different genes are ordered iff their closed intervals are disjoint;
    each gene's own events form a chain in time order.

    Args:
        intervals: extremal intervals of any number of genes
        max_events_per_gene: keep only the first N extrema of each gene
    """
    per_gene: Dict[str, List[ExtremalInterval]] = {}
    for interval in intervals:
        per_gene.setdefault(interval.gene, []).append(interval)

    kept: List[ExtremalInterval] = []
    for gene, items in per_gene.items():
        items = sorted(items, key=lambda x: x.time)
        if max_events_per_gene is not None:
            items = items[:max_events_per_gene]
        kept.extend(items)
    kept.sort(key=lambda x: (x.t_lo, x.t_hi, x.gene))

    counts: Dict[Tuple[str, str], int] = {}
    ordinals = {}
    for item in sorted(kept, key=lambda x: x.time):
        counts[(item.gene, item.kind)] = counts.get((item.gene, item.kind), 0) + 1
        ordinals[id(item)] = counts[(item.gene, item.kind)]
    events = [PatternEvent(item.gene, item.kind, ordinals[id(item)]) for item in kept]

    order = set()
    for a, first in enumerate(kept):
        for b, second in enumerate(kept):
            if a == b:
                continue
            if first.gene == second.gene:
                if first.time < second.time:
                    order.add((a, b))
            elif first.precedes(second):
                order.add((a, b))

    metadata = {
        'epsilon': sorted({item.epsilon for item in kept}),
        'max_events_per_gene': max_events_per_gene,
        'intervals': {events[i].key: [item.t_lo, item.t_hi] for i, item in enumerate(kept)},
    }
    diagram = PatternDiagram(events, frozenset(order), metadata)
    logger.debug(f"Pattern diagram with {len(events)} events and {len(diagram.order)} relations")
    return diagram


def discretize(ts: TimeSeries, epsilon: float = DEFAULT_EPSILON,
               genes: Optional[Sequence[str]] = None,
               max_events_per_gene: Optional[int] = None) -> PatternDiagram:
    """Extremal intervals for every selected gene, assembled into one pattern diagram."""
    intervals = []
    for gene in genes or ts.genes:
        intervals.extend(extremal_intervals(ts, gene, epsilon))
    return build_pattern_diagram(intervals, max_events_per_gene)


class LinearExtensions:
    """
    Lexicographic enumerator of linear extensions, stopping after ``cap`` results.

    After iteration, ``capped`` tells whether the enumeration was cut short.
    """

    def __init__(self, diagram: PatternDiagram, cap: int):
        self.diagram = diagram
        self.cap = cap
        self.capped = False
        self.count = 0

    def __iter__(self) -> Iterator[Tuple[PatternEvent, ...]]:
        n = len(self.diagram)
        placed: List[int] = []
        used: Set[int] = set()

        def extend():
            if len(placed) == n:
                yield tuple(self.diagram.events[i] for i in placed)
                return
            for i in range(n):
                if i in used or not self.diagram.predecessors(i) <= used:
                    continue
                placed.append(i)
                used.add(i)
                yield from extend()
                used.discard(i)
                placed.pop()

        for extension in extend():
            if self.count >= self.cap:
                self.capped = True
                logger.warning(f"Linear extension enumeration capped at {self.cap}")
                return
            self.count += 1
            yield extension


def linear_extensions(diagram: PatternDiagram, cap: int) -> LinearExtensions:
    return LinearExtensions(diagram, cap)


def count_linear_extensions(diagram: PatternDiagram) -> int:
    """Exact count by dynamic programming over down-sets."""
    n = len(diagram)
    predecessors = [sum(1 << a for a in diagram.predecessors(b)) for b in range(n)]
    counts = {0: 1}
    for _ in range(n):
        nxt: Dict[int, int] = {}
        for consumed, ways in counts.items():
            for b in range(n):
                if not consumed & (1 << b) and predecessors[b] & consumed == predecessors[b]:
                    key = consumed | (1 << b)
                    nxt[key] = nxt.get(key, 0) + ways
        counts = nxt
    return sum(counts.values()) if n else 1
