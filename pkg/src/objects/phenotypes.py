"""
Phenotype queries over the parameter graph.

Three queries are supported: wild-type cycling (a stable full cycle matches the
pattern), mutant cycling (a stable partial cycle that excludes the fixed node,
which sits at its restricted level, matches the pattern) and checkpoint fixed
points (a stable fixed point at one of the listed domains). Sweeps write one
record per matched parameter and a manifest; shards over disjoint index ranges
merge into the same result a single run produces.
"""

import concurrent.futures
import itertools
import logging
import os
from dataclasses import dataclass, field
from datetime import datetime
from functools import lru_cache
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from core.error_handler import ErrorHandler, get_global_error_handler
from core.exceptions import GrnDynamicsError, ParameterIndexError, PhenotypeSpecError, ShardMergeError
from core.manifest import RunManifest
from core.records import data_hash, iter_jsonl, load_yaml, save_yaml, write_jsonl
from core.settings import Settings, get_settings, set_settings
from core.validation import NOT_LOW, validate_phenotype_spec
from .dynamics import build_stg, morse_graph
from .network import RegulatoryNetwork, parse_network, serialize
from .parameter_graph import ParameterGraph, build_parameter_graph, restriction_labels, restriction_level
from .pattern_match import label_events, match_cycle, match_path
from .timeseries import PatternDiagram

logger = logging.getLogger(__name__)

WT_CYCLING = 'WT_CYCLING'
MUTANT_CYCLING = 'MUTANT_CYCLING'
CHECKPOINT_FP = 'CHECKPOINT_FP'

RECORDS_FILE = 'records.jsonl'
MANIFEST_FILE = 'manifest.yaml'
PROGRESS_FILE = 'progress.yaml'

# Coordinates in node order (S, N, D, W, C) of the mini wavepool.
CHECKPOINT_PRESETS: Dict[str, List[Tuple[Any, ...]]] = {
    'SAC': [(0, 0, 2, 1, NOT_LOW)],
    'DRC_YOX1': [(0, 0, 2, 1, NOT_LOW)],
    'DRC_NRM1': [(0, 1, 2, 1, NOT_LOW)],
}


@dataclass
class PhenotypeSpec:
    """A validated phenotype query."""
    name: str
    kind: str
    pattern: Optional[PatternDiagram] = None
    fixed_node: Optional[str] = None
    restriction: Optional[str] = None
    mode: str = 'restricted'
    fixed_points: Tuple[Tuple[Any, ...], ...] = ()
    match: str = 'cycle'
    stable_only: bool = True
    document: Dict[str, Any] = field(default_factory=dict)

    @property
    def spec_hash(self) -> str:
        return data_hash({'spec': self.document,
                          'pattern': self.pattern.to_dict() if self.pattern is not None else None})

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: str = '.', spec_path: Optional[str] = None,
                  pattern: Optional[PatternDiagram] = None) -> 'PhenotypeSpec':
        """
        Build a spec from its document.

        Args:
            data: the spec document
            base_dir: directory relative pattern paths are resolved against
            spec_path: file the document came from (for error messages)
            pattern: an already loaded pattern, overriding the document's ``pattern`` entry
        """
        document = dict(data) if isinstance(data, dict) else data
        if pattern is not None and isinstance(document, dict) and 'pattern' not in document:
            document['pattern'] = '<inline>'
        errors = validate_phenotype_spec(document)
        if errors:
            raise PhenotypeSpecError(f"Invalid phenotype spec {spec_path or ''}".strip(),
                                     spec_path=spec_path, errors=errors)

        kind = document['kind']
        if kind != CHECKPOINT_FP and pattern is None:
            pattern = PatternDiagram.load(os.path.join(base_dir, document['pattern']))

        restriction = document.get('restriction')
        if kind == WT_CYCLING:
            restriction = restriction or 'WT'
        if kind == MUTANT_CYCLING and restriction == 'WT':
            raise PhenotypeSpecError("A mutant cycling spec needs ON, OFF, INT_H or INT_L",
                                     spec_path=spec_path)

        points = document.get('fixed_points')
        if document.get('preset'):
            points = CHECKPOINT_PRESETS[document['preset']]
        return cls(
            name=document['name'],
            kind=kind,
            pattern=pattern if kind != CHECKPOINT_FP else None,
            fixed_node=document.get('fixed_node'),
            restriction=restriction,
            mode=document.get('mode', 'restricted'),
            fixed_points=tuple(tuple(p) for p in points or ()),
            match=document.get('match', 'cycle'),
            stable_only=document.get('stable_only', True),
            document=document,
        )

    def check_network(self, net: RegulatoryNetwork):
        """
        Raises:
            PhenotypeSpecError: the spec refers to nodes or coordinates the network lacks
        """
        errors = []
        if self.fixed_node is not None and self.fixed_node not in net.names:
            errors.append(f"Fixed node '{self.fixed_node}' is not in the network")
        if self.pattern is not None:
            missing = [gene for gene in self.pattern.variables if gene not in net.names]
            if missing:
                errors.append(f"Pattern variables not in the network: {missing}")
            if self.fixed_node in self.pattern.variables and self.kind == MUTANT_CYCLING:
                errors.append(f"The fixed node '{self.fixed_node}' cannot be a pattern variable")
        for point in self.fixed_points:
            if len(point) != net.size:
                errors.append(f"Fixed point {list(point)} has {len(point)} coordinates for {net.size} nodes")
                continue
            for i, value in enumerate(point):
                if value != NOT_LOW and not 0 <= value <= net.out_degree(i):
                    errors.append(f"Coordinate {value} of {net.names[i]} exceeds {net.out_degree(i)}")
        if errors:
            raise PhenotypeSpecError(f"Spec '{self.name}' does not fit the network", errors=errors)

    def target_points(self, net: RegulatoryNetwork) -> FrozenSet[Tuple[int, ...]]:
        """Fixed-point tuples with 'not_low' expanded to every level above 0."""
        expanded = set()
        for point in self.fixed_points:
            choices = [range(1, net.out_degree(i) + 1) if value == NOT_LOW else [value]
                       for i, value in enumerate(point)]
            expanded.update(itertools.product(*choices))
        return frozenset(expanded)


def load_spec(path: str, net: Optional[RegulatoryNetwork] = None) -> PhenotypeSpec:
    spec = PhenotypeSpec.from_dict(load_yaml(path), os.path.dirname(path) or '.', path)
    if net is not None:
        spec.check_network(net)
    logger.info(f"Loaded phenotype spec '{spec.name}' ({spec.kind}) from {path}")
    return spec


def checkpoint_spec(preset: str, name: Optional[str] = None) -> PhenotypeSpec:
    """A CHECKPOINT_FP spec for one of the named presets."""
    return PhenotypeSpec.from_dict({'name': name or preset.lower(), 'kind': CHECKPOINT_FP, 'preset': preset})


def allowed_factors(pg: ParameterGraph, spec: PhenotypeSpec) -> Optional[Set[int]]:
    """Permissible factor indices at the fixed node, or None when every parameter is permissible."""
    if spec.mode == 'relaxed' or spec.fixed_node is None or spec.kind == CHECKPOINT_FP:
        return None
    node = pg.net.index(spec.fixed_node)
    labels = restriction_labels(pg, node)
    return {f for f, label in enumerate(labels) if label == spec.restriction}


def permissible_count(pg: ParameterGraph, spec: PhenotypeSpec) -> int:
    allowed = allowed_factors(pg, spec)
    if allowed is None:
        return pg.size
    return pg.remainder_size(pg.net.index(spec.fixed_node)) * len(allowed)


def _node_digit(pg: ParameterGraph, k: int, node: int) -> int:
    stride = 1
    for radix in pg.radices[:node]:
        stride *= radix
    return (k // stride) % pg.radices[node]


def evaluate_parameter(pg: ParameterGraph, spec: PhenotypeSpec, k: int) -> Optional[Dict[str, Any]]:
    """
    Evaluate one parameter node.

    Returns:
        a match record, or None when the phenotype is not realized
    """
    net = pg.net
    stg = build_stg(net, pg, k)
    mg = morse_graph(stg)

    if spec.kind == CHECKPOINT_FP:
        targets = spec.target_points(net)
        for morse_set in mg.sets:
            if morse_set.kind == 'FP' and morse_set.stable and morse_set.coords in targets:
                return {'parameter': k, 'phenotype': spec.name, 'morse_set': morse_set.id,
                        'label': morse_set.label(net.names)}
        return None

    pattern_vars = {net.index(gene) for gene in spec.pattern.variables}
    fixed = net.index(spec.fixed_node) if spec.fixed_node is not None else None
    level = None
    if spec.kind == MUTANT_CYCLING:
        level = restriction_level(spec.restriction, net.out_degree(fixed))

    for morse_set in mg.sets:
        if spec.stable_only and not morse_set.stable:
            continue
        if spec.kind == WT_CYCLING and morse_set.kind != 'FC':
            continue
        if spec.kind == MUTANT_CYCLING:
            if morse_set.kind != 'PC' or fixed in morse_set.variables:
                continue
            if not pattern_vars <= set(morse_set.variables):
                continue
            if any(int(stg.coords[d, fixed]) != level for d in morse_set.domains):
                continue
        labeled = label_events(stg, morse_set)
        result = match_cycle(labeled, spec.pattern) if spec.match == 'cycle' else match_path(labeled, spec.pattern)
        if result.matched:
            return {'parameter': k, 'phenotype': spec.name, 'morse_set': morse_set.id,
                    'label': morse_set.label(net.names), 'extension': list(result.extension),
                    'witness': data_hash([stg.coordinate_label(d) for d in result.witness])[:16]}
    return None


def _evaluate_indices(pg: ParameterGraph, spec: PhenotypeSpec, indices: Sequence[int],
                      strict: bool) -> Tuple[List[Dict[str, Any]], int]:
    """Records (matches and error records) for the permissible indices, and the permissible count."""
    allowed = allowed_factors(pg, spec)
    fixed = pg.net.index(spec.fixed_node) if allowed is not None else None
    records = []
    eligible = 0
    for k in indices:
        if allowed is not None and _node_digit(pg, k, fixed) not in allowed:
            continue
        eligible += 1
        try:
            record = evaluate_parameter(pg, spec, k)
        except Exception as e:
            if strict:
                raise
            code = e.error_code if isinstance(e, GrnDynamicsError) else 'INTERNAL_ERROR'
            logger.debug(f"Parameter {k} failed: {e}", extra={'parameter': k, 'error_code': code})
            records.append({'parameter': k, 'phenotype': spec.name, 'error': code, 'message': str(e)})
            continue
        if record is not None:
            records.append(record)
    return records, eligible


@lru_cache(maxsize=4)
def _worker_parameter_graph(network_text: str, max_in: int, max_out: int) -> ParameterGraph:
    return build_parameter_graph(parse_network(network_text), max_in, max_out)


def _worker_block(network_text: str, spec: PhenotypeSpec, settings: Settings,
                  indices: Sequence[int], strict: bool) -> Tuple[List[Dict[str, Any]], int]:
    set_settings(settings)
    pg = _worker_parameter_graph(network_text, settings.max_in_edges, settings.max_out_edges)
    return _evaluate_indices(pg, spec, indices, strict)


def sample_indices(size: int, count: int, seed: int) -> List[int]:
    """A sorted, seeded sample of distinct parameter indices."""
    count = min(count, size)
    rng = np.random.default_rng(seed)
    return sorted(int(k) for k in rng.choice(size, size=count, replace=False, shuffle=False))


@dataclass
class SweepResult:
    """Records of one sweep (or merged shards) with the manifest that produced them."""
    manifest: RunManifest
    records: List[Dict[str, Any]]

    @property
    def matches(self) -> List[Dict[str, Any]]:
        return [r for r in self.records if 'error' not in r]

    @property
    def errors(self) -> List[Dict[str, Any]]:
        return [r for r in self.records if 'error' in r]

    @property
    def matched_parameters(self) -> List[int]:
        return sorted({r['parameter'] for r in self.matches})

    @property
    def phenotype(self) -> str:
        return self.manifest.phenotype

    def save(self, out_dir: str):
        write_jsonl(sorted(self.records, key=lambda r: r['parameter']), os.path.join(out_dir, RECORDS_FILE))
        self.manifest.save(os.path.join(out_dir, MANIFEST_FILE))

    @classmethod
    def load(cls, directory: str) -> 'SweepResult':
        manifest = RunManifest.load(os.path.join(directory, MANIFEST_FILE))
        records_path = os.path.join(directory, RECORDS_FILE)
        records = list(iter_jsonl(records_path)) if os.path.exists(records_path) else []
        return cls(manifest, records)


def _resume_position(out_dir: str, manifest: RunManifest, indices: Sequence[int]) -> int:
    progress_path = os.path.join(out_dir, PROGRESS_FILE)
    manifest_path = os.path.join(out_dir, MANIFEST_FILE)
    if not (os.path.exists(progress_path) and os.path.exists(manifest_path)):
        return 0
    previous = RunManifest.load(manifest_path)
    same_run = (previous.network_fingerprint == manifest.network_fingerprint
                and previous.spec_hash == manifest.spec_hash
                and previous.range == manifest.range and previous.sample == manifest.sample)
    if not same_run:
        logger.warning(f"Existing shard in {out_dir} belongs to another run; starting over")
        return 0
    progress = load_yaml(progress_path) or {}
    position = int(progress.get('next_position', 0))
    manifest.processed = int(progress.get('processed', 0))
    manifest.notes['eligible'] = int(progress.get('eligible', 0))
    done = set(indices[:position])
    records_path = os.path.join(out_dir, RECORDS_FILE)
    kept = [r for r in iter_jsonl(records_path) if r['parameter'] in done] if os.path.exists(records_path) else []
    write_jsonl(kept, records_path)
    logger.info(f"Resuming sweep in {out_dir} at position {position} of {len(indices)}")
    return position


def run_sweep(pg: ParameterGraph, spec: PhenotypeSpec, shard: Optional[Tuple[int, int]] = None,
              sample: Optional[Tuple[int, int]] = None, out_dir: Optional[str] = None,
              workers: Optional[int] = None, checkpoint_every: Optional[int] = None,
              strict: bool = False, error_handler: Optional[ErrorHandler] = None,
              input_hashes: Optional[Dict[str, str]] = None) -> SweepResult:
    """
    Evaluate a phenotype over an index range or a seeded sample.

    Args:
        pg: the parameter graph
        spec: the phenotype query
        shard: half-open index range (default: the whole graph)
        sample: (count, seed) for a random sample instead of a range
        out_dir: shard directory; enables checkpointing and resume
        workers: worker processes (default from settings)
        checkpoint_every: parameters per checkpoint block (default from settings)
        strict: re-raise the first per-parameter failure instead of recording it
        error_handler: receives a report for every failed parameter
        input_hashes: file name -> sha256 of the inputs, recorded in the manifest

    Raises:
        ParameterIndexError: the range lies outside the parameter graph
    """
    settings = get_settings()
    workers = workers or settings.workers
    checkpoint_every = checkpoint_every or settings.checkpoint_every
    handler = error_handler or get_global_error_handler()
    net = pg.net
    spec.check_network(net)

    manifest = RunManifest(subcommand='sweep', network_fingerprint=net.fingerprint(), spec_hash=spec.spec_hash,
                           phenotype=spec.name, notes={'kind': spec.kind, 'mode': spec.mode, 'eligible': 0,
                                                        'permissible_total': permissible_count(pg, spec),
                                                        'parameter_graph_size': pg.size,
                                                        'wt_requires': 'existence of a matching stable FC'},
                           input_hashes=dict(input_hashes or {}))
    if sample is not None:
        count, seed = sample
        indices = sample_indices(pg.size, count, seed)
        manifest.sample = {'count': len(indices), 'seed': seed}
        manifest.seed = seed
    else:
        start, stop = shard if shard is not None else (0, pg.size)
        if not 0 <= start <= stop <= pg.size:
            raise ParameterIndexError(f"Shard [{start}, {stop}) is outside [0, {pg.size})",
                                      index=[start, stop], size=pg.size)
        indices = range(start, stop)
        manifest.range = [start, stop]

    position = _resume_position(out_dir, manifest, indices) if out_dir else 0
    if out_dir and position == 0:
        write_jsonl([], os.path.join(out_dir, RECORDS_FILE))
    records: List[Dict[str, Any]] = []
    started_at = datetime.now()
    network_text = serialize(net)

    executor = concurrent.futures.ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while position < len(indices):
            block = indices[position:position + checkpoint_every]
            if executor is None:
                block_records, eligible = _evaluate_indices(pg, spec, block, strict)
            else:
                size = -(-len(block) // workers)
                chunks = [block[i:i + size] for i in range(0, len(block), size)]
                futures = [executor.submit(_worker_block, network_text, spec, settings, chunk, strict)
                           for chunk in chunks]
                block_records, eligible = [], 0
                # chunks are contiguous, so collecting in submission order keeps records sorted
                for future in futures:
                    chunk_records, chunk_eligible = future.result()
                    block_records.extend(chunk_records)
                    eligible += chunk_eligible

            for record in block_records:
                if 'error' in record:
                    handler.handle_error(GrnDynamicsError(record['message'], record['error'],
                                                          {'parameter': record['parameter']}),
                                         {'phenotype': spec.name})
            position += len(block)
            manifest.processed += len(block)
            manifest.notes['eligible'] += eligible
            records.extend(block_records)

            if out_dir:
                write_jsonl(block_records, os.path.join(out_dir, RECORDS_FILE), append=True)
                manifest.save(os.path.join(out_dir, MANIFEST_FILE))
                save_yaml({'next_position': position, 'processed': manifest.processed,
                           'eligible': manifest.notes['eligible']}, os.path.join(out_dir, PROGRESS_FILE))
            logger.info(f"{spec.name}: {position}/{len(indices)} parameters, "
                        f"{sum(1 for r in records if 'error' not in r)} matches in this run")
    finally:
        if executor is not None:
            executor.shutdown()

    if out_dir:
        records = list(iter_jsonl(os.path.join(out_dir, RECORDS_FILE))) \
            if os.path.exists(os.path.join(out_dir, RECORDS_FILE)) else records
    result = SweepResult(manifest, sorted(records, key=lambda r: r['parameter']))
    manifest.matched = len(result.matched_parameters)
    manifest.errors = len(result.errors)
    manifest.finish(started_at)
    if out_dir:
        result.save(out_dir)
        progress_path = os.path.join(out_dir, PROGRESS_FILE)
        if os.path.exists(progress_path):
            os.remove(progress_path)
    logger.info(f"Sweep '{spec.name}' finished: {manifest.matched} matches, {manifest.errors} errors")
    return result


def merge_shards(shards: Sequence[SweepResult]) -> SweepResult:
    """
    Deterministic union of range shards.

    Raises:
        ShardMergeError: differing fingerprints or specs, incomplete shards, gaps or overlaps
    """
    if not shards:
        raise ShardMergeError("Nothing to merge")
    fingerprints = sorted({s.manifest.network_fingerprint for s in shards})
    if len(fingerprints) > 1:
        raise ShardMergeError("Shards come from different networks", fingerprints=fingerprints)
    if len({s.manifest.spec_hash for s in shards}) > 1:
        raise ShardMergeError("Shards come from different phenotype specs", fingerprints=fingerprints)
    if any(s.manifest.range is None for s in shards):
        raise ShardMergeError("Only range shards can be merged")
    incomplete = [s.manifest.range for s in shards if not s.manifest.complete]
    if incomplete:
        raise ShardMergeError("Some shards did not finish", ranges=incomplete)

    ordered = sorted(shards, key=lambda s: tuple(s.manifest.range))
    ranges = [s.manifest.range for s in ordered]
    for previous, current in zip(ranges, ranges[1:]):
        if current[0] < previous[1]:
            raise ShardMergeError(f"Shards {previous} and {current} overlap", ranges=ranges)
        if current[0] > previous[1]:
            raise ShardMergeError(f"Gap between shards {previous} and {current}", ranges=ranges)

    first = ordered[0].manifest
    manifest = RunManifest(subcommand='merge', network_fingerprint=first.network_fingerprint,
                           spec_hash=first.spec_hash, phenotype=first.phenotype,
                           range=[ranges[0][0], ranges[-1][1]], notes=dict(first.notes))
    manifest.notes['eligible'] = sum(int(s.manifest.notes.get('eligible', 0)) for s in ordered)
    manifest.notes['shards'] = len(ordered)
    records = sorted((r for s in ordered for r in s.records), key=lambda r: r['parameter'])
    result = SweepResult(manifest, records)
    manifest.processed = sum(s.manifest.processed for s in ordered)
    manifest.matched = len(result.matched_parameters)
    manifest.errors = len(result.errors)
    manifest.finish(datetime.now())
    logger.info(f"Merged {len(ordered)} shards covering {manifest.range}")
    return result


@dataclass
class MpgSummary:
    """Remainder-parameter sets per phenotype and their intersections."""
    excluded: str
    normalizer: str
    sets: Dict[str, Set[int]]
    match_counts: Dict[str, int]
    match_percent: Dict[str, float]
    intersections: Dict[str, int]
    intersection: Set[int]

    @property
    def counts(self) -> Dict[str, int]:
        return {name: len(members) for name, members in self.sets.items()}

    @property
    def percentages(self) -> Dict[str, float]:
        """MPG overlap with the normalizing phenotype, as a percentage of its MPG count."""
        base = self.sets[self.normalizer]
        if not base:
            return {name: 0.0 for name in self.sets}
        return {name: 100.0 * len(members & base) / len(base) for name, members in self.sets.items()}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'excluded': self.excluded,
            'normalizer': self.normalizer,
            'mpg_counts': self.counts,
            'mpg_percent': self.percentages,
            'match_counts': self.match_counts,
            'match_percent': self.match_percent,
            'intersections': self.intersections,
            'intersection_size': len(self.intersection),
        }


def _check_results(results: Sequence[SweepResult], pg: ParameterGraph):
    fingerprint = pg.net.fingerprint()
    found = sorted({r.manifest.network_fingerprint for r in results})
    if found != [fingerprint]:
        raise ShardMergeError("Results do not belong to this parameter graph", fingerprints=found)


def _mpg_sets(results: Sequence[SweepResult], pg: ParameterGraph, excluded: int) -> Dict[str, Set[int]]:
    sets = {}
    for result in results:
        name = result.phenotype
        if name in sets:
            raise ShardMergeError(f"Phenotype '{name}' given twice")
        sets[name] = {pg.remainder_index(k, excluded) for k in result.matched_parameters}
    return sets


def _normalizer(results: Sequence[SweepResult]) -> str:
    for result in results:
        if result.manifest.notes.get('kind') == WT_CYCLING:
            return result.phenotype
    return results[0].phenotype


def _match_stats(results: Sequence[SweepResult]) -> Tuple[Dict[str, int], Dict[str, float]]:
    counts, percent = {}, {}
    for result in results:
        counts[result.phenotype] = len(result.matched_parameters)
        eligible = int(result.manifest.notes.get('eligible', 0))
        percent[result.phenotype] = 100.0 * counts[result.phenotype] / eligible if eligible else 0.0
    return counts, percent


def mpg_intersect(results: Sequence[SweepResult], pg: ParameterGraph, excluded) -> MpgSummary:
    """
    Project matches onto remainder parameters and intersect across phenotypes.

    Args:
        results: sweeps over the same network
        pg: the parameter graph
        excluded: node (name or index) whose factor is projected away
    """
    if not results:
        raise ShardMergeError("No results to intersect")
    _check_results(results, pg)
    node = pg.net.resolve(excluded)
    sets = _mpg_sets(results, pg, node)
    intersection = set.intersection(*sets.values())
    counts, percent = _match_stats(results)
    summary = MpgSummary(excluded=pg.net.names[node], normalizer=_normalizer(results), sets=sets,
                         match_counts=counts, match_percent=percent,
                         intersections={'&'.join(sets): len(intersection)}, intersection=intersection)
    logger.info(f"MPG intersection over {len(sets)} phenotypes: {len(intersection)} remainder parameters")
    return summary


def coexistence_query(results: Sequence[SweepResult], pg: ParameterGraph, excluded) -> MpgSummary:
    """Cardinality of the MPG intersection for every non-empty subset of the given phenotypes."""
    if not results:
        raise ShardMergeError("No results to intersect")
    if len(results) < 2:
        logger.warning("Coexistence over a single phenotype is its own MPG set")
    _check_results(results, pg)
    node = pg.net.resolve(excluded)
    sets = _mpg_sets(results, pg, node)
    names = list(sets)
    intersections = {}
    for size in range(1, len(names) + 1):
        for subset in itertools.combinations(names, size):
            members = set.intersection(*(sets[n] for n in subset))
            intersections['&'.join(subset)] = len(members)
    intersection = set.intersection(*sets.values())
    counts, percent = _match_stats(results)
    return MpgSummary(excluded=pg.net.names[node], normalizer=_normalizer(results), sets=sets,
                      match_counts=counts, match_percent=percent, intersections=intersections,
                      intersection=intersection)


def load_results(directories: Iterable[str]) -> List[SweepResult]:
    return [SweepResult.load(directory) for directory in directories]
