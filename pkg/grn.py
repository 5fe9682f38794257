#!/usr/bin/env python3
"""
Gene regulatory network dynamics tool.

Enumerates the parameter graph of a switching-system network, computes state
transition graphs and Morse graphs per parameter, discretizes time series into
pattern diagrams, matches patterns against Morse sets, runs sharded phenotype
sweeps and simulates Hill-function witnesses.

Usage:
    python grn.py pg size --net data/networks/toggle.net
    python grn.py pg find --net NET --where X1:band=0,1 --where X2:label=OFF
    python grn.py dyn mg --net NET --param K [--dot]
    python grn.py ts discretize --csv WT.csv --proxy Swi5-Nrm1 --eps 0.10 --out wt.yaml
    python grn.py match --net NET --param K --pattern wt.yaml
    python grn.py sweep --net NET --spec wt_spec.yaml --range 0:100000 --out shards/0
    python grn.py merge --out merged shards/0 shards/1
    python grn.py mpg --net NET --exclude C results/wt results/sac
    python grn.py sim --net NET --param K --seed 1 --csv run.csv

    Machine-readable records go to stdout with --porcelain; progress and
    diagnostics always go to stderr.

Exit codes:
    0 success, 1 domain error, 2 usage error, 130 interrupted

Environment Variables:
    LOG_LEVEL: Logging level (default: INFO)
    DEBUG: Enable debug mode (default: false)
    GRN_MAX_IN_EDGES / GRN_MAX_OUT_EDGES: enumeration guards (default: 4)
    GRN_LP_MARGIN: strict-inequality margin of the LP checks (default: 1e-6)
    GRN_SAMPLE_COUNT / GRN_SAMPLE_SEED: sampling fallback for product-of-sums nodes
    GRN_EPSILON: time-series noise level (default: 0.10)
    GRN_HILL_N, GRN_DT, GRN_T_END, GRN_TRANSIENT: simulation defaults
    GRN_CHECKPOINT_EVERY: sweep checkpoint block size (default: 10000)
    GRN_WORKERS: sweep worker processes (default: 1)
    GRN_LINEAR_EXTENSION_CAP: linear extension enumeration cap (default: 10000)
"""

import os
import sys
import argparse
import logging
from typing import Any, Dict, List, Optional

# Load environment variables from .env file
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    # python-dotenv not installed, skip loading .env file
    pass

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), 'src'))

from core.error_handler import get_global_error_handler, safe_execute
from core.exceptions import ConsistencyError, GrnDynamicsError, PatternError, PhenotypeSpecError
from core.manifest import RunManifest, build_fingerprint
from core.records import dump_record, file_hash, save_yaml, write_text
from core.settings import get_settings, set_settings
from objects.dynamics import build_stg, morse_graph
from objects.hill import (domain_of_state, extrema_order, is_cyclic_extension, random_initial_conditions,
                          refine_equilibrium, sample_region, simulate, subthreshold_oscillations,
                          RealParameterization)
from objects.network import load_network
from objects.parameter_graph import build_parameter_graph, find_parameters, restriction_labels
from objects.pattern_match import label_events, match_cycle, match_path, verify_witness
from objects.phenotypes import (MANIFEST_FILE, checkpoint_spec, coexistence_query, load_results, load_spec,
                                merge_shards, mpg_intersect, run_sweep)
from objects.timeseries import (PROXY_SETS, PatternDiagram, count_linear_extensions, discretize,
                                linear_extensions, load_csv)
from utils.dot import morse_graph_dot, pattern_dot, render, stg_dot

logger = logging.getLogger('grn')


def setup_logging(log_level: str = None, debug: bool = False):
    """Set up logging configuration; everything goes to stderr."""
    if debug or os.getenv('DEBUG', 'false').lower() == 'true':
        level = logging.DEBUG
    else:
        level = getattr(logging, (log_level or os.getenv('LOG_LEVEL', 'INFO')).upper())

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        stream=sys.stderr
    )


def parse_range(value: str):
    """``a:b`` half-open index range with a <= b."""
    try:
        start, stop = (int(part) for part in value.split(':'))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP, got '{value}'")
    if start < 0 or start > stop:
        raise argparse.ArgumentTypeError(f"invalid range '{value}': need 0 <= START <= STOP")
    return start, stop


def parse_int_list(value: str) -> List[int]:
    try:
        return [int(part) for part in value.split(',') if part.strip() != '']
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{value}'")


def parse_float_list(value: str) -> List[float]:
    try:
        return [float(part) for part in value.split(',') if part.strip() != '']
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{value}'")


def parse_filters(net, clauses: Optional[List[str]]) -> Dict[int, Dict[str, Any]]:
    """
    Turn ``NODE:key=value`` clauses into find_parameters filters.

    Keys: band (comma list), perm (comma list), label (restriction label), factor (index).
    """
    filters: Dict[int, Dict[str, Any]] = {}
    for clause in clauses or []:
        try:
            node, assignment = clause.split(':', 1)
            key, value = assignment.split('=', 1)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected NODE:key=value, got '{clause}'")
        key = key.strip()
        entry = filters.setdefault(net.resolve(node.strip()), {})
        if key in ('band', 'perm'):
            entry[key] = tuple(parse_int_list(value))
        elif key == 'factor':
            entry[key] = int(value)
        elif key == 'label':
            entry[key] = value.strip()
        else:
            raise argparse.ArgumentTypeError(f"unknown filter key '{key}' in '{clause}'")
    return filters


def emit(args, record: Dict[str, Any], text: Optional[str] = None):
    """One record: JSON with --porcelain, otherwise the human-readable text."""
    if args.porcelain or text is None:
        print(dump_record(record))
    else:
        print(text)


def run_manifest(args, inputs: List[str], net=None, seed: Optional[int] = None, **notes) -> RunManifest:
    """Provenance of a single-file output: the subcommand, its input hashes, network and seed."""
    subcommand = ' '.join(part for part in (args.command, getattr(args, 'action', None)) if part)
    return RunManifest(subcommand=subcommand,
                       network_fingerprint=net.fingerprint() if net is not None else None,
                       seed=seed,
                       input_hashes={path: file_hash(path) for path in inputs},
                       notes={key: value for key, value in notes.items() if value is not None})


def write_or_print(text: str, out: Optional[str], manifest: Optional[RunManifest] = None):
    """DOT text to a file (headed by a comment naming its manifest) or to stdout."""
    if out:
        if manifest is not None:
            text = f"// manifest: {manifest.attach(out)}\n{text}"
        write_text(text, out)
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# pg
# ---------------------------------------------------------------------------

def cmd_pg_size(args) -> int:
    net = load_network(args.net)
    pg = build_parameter_graph(net)
    if not pg.certified:
        logger.warning("Some factor graphs were enumerated by sampling; the size is not certified")
    emit(args, {'size': pg.size, 'radices': list(pg.radices), 'certified': pg.certified}, str(pg.size))
    return 0


def _factor_records(pg, node: int):
    net = pg.net
    graph = pg.factors[node]
    labels = restriction_labels(pg, node) if net.in_degree(node) == 1 else None
    for f, param in enumerate(graph.params):
        record = {'node': net.names[node], 'factor': f, 'band': list(param.logic.band),
                  'perm': list(param.order.perm), 'inequalities': param.inequalities(net, node),
                  'neighbors': list(graph.adjacency[f]), 'certified': graph.certified}
        if labels is not None:
            record['restriction'] = labels[f]
        yield record


def cmd_pg_factor(args) -> int:
    net = load_network(args.net)
    pg = build_parameter_graph(net)
    node = net.resolve(args.node)
    for record in _factor_records(pg, node):
        emit(args, record, f"{record['factor']:>4}  {record['inequalities']}"
                           + (f"  [{record['restriction']}]" if 'restriction' in record else ''))
    logger.info(f"{net.names[node]}: {pg.factors[node].size} factor parameters")
    return 0


def cmd_pg_dump(args) -> int:
    net = load_network(args.net)
    pg = build_parameter_graph(net)
    for node in range(net.size):
        for record in _factor_records(pg, node):
            print(dump_record(record))
    return 0


def cmd_pg_find(args) -> int:
    net = load_network(args.net)
    pg = build_parameter_graph(net)
    filters = parse_filters(net, args.where)
    found = 0
    for k in find_parameters(pg, filters):
        emit(args, {'parameter': k, 'factors': list(pg.index_to_tuple(k))}, str(k))
        found += 1
        if args.limit and found >= args.limit:
            break
    logger.info(f"{found} parameters matched")
    return 0


def cmd_pg_neighbors(args) -> int:
    net = load_network(args.net)
    pg = build_parameter_graph(net)
    if args.inequalities:
        for name, chain in pg.inequalities(args.param).items():
            emit(args, {'parameter': args.param, 'node': name, 'inequalities': chain}, f"{name}: {chain}")
    neighbors = pg.adjacent(args.param)
    emit(args, {'parameter': args.param, 'neighbors': neighbors}, ' '.join(str(k) for k in neighbors))
    return 0


# ---------------------------------------------------------------------------
# dyn
# ---------------------------------------------------------------------------

def _stg_for(args):
    net = load_network(args.net)
    pg = build_parameter_graph(net)
    return build_stg(net, pg, args.param)


def _dyn_manifest(args, stg, **notes) -> RunManifest:
    return run_manifest(args, [args.net], stg.net, parameter=args.param, **notes)


def cmd_dyn_stg(args) -> int:
    stg = _stg_for(args)
    domains = None
    if args.morse_set is not None:
        mg = morse_graph(stg)
        domains = mg.sets[args.morse_set].domains
    if args.dot:
        write_or_print(render(stg_dot(stg, domains)), args.out, _dyn_manifest(args, stg, morse_set=args.morse_set))
        return 0
    for d in domains if domains is not None else range(stg.domain_count):
        successors = [stg.coordinate_label(v) for v in stg.successors[d]]
        emit(args, {'domain': stg.coordinate_label(d), 'signs': stg.sign_label(d), 'successors': successors},
             f"{stg.coordinate_label(d)}  {stg.sign_label(d)}  -> {' '.join(successors)}")
    return 0


def cmd_dyn_mg(args) -> int:
    stg = _stg_for(args)
    mg = morse_graph(stg)
    if args.dot:
        write_or_print(render(morse_graph_dot(mg)), args.out, _dyn_manifest(args, stg))
        return 0
    summary = mg.summary()
    if args.porcelain:
        print(dump_record(summary))
        return 0
    for entry in summary['sets']:
        print(f"{entry['id']}: {entry['label']}{' (stable)' if entry['stable'] else ''}, "
              f"{entry['size']} domains")
    for a, b in summary['edges']:
        print(f"{a} -> {b}")
    return 0


# ---------------------------------------------------------------------------
# ts
# ---------------------------------------------------------------------------

def cmd_ts_discretize(args) -> int:
    series = load_csv(args.csv, proxies=PROXY_SETS[args.proxy] if args.proxy else None)
    epsilon = args.eps if args.eps is not None else get_settings().epsilon
    genes = args.genes.split(',') if args.genes else None
    diagram = discretize(series, epsilon, genes, args.max_events_per_gene)

    def manifest():
        return run_manifest(args, [args.csv], epsilon=epsilon, proxy=args.proxy, genes=genes,
                            max_events_per_gene=args.max_events_per_gene)

    if args.out:
        diagram.metadata['manifest'] = manifest().attach(args.out)
        diagram.save(args.out)
    if args.dot:
        write_or_print(render(pattern_dot(diagram)), args.dot_out, manifest())
    elif args.porcelain:
        print(dump_record(diagram.to_dict()))
    else:
        for a, b in diagram.covers():
            print(f"{diagram.events[a].key} -> {diagram.events[b].key}")
        comparable = {e for pair in diagram.covers() for e in pair}
        for i, event in enumerate(diagram.events):
            if i not in comparable:
                print(event.key)
    logger.info(f"Pattern diagram: {len(diagram)} events, {count_linear_extensions(diagram)} linear extensions")
    return 0


def cmd_ts_extensions(args) -> int:
    diagram = PatternDiagram.load(args.pattern)
    if args.count:
        total = count_linear_extensions(diagram)
        emit(args, {'linear_extensions': total}, str(total))
        return 0
    cap = args.cap or get_settings().linear_extension_cap
    enumerator = linear_extensions(diagram, cap)
    for extension in enumerator:
        keys = [event.key for event in extension]
        emit(args, {'extension': keys}, ' '.join(keys))
    if enumerator.capped:
        logger.warning(f"Output truncated after {cap} extensions")
    return 0


# ---------------------------------------------------------------------------
# match
# ---------------------------------------------------------------------------

def cmd_match(args) -> int:
    net = load_network(args.net)
    pg = build_parameter_graph(net)
    diagram = PatternDiagram.load(args.pattern)
    missing = [gene for gene in diagram.variables if gene not in net.names]
    if missing:
        raise PatternError(f"Pattern variables not in the network: {missing}", variables=missing)
    stg = build_stg(net, pg, args.param)
    mg = morse_graph(stg)
    cyclic = not args.path
    any_match = False
    for morse_set in mg.sets:
        if not args.all_sets and not morse_set.stable:
            continue
        if cyclic and morse_set.kind == 'FP':
            continue
        labeled = label_events(stg, morse_set)
        if args.labels:
            for (u, v), events in sorted(labeled.edge_labels().items()):
                logger.info(f"set {morse_set.id}: {u} -> {v}: {' '.join(events) or '-'}")
        result = match_cycle(labeled, diagram) if cyclic else match_path(labeled, diagram)
        if result.matched:
            problems = verify_witness(labeled, diagram, result, cyclic)
            if problems:
                raise ConsistencyError(f"Witness replay failed at parameter {args.param}",
                                       {'morse_set': morse_set.id, 'problems': problems})
        any_match = any_match or result.matched
        record = dict(result.to_dict(stg), parameter=args.param, label=morse_set.label(net.names),
                      stable=morse_set.stable)
        emit(args, record, f"{morse_set.id}: {record['label']}{' (stable)' if morse_set.stable else ''}: "
                           f"{'match ' + ' '.join(result.extension) if result.matched else 'no match'}")
    logger.info(f"Parameter {args.param}: {'match found' if any_match else 'no match'}")
    return 0


# ---------------------------------------------------------------------------
# sweep / merge / mpg / coexist
# ---------------------------------------------------------------------------

def cmd_sweep(args) -> int:
    net = load_network(args.net)
    pg = build_parameter_graph(net)
    hashes = {os.path.basename(args.net): file_hash(args.net)}
    if args.spec:
        spec = load_spec(args.spec, net)
        hashes[os.path.basename(args.spec)] = file_hash(args.spec)
    elif args.preset:
        spec = checkpoint_spec(args.preset)
        spec.check_network(net)
    else:
        raise PhenotypeSpecError("Either --spec or --preset is required")

    sample = (args.sample, args.seed if args.seed is not None else get_settings().sample_seed) \
        if args.sample else None
    result = run_sweep(pg, spec, shard=args.range, sample=sample, out_dir=args.out, workers=args.workers,
                       checkpoint_every=args.checkpoint_every, strict=args.strict,
                       error_handler=get_global_error_handler(), input_hashes=hashes)
    if args.porcelain:
        for record in result.records:
            print(dump_record(record))
    else:
        manifest = result.manifest
        print(f"{manifest.phenotype}: {manifest.matched} matches among {manifest.notes['eligible']} "
              f"permissible of {manifest.processed} processed parameters, {manifest.errors} errors")
    return 0


def cmd_merge(args) -> int:
    merged = merge_shards(load_results(args.shards))
    merged.save(args.out)
    emit(args, merged.manifest.to_dict(),
         f"{merged.manifest.phenotype}: {merged.manifest.matched} matches over {merged.manifest.range}")
    return 0


def _summary(args, query) -> int:
    net = load_network(args.net)
    pg = build_parameter_graph(net)
    summary = query(load_results(args.results), pg, args.exclude)
    document = summary.to_dict()
    if args.out:
        inputs = [args.net] + [os.path.join(d, MANIFEST_FILE) for d in args.results]
        document['manifest'] = run_manifest(args, inputs, net, exclude=args.exclude).attach(args.out)
        save_yaml(document, args.out)
    if args.porcelain:
        print(dump_record(document))
        return 0
    print(f"Remainder parameters (excluding {summary.excluded}), normalized by {summary.normalizer}:")
    for name, count in summary.counts.items():
        print(f"  {name}: {count} MPG ({summary.percentages[name]:.2f}%), "
              f"{summary.match_counts[name]} matches ({summary.match_percent[name]:.2f}%)")
    for names, count in summary.intersections.items():
        print(f"  {names}: {count}")
    return 0


def cmd_mpg(args) -> int:
    return _summary(args, mpg_intersect)


def cmd_coexist(args) -> int:
    return _summary(args, coexistence_query)


# ---------------------------------------------------------------------------
# sim
# ---------------------------------------------------------------------------

def cmd_sim(args) -> int:
    net = load_network(args.net)
    pg = build_parameter_graph(net)
    seed = args.seed if args.seed is not None else 0
    if args.witness:
        rp = RealParameterization.load(net, args.witness)
    else:
        rp = sample_region(net, pg, args.param, seed)
    inputs = [args.net] + ([args.witness] if args.witness else [])
    if args.save_witness:
        rp.save(args.save_witness, run_manifest(args, inputs, net, seed, parameter=rp.parameter).attach(
            args.save_witness))

    if args.x0:
        starts = [args.x0]
    else:
        starts = list(random_initial_conditions(rp, args.runs, seed))

    for run, x0 in enumerate(starts):
        traj = simulate(net, rp, x0, t_end=args.t_end, dt=args.dt, hill_exponent=args.hill_n)
        if args.csv and run == 0:
            reference = run_manifest(args, inputs, net, seed, parameter=rp.parameter,
                                     x0=[float(v) for v in x0]).attach(args.csv)
            traj.to_csv(args.csv, comment=f"manifest: {reference}")
        final = [float(v) for v in traj.final_state]
        record = {'run': run, 'parameter': rp.parameter, 'seed': seed, 'x0': [float(v) for v in x0],
                  'final': final, 'domain': list(domain_of_state(rp, traj.final_state))}
        if args.refine:
            # a run that has not settled is still reported, just without an equilibrium
            equilibrium = safe_execute(refine_equilibrium, rp, traj.final_state)
            record['equilibrium'] = None if equilibrium is None else [float(v) for v in equilibrium]
        if args.extrema or args.pattern:
            order = extrema_order(traj, args.eps)
            record['extrema'] = [f"{gene}_{kind}" for gene, kind in order]
            record['subthreshold'] = subthreshold_oscillations(rp, traj, args.eps)
            if record['subthreshold']:
                logger.warning(f"Run {run}: {', '.join(record['subthreshold'])} oscillate without crossing "
                               f"a threshold")
            if args.pattern:
                record['consistent'] = is_cyclic_extension(order, PatternDiagram.load(args.pattern))
        text = f"run {run}: domain {record['domain']}"
        if 'extrema' in record:
            text += f", extrema {' '.join(record['extrema'])}"
        if 'consistent' in record:
            text += f", {'consistent' if record['consistent'] else 'inconsistent'} with the pattern"
        emit(args, record, text)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS: a subparser must not reset a flag given before the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--log-level', '-l', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                        default=argparse.SUPPRESS,
                        help='Set the logging level (default: INFO or LOG_LEVEL env var)')
    common.add_argument('--debug', '-d', action='store_true', default=argparse.SUPPRESS,
                        help='Enable debug logging')
    common.add_argument('--porcelain', action='store_true', default=argparse.SUPPRESS,
                        help='Print machine-readable JSON records on stdout')
    common.add_argument('--error-report', default=argparse.SUPPRESS,
                        help='Write a JSON report of all handled errors to this file')

    parser = argparse.ArgumentParser(
        prog='grn.py',
        description='Combinatorial dynamics of gene regulatory networks',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
        parents=[common]
    )
    parser.add_argument('--version', action='version', version=build_fingerprint())
    commands = parser.add_subparsers(dest='command', required=True)

    def net_param(p, param=True):
        p.add_argument('--net', required=True, help='Network file')
        if param:
            p.add_argument('--param', type=int, required=True, help='Parameter index')

    pg = commands.add_parser('pg', help='Parameter graph queries').add_subparsers(dest='action', required=True)
    p = pg.add_parser('size', parents=[common], help='Number of parameter nodes')
    net_param(p, False)
    p.set_defaults(handler=cmd_pg_size)
    p = pg.add_parser('factor', parents=[common], help='Factor parameters of one node')
    net_param(p, False)
    p.add_argument('--node', required=True, help='Node name or index')
    p.set_defaults(handler=cmd_pg_factor)
    p = pg.add_parser('dump', parents=[common], help='All factor parameters as JSON lines')
    net_param(p, False)
    p.set_defaults(handler=cmd_pg_dump)
    p = pg.add_parser('find', parents=[common], help='Parameter indices matching per-node filters')
    net_param(p, False)
    p.add_argument('--where', action='append', help='NODE:band=..|perm=..|label=..|factor=.. (repeatable)')
    p.add_argument('--limit', type=int, help='Stop after this many indices')
    p.set_defaults(handler=cmd_pg_find)
    p = pg.add_parser('neighbors', parents=[common], help='Adjacent parameter nodes')
    net_param(p)
    p.add_argument('--inequalities', action='store_true', help='Also print the inequality chains')
    p.set_defaults(handler=cmd_pg_neighbors)

    dyn = commands.add_parser('dyn', help='State transition and Morse graphs').add_subparsers(
        dest='action', required=True)
    p = dyn.add_parser('stg', parents=[common], help='State transition graph')
    net_param(p)
    p.add_argument('--morse-set', type=int, help='Restrict to one Morse set')
    p.add_argument('--dot', action='store_true', help='Emit Graphviz DOT')
    p.add_argument('--out', help='Write DOT to this file instead of stdout')
    p.set_defaults(handler=cmd_dyn_stg)
    p = dyn.add_parser('mg', parents=[common], help='Morse graph')
    net_param(p)
    p.add_argument('--dot', action='store_true', help='Emit Graphviz DOT')
    p.add_argument('--out', help='Write DOT to this file instead of stdout')
    p.set_defaults(handler=cmd_dyn_mg)

    ts = commands.add_parser('ts', help='Time series').add_subparsers(dest='action', required=True)
    p = ts.add_parser('discretize', parents=[common], help='Pattern diagram of a time series')
    p.add_argument('--csv', required=True, help='CSV with a time column followed by gene columns')
    p.add_argument('--eps', type=float, help='Noise level in (0, 0.5) (default: GRN_EPSILON)')
    p.add_argument('--genes', help='Comma-separated genes (node names when --proxy is given)')
    p.add_argument('--proxy', choices=sorted(PROXY_SETS), help='Map proxy gene columns to network nodes')
    p.add_argument('--max-events-per-gene', type=int, help='Keep only the first extrema of every gene')
    p.add_argument('--out', help='Write the pattern diagram as YAML')
    p.add_argument('--dot', action='store_true', help='Emit the Hasse diagram as DOT')
    p.add_argument('--dot-out', help='Write DOT to this file instead of stdout')
    p.set_defaults(handler=cmd_ts_discretize)
    p = ts.add_parser('extensions', parents=[common], help='Linear extensions of a pattern diagram')
    p.add_argument('--pattern', required=True, help='Pattern diagram YAML')
    p.add_argument('--cap', type=int, help='Enumeration cap (default: GRN_LINEAR_EXTENSION_CAP)')
    p.add_argument('--count', action='store_true', help='Only print the exact count')
    p.set_defaults(handler=cmd_ts_extensions)

    p = commands.add_parser('match', parents=[common], help='Match a pattern at one parameter')
    net_param(p)
    p.add_argument('--pattern', required=True, help='Pattern diagram YAML')
    p.add_argument('--path', action='store_true', help='Match a path instead of a cycle')
    p.add_argument('--all-sets', action='store_true', help='Also search unstable Morse sets')
    p.add_argument('--labels', action='store_true', help='Log the event labels of every edge')
    p.set_defaults(handler=cmd_match)

    p = commands.add_parser('sweep', parents=[common], help='Phenotype sweep over a range or sample')
    net_param(p, False)
    p.add_argument('--spec', help='Phenotype spec YAML')
    p.add_argument('--preset', choices=['SAC', 'DRC_NRM1', 'DRC_YOX1'], help='Checkpoint preset instead of a spec')
    where = p.add_mutually_exclusive_group()
    where.add_argument('--range', type=parse_range, help='Half-open index range START:STOP')
    where.add_argument('--sample', type=int, help='Evaluate a seeded random sample of this size')
    p.add_argument('--seed', type=int, help='Sample seed (default: GRN_SAMPLE_SEED)')
    p.add_argument('--out', help='Shard directory (records, manifest, resumable progress)')
    p.add_argument('--workers', type=int, help='Worker processes (default: GRN_WORKERS)')
    p.add_argument('--checkpoint-every', type=int, help='Parameters per checkpoint block')
    p.add_argument('--strict', action='store_true', help='Abort on the first per-parameter error')
    p.set_defaults(handler=cmd_sweep)

    p = commands.add_parser('merge', parents=[common], help='Merge range shards')
    p.add_argument('--out', required=True, help='Directory for the merged result')
    p.add_argument('shards', nargs='+', help='Shard directories')
    p.set_defaults(handler=cmd_merge)

    for name, handler, text in (('mpg', cmd_mpg, 'Intersect remainder-parameter sets'),
                                ('coexist', cmd_coexist, 'Intersections over every subset of phenotypes')):
        p = commands.add_parser(name, parents=[common], help=text)
        net_param(p, False)
        p.add_argument('--exclude', default='C', help='Node projected away (default: C)')
        p.add_argument('--out', help='Write the summary as YAML')
        p.add_argument('results', nargs='+', help='Sweep result directories')
        p.set_defaults(handler=handler)

    p = commands.add_parser('sim', parents=[common], help='Hill-model simulation of a parameter witness')
    net_param(p)
    p.add_argument('--seed', type=int, help='Witness and initial-condition seed (default: 0)')
    p.add_argument('--witness', help='Load the witness from YAML instead of sampling it')
    p.add_argument('--save-witness', help='Write the witness as YAML')
    p.add_argument('--x0', type=parse_float_list, help='Comma-separated initial state')
    p.add_argument('--runs', type=int, default=1, help='Random initial conditions when --x0 is absent')
    p.add_argument('--t-end', type=float, help='Integration horizon (default: GRN_T_END)')
    p.add_argument('--dt', type=float, help='Step size (default: GRN_DT)')
    p.add_argument('--hill-n', type=float, help='Hill exponent (default: GRN_HILL_N)')
    p.add_argument('--eps', type=float, help='Oscillation noise level for --extrema')
    p.add_argument('--csv', help='Write the first trajectory as CSV')
    p.add_argument('--refine', action='store_true', help='Refine the final state to an equilibrium')
    p.add_argument('--extrema', action='store_true', help='Report the post-transient extrema order')
    p.add_argument('--pattern', help='Check the extrema order against this pattern diagram')
    p.set_defaults(handler=cmd_sim)
    return parser


def dispatch(argv: List[str]) -> int:
    """Parse ``argv``, run the subcommand and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    for flag, default in (('debug', False), ('porcelain', False), ('log_level', None), ('error_report', None)):
        if not hasattr(args, flag):
            setattr(args, flag, default)
    setup_logging(args.log_level, args.debug)
    handler = get_global_error_handler()

    try:
        settings = get_settings().override(workers=getattr(args, 'workers', None),
                                           hill_exponent=getattr(args, 'hill_n', None))
        set_settings(settings)
        logger.debug(f"{build_fingerprint()}: {' '.join(argv)}")
        return args.handler(args)
    except argparse.ArgumentTypeError as e:
        logger.error(f"Usage error: {e}")
        return 2
    except GrnDynamicsError as e:
        handler.handle_error(e, {'command': args.command})
        return 1
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return 130
    finally:
        if args.error_report:
            handler.export_error_report(args.error_report)


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == '__main__':
    main()
