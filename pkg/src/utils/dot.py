"""
Graphviz DOT emission for state transition graphs, Morse graphs and pattern diagrams.

Each generator yields DOT text line by line; join the result or pass it to
``writelines``. Nothing here calls graphviz itself.
"""

from typing import Iterator, Optional, Sequence

from objects.dynamics import MorseGraph, StateTransitionGraph
from objects.timeseries import PatternDiagram


def _gvquote(s: str) -> str:
    return '"{}"'.format(str(s).replace('"', r'\"'))


def stg_dot(stg: StateTransitionGraph, domains: Optional[Sequence[int]] = None,
            signs: bool = True) -> Iterator[str]:
    """
    DOT for a state transition graph.

    Args:
        stg: The state transition graph
        domains: Restrict the drawing to these domains (e.g. one Morse set)
        signs: Append the sign label (I/D/*) of every domain to its node label
    """
    keep = set(range(stg.domain_count)) if domains is None else set(domains)
    yield 'digraph STG {\n'
    yield f'  label={_gvquote(f"parameter {stg.parameter}")};\n'
    yield '  node [shape=box fontname="Helvetica"];\n'
    for d in sorted(keep):
        label = stg.coordinate_label(d)
        if signs:
            label += '\\n' + stg.sign_label(d)
        yield f'  {_gvquote(stg.coordinate_label(d))} [label={_gvquote(label)}];\n'
    for u, v in stg.edges():
        if u in keep and v in keep:
            yield f'  {_gvquote(stg.coordinate_label(u))} -> {_gvquote(stg.coordinate_label(v))};\n'
    yield '}\n'


def morse_graph_dot(mg: MorseGraph) -> Iterator[str]:
    """DOT for a Morse graph; stable sets are drawn with a double border."""
    names = mg.stg.net.names
    yield 'digraph MorseGraph {\n'
    yield f'  label={_gvquote(f"parameter {mg.stg.parameter}")};\n'
    yield '  node [fontname="Helvetica"];\n'
    for s in mg.sets:
        attrs = [f'label={_gvquote(s.label(names))}']
        if s.stable:
            attrs.append('peripheries=2')
            attrs.append('comment="stable"')
        yield f'  {s.id} [{" ".join(attrs)}];\n'
    for a, b in mg.edges:
        yield f'  {a} -> {b};\n'
    yield '}\n'


def pattern_dot(diagram: PatternDiagram) -> Iterator[str]:
    """Hasse diagram of a pattern: one node per event, one arrow per cover relation."""
    yield 'digraph Pattern {\n'
    yield '  rankdir="LR";\n'
    yield '  node [shape=ellipse fontname="Helvetica"];\n'
    for event in diagram.events:
        yield f'  {_gvquote(event.key)};\n'
    for a, b in diagram.covers():
        yield f'  {_gvquote(diagram.events[a].key)} -> {_gvquote(diagram.events[b].key)};\n'
    yield '}\n'


def render(lines: Iterator[str]) -> str:
    return ''.join(lines)
