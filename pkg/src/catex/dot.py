"""Graphviz DOT rendering of a candidate execution.

One node per event, clustered by thread; one labeled edge per pair of po,
rf, and each relation recorded by `show` in the supplied outcome.  Output
is fully sorted so identical inputs yield identical bytes.
"""

from __future__ import annotations

from .execution import CandidateExecution, Event, EventKind
from .interp import Outcome


def _node_label(e: Event) -> str:
    if e.initial:
        return f"init {e.loc}={e.value}"
    if e.kind in (EventKind.WRITE, EventKind.READ):
        return f"P{e.thread}: {e.kind.value} {e.loc}={e.value}"
    return f"P{e.thread}: {e.kind.value}"


def emit_dot(c: CandidateExecution, outcome: Outcome | None = None,
             name: str = "candidate") -> str:
    lines = [f'digraph "{name}" {{', "  rankdir=TB;", '  node [shape=box];']

    clusters: dict[int, list[Event]] = {}
    for e in c.events:
        key = -1 if e.initial else e.thread
        clusters.setdefault(key, []).append(e)
    for key in sorted(clusters):
        label = "init" if key == -1 else f"P{key}"
        lines.append(f'  subgraph "cluster_{label}" {{')
        lines.append(f'    label="{label}";')
        for e in sorted(clusters[key], key=lambda e: e.id):
            lines.append(f'    e{e.id} [label="{_node_label(e)}"];')
        lines.append("  }")

    relations = [("po", c.po), ("rf", c.rf)]
    if outcome is not None:
        relations.extend(outcome.shows)
    for rel_name, rel in relations:
        for a, b in sorted(rel):
            lines.append(f'  e{a} -> e{b} [label="{rel_name}"];')

    lines.append("}")
    return "\n".join(lines) + "\n"
