"""Text and JSON rendering of run results.

The exact strings emitted here are frozen by golden tests; change them
deliberately.  Everything is sorted or session-ordered, never
hash-ordered, so output is byte-stable across processes.
"""

from __future__ import annotations

import json

from .execution import Rel
from .interp import (
    ClosureV, CollV, ModelResult, Outcome, PrimV, ProcV, RelV, SetV, TupleV,
    Value,
)
from .litmus import TestReport


def fmt_rel(rel: Rel) -> str:
    return "{" + ",".join(f"({a},{b})" for a, b in sorted(rel)) + "}"


def fmt_ids(ids) -> str:
    return "{" + ",".join(str(x) for x in sorted(ids)) + "}"


def value_summary(v: Value) -> str:
    if isinstance(v, RelV):
        return fmt_rel(v.pairs)
    if isinstance(v, SetV):
        return fmt_ids(v.events)
    if isinstance(v, CollV):
        return f"collection({len(v.items)})"
    if isinstance(v, TupleV):
        return "(" + ", ".join(value_summary(i) for i in v.items) + ")"
    if isinstance(v, (ClosureV, PrimV)):
        return "<function>"
    if isinstance(v, ProcV):
        return "<procedure>"
    return repr(v)


def value_jsonable(v: Value):
    if isinstance(v, RelV):
        return [list(p) for p in sorted(v.pairs)]
    if isinstance(v, SetV):
        return sorted(v.events)
    if isinstance(v, CollV):
        return [value_jsonable(i) for i in v.items]
    if isinstance(v, TupleV):
        return [value_jsonable(i) for i in v.items]
    return value_summary(v)


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- litmus test reports ----------------------------------------------------


def test_report_text(report: TestReport, show: bool = False) -> str:
    lines = [f"Test {report.name}"]
    for row in report.rows:
        rf = ",".join(f"{r}<-{w}" for r, w in row.rf)
        line = (f"Candidate {row.index} rf=[{rf}] "
                f"allowed={'yes' if row.allowed else 'no'} "
                f"cond={'yes' if row.condition else 'no'}")
        if row.flags:
            line += " flags=" + ",".join(row.flags)
        lines.append(line)
        if show:
            for name, rel in row.shows:
                lines.append(f"  show {name}={fmt_rel(rel)}")
    lines.append(f"Dropped: {report.dropped}")
    lines.append(f"Positive: {report.positive} Negative: {report.negative}")
    lines.append(f"Observation {report.name} {report.observation} "
                 f"{report.positive} {report.negative}")
    for flag in report.flags:
        lines.append(f"Flag {flag}")
    return "\n".join(lines) + "\n"


def test_report_jsonable(report: TestReport) -> dict:
    return {
        "test": report.name,
        "mode": report.mode,
        "dropped": report.dropped,
        "candidates": [
            {
                "index": row.index,
                "rf": [list(p) for p in row.rf],
                "allowed": row.allowed,
                "condition": row.condition,
                "flags": list(row.flags),
                "shows": {name: [list(p) for p in sorted(rel)]
                          for name, rel in row.shows},
            }
            for row in report.rows
        ],
        "positive": report.positive,
        "negative": report.negative,
        "observation": report.observation,
        "verdict": report.verdict,
        "flags": list(report.flags),
    }


# -- single-candidate model results -------------------------------------------


def _outcome_line(index: int, outcome: Outcome) -> str:
    parts = [f"Outcome {index}"]
    if outcome.with_bindings:
        binds = ",".join(f"{name}={value_summary(v)}"
                         for name, v in outcome.with_bindings)
        parts.append(f"with=[{binds}]")
    if outcome.passed:
        parts.append("passed")
    else:
        name, _kind, _negated = outcome.failed_check
        parts.append(f"failed={name}")
    if outcome.flags:
        parts.append("flags=" + ",".join(sorted(outcome.flags)))
    return " ".join(parts)


def model_result_text(model_label: str, input_label: str, result: ModelResult,
                      show: bool = False) -> str:
    lines = [f"Model {model_label}", f"Input {input_label}"]
    for i, outcome in enumerate(result.outcomes):
        lines.append(_outcome_line(i, outcome))
        if show:
            for name, rel in outcome.shows:
                lines.append(f"  show {name}={fmt_rel(rel)}")
    lines.append(f"Allowed: {'yes' if result.allowed else 'no'}")
    flags = sorted({f for o in result.outcomes if o.passed for f in o.flags})
    for flag in flags:
        lines.append(f"Flag {flag}")
    return "\n".join(lines) + "\n"


def model_result_jsonable(result: ModelResult) -> dict:
    outcomes = []
    for outcome in result.outcomes:
        failed = None
        if outcome.failed_check is not None:
            name, kind, negated = outcome.failed_check
            failed = {"name": name, "kind": kind, "negated": negated}
        outcomes.append({
            "with": {name: value_jsonable(v) for name, v in outcome.with_bindings},
            "passed": outcome.passed,
            "failed_check": failed,
            "flags": sorted(outcome.flags),
            "shows": {name: [list(p) for p in sorted(rel)]
                      for name, rel in outcome.shows},
        })
    return {
        "mode": result.mode,
        "allowed": result.allowed,
        "outcomes": outcomes,
        "flags": sorted({f for o in result.outcomes if o.passed for f in o.flags}),
    }
