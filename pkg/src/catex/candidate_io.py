"""Candidate-execution JSON serialization.

Schema (canonical form: two-space indent, sorted keys, events sorted by
id, pair lists sorted, tags sorted, loc/value omitted when absent):

    {"events": [{"id": 0, "kind": "W", "thread": -1, "po_index": 0,
                 "loc": "x", "value": 0, "tags": [], "initial": true}, ...],
     "po": [[2, 3]], "rf": [[0, 5]], "addr": [], "data": [], "ctrl": [],
     "rmw": [], "scopes": {"sys": [[2, 3], [3, 2]]}}

Relation keys and "scopes" may be omitted and default to empty.  Loading
validates the candidate and rejects any violation.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import CandidateLoadError
from .execution import (
    CandidateExecution, Event, EventKind, Rel, validate_candidate,
)

_KINDS = {k.value: k for k in EventKind}
_EVENT_KEYS = {"id", "kind", "thread", "po_index", "loc", "value", "tags", "initial"}
_TOP_KEYS = {"events", "po", "rf", "addr", "data", "ctrl", "rmw", "scopes"}


def _fail(msg: str):
    raise CandidateLoadError(msg)


def _as_pairs(name: str, raw, ids: frozenset[int]) -> Rel:
    if not isinstance(raw, list):
        _fail(f"field {name!r} must be a list of [int, int] pairs")
    pairs = []
    for item in raw:
        if (not isinstance(item, list) or len(item) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in item)):
            _fail(f"field {name!r} must be a list of [int, int] pairs")
        for x in item:
            if x not in ids:
                _fail(f"{name}: unknown event id {x}")
        pairs.append((item[0], item[1]))
    return frozenset(pairs)


def _as_event(raw) -> Event:
    if not isinstance(raw, dict):
        _fail("each event must be an object")
    unknown = set(raw) - _EVENT_KEYS
    if unknown:
        _fail(f"unknown field {sorted(unknown)[0]!r} in event")
    for key in ("id", "kind", "thread", "po_index"):
        if key not in raw:
            _fail(f"event is missing required field {key!r}")
    if not isinstance(raw["id"], int) or isinstance(raw["id"], bool):
        _fail("event field 'id' must be an integer")
    eid = raw["id"]
    if raw["kind"] not in _KINDS:
        _fail(f"event {eid}: unknown kind {raw['kind']!r}")
    for key in ("thread", "po_index"):
        if not isinstance(raw[key], int) or isinstance(raw[key], bool):
            _fail(f"event {eid}: field {key!r} must be an integer")
    loc = raw.get("loc")
    if loc is not None and not isinstance(loc, str):
        _fail(f"event {eid}: field 'loc' must be a string")
    value = raw.get("value")
    if value is not None and (not isinstance(value, int) or isinstance(value, bool)):
        _fail(f"event {eid}: field 'value' must be an integer")
    tags = raw.get("tags", [])
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        _fail(f"event {eid}: field 'tags' must be a list of strings")
    initial = raw.get("initial", False)
    if not isinstance(initial, bool):
        _fail(f"event {eid}: field 'initial' must be a boolean")
    return Event(eid, _KINDS[raw["kind"]], raw["thread"], raw["po_index"],
                 loc, value, frozenset(tags), initial)


def load_candidate_text(text: str, source: str = "<candidate>") -> CandidateExecution:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CandidateLoadError(f"{source}: malformed JSON: {exc}") from None
    try:
        return _from_jsonable(doc)
    except CandidateLoadError as exc:
        raise CandidateLoadError(f"{source}: {exc}") from None


def _from_jsonable(doc) -> CandidateExecution:
    if not isinstance(doc, dict):
        _fail("top-level value must be an object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        _fail(f"unknown field {sorted(unknown)[0]!r}")
    if "events" not in doc or not isinstance(doc["events"], list):
        _fail("field 'events' (a list) is required")
    events = tuple(_as_event(e) for e in doc["events"])
    ids = frozenset(e.id for e in events)
    if len(ids) != len(events):
        _fail("duplicate event id")
    rels = {name: _as_pairs(name, doc.get(name, []), ids)
            for name in ("po", "rf", "addr", "data", "ctrl", "rmw")}
    raw_scopes = doc.get("scopes", {})
    if not isinstance(raw_scopes, dict) or not all(isinstance(k, str) for k in raw_scopes):
        _fail("field 'scopes' must be an object mapping names to pair lists")
    scopes = tuple((name, _as_pairs(f"scopes.{name}", raw_scopes[name], ids))
                   for name in sorted(raw_scopes))
    cand = CandidateExecution(events, scopes=scopes, **rels)
    report = validate_candidate(cand)
    if not report.ok:
        _fail("invalid candidate:\n" + "\n".join(f"  {v}" for v in report.violations))
    return cand


def load_candidate(path: str | Path) -> CandidateExecution:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CandidateLoadError(f"cannot read {path}: {exc}") from None
    return load_candidate_text(text, source=str(path))


def candidate_to_jsonable(c: CandidateExecution) -> dict:
    events = []
    for e in c.events:
        obj: dict = {"id": e.id, "kind": e.kind.value, "thread": e.thread,
                     "po_index": e.po_index, "tags": sorted(e.tags),
                     "initial": e.initial}
        if e.loc is not None:
            obj["loc"] = e.loc
        if e.value is not None:
            obj["value"] = e.value
        events.append(obj)
    doc = {"events": events}
    for name in ("po", "rf", "addr", "data", "ctrl", "rmw"):
        doc[name] = [list(p) for p in sorted(getattr(c, name))]
    doc["scopes"] = {name: [list(p) for p in sorted(rel)] for name, rel in c.scopes}
    return doc


def save_candidate(c: CandidateExecution) -> str:
    """Canonical serialization; loading it back yields an equal candidate
    and re-saving reproduces the bytes."""
    return json.dumps(candidate_to_jsonable(c), indent=2, sort_keys=True) + "\n"


def write_candidate(c: CandidateExecution, path: str | Path) -> None:
    Path(path).write_text(save_candidate(c), encoding="utf-8")
