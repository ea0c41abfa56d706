"""Candidate executions: the event-graph abstraction that models are checked against.

A candidate execution is a finite set of events (writes, reads, fences,
branches) together with named relations over them: per-thread program
order ``po``, the read-from communication ``rf``, dependency relations
(``addr``, ``data``, ``ctrl``), read-modify-write pairs ``rmw``, and any
number of named scope relations.  Initial writes provide each location's
starting value and live on a reserved pseudo-thread.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

EventId = int
Pair = tuple[EventId, EventId]
Rel = frozenset[Pair]

EMPTY_REL: Rel = frozenset()

#: Thread number reserved for initial writes; they are program-order
#: isolated and count as external to every program thread.
INIT_THREAD = -1


class EventKind(enum.Enum):
    WRITE = "W"
    READ = "R"
    FENCE = "F"
    BRANCH = "B"


@dataclass(frozen=True)
class Event:
    """One memory or control action.

    Writes and reads carry a location and an integer value; fences and
    branches carry neither.  ``tags`` holds access/fence annotations.
    """

    id: EventId
    kind: EventKind
    thread: int
    po_index: int
    loc: str | None = None
    value: int | None = None
    tags: frozenset[str] = frozenset()
    initial: bool = False


def thread_key(e: Event) -> int:
    """Thread used for int/ext classification; initial writes are grouped
    on the reserved pseudo-thread regardless of their stored thread."""
    return INIT_THREAD if e.initial else e.thread


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    events: tuple[EventId, ...] = ()

    def __str__(self) -> str:
        if self.events:
            ids = ",".join(str(i) for i in self.events)
            return f"{self.message} (events {ids})"
        return self.message


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


@dataclass(frozen=True)
class CandidateExecution:
    """Immutable event graph consumed by model evaluation."""

    events: tuple[Event, ...]
    po: Rel = EMPTY_REL
    rf: Rel = EMPTY_REL
    addr: Rel = EMPTY_REL
    data: Rel = EMPTY_REL
    ctrl: Rel = EMPTY_REL
    rmw: Rel = EMPTY_REL
    scopes: tuple[tuple[str, Rel], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(sorted(self.events, key=lambda e: e.id)))

    @property
    def event_ids(self) -> frozenset[EventId]:
        return frozenset(e.id for e in self.events)

    @property
    def events_by_id(self) -> dict[EventId, Event]:
        return {e.id: e for e in self.events}

    @property
    def iw(self) -> frozenset[EventId]:
        """Initial-write set, derived from the per-event flag."""
        return frozenset(e.id for e in self.events if e.initial)

    def kind_set(self, kind: EventKind) -> frozenset[EventId]:
        return frozenset(e.id for e in self.events if e.kind == kind)

    def scope_map(self) -> dict[str, Rel]:
        return dict(self.scopes)


def _check_relation_ids(name: str, rel: Rel, ids: frozenset[EventId],
                        out: list[Violation]) -> None:
    for a, b in sorted(rel):
        for x in (a, b):
            if x not in ids:
                out.append(Violation("unknown-id",
                                     f"{name}: unknown event id {x}", (x,)))


def validate_candidate(c: CandidateExecution) -> ValidationReport:
    """Check every well-formedness invariant; violations are returned as
    data, never raised.  The report is a pure function of the candidate."""
    out: list[Violation] = []
    ids = c.event_ids
    by_id = c.events_by_id

    seen: set[EventId] = set()
    for e in c.events:
        if e.id in seen:
            out.append(Violation("duplicate-id", f"duplicate event id {e.id}", (e.id,)))
        seen.add(e.id)

    for e in c.events:
        memory = e.kind in (EventKind.WRITE, EventKind.READ)
        if memory and (e.loc is None or e.value is None):
            out.append(Violation("missing-loc-value",
                                 f"event {e.id}: kind {e.kind.value} requires loc and value",
                                 (e.id,)))
        if not memory and (e.loc is not None or e.value is not None):
            out.append(Violation("spurious-loc-value",
                                 f"event {e.id}: kind {e.kind.value} must not carry loc or value",
                                 (e.id,)))
        if e.initial and e.kind != EventKind.WRITE:
            out.append(Violation("init-not-write",
                                 f"initial event {e.id} is not a write", (e.id,)))
        if e.initial and e.thread != INIT_THREAD:
            out.append(Violation("init-thread",
                                 f"initial write {e.id} not on the reserved init thread",
                                 (e.id,)))

    for name, rel in itertools.chain(
            [("po", c.po), ("rf", c.rf), ("addr", c.addr), ("data", c.data),
             ("ctrl", c.ctrl), ("rmw", c.rmw)],
            c.scopes):
        _check_relation_ids(name, rel, ids, out)
    if any(v.code == "unknown-id" or v.code == "duplicate-id" for v in out):
        # Structural checks below assume resolvable, unique ids.
        return ValidationReport(tuple(out))

    _validate_po(c, by_id, out)
    _validate_rf(c, by_id, out)

    init_locs: dict[str, EventId] = {}
    for e in c.events:
        if e.initial and e.loc is not None:
            if e.loc in init_locs:
                out.append(Violation("init-dup-location",
                                     f"two initial writes for location {e.loc}",
                                     (init_locs[e.loc], e.id)))
            else:
                init_locs[e.loc] = e.id

    for name, rel in c.scopes:
        _validate_scope(name, rel, by_id, out)

    return ValidationReport(tuple(out))


def _validate_po(c: CandidateExecution, by_id: dict[EventId, Event],
                 out: list[Violation]) -> None:
    for a, b in sorted(c.po):
        ea, eb = by_id[a], by_id[b]
        if ea.initial or eb.initial:
            out.append(Violation("po-initial",
                                 "po involves an initial write", (a, b)))
        elif ea.thread != eb.thread:
            out.append(Violation("po-cross-thread", "po across threads", (a, b)))
        elif ea.po_index >= eb.po_index:
            out.append(Violation("po-order",
                                 "po pair inconsistent with program-order indices",
                                 (a, b)))

    threads: dict[int, list[Event]] = {}
    for e in c.events:
        if not e.initial:
            threads.setdefault(e.thread, []).append(e)
    for t, evs in sorted(threads.items()):
        indices = [e.po_index for e in evs]
        if len(set(indices)) != len(indices):
            dup = sorted(i for i in set(indices) if indices.count(i) > 1)
            out.append(Violation("po-index-dup",
                                 f"thread {t}: duplicate program-order index {dup[0]}",
                                 tuple(e.id for e in evs)))
            continue
        evs = sorted(evs, key=lambda e: e.po_index)
        for x, y in itertools.combinations(evs, 2):
            if (x.id, y.id) not in c.po:
                out.append(Violation("po-missing",
                                     "po not total: missing program-order pair",
                                     (x.id, y.id)))


def _validate_rf(c: CandidateExecution, by_id: dict[EventId, Event],
                 out: list[Violation]) -> None:
    sources: dict[EventId, list[EventId]] = {}
    for w, r in sorted(c.rf):
        ew, er = by_id[w], by_id[r]
        if ew.kind != EventKind.WRITE:
            out.append(Violation("rf-source", "rf source is not a write", (w, r)))
            continue
        if er.kind != EventKind.READ:
            out.append(Violation("rf-target", "rf target is not a read", (w, r)))
            continue
        if ew.loc != er.loc:
            out.append(Violation("rf-loc", "rf location mismatch", (w, r)))
        elif ew.value != er.value:
            out.append(Violation("rf-value", "rf value mismatch", (w, r)))
        sources.setdefault(r, []).append(w)

    for e in c.events:
        if e.kind != EventKind.READ:
            continue
        got = sources.get(e.id, [])
        if not got:
            out.append(Violation("read-no-source", "read without source", (e.id,)))
        elif len(got) > 1:
            out.append(Violation("read-multi-source",
                                 "read with multiple sources",
                                 (e.id, *sorted(got))))


def _validate_scope(name: str, rel: Rel, by_id: dict[EventId, Event],
                    out: list[Violation]) -> None:
    for a, b in sorted(rel):
        if (b, a) not in rel:
            out.append(Violation("scope-symmetry",
                                 f"scope relation {name} is not symmetric", (a, b)))
            return
    by_thread: dict[int, list[EventId]] = {}
    for e in by_id.values():
        by_thread.setdefault(thread_key(e), []).append(e.id)
    for a, b in sorted(rel):
        for a2 in by_thread[thread_key(by_id[a])]:
            if (a2, b) not in rel:
                out.append(Violation("scope-thread",
                                     f"scope relation {name} does not relate whole threads",
                                     (a2, b)))
                return


def compute_derived(c: CandidateExecution) -> dict[str, Rel]:
    """Base relations every model gets for free: the identity ``id``,
    same-location ``loc``, same-thread ``int`` and cross-thread ``ext``.

    Requires a candidate that passed validation.  Initial writes count as
    the reserved pseudo-thread, making them external to all program events.
    """
    evs = c.events
    id_rel = frozenset((e.id, e.id) for e in evs)
    loc = frozenset((a.id, b.id) for a in evs for b in evs
                    if a.loc is not None and a.loc == b.loc)
    int_rel = frozenset((a.id, b.id) for a in evs for b in evs
                        if thread_key(a) == thread_key(b))
    ext = frozenset((a.id, b.id) for a in evs for b in evs
                    if thread_key(a) != thread_key(b))
    return {"id": id_rel, "loc": loc, "int": int_rel, "ext": ext}
