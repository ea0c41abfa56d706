"""Minimal litmus frontend: parse a small multi-threaded program, elaborate
it into events, enumerate every read-from choice as a candidate execution,
and judge each candidate against a model.

Input format (columns are one thread each, rows end with ';'):

    LISA SB
    { x=0; y=0; }
     P0       | P1       ;
     w[] x 1  | w[] y 1  ;
     r[] r0 y | r[] r1 x ;
    exists (0:r0=0 /\\ 1:r1=0)

Instructions: ``w[tags] loc value-or-register``, ``r[tags] reg loc``,
``f[tags]``, ``b[tags] reg label``, and ``label:`` marks.  A branch's
label must mark its immediately following instruction (branches are
dependency markers; control flow always falls through).  An optional
``scopes name: (0 1)(2 3)`` line groups threads into one named scope
relation.  The final line quantifies over register values: ``exists`` or
``~exists`` with ``/\\``, ``\\/`` and parentheses.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, replace

from .cat_ast import ModelAst
from .errors import LitmusError
from .execution import (
    CandidateExecution, Event, EventId, EventKind, INIT_THREAD, Rel,
    validate_candidate,
)
from .interp import representative_outcome, run_model

# -- instruction and test types ---------------------------------------------


@dataclass(frozen=True)
class WriteInstr:
    tags: tuple[str, ...]
    loc: str
    operand: int | str  # constant or register name


@dataclass(frozen=True)
class ReadInstr:
    tags: tuple[str, ...]
    reg: str
    loc: str


@dataclass(frozen=True)
class FenceInstr:
    tags: tuple[str, ...]


@dataclass(frozen=True)
class BranchInstr:
    tags: tuple[str, ...]
    reg: str
    label: str


@dataclass(frozen=True)
class LabelMark:
    name: str


ThreadInstr = WriteInstr | ReadInstr | FenceInstr | BranchInstr | LabelMark


@dataclass(frozen=True)
class Atom:
    thread: int
    reg: str
    value: int


@dataclass(frozen=True)
class BoolOp:
    op: str  # "and" | "or"
    lhs: "Formula"
    rhs: "Formula"


Formula = Atom | BoolOp


@dataclass(frozen=True)
class Condition:
    quantifier: str  # "exists" | "not-exists"
    formula: Formula


@dataclass(frozen=True)
class LitmusTest:
    name: str
    init: tuple[tuple[str, int], ...]
    threads: tuple[tuple[ThreadInstr, ...], ...]
    condition: Condition
    scopes: tuple[tuple[str, tuple[tuple[int, ...], ...]], ...] = ()

    @property
    def init_map(self) -> dict[str, int]:
        return dict(self.init)


# -- parsing -----------------------------------------------------------------

_LABEL_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*):$")
_INSTR_RE = re.compile(r"([wrfb])\[([^\]]*)\]\s*(.*)$")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_INT = re.compile(r"-?[0-9]+$")
_THREAD_HEADER = re.compile(r"P([0-9]+)$")


def _fail(msg: str, line: int, col: int = 1):
    raise LitmusError(msg, line, col)


def parse_litmus(text: str) -> LitmusTest:
    lines = text.splitlines()
    nonblank = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    if not nonblank:
        _fail("empty litmus test", 1)
    pos = 0

    lineno, header = nonblank[pos]
    pos += 1
    if not header.strip().startswith("LISA"):
        _fail("expected 'LISA <name>' header", lineno)
    name = header.strip()[4:].strip()
    if not name:
        _fail("missing test name in header", lineno)

    init, pos = _parse_init(nonblank, pos)
    rows, scope_lines, cond_line, pos = _split_sections(nonblank, pos)
    threads = _parse_threads(rows)
    scopes = _parse_scopes(scope_lines, len(threads))
    condition = _parse_condition(*cond_line)

    test = LitmusTest(name, init, threads, condition, scopes)
    _check_registers(test, cond_line[0])
    return test


def _parse_init(nonblank, pos):
    lineno, line = nonblank[pos]
    stripped = line.strip()
    if not stripped.startswith("{"):
        _fail("expected '{ ... }' init block", lineno)
    body = stripped
    while "}" not in body:
        pos += 1
        if pos >= len(nonblank):
            _fail("unterminated init block", lineno)
        body += " " + nonblank[pos][1].strip()
    pos += 1
    inner = body[body.index("{") + 1:body.index("}")]
    init: list[tuple[str, int]] = []
    seen: set[str] = set()
    for entry in inner.split(";"):
        entry = entry.strip()
        if not entry:
            continue
        if "=" not in entry:
            _fail(f"bad init entry {entry!r} (expected '<location>=<int>')", lineno)
        loc, _, value = entry.partition("=")
        loc, value = loc.strip(), value.strip()
        if not _IDENT.match(loc):
            _fail(f"bad init location {loc!r}", lineno)
        if not _INT.match(value):
            _fail(f"bad init value {value!r} for location {loc}", lineno)
        if loc in seen:
            _fail(f"location {loc} initialized twice", lineno)
        seen.add(loc)
        init.append((loc, int(value)))
    return tuple(init), pos


def _split_sections(nonblank, pos):
    rows: list[tuple[int, str]] = []
    scope_lines: list[tuple[int, str]] = []
    cond_line = None
    for lineno, line in nonblank[pos:]:
        stripped = line.strip()
        if stripped.startswith("scopes"):
            scope_lines.append((lineno, stripped))
        elif stripped.startswith(("exists", "~exists", "forall")):
            if stripped.startswith("forall"):
                _fail("only 'exists' and '~exists' conditions are supported", lineno)
            if cond_line is not None:
                _fail("duplicate condition line", lineno)
            cond_line = (lineno, stripped)
        elif cond_line is None:
            rows.append((lineno, line))
        else:
            _fail(f"unexpected text after condition: {stripped!r}", lineno)
    if cond_line is None:
        _fail("missing condition line", nonblank[-1][0])
    if not rows:
        _fail("no thread rows", nonblank[0][0])
    return rows, scope_lines, cond_line, len(nonblank)


def _split_cells(line: str) -> list[tuple[str, int]]:
    """Split a row on '|', keeping each cell's starting column (1-based)."""
    cells = []
    start = 0
    for k, ch in enumerate(line):
        if ch == "|":
            cells.append((line[start:k], start + 1))
            start = k + 1
    cells.append((line[start:], start + 1))
    return [(cell.strip(), col + len(cell) - len(cell.lstrip()))
            for cell, col in cells]


def _parse_threads(rows) -> tuple[tuple[ThreadInstr, ...], ...]:
    lineno0 = rows[0][0]
    stripped_rows: list[tuple[int, list[tuple[str, int]]]] = []
    n_threads = None
    for lineno, line in rows:
        body = line.rstrip()
        if not body.endswith(";"):
            _fail("thread row must end with ';'", lineno, len(line.rstrip()) or 1)
        cells = _split_cells(body[:-1])
        if n_threads is None:
            n_threads = len(cells)
        elif len(cells) != n_threads:
            _fail(f"row has {len(cells)} columns, expected {n_threads}", lineno)
        stripped_rows.append((lineno, cells))

    # An optional first row "P0 | P1 | ..." names the threads.
    first_cells = stripped_rows[0][1]
    if (any(cell for cell, _ in first_cells)
            and all(_THREAD_HEADER.match(cell) for cell, _ in first_cells if cell)):
        headers = [cell for cell, _ in first_cells]
        expected = [f"P{i}" for i in range(len(headers))]
        if headers != expected:
            _fail(f"thread header must read {' | '.join(expected)}",
                  stripped_rows[0][0])
        stripped_rows = stripped_rows[1:]
        if not stripped_rows:
            _fail("no instruction rows after thread header", lineno0)

    threads: list[list[ThreadInstr]] = [[] for _ in range(n_threads)]
    for lineno, cells in stripped_rows:
        for t, (cell, col) in enumerate(cells):
            if not cell:
                continue
            threads[t].append(_parse_instr(cell, lineno, col))
    result = tuple(tuple(tt) for tt in threads)
    _check_threads(result, rows[0][0])
    return result


def _parse_instr(cell: str, lineno: int, col: int) -> ThreadInstr:
    m = _LABEL_RE.match(cell)
    if m:
        return LabelMark(m.group(1))
    m = _INSTR_RE.match(cell)
    if not m:
        _fail(f"cannot parse instruction {cell!r}", lineno, col)
    op, tag_text, rest = m.groups()
    tags = tuple(t.strip() for t in tag_text.split(",") if t.strip())
    parts = rest.split()
    if op == "w":
        if len(parts) != 2:
            _fail("write needs '<location> <value-or-register>'", lineno, col)
        loc, operand = parts
        if not _IDENT.match(loc):
            _fail(f"bad location {loc!r}", lineno, col)
        if _INT.match(operand):
            return WriteInstr(tags, loc, int(operand))
        if not _IDENT.match(operand):
            _fail(f"bad write operand {operand!r}", lineno, col)
        return WriteInstr(tags, loc, operand)
    if op == "r":
        if len(parts) != 2:
            _fail("read needs '<register> <location>'", lineno, col)
        reg, loc = parts
        if not _IDENT.match(reg) or not _IDENT.match(loc):
            _fail(f"bad read operands {rest!r}", lineno, col)
        return ReadInstr(tags, reg, loc)
    if op == "f":
        if parts:
            _fail("fence takes no operands", lineno, col)
        return FenceInstr(tags)
    if len(parts) != 2:
        _fail("branch needs '<register> <label>'", lineno, col)
    reg, label = parts
    if not _IDENT.match(reg) or not _IDENT.match(label):
        _fail(f"bad branch operands {rest!r}", lineno, col)
    return BranchInstr(tags, reg, label)


def _check_threads(threads, lineno: int) -> None:
    for t, instrs in enumerate(threads):
        assigned: set[str] = set()
        labels: set[str] = set()
        for ins in instrs:
            if isinstance(ins, LabelMark):
                if ins.name in labels:
                    _fail(f"P{t}: duplicate label {ins.name}", lineno)
                labels.add(ins.name)
        for k, ins in enumerate(instrs):
            if isinstance(ins, ReadInstr):
                assigned.add(ins.reg)
            elif isinstance(ins, WriteInstr) and isinstance(ins.operand, str):
                if ins.operand not in assigned:
                    _fail(f"P{t}: register {ins.operand} used before assignment",
                          lineno)
            elif isinstance(ins, BranchInstr):
                if ins.reg not in assigned:
                    _fail(f"P{t}: register {ins.reg} used before assignment", lineno)
                follower = instrs[k + 1] if k + 1 < len(instrs) else None
                if not (isinstance(follower, LabelMark) and follower.name == ins.label):
                    _fail(f"P{t}: branch label {ins.label} must mark the immediately "
                          "following instruction", lineno)


def _parse_scopes(scope_lines, n_threads):
    scopes = []
    seen: set[str] = set()
    for lineno, line in scope_lines:
        m = re.match(r"scopes\s+([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(.*)$", line)
        if not m:
            _fail("expected 'scopes <name>: (<tids>)(<tids>)...'", lineno)
        name, rest = m.groups()
        if name in seen:
            _fail(f"duplicate scope name {name}", lineno)
        seen.add(name)
        groups = re.findall(r"\(([^)]*)\)", rest)
        if not groups:
            _fail("scope line needs at least one '(tid ...)' group", lineno)
        if re.sub(r"\([^)]*\)", "", rest).strip():
            _fail("scope line may only contain '(tid ...)' groups", lineno)
        parsed: list[tuple[int, ...]] = []
        used: set[int] = set()
        for g in groups:
            tids = []
            for tok in g.split():
                if not tok.isdigit():
                    _fail(f"bad thread id {tok!r} in scope group", lineno)
                tid = int(tok)
                if tid >= n_threads:
                    _fail(f"scope group mentions unknown thread {tid}", lineno)
                if tid in used:
                    _fail(f"thread {tid} appears in two groups of scope {name}",
                          lineno)
                used.add(tid)
                tids.append(tid)
            parsed.append(tuple(tids))
        scopes.append((name, tuple(parsed)))
    return tuple(scopes)


class _CondParser:
    def __init__(self, text: str, lineno: int):
        self.toks = re.findall(r"/\\|\\/|[()]|[A-Za-z_][A-Za-z0-9_]*|-?[0-9]+|[:=]|\S",
                               text)
        self.lineno = lineno
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.parse_or()
        if self.peek() is not None:
            _fail(f"unexpected token {self.peek()!r} in condition", self.lineno)
        return f

    def parse_or(self) -> Formula:
        f = self.parse_and()
        while self.peek() == "\\/":
            self.next()
            f = BoolOp("or", f, self.parse_and())
        return f

    def parse_and(self) -> Formula:
        f = self.parse_atom()
        while self.peek() == "/\\":
            self.next()
            f = BoolOp("and", f, self.parse_atom())
        return f

    def parse_atom(self) -> Formula:
        tok = self.next()
        if tok == "(":
            f = self.parse_or()
            if self.next() != ")":
                _fail("missing ')' in condition", self.lineno)
            return f
        if tok is None:
            _fail("unexpected end of condition", self.lineno)
        m = re.fullmatch(r"(?:P)?([0-9]+)", tok)
        if not m:
            if _IDENT.match(tok) and self.peek() == "=":
                _fail("final-state conditions may only mention registers "
                      f"(got memory atom {tok!r})", self.lineno)
            _fail(f"bad condition atom starting at {tok!r}", self.lineno)
        thread = int(m.group(1))
        if self.next() != ":":
            _fail("expected ':' after thread id in condition", self.lineno)
        reg = self.next()
        if reg is None or not _IDENT.match(reg):
            _fail("expected a register name in condition", self.lineno)
        if self.next() != "=":
            _fail("expected '=' in condition atom", self.lineno)
        value = self.next()
        if value is None or not _INT.match(value):
            _fail("expected an integer in condition atom", self.lineno)
        return Atom(thread, reg, int(value))


def _parse_condition(lineno: int, line: str) -> Condition:
    if line.startswith("~exists"):
        quantifier, rest = "not-exists", line[len("~exists"):]
    else:
        quantifier, rest = "exists", line[len("exists"):]
    formula = _CondParser(rest.strip(), lineno).parse()
    return Condition(quantifier, formula)


def _formula_atoms(f: Formula):
    if isinstance(f, Atom):
        yield f
    else:
        yield from _formula_atoms(f.lhs)
        yield from _formula_atoms(f.rhs)


def _check_registers(test: LitmusTest, cond_lineno: int) -> None:
    for atom in _formula_atoms(test.condition.formula):
        if atom.thread >= len(test.threads):
            _fail(f"condition mentions unknown thread {atom.thread}", cond_lineno)
        reads = {ins.reg for ins in test.threads[atom.thread]
                 if isinstance(ins, ReadInstr)}
        if atom.reg not in reads:
            _fail(f"condition mentions register {atom.reg} never assigned in "
                  f"thread {atom.thread}", cond_lineno)


# -- elaboration to events ----------------------------------------------------


@dataclass(frozen=True)
class Elaboration:
    """Program events with symbolic values (None on reads and
    register-operand writes), plus the statically known relations."""

    events: tuple[Event, ...]
    po: Rel
    data: Rel
    ctrl: Rel
    init_ids: frozenset[EventId]

    @property
    def addr(self) -> Rel:
        return frozenset()


def used_locations(test: LitmusTest) -> list[str]:
    locs = {loc for loc, _ in test.init}
    for thread in test.threads:
        for ins in thread:
            if isinstance(ins, (WriteInstr, ReadInstr)):
                locs.add(ins.loc)
    return sorted(locs)


def elaborate_events(test: LitmusTest) -> Elaboration:
    """One event per non-label instruction plus one initial write per
    location.  Values stay symbolic where they depend on rf choices."""
    init_map = test.init_map
    events: list[Event] = []
    next_id = 0
    for loc in used_locations(test):
        events.append(Event(next_id, EventKind.WRITE, INIT_THREAD, 0,
                            loc, init_map.get(loc, 0), initial=True))
        next_id += 1
    init_ids = frozenset(e.id for e in events)

    po_pairs: set[tuple[int, int]] = set()
    data: set[tuple[int, int]] = set()
    ctrl: set[tuple[int, int]] = set()
    for t, thread in enumerate(test.threads):
        ids: list[int] = []
        last_read: dict[str, int] = {}
        branch_sources: list[int] = []  # reads feeding an earlier branch
        for ins in thread:
            if isinstance(ins, LabelMark):
                continue
            eid = next_id
            next_id += 1
            po_index = len(ids)
            for src in branch_sources:
                ctrl.add((src, eid))
            if isinstance(ins, WriteInstr):
                value = ins.operand if isinstance(ins.operand, int) else None
                if isinstance(ins.operand, str):
                    data.add((last_read[ins.operand], eid))
                events.append(Event(eid, EventKind.WRITE, t, po_index,
                                    ins.loc, value, frozenset(ins.tags)))
            elif isinstance(ins, ReadInstr):
                events.append(Event(eid, EventKind.READ, t, po_index,
                                    ins.loc, None, frozenset(ins.tags)))
                last_read[ins.reg] = eid
            elif isinstance(ins, FenceInstr):
                events.append(Event(eid, EventKind.FENCE, t, po_index,
                                    tags=frozenset(ins.tags)))
            else:
                events.append(Event(eid, EventKind.BRANCH, t, po_index,
                                    tags=frozenset(ins.tags)))
                branch_sources.append(last_read[ins.reg])
            ids.append(eid)
        po_pairs.update(itertools.combinations(ids, 2))

    return Elaboration(tuple(events), frozenset(po_pairs), frozenset(data),
                       frozenset(ctrl), init_ids)


# -- candidate enumeration -----------------------------------------------------


def _topo_order(nodes, edges) -> list[int] | None:
    """Kahn topological sort; None when the edge set is cyclic."""
    incoming: dict[int, set[int]] = {n: set() for n in nodes}
    outgoing: dict[int, set[int]] = {n: set() for n in nodes}
    for a, b in edges:
        incoming[b].add(a)
        outgoing[a].add(b)
    ready = sorted(n for n in nodes if not incoming[n])
    order: list[int] = []
    while ready:
        n = ready.pop()
        order.append(n)
        for m in sorted(outgoing[n]):
            incoming[m].discard(n)
            if not incoming[m]:
                ready.append(m)
    return order if len(order) == len(incoming) else None


def _scope_relations(test: LitmusTest, events: tuple[Event, ...]):
    scopes = []
    for name, groups in test.scopes:
        pairs: set[tuple[int, int]] = set()
        for group in groups:
            members = [e.id for e in events if not e.initial and e.thread in group]
            pairs.update((a, b) for a in members for b in members)
        scopes.append((name, frozenset(pairs)))
    return tuple(scopes)


def enumerate_candidates(test: LitmusTest) -> tuple[tuple[CandidateExecution, ...], int]:
    """All rf choices, each read paired independently with any same-location
    write.  Choices whose rf together with the data dependencies form a
    cycle have no consistent value assignment and are dropped (counted).
    Candidates come out in lexicographic order of rf choices."""
    elab = elaborate_events(test)
    events_by_id = {e.id: e for e in elab.events}
    reads = sorted(e.id for e in elab.events if e.kind == EventKind.READ)
    writes_by_loc: dict[str, list[int]] = {}
    for e in elab.events:
        if e.kind == EventKind.WRITE:
            writes_by_loc.setdefault(e.loc, []).append(e.id)
    options = [sorted(writes_by_loc.get(events_by_id[r].loc, [])) for r in reads]

    scopes = _scope_relations(test, elab.events)
    node_ids = [e.id for e in elab.events]
    candidates: list[CandidateExecution] = []
    dropped = 0
    for choice in itertools.product(*options):
        rf = frozenset(zip(choice, reads))
        order = _topo_order(node_ids, rf | elab.data)
        if order is None:
            dropped += 1
            continue
        values: dict[int, int] = {e.id: e.value for e in elab.events
                                  if e.value is not None}
        rf_source = dict(zip(reads, choice))
        data_source = {w: r for r, w in elab.data}
        for eid in order:
            if eid in values:
                continue
            e = events_by_id[eid]
            if e.kind == EventKind.READ:
                values[eid] = values[rf_source[eid]]
            elif e.kind == EventKind.WRITE:
                values[eid] = values[data_source[eid]]
        new_events = tuple(
            replace(e, value=values[e.id])
            if e.kind in (EventKind.WRITE, EventKind.READ) else e
            for e in elab.events)
        cand = CandidateExecution(new_events, po=elab.po, rf=rf,
                                  addr=elab.addr, data=elab.data,
                                  ctrl=elab.ctrl, scopes=scopes)
        report = validate_candidate(cand)
        if not report.ok:  # enumeration bug, not user error
            raise AssertionError(f"enumerated candidate fails validation:\n{report}")
        candidates.append(cand)
    return tuple(candidates), dropped


# -- condition evaluation ------------------------------------------------------


def final_registers(test: LitmusTest, c: CandidateExecution) -> dict[tuple[int, str], int]:
    """Final value of each register: the value of the po-greatest read that
    assigns it.  The instruction/event correspondence is rebuilt from the
    deterministic elaboration order."""
    by_pos = {(e.thread, e.po_index): e for e in c.events if not e.initial}
    out: dict[tuple[int, str], int] = {}
    for t, thread in enumerate(test.threads):
        po_index = 0
        for ins in thread:
            if isinstance(ins, LabelMark):
                continue
            if isinstance(ins, ReadInstr):
                out[(t, ins.reg)] = by_pos[(t, po_index)].value
            po_index += 1
    return out


def _eval_formula(f: Formula, regs: dict[tuple[int, str], int]) -> bool:
    if isinstance(f, Atom):
        return regs[(f.thread, f.reg)] == f.value
    if f.op == "and":
        return _eval_formula(f.lhs, regs) and _eval_formula(f.rhs, regs)
    return _eval_formula(f.lhs, regs) or _eval_formula(f.rhs, regs)


def eval_condition(test: LitmusTest, c: CandidateExecution) -> bool:
    """Truth of the condition formula on one candidate; the exists /
    ~exists quantifier is applied by run_test over all candidates."""
    return _eval_formula(test.condition.formula, final_registers(test, c))


# -- whole-test runs -----------------------------------------------------------


@dataclass(frozen=True)
class CandidateRow:
    index: int
    rf: tuple[tuple[int, int], ...]  # sorted (read, source-write) pairs
    allowed: bool
    condition: bool
    flags: tuple[str, ...]
    shows: tuple[tuple[str, Rel], ...]


@dataclass(frozen=True)
class TestReport:
    name: str
    mode: str
    rows: tuple[CandidateRow, ...]
    dropped: int
    positive: int
    negative: int
    verdict: str  # "Ok" | "No"
    flags: tuple[str, ...]
    candidates: tuple[CandidateExecution, ...]

    @property
    def observation(self) -> str:
        if self.positive and not self.negative:
            return "Always"
        if self.positive:
            return "Sometimes"
        return "Never"


def run_test(test: LitmusTest, model: ModelAst, mode: str = "first") -> TestReport:
    """Check every enumerated candidate against the model and fold the
    per-candidate verdicts into the final-state observation."""
    candidates, dropped = enumerate_candidates(test)
    rows: list[CandidateRow] = []
    positive = negative = 0
    all_flags: set[str] = set()
    for index, cand in enumerate(candidates):
        result = run_model(model, cand, mode)
        cond = eval_condition(test, cand)
        flags = sorted({f for o in result.outcomes if o.passed for f in o.flags})
        rep = representative_outcome(result)
        shows = rep.shows if rep is not None else ()
        if result.allowed:
            if cond:
                positive += 1
            else:
                negative += 1
            all_flags.update(flags)
        rf_pairs = tuple(sorted((r, w) for w, r in cand.rf))
        rows.append(CandidateRow(index, rf_pairs, result.allowed, cond,
                                 tuple(flags), shows))
    if test.condition.quantifier == "exists":
        verdict = "Ok" if positive >= 1 else "No"
    else:
        verdict = "Ok" if positive == 0 else "No"
    return TestReport(test.name, mode, tuple(rows), dropped, positive, negative,
                      verdict, tuple(sorted(all_flags)), candidates)
