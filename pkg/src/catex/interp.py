"""Model evaluation over a candidate execution.

Instructions run in order against an environment of event sets,
relations, collections and functions.  A ``with x from e`` instruction
forks one branch per element of the collection; a failed (unflagged)
check kills its branch; the model allows the candidate iff some branch
survives every check.  Branch exploration is depth-first and fully
deterministic.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, replace

from . import relalg
from .cat_ast import (
    App, Binary, BracketSet, Check, EmptyRel, Expr, Forall, Fun, Ident,
    Include, Instr, Let, ModelAst, Pos, Postfix, Procedure, Show, TupleExpr,
    Unary, Unshow, With, Call,
)
from .errors import EvalError, RelalgError
from .execution import (
    CandidateExecution, EventKind, Rel, compute_derived, validate_candidate,
)

# -- runtime values -------------------------------------------------------


@dataclass(frozen=True)
class SetV:
    events: frozenset[int]


@dataclass(frozen=True)
class RelV:
    pairs: Rel


@dataclass(frozen=True)
class CollV:
    items: tuple["Value", ...]


@dataclass(frozen=True)
class TupleV:
    items: tuple["Value", ...]


@dataclass(frozen=True)
class ClosureV:
    params: tuple[str, ...]
    body: Expr
    env: "Env"


@dataclass(frozen=True)
class PrimV:
    name: str
    args: tuple["Value", ...] = ()


@dataclass(frozen=True)
class ProcV:
    name: str
    params: tuple[str, ...]
    body: tuple[Instr, ...]
    env: "Env"


Value = SetV | RelV | CollV | TupleV | ClosureV | PrimV | ProcV

_PRIM_ARITY = {"domain": 1, "range": 1, "fencerel": 1, "linearisations": 2,
               "cross": 1, "partition": 1, "map": 2}


def sort_name(v: Value) -> str:
    return {SetV: "event set", RelV: "relation", CollV: "collection",
            TupleV: "tuple", ClosureV: "function", PrimV: "function",
            ProcV: "procedure"}[type(v)]


class Env:
    """Immutable binding chain; inner frames shadow outer ones."""

    __slots__ = ("bindings", "parent")

    def __init__(self, bindings: dict[str, Value], parent: "Env | None" = None):
        self.bindings = bindings
        self.parent = parent

    def lookup(self, name: str) -> Value | None:
        env: Env | None = self
        while env is not None:
            if name in env.bindings:
                return env.bindings[name]
            env = env.parent
        return None

    def bind(self, name: str, value: Value) -> "Env":
        return Env({name: value}, self)

    def bind_many(self, bindings: dict[str, Value]) -> "Env":
        return Env(dict(bindings), self)


# -- outcomes -------------------------------------------------------------


@dataclass(frozen=True)
class Outcome:
    """Result of one branch: the `with` choices made on it, its verdict,
    accumulated flags, and the relations recorded by `show`."""

    with_bindings: tuple[tuple[str, Value], ...] = ()
    failed_check: tuple[str, str, bool] | None = None  # (name, kind, negated)
    flags: frozenset[str] = frozenset()
    shows: tuple[tuple[str, Rel], ...] = ()

    @property
    def passed(self) -> bool:
        return self.failed_check is None

    def record_with(self, var: str, value: Value) -> "Outcome":
        return replace(self, with_bindings=(*self.with_bindings, (var, value)))

    def fail(self, name: str, kind: str, negated: bool) -> "Outcome":
        return replace(self, failed_check=(name, kind, negated))

    def flag(self, name: str) -> "Outcome":
        return replace(self, flags=self.flags | {name})

    def show(self, name: str, rel: Rel) -> "Outcome":
        if any(n == name for n, _ in self.shows):
            return replace(self, shows=tuple((n, rel if n == name else r)
                                             for n, r in self.shows))
        return replace(self, shows=(*self.shows, (name, rel)))

    def unshow(self, name: str) -> "Outcome":
        return replace(self, shows=tuple((n, r) for n, r in self.shows if n != name))


@dataclass(frozen=True)
class ModelResult:
    allowed: bool
    outcomes: tuple[Outcome, ...]
    mode: str  # "first" | "exhaustive"


def representative_outcome(result: ModelResult) -> Outcome | None:
    """The outcome used for single-outcome displays: the first passing
    branch when one exists, else the first explored branch."""
    for o in result.outcomes:
        if o.passed:
            return o
    return result.outcomes[0] if result.outcomes else None


# -- evaluation context ----------------------------------------------------


class _Ctx:
    def __init__(self, candidate: CandidateExecution):
        self.candidate = candidate
        self.universe = candidate.event_ids
        self.events_by_id = candidate.events_by_id
        self.po = candidate.po
        self.n_events = len(candidate.events)
        self.check_names: dict[int, str] = {}


RESERVED_NAMES = frozenset({
    "W", "R", "F", "B", "IW", "M", "emptyset", "_",
    "po", "rf", "id", "loc", "int", "ext", "addr", "data", "ctrl", "rmw", "0",
    "domain", "range", "fencerel", "linearisations", "cross", "partition", "map",
})


def initial_environment(c: CandidateExecution) -> Env:
    """Base environment: event sets, the candidate's relations, the derived
    relations, one relation per scope name, and the built-in functions."""
    report = validate_candidate(c)
    if not report.ok:
        raise ValueError(f"candidate failed validation:\n{report}")
    derived = compute_derived(c)
    w = c.kind_set(EventKind.WRITE)
    r = c.kind_set(EventKind.READ)
    bindings: dict[str, Value] = {
        "W": SetV(w),
        "R": SetV(r),
        "F": SetV(c.kind_set(EventKind.FENCE)),
        "B": SetV(c.kind_set(EventKind.BRANCH)),
        "IW": SetV(c.iw),
        "M": SetV(w | r),
        "emptyset": SetV(frozenset()),
        "_": SetV(c.event_ids),
        "po": RelV(c.po),
        "rf": RelV(c.rf),
        "addr": RelV(c.addr),
        "data": RelV(c.data),
        "ctrl": RelV(c.ctrl),
        "rmw": RelV(c.rmw),
        "0": RelV(frozenset()),
        "id": RelV(derived["id"]),
        "loc": RelV(derived["loc"]),
        "int": RelV(derived["int"]),
        "ext": RelV(derived["ext"]),
    }
    for name in _PRIM_ARITY:
        bindings[name] = PrimV(name)
    for name, rel in c.scopes:
        if name in RESERVED_NAMES:
            raise EvalError(f"scope name {name!r} collides with a reserved identifier")
        bindings[name] = RelV(rel)
    return Env(bindings)


# -- expression evaluation --------------------------------------------------


def _err(msg: str, pos: Pos) -> EvalError:
    return EvalError(msg, pos[0], pos[1])


def eval_expr(env: Env, e: Expr, ctx: _Ctx) -> Value:
    if isinstance(e, Ident):
        v = env.lookup(e.name)
        if v is None:
            raise _err(f"unbound identifier {e.name!r}", e.pos)
        return v
    if isinstance(e, EmptyRel):
        return RelV(frozenset())
    if isinstance(e, BracketSet):
        inner = eval_expr(env, e.inner, ctx)
        if not isinstance(inner, SetV):
            raise _err(f"[...] requires an event set, got {sort_name(inner)}", e.pos)
        return RelV(relalg.identity_on(inner.events))
    if isinstance(e, Binary):
        return _eval_binary(env, e, ctx)
    if isinstance(e, Unary):
        arg = eval_expr(env, e.arg, ctx)
        if not isinstance(arg, RelV):
            raise _err(f"operator '~' requires a relation, got {sort_name(arg)}", e.pos)
        return RelV(relalg.complement(arg.pairs, ctx.universe))
    if isinstance(e, Postfix):
        arg = eval_expr(env, e.arg, ctx)
        if not isinstance(arg, RelV):
            op = {"tclosure": "+", "rtclosure": "*", "optclosure": "?",
                  "inverse": "^-1"}[e.op]
            raise _err(f"operator '{op}' requires a relation, got {sort_name(arg)}",
                       e.pos)
        if e.op == "tclosure":
            return RelV(relalg.tclosure(arg.pairs))
        if e.op == "rtclosure":
            return RelV(relalg.rtclosure(arg.pairs, ctx.universe))
        if e.op == "optclosure":
            return RelV(relalg.optclosure(arg.pairs, ctx.universe))
        return RelV(relalg.inverse(arg.pairs))
    if isinstance(e, Fun):
        return ClosureV(e.params, e.body, env)
    if isinstance(e, App):
        fn = eval_expr(env, e.fn, ctx)
        arg = eval_expr(env, e.arg, ctx)
        return apply_value(fn, arg, ctx, e.pos)
    if isinstance(e, TupleExpr):
        return TupleV(tuple(eval_expr(env, item, ctx) for item in e.items))
    raise TypeError(f"not an expression node: {e!r}")


_SAME_SORT_OPS = {"union": "|", "inter": "&", "diff": "\\"}


def _eval_binary(env: Env, e: Binary, ctx: _Ctx) -> Value:
    lhs = eval_expr(env, e.lhs, ctx)
    rhs = eval_expr(env, e.rhs, ctx)
    if e.op in _SAME_SORT_OPS:
        op = getattr(relalg, e.op)
        if isinstance(lhs, SetV) and isinstance(rhs, SetV):
            return SetV(op(lhs.events, rhs.events))
        if isinstance(lhs, RelV) and isinstance(rhs, RelV):
            return RelV(op(lhs.pairs, rhs.pairs))
        raise _err(f"operator '{_SAME_SORT_OPS[e.op]}' requires matching sorts, "
                   f"got {sort_name(lhs)} and {sort_name(rhs)}", e.pos)
    if e.op == "seq":
        if not (isinstance(lhs, RelV) and isinstance(rhs, RelV)):
            raise _err(f"operator ';' requires two relations, "
                       f"got {sort_name(lhs)} and {sort_name(rhs)}", e.pos)
        return RelV(relalg.seq(lhs.pairs, rhs.pairs))
    if e.op == "cart":
        if not (isinstance(lhs, SetV) and isinstance(rhs, SetV)):
            raise _err(f"operator '*' requires two event sets, "
                       f"got {sort_name(lhs)} and {sort_name(rhs)}", e.pos)
        return RelV(relalg.cart(lhs.events, rhs.events))
    raise TypeError(f"unknown binary operator {e.op!r}")


def apply_value(fn: Value, arg: Value, ctx: _Ctx, pos: Pos) -> Value:
    if isinstance(fn, ClosureV):
        if len(fn.params) == 1:
            return eval_expr(fn.env.bind(fn.params[0], arg), fn.body, ctx)
        if not isinstance(arg, TupleV) or len(arg.items) != len(fn.params):
            got = (f"a {len(arg.items)}-tuple" if isinstance(arg, TupleV)
                   else f"a {sort_name(arg)}")
            raise _err(f"function expects {len(fn.params)} arguments, got {got}", pos)
        inner = fn.env.bind_many(dict(zip(fn.params, arg.items)))
        return eval_expr(inner, fn.body, ctx)
    if isinstance(fn, PrimV):
        arity = _PRIM_ARITY[fn.name]
        if not fn.args and isinstance(arg, TupleV) and arity == len(arg.items) > 1:
            args = arg.items
        else:
            args = (*fn.args, arg)
        if len(args) > arity:
            raise _err(f"{fn.name} expects {arity} argument(s), got {len(args)}", pos)
        if len(args) < arity:
            return PrimV(fn.name, args)
        return _apply_prim(fn.name, args, ctx, pos)
    raise _err(f"cannot apply a {sort_name(fn)} as a function", pos)


def _want(value: Value, cls, what: str, prim: str, pos: Pos):
    if not isinstance(value, cls):
        raise _err(f"{prim} requires {what}, got {sort_name(value)}", pos)
    return value


def _apply_prim(name: str, args: tuple[Value, ...], ctx: _Ctx, pos: Pos) -> Value:
    if name == "domain":
        rel = _want(args[0], RelV, "a relation", name, pos)
        return SetV(relalg.rel_domain(rel.pairs))
    if name == "range":
        rel = _want(args[0], RelV, "a relation", name, pos)
        return SetV(relalg.rel_range(rel.pairs))
    if name == "fencerel":
        fences = _want(args[0], SetV, "an event set", name, pos)
        return RelV(relalg.fence_relation(ctx.po, fences.events))
    if name == "linearisations":
        s = _want(args[0], SetV, "an event set first", name, pos)
        rel = _want(args[1], RelV, "a relation second", name, pos)
        orders = relalg.linearisations(s.events, rel.pairs)
        return CollV(tuple(RelV(o) for o in orders))
    if name == "cross":
        outer = _want(args[0], CollV, "a collection of collections", name, pos)
        inner: list[tuple[Rel, ...]] = []
        for item in outer.items:
            coll = _want(item, CollV, "a collection of collections of relations",
                         name, pos)
            rels = tuple(_want(x, RelV, "collections of relations", name, pos).pairs
                         for x in coll.items)
            inner.append(rels)
        return CollV(tuple(RelV(r) for r in relalg.cross(inner)))
    if name == "partition":
        s = _want(args[0], SetV, "an event set", name, pos)
        try:
            groups = relalg.partition_by_location(s.events, ctx.events_by_id)
        except RelalgError as exc:
            raise _err(str(exc), pos) from None
        return CollV(tuple(SetV(g) for g in groups))
    if name == "map":
        fn = args[0]
        if not isinstance(fn, (ClosureV, PrimV)):
            raise _err(f"map requires a function, got {sort_name(fn)}", pos)
        coll = _want(args[1], CollV, "a collection", name, pos)
        return CollV(tuple(apply_value(fn, item, ctx, pos) for item in coll.items))
    raise TypeError(f"unknown primitive {name!r}")


# -- instruction execution ---------------------------------------------------


def _number_checks(instrs: tuple[Instr, ...], ctx: _Ctx, counter: list[int]) -> None:
    for ins in instrs:
        if isinstance(ins, Check):
            counter[0] += 1
            if ins.name is None:
                ctx.check_names[id(ins)] = f"check-{counter[0]}"
        elif isinstance(ins, (Procedure, Forall)):
            _number_checks(ins.body, ctx, counter)


def _check_holds(kind: str, value: Value, negated: bool, pos: Pos) -> bool:
    if kind == "empty":
        if isinstance(value, SetV):
            holds = relalg.is_empty(value.events)
        elif isinstance(value, RelV):
            holds = relalg.is_empty(value.pairs)
        else:
            raise _err(f"empty requires an event set or relation, "
                       f"got {sort_name(value)}", pos)
    else:
        if not isinstance(value, RelV):
            raise _err(f"{kind} requires a relation, got {sort_name(value)}", pos)
        if kind == "acyclic":
            holds = relalg.is_acyclic(value.pairs)
        else:
            holds = relalg.is_irreflexive(value.pairs)
    return not holds if negated else holds


def _exec_let(env: Env, ins: Let, ctx: _Ctx) -> Env:
    if not ins.rec:
        # `and`-bindings are simultaneous: bodies see only the outer scope.
        new: dict[str, Value] = {}
        for b in ins.bindings:
            new[b.name] = (ClosureV(b.params, b.expr, env) if b.params
                           else eval_expr(env, b.expr, ctx))
        return env.bind_many(new)
    for b in ins.bindings:
        if b.params:
            raise _err(f"recursive binding {b.name!r} cannot take parameters "
                       "(let rec defines relations)", ins.pos)

    names = [b.name for b in ins.bindings]

    def make_body(b):
        def body(assign: dict[str, Rel]) -> Rel:
            frame = env.bind_many({n: RelV(r) for n, r in assign.items()})
            value = eval_expr(frame, b.expr, ctx)
            if not isinstance(value, RelV):
                raise _err(f"recursive binding {b.name!r} must evaluate to a "
                           f"relation, got {sort_name(value)}", ins.pos)
            return value.pairs
        return body

    defs = [(b.name, make_body(b)) for b in ins.bindings]
    try:
        solution, _rounds = relalg.lfp(defs, ctx.n_events)
    except RelalgError as exc:
        raise _err(str(exc), ins.pos) from None
    return env.bind_many({n: RelV(solution[n]) for n in names})


def _brief(v: Value) -> str:
    if isinstance(v, RelV):
        return "{" + ",".join(f"({a},{b})" for a, b in sorted(v.pairs)) + "}"
    if isinstance(v, SetV):
        return "{" + ",".join(str(x) for x in sorted(v.events)) + "}"
    return sort_name(v)


def _annotate(exc: EvalError, st: Outcome) -> EvalError:
    """Attach the branch's with-choices to an error escaping evaluation."""
    if getattr(exc, "branch_annotated", False) or not st.with_bindings:
        exc.branch_annotated = True
        return exc
    binds = ", ".join(f"{n}={_brief(v)}" for n, v in st.with_bindings)
    new = EvalError(f"{exc.message} [branch: {binds}]", exc.line, exc.col,
                    exc.source)
    new.branch_annotated = True
    return new


def _run_seq(instrs: tuple[Instr, ...], i: int, env: Env, st: Outcome,
             ctx: _Ctx) -> Iterator[tuple[str, Env, Outcome]]:
    """Depth-first execution of ``instrs[i:]``.

    Yields ("done", env, outcome) for branches that complete the sequence
    and ("failed", env, outcome) for branches killed by a check.
    """
    try:
        yield from _run_instrs(instrs, i, env, st, ctx)
    except EvalError as exc:
        raise _annotate(exc, st) from None


def _run_instrs(instrs: tuple[Instr, ...], i: int, env: Env, st: Outcome,
                ctx: _Ctx) -> Iterator[tuple[str, Env, Outcome]]:
    while i < len(instrs):
        ins = instrs[i]
        i += 1
        if isinstance(ins, Let):
            env = _exec_let(env, ins, ctx)
        elif isinstance(ins, Include):
            raise _err(f'unresolved include "{ins.path}" (resolve includes before '
                       "running)", ins.pos)
        elif isinstance(ins, Check):
            value = eval_expr(env, ins.expr, ctx)
            name = ins.name if ins.name is not None else ctx.check_names[id(ins)]
            holds = _check_holds(ins.kind, value, ins.negated, ins.pos)
            if ins.flagged:
                if holds:
                    st = st.flag(name)
            elif not holds:
                yield ("failed", env, st.fail(name, ins.kind, ins.negated))
                return
        elif isinstance(ins, Show):
            for item in ins.items:
                if item.name is not None:
                    name = item.name
                elif isinstance(item.expr, Ident):
                    name = item.expr.name
                else:
                    raise _err("show of a compound expression needs 'as <name>'",
                               ins.pos)
                value = eval_expr(env, item.expr, ctx)
                if not isinstance(value, RelV):
                    raise _err(f"show requires a relation, got {sort_name(value)}",
                               ins.pos)
                st = st.show(name, value.pairs)
        elif isinstance(ins, Unshow):
            for name in ins.names:
                st = st.unshow(name)
        elif isinstance(ins, Procedure):
            env = env.bind(ins.name, ProcV(ins.name, ins.params, ins.body, env))
        elif isinstance(ins, Call):
            proc = env.lookup(ins.name)
            if proc is None:
                raise _err(f"call of unbound name {ins.name!r}", ins.pos)
            if not isinstance(proc, ProcV):
                raise _err(f"call of non-procedure {ins.name!r} "
                           f"({sort_name(proc)})", ins.pos)
            if len(ins.args) != len(proc.params):
                raise _err(f"procedure {ins.name!r} expects {len(proc.params)} "
                           f"argument(s), got {len(ins.args)}", ins.pos)
            args = {p: eval_expr(env, a, ctx)
                    for p, a in zip(proc.params, ins.args)}
            body_env = proc.env.bind_many(args)
            for status, _env2, st2 in _run_seq(proc.body, 0, body_env, st, ctx):
                if status == "failed":
                    yield (status, env, st2)
                else:
                    yield from _run_seq(instrs, i, env, st2, ctx)
            return
        elif isinstance(ins, Forall):
            coll = eval_expr(env, ins.expr, ctx)
            if not isinstance(coll, CollV):
                raise _err(f"forall requires a collection, got {sort_name(coll)}",
                           ins.pos)

            def run_iters(k: int, st_k: Outcome) -> Iterator[tuple[str, Env, Outcome]]:
                if k == len(coll.items):
                    yield from _run_seq(instrs, i, env, st_k, ctx)
                    return
                body_env = env.bind(ins.var, coll.items[k])
                for status, _env2, st2 in _run_seq(ins.body, 0, body_env, st_k, ctx):
                    if status == "failed":
                        yield (status, env, st2)
                    else:
                        yield from run_iters(k + 1, st2)

            yield from run_iters(0, st)
            return
        elif isinstance(ins, With):
            coll = eval_expr(env, ins.expr, ctx)
            if not isinstance(coll, CollV):
                raise _err(f"with requires a collection, got {sort_name(coll)}",
                           ins.pos)
            for item in coll.items:
                branch_env = env.bind(ins.var, item)
                yield from _run_seq(instrs, i, branch_env,
                                    st.record_with(ins.var, item), ctx)
            return
        else:
            raise TypeError(f"not an instruction node: {ins!r}")
    yield ("done", env, st)


def exec_instruction(env: Env, st: Outcome, ins: Instr,
                     c: CandidateExecution) -> list[tuple[Env, Outcome]]:
    """Run a single instruction, returning every resulting branch.

    Branches whose outcome is failed are terminal; the others carry the
    environment execution would continue with.
    """
    ctx = _Ctx(c)
    _number_checks((ins,), ctx, [0])
    return [(env2, st2) for _status, env2, st2 in _run_seq((ins,), 0, env, st, ctx)]


def run_model(model: ModelAst, c: CandidateExecution,
              mode: str = "first") -> ModelResult:
    """Evaluate a model over a candidate.

    ``mode="first"`` stops at the first passing branch (failed branches
    already explored are still reported); ``"exhaustive"`` explores all.
    """
    if mode not in ("first", "exhaustive"):
        raise ValueError(f"unknown mode {mode!r}")
    ctx = _Ctx(c)
    _number_checks(model.instructions, ctx, [0])
    env = initial_environment(c)
    outcomes: list[Outcome] = []
    for status, _env, st in _run_seq(model.instructions, 0, env, Outcome(), ctx):
        outcomes.append(st)
        if status == "done" and mode == "first":
            break
    allowed = any(o.passed for o in outcomes)
    return ModelResult(allowed, tuple(outcomes), mode)
