"""AST for .cat model files, plus the canonical pretty printer.

Node equality ignores source positions so parsed and hand-built trees
compare structurally; ``pretty_print`` emits text that re-parses to a
structurally identical tree with minimal parenthesization.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

Pos = tuple[int, int]
_NOPOS: Pos = (0, 0)

#: Reserved words of the model language (shared by lexer and printer).
KEYWORDS = frozenset({
    "let", "rec", "and", "include", "acyclic", "irreflexive", "empty",
    "flag", "as", "show", "unshow", "procedure", "call", "end", "forall",
    "in", "do", "with", "from", "fun", "enum", "match",
})

#: Identifier shape; `-` is allowed inside names but never swallows `->`.
IDENT_RE = re.compile(r"[A-Za-z_](?:[A-Za-z0-9_.]|-(?!>))*")


def _pos_field():
    return field(default=_NOPOS, compare=False, repr=False)


# -- expressions ---------------------------------------------------------

class Expr:
    pass


@dataclass(frozen=True)
class Ident(Expr):
    name: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class EmptyRel(Expr):
    """The literal ``0``: the empty relation."""
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class BracketSet(Expr):
    """``[S]``: the identity relation restricted to the event set S."""
    inner: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # union | seq | diff | inter | cart
    lhs: Expr
    rhs: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # complement
    arg: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Postfix(Expr):
    op: str  # tclosure | rtclosure | optclosure | inverse
    arg: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Fun(Expr):
    params: tuple[str, ...]
    body: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class App(Expr):
    fn: Expr
    arg: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class TupleExpr(Expr):
    items: tuple[Expr, ...]  # always >= 2 items
    pos: Pos = _pos_field()


# -- instructions --------------------------------------------------------

class Instr:
    pass


@dataclass(frozen=True)
class LetBinding:
    name: str
    params: tuple[str, ...]  # empty tuple = plain value binding
    expr: Expr


@dataclass(frozen=True)
class Let(Instr):
    rec: bool
    bindings: tuple[LetBinding, ...]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Include(Instr):
    path: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Check(Instr):
    flagged: bool
    negated: bool
    kind: str  # acyclic | irreflexive | empty
    expr: Expr
    name: str | None = None
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class ShowItem:
    expr: Expr
    name: str | None = None


@dataclass(frozen=True)
class Show(Instr):
    items: tuple[ShowItem, ...]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Unshow(Instr):
    names: tuple[str, ...]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Procedure(Instr):
    name: str
    params: tuple[str, ...]
    body: tuple[Instr, ...]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Call(Instr):
    name: str
    args: tuple[Expr, ...]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Forall(Instr):
    var: str
    expr: Expr
    body: tuple[Instr, ...]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class With(Instr):
    var: str
    expr: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class ModelAst:
    name: str | None
    instructions: tuple[Instr, ...]


# -- pretty printing -----------------------------------------------------

_BIN_TOKEN = {"union": "|", "seq": ";", "diff": "\\", "inter": "&", "cart": "*"}
_BIN_LEVEL = {"union": 1, "seq": 2, "diff": 3, "inter": 4, "cart": 5}
_POSTFIX_TOKEN = {"tclosure": "+", "rtclosure": "*", "optclosure": "?", "inverse": "^-1"}

_LEVEL_PREFIX = 6
_LEVEL_POSTFIX = 7
_LEVEL_APP = 8
_LEVEL_ATOM = 9


def _expr_level(e: Expr) -> int:
    if isinstance(e, Binary):
        return _BIN_LEVEL[e.op]
    if isinstance(e, Unary):
        return _LEVEL_PREFIX
    if isinstance(e, Postfix):
        return _LEVEL_POSTFIX
    if isinstance(e, App):
        return _LEVEL_APP
    if isinstance(e, Fun):
        return 0
    return _LEVEL_ATOM


def expr_to_str(e: Expr, level: int = 0) -> str:
    own = _expr_level(e)
    if own < level:
        return f"({expr_to_str(e, 0)})"
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, EmptyRel):
        return "0"
    if isinstance(e, BracketSet):
        return f"[{expr_to_str(e.inner, 0)}]"
    if isinstance(e, Binary):
        lhs = expr_to_str(e.lhs, own)
        rhs = expr_to_str(e.rhs, own + 1)
        return f"{lhs} {_BIN_TOKEN[e.op]} {rhs}"
    if isinstance(e, Unary):
        return f"~{expr_to_str(e.arg, _LEVEL_PREFIX)}"
    if isinstance(e, Postfix):
        return f"{expr_to_str(e.arg, _LEVEL_POSTFIX)}{_POSTFIX_TOKEN[e.op]}"
    if isinstance(e, App):
        return f"{expr_to_str(e.fn, _LEVEL_APP)} {expr_to_str(e.arg, _LEVEL_ATOM)}"
    if isinstance(e, Fun):
        return f"fun {_params_to_str(e.params)} -> {expr_to_str(e.body, 0)}"
    if isinstance(e, TupleExpr):
        return "(" + ", ".join(expr_to_str(i, 1) for i in e.items) + ")"
    raise TypeError(f"not an expression node: {e!r}")


def _params_to_str(params: tuple[str, ...]) -> str:
    if len(params) == 1:
        return params[0]
    return "(" + ", ".join(params) + ")"


def _tail_guard(text: str, guard: bool) -> str:
    # A trailing bare `*` would fuse with a following `~`-negated check
    # into a cartesian product under the one-token-lookahead rule.
    if guard and text.endswith("*"):
        return f"({text})"
    return text


def _binding_to_str(b: LetBinding, guard: bool) -> str:
    head = b.name if not b.params else f"{b.name} {_params_to_str(b.params)}"
    return f"{head} = {_tail_guard(expr_to_str(b.expr), guard)}"


def _instr_to_lines(ins: Instr, guard: bool, indent: str) -> list[str]:
    if isinstance(ins, Let):
        kw = "let rec" if ins.rec else "let"
        parts = [_binding_to_str(b, guard and i == len(ins.bindings) - 1)
                 for i, b in enumerate(ins.bindings)]
        return [indent + kw + " " + " and ".join(parts)]
    if isinstance(ins, Include):
        return [f'{indent}include "{ins.path}"']
    if isinstance(ins, Check):
        words = []
        if ins.flagged:
            words.append("flag")
        kind = ("~" if ins.negated else "") + ins.kind
        words.append(kind)
        words.append(_tail_guard(expr_to_str(ins.expr), guard and ins.name is None))
        if ins.name is not None:
            words.append(f"as {ins.name}")
        return [indent + " ".join(words)]
    if isinstance(ins, Show):
        items = []
        for i, item in enumerate(ins.items):
            text = expr_to_str(item.expr)
            if item.name is not None:
                text += f" as {item.name}"
            elif i == len(ins.items) - 1:
                text = _tail_guard(text, guard)
            items.append(text)
        return [indent + "show " + ", ".join(items)]
    if isinstance(ins, Unshow):
        return [indent + "unshow " + ", ".join(ins.names)]
    if isinstance(ins, Procedure):
        head = f"{indent}procedure {ins.name} {_params_to_str(ins.params)} ="
        body = _instrs_to_lines(ins.body, indent + "  ")
        return [head, *body, indent + "end"]
    if isinstance(ins, Call):
        if not ins.args:
            return [f"{indent}call {ins.name}"]
        if len(ins.args) == 1:
            arg = _tail_guard(expr_to_str(ins.args[0], _LEVEL_ATOM), guard)
        else:
            arg = "(" + ", ".join(expr_to_str(a, 1) for a in ins.args) + ")"
        return [f"{indent}call {ins.name} {arg}"]
    if isinstance(ins, Forall):
        head = f"{indent}forall {ins.var} in {expr_to_str(ins.expr)} do"
        body = _instrs_to_lines(ins.body, indent + "  ")
        return [head, *body, indent + "end"]
    if isinstance(ins, With):
        return [f"{indent}with {ins.var} from {_tail_guard(expr_to_str(ins.expr), guard)}"]
    raise TypeError(f"not an instruction node: {ins!r}")


def _starts_negated_check(ins: Instr) -> bool:
    return isinstance(ins, Check) and ins.negated and not ins.flagged


def _instrs_to_lines(instrs: tuple[Instr, ...], indent: str) -> list[str]:
    lines: list[str] = []
    for i, ins in enumerate(instrs):
        guard = i + 1 < len(instrs) and _starts_negated_check(instrs[i + 1])
        lines.extend(_instr_to_lines(ins, guard, indent))
    return lines


def pretty_print(model: ModelAst) -> str:
    lines: list[str] = []
    if model.name is not None:
        bare = IDENT_RE.fullmatch(model.name) and model.name not in KEYWORDS
        lines.append(model.name if bare else f'"{model.name}"')
    lines.extend(_instrs_to_lines(model.instructions, ""))
    return "\n".join(lines) + "\n"
