"""Lexer, recursive-descent parser, and include resolution for .cat files.

Operator precedence, loosest to tightest:

    |   union
    ;   sequence
    \\   difference
    &   intersection
    *   cartesian product (binary)
    ~   complement (prefix)
    + * ? ^-1   closures and inverse (postfix)
    juxtaposition   function application (left-associative)

`*` is postfix exactly when the following token cannot begin an
expression; otherwise it is the cartesian operator.  `fun ... -> body`
extends as far right as possible.
"""

from __future__ import annotations

import enum
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path

from .cat_ast import (
    App, Binary, BracketSet, Call, Check, EmptyRel, Expr, Forall, Fun, Ident,
    IDENT_RE, Include, Instr, KEYWORDS, Let, LetBinding, ModelAst, Pos,
    Postfix, Procedure, Show, ShowItem, TupleExpr, Unary, Unshow, With,
)
from .errors import CatSyntaxError, IncludeError


class TokenKind(enum.Enum):
    IDENT = "ident"
    STRING = "string"
    KEYWORD = "keyword"
    OPERATOR = "operator"
    DELIMITER = "delimiter"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    col: int

    @property
    def pos(self) -> Pos:
        return (self.line, self.col)


_OPERATORS = ("^-1", "->", "|", ";", "\\", "&", "*", "+", "?", "~", "=")
_DELIMITERS = "()[]{},"


def tokenize(text: str, source: str | None = None) -> list[Token]:
    """Split model text into tokens; comments ``(* ... *)`` nest and vanish."""
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg: str, l: int, c: int):
        raise CatSyntaxError(msg, l, c, source)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("(*", i):
            start_line, start_col = line, col
            depth = 1
            i += 2
            col += 2
            while i < n and depth:
                if text.startswith("(*", i):
                    depth += 1
                    i += 2
                    col += 2
                elif text.startswith("*)", i):
                    depth -= 1
                    i += 2
                    col += 2
                elif text[i] == "\n":
                    i += 1
                    line += 1
                    col = 1
                else:
                    i += 1
                    col += 1
            if depth:
                err("unterminated comment", start_line, start_col)
            continue
        if ch == '"':
            start_line, start_col = line, col
            j = text.find('"', i + 1)
            if j == -1 or "\n" in text[i + 1:j]:
                err("unterminated string literal", start_line, start_col)
            tokens.append(Token(TokenKind.STRING, text[i + 1:j], start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        m = IDENT_RE.match(text, i)
        if m:
            word = m.group(0)
            kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, word, line, col))
            i = m.end()
            col += len(word)
            continue
        if ch == "0":
            tokens.append(Token(TokenKind.KEYWORD, "0", line, col))
            i += 1
            col += 1
            continue
        for op in _OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token(TokenKind.OPERATOR, op, line, col))
                i += len(op)
                col += len(op)
                break
        else:
            if ch in _DELIMITERS:
                tokens.append(Token(TokenKind.DELIMITER, ch, line, col))
                i += 1
                col += 1
                continue
            if ch == "^":
                err("'^' must be followed by '-1'", line, col)
            if ch == "'":
                err("illegal character \"'\" (tag syntax is unsupported)", line, col)
            err(f"illegal character {ch!r}", line, col)

    tokens.append(Token(TokenKind.EOF, "", line, col))
    return tokens


# -- parser ---------------------------------------------------------------

_CHECK_KINDS = ("acyclic", "irreflexive", "empty")

# Tokens that may begin an expression; used by the `*` lookahead rule.
_EXPR_START_KEYWORDS = {"0", "fun"}


def _can_begin_expr(tok: Token) -> bool:
    if tok.kind == TokenKind.IDENT:
        return True
    if tok.kind == TokenKind.KEYWORD:
        return tok.text in _EXPR_START_KEYWORDS
    if tok.kind == TokenKind.DELIMITER:
        return tok.text in "(["
    if tok.kind == TokenKind.OPERATOR:
        return tok.text == "~"
    return False


def _can_begin_atom(tok: Token) -> bool:
    if tok.kind == TokenKind.IDENT:
        return True
    if tok.kind == TokenKind.KEYWORD:
        return tok.text == "0"
    if tok.kind == TokenKind.DELIMITER:
        return tok.text in "(["
    return False


class _Parser:
    def __init__(self, tokens: Sequence[Token], source: str | None = None):
        self.tokens = tokens
        self.i = 0
        self.source = source

    # -- cursor helpers --

    def peek(self, ahead: int = 0) -> Token:
        j = min(self.i + ahead, len(self.tokens) - 1)
        return self.tokens[j]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != TokenKind.EOF:
            self.i += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == TokenKind.KEYWORD and tok.text in words

    def at_op(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == TokenKind.OPERATOR and tok.text == text

    def at_delim(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == TokenKind.DELIMITER and tok.text == text

    def error(self, expected: str, tok: Token | None = None):
        tok = tok or self.peek()
        got = "end of input" if tok.kind == TokenKind.EOF else repr(tok.text)
        raise CatSyntaxError(f"expected {expected}, got {got}", tok.line, tok.col,
                             self.source)

    def expect_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            self.error(f"'{word}'")
        return self.next()

    def expect_op(self, text: str) -> Token:
        if not self.at_op(text):
            self.error(f"'{text}'")
        return self.next()

    def expect_delim(self, text: str) -> Token:
        if not self.at_delim(text):
            self.error(f"'{text}'")
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != TokenKind.IDENT:
            self.error(what)
        return self.next()

    # -- model / instructions --

    def parse_model(self) -> ModelAst:
        name = None
        tok = self.peek()
        if tok.kind in (TokenKind.IDENT, TokenKind.STRING):
            name = self.next().text
        instrs = self.parse_instrs(in_procedure=False, until=None)
        if self.peek().kind != TokenKind.EOF:
            self.error("an instruction")
        return ModelAst(name, tuple(instrs))

    def parse_instrs(self, in_procedure: bool, until: str | None) -> list[Instr]:
        out: list[Instr] = []
        while True:
            tok = self.peek()
            if tok.kind == TokenKind.EOF:
                if until is not None:
                    self.error(f"'{until}'")
                return out
            if until is not None and self.at_keyword(until):
                return out
            out.append(self.parse_instr(in_procedure))

    def parse_instr(self, in_procedure: bool) -> Instr:
        tok = self.peek()
        if tok.kind == TokenKind.OPERATOR and tok.text == "~":
            return self.parse_check(flagged=False)
        if tok.kind != TokenKind.KEYWORD:
            self.error("an instruction")
        word = tok.text
        if word == "let":
            return self.parse_let()
        if word == "and":
            raise CatSyntaxError("'and' without preceding 'let'", tok.line, tok.col,
                                 self.source)
        if word == "include":
            pos = self.next().pos
            path = self.peek()
            if path.kind != TokenKind.STRING:
                self.error("a quoted include path")
            self.next()
            return Include(path.text, pos=pos)
        if word == "flag":
            self.next()
            return self.parse_check(flagged=True, pos=tok.pos)
        if word in _CHECK_KINDS:
            return self.parse_check(flagged=False)
        if word == "show":
            return self.parse_show()
        if word == "unshow":
            pos = self.next().pos
            names = [self.expect_ident("a relation name").text]
            while self.at_delim(","):
                self.next()
                names.append(self.expect_ident("a relation name").text)
            return Unshow(tuple(names), pos=pos)
        if word == "procedure":
            return self.parse_procedure()
        if word == "call":
            pos = self.next().pos
            name = self.expect_ident("a procedure name").text
            args: tuple[Expr, ...] = ()
            if _can_begin_expr(self.peek()):
                arg = self.parse_expr()
                args = arg.items if isinstance(arg, TupleExpr) else (arg,)
            return Call(name, args, pos=pos)
        if word == "forall":
            pos = self.next().pos
            var = self.expect_ident("a variable name").text
            self.expect_keyword("in")
            expr = self.parse_expr()
            self.expect_keyword("do")
            body = self.parse_instrs(in_procedure, until="end")
            self.expect_keyword("end")
            return Forall(var, expr, tuple(body), pos=pos)
        if word == "with":
            if in_procedure:
                raise CatSyntaxError("'with' is not allowed inside procedures",
                                     tok.line, tok.col, self.source)
            pos = self.next().pos
            var = self.expect_ident("a variable name").text
            self.expect_keyword("from")
            expr = self.parse_expr()
            return With(var, expr, pos=pos)
        if word in ("enum", "match"):
            raise CatSyntaxError(f"unsupported construct: {word}",
                                 tok.line, tok.col, self.source)
        self.error("an instruction")

    def parse_let(self) -> Instr:
        pos = self.expect_keyword("let").pos
        rec = False
        if self.at_keyword("rec"):
            self.next()
            rec = True
        bindings = [self.parse_binding()]
        while self.at_keyword("and"):
            self.next()
            bindings.append(self.parse_binding())
        return Let(rec, tuple(bindings), pos=pos)

    def parse_binding(self) -> LetBinding:
        name = self.expect_ident("a binding name").text
        params = self.parse_params(optional=True)
        self.expect_op("=")
        return LetBinding(name, params, self.parse_expr())

    def parse_params(self, optional: bool) -> tuple[str, ...]:
        params: list[str] = []
        if self.at_delim("("):
            open_tok = self.next()
            params.append(self.expect_ident("a parameter name").text)
            while self.at_delim(","):
                self.next()
                params.append(self.expect_ident("a parameter name").text)
            self.expect_delim(")")
            self._check_param_dups(params, open_tok)
            return tuple(params)
        while self.peek().kind == TokenKind.IDENT:
            params.append(self.next().text)
        if not params and not optional:
            self.error("a parameter list")
        self._check_param_dups(params, self.peek())
        return tuple(params)

    def _check_param_dups(self, params: list[str], tok: Token) -> None:
        if len(set(params)) != len(params):
            raise CatSyntaxError("duplicate parameter name", tok.line, tok.col,
                                 self.source)

    def parse_check(self, flagged: bool, pos: Pos | None = None) -> Check:
        negated = False
        tok = self.peek()
        if self.at_op("~"):
            self.next()
            negated = True
        kind_tok = self.peek()
        if not self.at_keyword(*_CHECK_KINDS):
            self.error("'acyclic', 'irreflexive' or 'empty'")
        self.next()
        expr = self.parse_expr()
        name = None
        if self.at_keyword("as"):
            self.next()
            name = self.expect_ident("a check name").text
        return Check(flagged, negated, kind_tok.text, expr, name,
                     pos=pos or tok.pos)

    def parse_show(self) -> Show:
        pos = self.expect_keyword("show").pos
        items = [self.parse_show_item()]
        while self.at_delim(","):
            self.next()
            items.append(self.parse_show_item())
        return Show(tuple(items), pos=pos)

    def parse_show_item(self) -> ShowItem:
        expr = self.parse_expr()
        name = None
        if self.at_keyword("as"):
            self.next()
            name = self.expect_ident("a shown-relation name").text
        return ShowItem(expr, name)

    def parse_procedure(self) -> Procedure:
        pos = self.expect_keyword("procedure").pos
        name = self.expect_ident("a procedure name").text
        params = self.parse_params(optional=False)
        self.expect_op("=")
        body = self.parse_instrs(in_procedure=True, until="end")
        self.expect_keyword("end")
        return Procedure(name, params, tuple(body), pos=pos)

    # -- expressions --

    def parse_expr(self) -> Expr:
        if self.at_keyword("fun"):
            pos = self.next().pos
            params = self.parse_params(optional=False)
            self.expect_op("->")
            return Fun(params, self.parse_expr(), pos=pos)
        if self.at_keyword("let"):
            tok = self.peek()
            raise CatSyntaxError("unsupported construct: expression-level let-in",
                                 tok.line, tok.col, self.source)
        return self.parse_binary(1)

    _BIN_OPS = {1: ("|", "union"), 2: (";", "seq"), 3: ("\\", "diff"),
                4: ("&", "inter")}

    def parse_binary(self, level: int) -> Expr:
        if level == 5:
            return self.parse_cart()
        op_text, op_name = self._BIN_OPS[level]
        e = self.parse_binary(level + 1)
        while self.at_op(op_text):
            pos = self.next().pos
            rhs = self.parse_binary(level + 1)
            e = Binary(op_name, e, rhs, pos=pos)
        return e

    def parse_cart(self) -> Expr:
        e = self.parse_prefix()
        while self.at_op("*") and _can_begin_expr(self.peek(1)):
            pos = self.next().pos
            rhs = self.parse_prefix()
            e = Binary("cart", e, rhs, pos=pos)
        return e

    def parse_prefix(self) -> Expr:
        if self.at_op("~"):
            pos = self.next().pos
            return Unary("complement", self.parse_prefix(), pos=pos)
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        e = self.parse_app()
        while True:
            if self.at_op("+"):
                e = Postfix("tclosure", e, pos=self.next().pos)
            elif self.at_op("?"):
                e = Postfix("optclosure", e, pos=self.next().pos)
            elif self.at_op("^-1"):
                e = Postfix("inverse", e, pos=self.next().pos)
            elif self.at_op("*") and not _can_begin_expr(self.peek(1)):
                e = Postfix("rtclosure", e, pos=self.next().pos)
            else:
                return e

    def parse_app(self) -> Expr:
        e = self.parse_atom()
        while _can_begin_atom(self.peek()):
            arg = self.parse_atom()
            e = App(e, arg, pos=arg.pos)
        return e

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == TokenKind.IDENT:
            self.next()
            return Ident(tok.text, pos=tok.pos)
        if tok.kind == TokenKind.KEYWORD and tok.text == "0":
            self.next()
            return EmptyRel(pos=tok.pos)
        if tok.kind == TokenKind.KEYWORD and tok.text in ("enum", "match"):
            raise CatSyntaxError(f"unsupported construct: {tok.text}",
                                 tok.line, tok.col, self.source)
        if tok.kind == TokenKind.KEYWORD and tok.text == "let":
            raise CatSyntaxError("unsupported construct: expression-level let-in",
                                 tok.line, tok.col, self.source)
        if self.at_delim("("):
            self.next()
            items = [self.parse_expr()]
            while self.at_delim(","):
                self.next()
                items.append(self.parse_expr())
            self.expect_delim(")")
            if len(items) == 1:
                return items[0]
            return TupleExpr(tuple(items), pos=tok.pos)
        if self.at_delim("["):
            self.next()
            inner = self.parse_expr()
            self.expect_delim("]")
            return BracketSet(inner, pos=tok.pos)
        self.error("an expression")


def parse_model(tokens: Sequence[Token], source: str | None = None) -> ModelAst:
    return _Parser(tokens, source).parse_model()


def parse_model_text(text: str, source: str | None = None) -> ModelAst:
    return parse_model(tokenize(text, source), source)


# -- include resolution ----------------------------------------------------

Loader = Callable[[str], str]


def _default_loader(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def resolve_includes(model: ModelAst, loader: Loader | None = None,
                     search_paths: Sequence[str] = (".",)) -> ModelAst:
    """Splice every included file's instructions in place of its Include
    node, recursively.  Cycles are detected on resolved paths."""
    loader = loader or _default_loader
    instrs = _splice(model.instructions, loader, [str(p) for p in search_paths], ())
    return ModelAst(model.name, tuple(instrs))


def _splice(instrs: Sequence[Instr], loader: Loader, search_paths: list[str],
            stack: tuple[str, ...]) -> list[Instr]:
    out: list[Instr] = []
    for ins in instrs:
        if not isinstance(ins, Include):
            out.append(ins)
            continue
        resolved, text = _load(ins, loader, search_paths)
        if resolved in stack:
            cycle = " -> ".join((*stack[stack.index(resolved):], resolved))
            raise IncludeError(f"include cycle: {cycle}", ins.pos[0], ins.pos[1])
        sub = parse_model_text(text, source=resolved)
        sub_paths = [str(Path(resolved).parent), *search_paths]
        out.extend(_splice(sub.instructions, loader, sub_paths, (*stack, resolved)))
    return out


def _load(ins: Include, loader: Loader, search_paths: list[str]) -> tuple[str, str]:
    tried = []
    for base in search_paths:
        candidate = str(Path(base) / ins.path)
        tried.append(candidate)
        try:
            return candidate, loader(candidate)
        except (OSError, KeyError):
            continue
    raise IncludeError(
        f"cannot find include \"{ins.path}\" (searched: {', '.join(tried)})",
        ins.pos[0], ins.pos[1])


def load_model(path: str | Path, include_dirs: Sequence[str] = ()) -> ModelAst:
    """Parse a model file and resolve its includes relative to its own
    directory first, then any extra include directories in order."""
    path = Path(path)
    model = parse_model_text(path.read_text(encoding="utf-8"), source=str(path))
    return resolve_includes(model, search_paths=[str(path.parent), *include_dirs])
