"""Exception hierarchy shared by all catex components.

Errors are grouped by CLI exit class: syntax/format errors (model text,
litmus text, candidate JSON) map to exit code 2, evaluation errors to 3,
usage errors to 1.
"""

from __future__ import annotations


class CatexError(Exception):
    """Base class for all catex errors."""


class UsageError(CatexError):
    """Bad command-line invocation."""


class PositionedError(CatexError):
    """Error anchored to a line/column in some source text."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None,
                 source: str | None = None):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        super().__init__(str(self))

    def __str__(self) -> str:
        prefix = ""
        if self.source is not None:
            prefix += f"{self.source}:"
        if self.line is not None:
            prefix += f"{self.line}:"
            if self.col is not None:
                prefix += f"{self.col}:"
        return f"{prefix} {self.message}" if prefix else self.message


class CatSyntaxError(PositionedError):
    """Lexical or grammatical error in a .cat model file."""


class IncludeError(CatSyntaxError):
    """Include resolution failure: missing file or include cycle."""


class LitmusError(PositionedError):
    """Syntax or well-formedness error in a litmus test."""


class CandidateLoadError(CatexError):
    """Malformed candidate JSON: bad schema or failed validation."""


class EvalError(PositionedError):
    """Runtime error while evaluating a model over a candidate."""


class RelalgError(CatexError):
    """Error raised by a relational-algebra primitive (no position info)."""


class FixpointError(RelalgError):
    """Recursive definitions did not stabilize within the iteration bound."""
