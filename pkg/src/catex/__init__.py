"""catex: an axiomatic memory-consistency checker.

Models written in the cat relational language are interpreted over
candidate executions (event graphs with program order, read-from, and
dependency relations).  A small litmus frontend turns multi-threaded
test programs into the full set of candidate executions and reports
which final states the model allows.
"""

from .cat_ast import ModelAst, pretty_print
from .candidate_io import load_candidate, load_candidate_text, save_candidate
from .dot import emit_dot
from .errors import (
    CandidateLoadError, CatexError, CatSyntaxError, EvalError, FixpointError,
    IncludeError, LitmusError, UsageError,
)
from .execution import (
    CandidateExecution, Event, EventKind, INIT_THREAD, ValidationReport,
    Violation, compute_derived, validate_candidate,
)
from .interp import (
    ModelResult, Outcome, initial_environment, run_model,
)
from .litmus import (
    LitmusTest, TestReport, elaborate_events, enumerate_candidates,
    eval_condition, parse_litmus, run_test,
)
from .parser import (
    load_model, parse_model, parse_model_text, resolve_includes, tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "CandidateExecution", "CandidateLoadError", "CatexError", "CatSyntaxError",
    "EvalError", "Event", "EventKind", "FixpointError", "INIT_THREAD",
    "IncludeError", "LitmusError", "LitmusTest", "ModelAst", "ModelResult",
    "Outcome", "TestReport", "UsageError", "ValidationReport", "Violation",
    "compute_derived", "elaborate_events", "emit_dot", "enumerate_candidates",
    "eval_condition", "initial_environment", "load_candidate",
    "load_candidate_text", "load_model", "parse_litmus", "parse_model",
    "parse_model_text", "pretty_print", "resolve_includes", "run_model",
    "run_test", "save_candidate", "tokenize", "validate_candidate",
    "__version__",
]
