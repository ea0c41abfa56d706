"""Command-line entry point.

    catex --model MODEL.cat TEST.litmus [options]
    catex --model MODEL.cat --candidate CAND.json [options]

Exit codes: 0 completed run (whatever the verdict), 1 usage error,
2 parse/format error (model, litmus, or candidate JSON), 3 evaluation
error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dot import emit_dot
from .errors import (
    CandidateLoadError, CatSyntaxError, EvalError, LitmusError, UsageError,
)
from .candidate_io import load_candidate
from .interp import representative_outcome, run_model
from .litmus import parse_litmus, run_test
from .parser import load_model
from .report import (
    dumps_json, model_result_jsonable, model_result_text, test_report_jsonable,
    test_report_text,
)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(
        prog="catex",
        description="Check litmus tests or candidate executions against a "
                    "memory-consistency model written in the cat language.")
    parser.add_argument("--model", required=True, metavar="PATH",
                        help="model file (.cat)")
    parser.add_argument("litmus", nargs="?", metavar="TEST.litmus",
                        help="litmus test to check")
    parser.add_argument("--candidate", metavar="PATH",
                        help="candidate-execution JSON to check instead of a "
                             "litmus test")
    parser.add_argument("-I", dest="include_dirs", action="append", default=[],
                        metavar="DIR",
                        help="extra include directory (repeatable; searched "
                             "after the model's directory)")
    parser.add_argument("--exhaustive", action="store_true",
                        help="explore all branches instead of stopping at the "
                             "first passing one")
    parser.add_argument("--json", metavar="PATH", help="write a JSON report")
    parser.add_argument("--dot", metavar="DIR",
                        help="write one Graphviz file per candidate")
    parser.add_argument("--show", action="store_true",
                        help="include shown relations in the text report")
    return parser


def run_cli(argv: list[str]) -> int:
    args = _build_parser().parse_args(argv)
    if (args.litmus is None) == (args.candidate is None):
        raise UsageError("exactly one of TEST.litmus or --candidate is required")
    mode = "exhaustive" if args.exhaustive else "first"
    model = load_model(args.model, args.include_dirs)

    if args.litmus is not None:
        test = parse_litmus(Path(args.litmus).read_text(encoding="utf-8"))
        report = run_test(test, model, mode)
        sys.stdout.write(test_report_text(report, show=args.show))
        if args.json:
            Path(args.json).write_text(dumps_json(test_report_jsonable(report)),
                                       encoding="utf-8")
        if args.dot:
            out_dir = Path(args.dot)
            out_dir.mkdir(parents=True, exist_ok=True)
            for row, cand in zip(report.rows, report.candidates):
                outcome = _row_outcome(row)
                text = emit_dot(cand, outcome, name=f"{report.name}-{row.index}")
                (out_dir / f"{report.name}-{row.index}.dot").write_text(
                    text, encoding="utf-8")
        return 0

    cand = load_candidate(args.candidate)
    result = run_model(model, cand, mode)
    sys.stdout.write(model_result_text(Path(args.model).name,
                                       Path(args.candidate).name,
                                       result, show=args.show))
    if args.json:
        Path(args.json).write_text(dumps_json(model_result_jsonable(result)),
                                   encoding="utf-8")
    if args.dot:
        out_dir = Path(args.dot)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = Path(args.candidate).stem
        text = emit_dot(cand, representative_outcome(result), name=f"{stem}-0")
        (out_dir / f"{stem}-0.dot").write_text(text, encoding="utf-8")
    return 0


def _row_outcome(row):
    """Reconstruct a display outcome for a litmus candidate row."""
    from .interp import Outcome

    return Outcome(shows=row.shows)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run_cli(argv)
    except UsageError as exc:
        print(f"catex: usage error: {exc}", file=sys.stderr)
        return 1
    except (CatSyntaxError, LitmusError, CandidateLoadError) as exc:
        print(f"catex: error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"catex: error: {exc}", file=sys.stderr)
        return 2
    except EvalError as exc:
        print(f"catex: evaluation error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
