from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from catex import emit_dot, load_model, parse_litmus, run_model, run_test
from catex.cli import main
from catex.interp import Outcome

from conftest import DATA, LITMUS, MODELS, sb_candidate

SB_SC_GOLDEN = """Test SB
Candidate 0 rf=[3<-1,5<-0] allowed=no cond=yes
Candidate 1 rf=[3<-1,5<-2] allowed=yes cond=no
Candidate 2 rf=[3<-4,5<-0] allowed=yes cond=no
Candidate 3 rf=[3<-4,5<-2] allowed=yes cond=no
Dropped: 0
Positive: 0 Negative: 3
Observation SB Never 0 3
"""

SB_COHERENCE_TAIL = """Positive: 1 Negative: 3
Observation SB Sometimes 1 3
"""


def run_main(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_sb_under_sc_golden(capsys):
    code, out, err = run_main(["--model", MODELS / "sc.cat", LITMUS / "sb.litmus"],
                              capsys)
    assert code == 0 and err == ""
    assert out == SB_SC_GOLDEN


def test_cli_sb_under_coherence(capsys):
    code, out, _ = run_main(["--model", MODELS / "coherence.cat",
                             LITMUS / "sb.litmus"], capsys)
    assert code == 0
    assert out.endswith(SB_COHERENCE_TAIL)


def test_cli_candidate_mode_text(capsys):
    code, out, _ = run_main(["--model", MODELS / "sc.cat",
                             "--candidate", DATA / "sb-weak.json"], capsys)
    assert code == 0
    assert out == ("Model sc.cat\n"
                   "Input sb-weak.json\n"
                   "Outcome 0 with=[co={(0,2),(1,4)}] failed=sc\n"
                   "Allowed: no\n")


def test_cli_show_adds_shown_relations(capsys):
    code, out, _ = run_main(["--model", MODELS / "sc.cat",
                             "--candidate", DATA / "sb-weak.json", "--show"],
                            capsys)
    assert code == 0
    assert "  show co={(0,2),(1,4)}" in out
    assert "  show fr={(3,4),(5,2)}" in out


def test_cli_usage_errors(capsys):
    code, _, err = run_main(["--model", MODELS / "sc.cat"], capsys)
    assert code == 1 and "usage error" in err
    code, _, err = run_main(["--model", MODELS / "sc.cat", LITMUS / "sb.litmus",
                             "--candidate", DATA / "sb-weak.json"], capsys)
    assert code == 1
    code, _, err = run_main([], capsys)
    assert code == 1


def test_cli_parse_errors_exit_2(tmp_path, capsys):
    broken = tmp_path / "broken.cat"
    broken.write_text("let x = (po | \n")
    code, _, err = run_main(["--model", broken, LITMUS / "sb.litmus"], capsys)
    assert code == 2 and "broken.cat:" in err
    # line/column present in the diagnostic
    assert ":2:" in err or ":1:" in err

    bad_litmus = tmp_path / "bad.litmus"
    bad_litmus.write_text("LISA bad\n{ x=0; }\n w[] x r9 ;\nexists (0:r9=0)\n")
    code, _, err = run_main(["--model", MODELS / "sc.cat", bad_litmus], capsys)
    assert code == 2 and "before assignment" in err

    missing_model = tmp_path / "missing.cat"
    code, _, err = run_main(["--model", missing_model, LITMUS / "sb.litmus"],
                            capsys)
    assert code == 2


def test_cli_eval_errors_exit_3(tmp_path, capsys):
    model = tmp_path / "unbound.cat"
    model.write_text("acyclic nonexistent_relation\n")
    code, _, err = run_main(["--model", model, LITMUS / "sb.litmus"], capsys)
    assert code == 3 and "unbound identifier" in err


@pytest.mark.parametrize("name", sorted(
    p.name for p in (DATA / "malformed").iterdir()))
def test_cli_malformed_candidates_exit_2(name, capsys):
    code, _, err = run_main(["--model", MODELS / "sc.cat",
                             "--candidate", DATA / "malformed" / name], capsys)
    assert code == 2
    assert "error" in err


def test_cli_json_output_litmus(tmp_path, capsys):
    out_path = tmp_path / "report.json"
    code, out, _ = run_main(["--model", MODELS / "sc.cat", LITMUS / "sb.litmus",
                             "--json", out_path], capsys)
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["test"] == "SB"
    assert doc["positive"] == 0 and doc["negative"] == 3
    assert doc["verdict"] == "No" and doc["observation"] == "Never"
    assert doc["dropped"] == 0
    assert [c["allowed"] for c in doc["candidates"]] == [False, True, True, True]
    # Text and JSON agree.
    assert f"Positive: {doc['positive']} Negative: {doc['negative']}" in out


def test_cli_json_output_candidate(tmp_path, capsys):
    out_path = tmp_path / "result.json"
    code, out, _ = run_main(["--model", MODELS / "sc.cat",
                             "--candidate", DATA / "sb-weak.json",
                             "--json", out_path, "--exhaustive"], capsys)
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["allowed"] is False and doc["mode"] == "exhaustive"
    assert doc["outcomes"][0]["failed_check"]["name"] == "sc"
    assert doc["outcomes"][0]["with"]["co"] == [[0, 2], [1, 4]]
    assert ("Allowed: no" in out) == (doc["allowed"] is False)


def test_cli_dot_output(tmp_path, capsys):
    dot_dir = tmp_path / "dots"
    code, _, _ = run_main(["--model", MODELS / "sc.cat", LITMUS / "sb.litmus",
                           "--dot", dot_dir], capsys)
    assert code == 0
    files = sorted(p.name for p in dot_dir.iterdir())
    assert files == [f"SB-{i}.dot" for i in range(4)]
    text = (dot_dir / "SB-0.dot").read_text()
    assert text.count("label=\"po\"") == 2
    assert text.count("label=\"rf\"") == 2
    assert text.count("label=\"co\"") == 2
    assert text.count("label=\"fr\"") == 2


# -- dot unit behaviour ------------------------------------------------------


def test_emit_dot_sb_counts():
    cand = sb_candidate()
    text = emit_dot(cand, outcome=None, name="SB-0")
    assert text.count("[label=\"") == 6 + 4  # 6 nodes + 4 relation edges
    assert text.count("-> ") == 4  # 2 po + 2 rf
    assert 'e2 [label="P0: W x=1"]' in text
    assert 'e0 [label="init x=0"]' in text


def test_emit_dot_single_event():
    from catex import CandidateExecution, Event, EventKind, INIT_THREAD

    cand = CandidateExecution(
        (Event(0, EventKind.WRITE, INIT_THREAD, 0, "x", 0, initial=True),))
    text = emit_dot(cand)
    assert text.count("-> ") == 0
    assert 'e0 [label="init x=0"]' in text


def test_emit_dot_shown_relation_adds_edges():
    cand = sb_candidate()
    outcome = Outcome(shows=(("fr", frozenset({(3, 4), (5, 2)})),))
    text = emit_dot(cand, outcome)
    assert text.count("label=\"fr\"") == 2
    base = emit_dot(cand)
    assert text.count("-> ") == base.count("-> ") + 2


def test_emit_dot_deterministic():
    cand = sb_candidate()
    assert emit_dot(cand) == emit_dot(cand)


# -- byte-level determinism across processes -----------------------------------


def run_subprocess(args, cwd):
    return subprocess.run([sys.executable, "-m", "catex", *args],
                          capture_output=True, text=True, cwd=cwd)


def corpus_outputs(tmp_path: Path, tag: str) -> dict[str, bytes]:
    outputs: dict[str, bytes] = {}
    root = tmp_path / tag
    root.mkdir()
    runs = [(model, litmus) for model in ("sc.cat", "coherence.cat")
            for litmus in sorted(p.name for p in LITMUS.iterdir())]
    for i, (model, litmus) in enumerate(runs):
        json_path = root / f"{i}.json"
        dot_dir = root / f"dots{i}"
        proc = run_subprocess(
            ["--model", str(MODELS / model), str(LITMUS / litmus),
             "--exhaustive", "--show", "--json", str(json_path),
             "--dot", str(dot_dir)],
            cwd=root)
        assert proc.returncode == 0, proc.stderr
        outputs[f"{i}.stdout"] = proc.stdout.encode()
        outputs[f"{i}.json"] = json_path.read_bytes()
        for p in sorted(dot_dir.iterdir()):
            outputs[f"{i}/{p.name}"] = p.read_bytes()
    cand_proc = run_subprocess(
        ["--model", str(MODELS / "sc.cat"), "--candidate",
         str(DATA / "sb-weak.json"), "--json", str(root / "cand.json")],
        cwd=root)
    assert cand_proc.returncode == 0
    outputs["cand.stdout"] = cand_proc.stdout.encode()
    outputs["cand.json"] = (root / "cand.json").read_bytes()
    return outputs


def test_full_corpus_outputs_are_byte_identical_across_runs(tmp_path):
    first = corpus_outputs(tmp_path, "run1")
    second = corpus_outputs(tmp_path, "run2")
    assert first == second
