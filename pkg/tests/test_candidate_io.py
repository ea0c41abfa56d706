from __future__ import annotations

import json

import pytest

from catex import (
    EventKind, INIT_THREAD, load_candidate, load_candidate_text, save_candidate,
)
from catex.errors import CandidateLoadError

from conftest import DATA, sb_candidate

EXPECTED_VIOLATIONS = {
    "value-mismatch.json": "rf value mismatch",
    "dangling-id.json": "unknown event id 99",
    "read-no-source.json": "read without source",
    "po-cross-thread.json": "po across threads",
    "read-multi-source.json": "read with multiple sources",
    "rf-target-not-read.json": "rf target is not a read",
    "init-not-write.json": "is not a write",
    "po-initial.json": "involves an initial write",
    "missing-value.json": "kind R requires loc and value",
    "bad-kind.json": "unknown kind 'X'",
}


def test_minimal_candidate_loads():
    text = json.dumps({
        "events": [
            {"id": 0, "kind": "W", "thread": -1, "po_index": 0,
             "loc": "x", "value": 0, "initial": True},
            {"id": 1, "kind": "R", "thread": 0, "po_index": 0,
             "loc": "x", "value": 0},
        ],
        "rf": [[0, 1]],
    })
    cand = load_candidate_text(text)
    assert len(cand.events) == 2
    assert cand.iw == frozenset({0})
    assert cand.po == frozenset()
    assert cand.events_by_id[0].thread == INIT_THREAD


def test_load_matches_hand_built_candidate():
    cand = load_candidate(DATA / "sb-weak.json")
    assert cand == sb_candidate()


def test_roundtrip_is_byte_identical():
    original = (DATA / "sb-weak.json").read_text()
    cand = load_candidate_text(original)
    assert save_candidate(cand) == original
    # And a second trip through the loader is stable too.
    assert save_candidate(load_candidate_text(save_candidate(cand))) == original


def test_save_orders_everything():
    cand = sb_candidate()
    text = save_candidate(cand)
    doc = json.loads(text)
    assert [e["id"] for e in doc["events"]] == [0, 1, 2, 3, 4, 5]
    assert doc["po"] == sorted(doc["po"])
    assert doc["rf"] == sorted(doc["rf"])
    assert list(doc) == sorted(doc)


def test_tags_and_scopes_roundtrip():
    from catex import CandidateExecution, Event

    events = (
        Event(0, EventKind.WRITE, INIT_THREAD, 0, "x", 0, initial=True),
        Event(1, EventKind.READ, 0, 0, "x", 0, frozenset({"acq", "deps"})),
        Event(2, EventKind.FENCE, 1, 0, tags=frozenset({"mb"})),
    )
    scope = frozenset({(1, 1), (1, 2), (2, 1), (2, 2)})
    cand = CandidateExecution(events, rf=frozenset({(0, 1)}),
                              scopes=(("dev", scope),))
    reloaded = load_candidate_text(save_candidate(cand))
    assert reloaded == cand
    assert reloaded.events_by_id[1].tags == frozenset({"acq", "deps"})
    assert dict(reloaded.scopes)["dev"] == scope


@pytest.mark.parametrize("name", sorted(EXPECTED_VIOLATIONS))
def test_malformed_corpus_names_the_violation(name):
    with pytest.raises(CandidateLoadError) as exc:
        load_candidate(DATA / "malformed" / name)
    assert EXPECTED_VIOLATIONS[name] in str(exc.value), str(exc.value)


def test_schema_errors():
    with pytest.raises(CandidateLoadError, match="malformed JSON"):
        load_candidate_text("{not json")
    with pytest.raises(CandidateLoadError, match="'events'.*required"):
        load_candidate_text("{}")
    with pytest.raises(CandidateLoadError, match="unknown field 'extra'"):
        load_candidate_text('{"events": [], "extra": 1}')
    with pytest.raises(CandidateLoadError, match="missing required field 'kind'"):
        load_candidate_text('{"events": [{"id": 0}]}')
    with pytest.raises(CandidateLoadError, match="list of \\[int, int\\] pairs"):
        load_candidate_text('{"events": [], "po": [[1]]}')
    with pytest.raises(CandidateLoadError, match="duplicate event id"):
        load_candidate_text(json.dumps({"events": [
            {"id": 0, "kind": "F", "thread": 0, "po_index": 0},
            {"id": 0, "kind": "F", "thread": 1, "po_index": 0},
        ]}))


def test_missing_file_is_a_load_error(tmp_path):
    with pytest.raises(CandidateLoadError, match="cannot read"):
        load_candidate(tmp_path / "nope.json")
