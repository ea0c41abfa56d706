from __future__ import annotations

from dataclasses import replace

from catex import (
    CandidateExecution, Event, EventKind, INIT_THREAD, compute_derived,
    validate_candidate,
)

from conftest import sb_candidate


def codes(report):
    return [v.code for v in report.violations]


def test_sb_candidate_validates():
    assert validate_candidate(sb_candidate()).ok


def test_rf_value_mismatch_reported():
    cand = sb_candidate()
    # Force the read of x to claim value 0 while sourcing the W x 1 event.
    bad = replace(cand, rf=frozenset({(1, 3), (2, 5)}))
    report = validate_candidate(bad)
    assert not report.ok
    assert "rf value mismatch" in str(report)


def test_read_without_source_reported():
    cand = sb_candidate()
    bad = replace(cand, rf=frozenset({(1, 3)}))
    report = validate_candidate(bad)
    assert "read without source" in str(report)


def test_read_with_multiple_sources_reported():
    cand = sb_candidate(r1_from=0)
    bad = replace(cand, rf=cand.rf | {(2, 5)})
    report = validate_candidate(bad)
    assert any("rf value mismatch" in str(v) or "multiple sources" in str(v)
               for v in report.violations)


def test_po_across_threads_reported():
    cand = sb_candidate()
    bad = replace(cand, po=cand.po | {(2, 5)})
    report = validate_candidate(bad)
    assert "po across threads" in str(report)


def test_po_initial_write_reported():
    cand = sb_candidate()
    bad = replace(cand, po=cand.po | {(0, 2)})
    report = validate_candidate(bad)
    assert "initial write" in str(report)


def test_po_missing_pair_reported():
    cand = sb_candidate()
    bad = replace(cand, po=frozenset({(2, 3)}))
    report = validate_candidate(bad)
    assert "po-missing" in codes(report)


def test_unknown_event_id_reported():
    cand = sb_candidate()
    bad = replace(cand, rf=cand.rf | {(99, 3)})
    report = validate_candidate(bad)
    assert "unknown event id 99" in str(report)


def test_fence_must_not_carry_location():
    events = (Event(0, EventKind.FENCE, 0, 0, loc="x"),)
    report = validate_candidate(CandidateExecution(events))
    assert "must not carry loc or value" in str(report)


def test_init_must_be_write_on_reserved_thread():
    events = (
        Event(0, EventKind.READ, INIT_THREAD, 0, "x", 0, initial=True),
        Event(1, EventKind.WRITE, 0, 0, "x", 0, initial=True),
    )
    report = validate_candidate(CandidateExecution(events))
    text = str(report)
    assert "initial event 0 is not a write" in text
    assert "not on the reserved init thread" in text


def test_duplicate_initial_write_per_location():
    events = (
        Event(0, EventKind.WRITE, INIT_THREAD, 0, "x", 0, initial=True),
        Event(1, EventKind.WRITE, INIT_THREAD, 0, "x", 1, initial=True),
    )
    report = validate_candidate(CandidateExecution(events))
    assert "two initial writes for location x" in str(report)


def test_scope_symmetry_and_thread_closure():
    cand = sb_candidate()
    asym = replace(cand, scopes=((("wg"), frozenset({(2, 4)})),))
    assert "not symmetric" in str(validate_candidate(asym))
    # Relates one event of thread 0 to thread 1 but not its sibling (3).
    partial = replace(cand, scopes=(("wg", frozenset({(2, 4), (4, 2)})),))
    assert "whole threads" in str(validate_candidate(partial))
    threads0 = {2, 3}
    threads1 = {4, 5}
    full = frozenset((a, b) for a in threads0 | threads1 for b in threads0 | threads1)
    ok = replace(cand, scopes=(("wg", full),))
    assert validate_candidate(ok).ok


def test_validation_is_pure_and_idempotent():
    cand = sb_candidate()
    bad = replace(cand, rf=frozenset({(1, 3)}))
    first = validate_candidate(bad)
    second = validate_candidate(bad)
    assert first == second


# -- derived relations ---------------------------------------------------


def test_derived_int_ext_two_events_same_thread():
    events = (
        Event(0, EventKind.WRITE, 0, 0, "x", 1),
        Event(1, EventKind.READ, 0, 1, "x", 1),
    )
    cand = CandidateExecution(events, po=frozenset({(0, 1)}),
                              rf=frozenset({(0, 1)}))
    derived = compute_derived(cand)
    assert derived["int"] == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert derived["ext"] == frozenset()


def test_derived_loc_is_symmetric():
    cand = sb_candidate()
    derived = compute_derived(cand)
    assert (2, 5) in derived["loc"] and (5, 2) in derived["loc"]
    assert all((b, a) in derived["loc"] for a, b in derived["loc"])


def test_derived_id_is_diagonal():
    cand = sb_candidate()
    derived = compute_derived(cand)
    assert derived["id"] == {(e.id, e.id) for e in cand.events}
    assert len(derived["id"]) == len(cand.events)


def test_initial_writes_are_external_to_program_events():
    cand = sb_candidate()
    derived = compute_derived(cand)
    for init in (0, 1):
        for prog in (2, 3, 4, 5):
            assert (init, prog) in derived["ext"]
    # The two initial writes share the reserved pseudo-thread.
    assert (0, 1) in derived["int"]


def test_ext_is_complement_of_int():
    cand = sb_candidate()
    derived = compute_derived(cand)
    ids = cand.event_ids
    everything = {(a, b) for a in ids for b in ids}
    assert derived["ext"] == frozenset(everything) - derived["int"]


def test_read_values_match_their_sources():
    cand = sb_candidate(r0_from=4, r1_from=2)
    assert validate_candidate(cand).ok
    by_id = cand.events_by_id
    for w, r in cand.rf:
        assert by_id[w].value == by_id[r].value
