from __future__ import annotations

import random

import pytest

from catex import relalg
from catex.errors import FixpointError, RelalgError
from catex.execution import Event, EventKind

import oracles

from conftest import sb_candidate


def rel(*pairs):
    return frozenset(pairs)


def ids(*xs):
    return frozenset(xs)


def random_rel(rng, n, density=0.3):
    return frozenset((a, b) for a in range(n) for b in range(n)
                     if rng.random() < density)


# -- operator basics -------------------------------------------------------


def test_seq_single_chain():
    assert relalg.seq(rel((1, 2)), rel((2, 3))) == rel((1, 3))


def test_cart():
    assert relalg.cart(ids(1), ids(2, 3)) == rel((1, 2), (1, 3))


def test_diff():
    assert relalg.diff(rel((1, 2), (2, 3)), rel((2, 3))) == rel((1, 2))


def test_tclosure_three_chain():
    assert relalg.tclosure(rel((1, 2), (2, 3))) == rel((1, 2), (2, 3), (1, 3))


def test_inverse():
    assert relalg.inverse(rel((1, 2))) == rel((2, 1))


def test_complement_of_empty():
    assert relalg.complement(frozenset(), ids(1, 2)) == \
        rel((1, 1), (1, 2), (2, 1), (2, 2))


def test_identity_on():
    assert relalg.identity_on(ids(1, 2)) == rel((1, 1), (2, 2))
    assert relalg.identity_on(frozenset()) == frozenset()


def test_identity_on_sb_writes():
    cand = sb_candidate()
    writes = cand.kind_set(EventKind.WRITE)
    assert len(relalg.identity_on(writes)) == 4


def test_domain_range():
    assert relalg.rel_domain(rel((1, 2), (1, 3))) == ids(1)
    assert relalg.rel_range(frozenset()) == frozenset()


def test_range_of_sb_rf_is_the_reads():
    cand = sb_candidate()
    assert relalg.rel_range(cand.rf) == cand.kind_set(EventKind.READ)


# -- checks ---------------------------------------------------------------


def test_acyclic_two_cycle():
    assert not relalg.is_acyclic(rel((1, 2), (2, 1)))


def test_irreflexive():
    assert relalg.is_irreflexive(rel((1, 2)))
    assert not relalg.is_irreflexive(rel((1, 1)))


def test_sb_weak_candidate_has_global_cycle():
    # po | rf | co | fr on the SB candidate reading both initial writes.
    cand = sb_candidate()
    co = rel((0, 2), (1, 4))
    fr = relalg.seq(relalg.inverse(cand.rf), co)
    assert fr == rel((3, 4), (5, 2))
    union = cand.po | cand.rf | co | fr
    assert not relalg.is_acyclic(union)
    # The reads-from-elsewhere variant is acyclic.
    strong = sb_candidate(r0_from=4, r1_from=2)
    fr2 = relalg.seq(relalg.inverse(strong.rf), co)
    assert relalg.is_acyclic(strong.po | strong.rf | co | fr2)


def test_empty():
    assert relalg.is_empty(frozenset())
    assert not relalg.is_empty(ids(1))


# -- fixpoints --------------------------------------------------------------


def test_lfp_transitive_closure_equivalence():
    s = rel((1, 2), (2, 3))
    defs = [("r", lambda env: s | relalg.seq(env["r"], s))]
    solution, rounds = relalg.lfp(defs, n_events=3)
    assert solution["r"] == relalg.tclosure(s)
    assert rounds <= 9


def test_lfp_of_identity_is_empty():
    defs = [("r", lambda env: env["r"])]
    solution, _ = relalg.lfp(defs, n_events=4)
    assert solution["r"] == frozenset()


def test_lfp_mutual_recursion_without_base_is_empty():
    defs = [("a", lambda env: env["b"]), ("b", lambda env: env["a"])]
    solution, _ = relalg.lfp(defs, n_events=4)
    assert solution["a"] == solution["b"] == frozenset()


def test_lfp_divergence_detected():
    universe = ids(0, 1)
    flip = [("r", lambda env: relalg.complement(env["r"], universe))]
    with pytest.raises(FixpointError, match="did not converge"):
        relalg.lfp(flip, n_events=2)


# -- linearisations / cross / partition --------------------------------------


def test_linearisations_antichain():
    assert len(relalg.linearisations(ids(1, 2, 3), frozenset())) == 6


def test_linearisations_one_constraint():
    result = relalg.linearisations(ids(1, 2, 3), rel((1, 2)))
    assert len(result) == 3
    assert result == tuple(sorted(
        oracles.perm_linear_extensions(ids(1, 2, 3), rel((1, 2))),
        key=sorted))


def test_linearisations_cyclic_constraint_is_empty():
    assert relalg.linearisations(ids(1, 2), rel((1, 2), (2, 1))) == ()


def test_linearisations_ignores_outside_pairs():
    result = relalg.linearisations(ids(1, 2), rel((1, 2), (5, 6), (2, 9)))
    assert result == (rel((1, 2)),)


def test_cross_choices():
    r1, r2, r3 = rel((1, 2)), rel((3, 4)), rel((5, 6))
    assert set(relalg.cross([[r1], [r2, r3]])) == {r1 | r2, r1 | r3}


def test_cross_empty_product_is_unit():
    assert relalg.cross([]) == (frozenset(),)


def test_cross_with_empty_factor_is_empty():
    assert relalg.cross([[], [rel((1, 2))]]) == ()


def sb_events_by_id():
    return sb_candidate().events_by_id


def test_partition_groups_by_location():
    by_id = sb_events_by_id()
    groups = relalg.partition_by_location(ids(0, 1, 2, 4), by_id)
    assert groups == (ids(0, 2), ids(1, 4))  # x before y


def test_partition_empty():
    assert relalg.partition_by_location(frozenset(), {}) == ()


def test_partition_rejects_unlocated_events():
    by_id = {7: Event(7, EventKind.FENCE, 0, 0)}
    with pytest.raises(RelalgError, match="event without location.*7"):
        relalg.partition_by_location(ids(7), by_id)


def test_fence_relation_single_fence():
    po = rel((1, 2), (2, 3), (1, 3))
    assert relalg.fence_relation(po, ids(2)) == rel((1, 3))
    assert relalg.fence_relation(po, frozenset()) == frozenset()


def test_fence_relation_mp_fence():
    # MP with a fence between the two writes of P0.
    from catex import parse_litmus, elaborate_events
    from conftest import LITMUS

    test = parse_litmus((LITMUS / "mp-fence.litmus").read_text())
    elab = elaborate_events(test)
    fences = frozenset(e.id for e in elab.events if e.kind == EventKind.FENCE)
    writes = {(e.loc, e.value): e.id for e in elab.events
              if e.kind == EventKind.WRITE and not e.initial}
    assert relalg.fence_relation(elab.po, fences) == \
        rel((writes[("x", 1)], writes[("y", 1)]))


# -- randomized oracle properties ---------------------------------------------


def test_closure_and_checks_against_brute_force():
    rng = random.Random(1337)
    for _ in range(300):
        n = rng.randint(0, 6)
        r = random_rel(rng, n)
        assert relalg.tclosure(r) == oracles.brute_tclosure(r)
        assert relalg.is_acyclic(r) == oracles.brute_acyclic(r)
        assert relalg.is_irreflexive(relalg.tclosure(r)) == relalg.is_acyclic(r)


def test_seq_inverse_complement_against_brute_force():
    rng = random.Random(99)
    universe = frozenset(range(5))
    for _ in range(200):
        a = random_rel(rng, 5)
        b = random_rel(rng, 5)
        assert relalg.seq(a, b) == oracles.brute_seq(a, b)
        assert relalg.inverse(a) == oracles.brute_inverse(a)
        assert relalg.complement(a, universe) == oracles.brute_complement(a, universe)


def test_algebraic_laws():
    rng = random.Random(7)
    for _ in range(100):
        a, b, c = (random_rel(rng, 5) for _ in range(3))
        assert relalg.seq(relalg.seq(a, b), c) == relalg.seq(a, relalg.seq(b, c))
        assert relalg.union(a, b) == relalg.union(b, a)
        assert relalg.inter(a, b) == relalg.inter(b, a)
        assert relalg.union(a, a) == a
        assert relalg.inter(a, a) == a
        assert relalg.union(relalg.union(a, b), c) == relalg.union(a, relalg.union(b, c))


def test_lfp_round_bound_on_monotone_systems():
    rng = random.Random(2024)
    for _ in range(50):
        n = rng.randint(1, 6)
        s = random_rel(rng, n)
        defs = [("r", lambda env, s=s: s | relalg.seq(env["r"], s))]
        solution, rounds = relalg.lfp(defs, n_events=n)
        assert solution["r"] == relalg.tclosure(s)
        assert rounds <= n * n


def test_linearisation_counts_match_permutation_brute_force():
    rng = random.Random(5)
    universe = [0, 1, 2, 3]
    for _ in range(150):
        k = rng.randint(0, 4)
        s = frozenset(rng.sample(universe, k))
        r = random_rel(rng, 4, density=0.25)
        got = relalg.linearisations(s, r)
        want = oracles.perm_linear_extensions(s, r)
        assert set(got) == want
        assert len(got) == len(want)


def test_cross_cardinality_bound():
    rng = random.Random(11)
    for _ in range(100):
        colls = []
        for _ in range(rng.randint(0, 3)):
            colls.append([random_rel(rng, 3) for _ in range(rng.randint(0, 3))])
        got = relalg.cross(colls)
        bound = 1
        for coll in colls:
            bound *= len(coll)
        assert len(got) <= bound
        combos = [frozenset()] if not colls else None
        if all(colls):
            import itertools
            unions = [frozenset().union(*combo)
                      for combo in itertools.product(*colls)]
            assert len(got) == len(set(unions))
            if len(set(unions)) == len(unions):
                assert len(got) == bound


def test_collection_results_are_deterministic():
    rng = random.Random(3)
    s = frozenset(range(4))
    r = random_rel(rng, 4, density=0.2)
    assert relalg.linearisations(s, r) == relalg.linearisations(s, r)
    colls = [[random_rel(rng, 3) for _ in range(2)] for _ in range(2)]
    assert relalg.cross(colls) == relalg.cross(colls)
