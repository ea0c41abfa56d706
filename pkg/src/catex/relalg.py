"""Finite relational algebra over event ids.

Event sets are ``frozenset[int]`` and relations are ``frozenset`` of id
pairs.  Everything is materialized; all collection-returning operations
produce deterministically ordered tuples so downstream output is stable
across runs and processes.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Callable, Iterable, Sequence

from .errors import FixpointError, RelalgError
from .execution import Event, EventId, Pair, Rel

Ids = frozenset[EventId]

EMPTY_SET: Ids = frozenset()
EMPTY_REL: Rel = frozenset()


# -- binary operators ---------------------------------------------------

def union(a, b):
    return a | b


def inter(a, b):
    return a & b


def diff(a, b):
    return a - b


def seq(a: Rel, b: Rel) -> Rel:
    """Relational composition: pairs (x, z) with a step of ``a`` then ``b``."""
    succ: dict[EventId, set[EventId]] = defaultdict(set)
    for y, z in b:
        succ[y].add(z)
    return frozenset((x, z) for x, y in a for z in succ.get(y, ()))


def cart(s: Ids, t: Ids) -> Rel:
    return frozenset((x, y) for x in s for y in t)


# -- unary operators ----------------------------------------------------

def inverse(r: Rel) -> Rel:
    return frozenset((y, x) for x, y in r)


def complement(r: Rel, universe: Ids) -> Rel:
    return cart(universe, universe) - r


def identity_on(s: Ids) -> Rel:
    return frozenset((x, x) for x in s)


def tclosure(r: Rel) -> Rel:
    """Least transitive superset, computed as pairwise reachability."""
    succ: dict[EventId, set[EventId]] = defaultdict(set)
    for x, y in r:
        succ[x].add(y)
    out: set[Pair] = set()
    for x in list(succ):
        stack = list(succ[x])
        seen: set[EventId] = set()
        while stack:
            y = stack.pop()
            if y in seen:
                continue
            seen.add(y)
            out.add((x, y))
            stack.extend(succ.get(y, ()))
    return frozenset(out)


def rtclosure(r: Rel, universe: Ids) -> Rel:
    return tclosure(r) | identity_on(universe)


def optclosure(r: Rel, universe: Ids) -> Rel:
    return r | identity_on(universe)


# -- domain / range -----------------------------------------------------

def rel_domain(r: Rel) -> Ids:
    return frozenset(x for x, _ in r)


def rel_range(r: Rel) -> Ids:
    return frozenset(y for _, y in r)


# -- check predicates ---------------------------------------------------

def is_irreflexive(r: Rel) -> bool:
    return all(x != y for x, y in r)


def is_acyclic(r: Rel) -> bool:
    """Cycle detection by iterative three-color depth-first search."""
    succ: dict[EventId, list[EventId]] = defaultdict(list)
    nodes: set[EventId] = set()
    for x, y in r:
        succ[x].append(y)
        nodes.add(x)
        nodes.add(y)
    color: dict[EventId, int] = {}  # 1 = on stack, 2 = done
    for start in nodes:
        if color.get(start):
            continue
        stack: list[tuple[EventId, int]] = [(start, 0)]
        color[start] = 1
        while stack:
            node, i = stack.pop()
            kids = succ.get(node, [])
            if i < len(kids):
                stack.append((node, i + 1))
                kid = kids[i]
                c = color.get(kid, 0)
                if c == 1:
                    return False
                if c == 0:
                    color[kid] = 1
                    stack.append((kid, 0))
            else:
                color[node] = 2
    return True


def is_empty(x: Ids | Rel) -> bool:
    return not x


# -- least fixpoints ----------------------------------------------------

def lfp(defs: Sequence[tuple[str, Callable[[dict[str, Rel]], Rel]]],
        n_events: int,
        max_iter: int | None = None) -> tuple[dict[str, Rel], int]:
    """Kleene iteration for simultaneous recursive relation definitions.

    All names start at the empty relation and every body is re-evaluated
    against the previous round's assignment until nothing changes.  For
    monotone bodies this yields the least fixpoint; non-monotone systems
    that keep oscillating are reported via :class:`FixpointError` once the
    round budget (|events|^2 + 1 per bound name by default) is exhausted.

    Returns the stable assignment and the number of rounds that changed
    it (at most |events|^2 per name on monotone systems, by the lattice
    height bound).
    """
    if max_iter is None:
        max_iter = (n_events * n_events + 1) * max(len(defs), 1)
    cur: dict[str, Rel] = {name: EMPTY_REL for name, _ in defs}
    for rounds in range(max_iter):
        new = {name: body(cur) for name, body in defs}
        if new == cur:
            return cur, rounds
        cur = new
    raise FixpointError(
        f"fixpoint did not converge after {max_iter} rounds "
        "(recursive definition is likely not monotone)")


# -- order enumeration --------------------------------------------------

def _rel_sort_key(r: Rel) -> list[Pair]:
    return sorted(r)


def linearisations(s: Ids, r: Rel) -> tuple[Rel, ...]:
    """Every strict total order on ``s`` containing ``r`` restricted to ``s``.

    Empty when the restriction is cyclic.  Results are ordered
    lexicographically by their sorted pair lists.
    """
    members = sorted(s)
    preds: dict[EventId, set[EventId]] = {x: set() for x in members}
    for a, b in r:
        if a in preds and b in s:
            preds[b].add(a)

    orders: list[list[EventId]] = []

    def extend(remaining: frozenset[EventId], prefix: list[EventId]) -> None:
        if not remaining:
            orders.append(prefix)
            return
        for x in sorted(remaining):
            if preds[x] & remaining:
                continue
            extend(remaining - {x}, prefix + [x])

    extend(frozenset(members), [])
    rels = {frozenset((seq_[i], seq_[j])
                      for i in range(len(seq_)) for j in range(i + 1, len(seq_)))
            for seq_ in orders}
    return tuple(sorted(rels, key=_rel_sort_key))


def cross(collections: Sequence[Iterable[Rel]]) -> tuple[Rel, ...]:
    """All unions obtained by picking one relation from each collection.

    The empty product is the singleton holding the empty relation; any
    empty factor collapses the result to nothing.  Deduplicated and
    deterministically ordered.
    """
    combos: list[Rel] = [EMPTY_REL]
    for coll in collections:
        coll = list(coll)
        if not coll:
            return ()
        combos = [acc | extra for acc in combos for extra in coll]
    return tuple(sorted(set(combos), key=_rel_sort_key))


def partition_by_location(s: Ids, events_by_id: dict[EventId, Event]) -> tuple[Ids, ...]:
    """Group events by location, ordered by location symbol."""
    groups: dict[str, set[EventId]] = defaultdict(set)
    for x in sorted(s):
        e = events_by_id[x]
        if e.loc is None:
            raise RelalgError(f"event without location in partition: event {x}")
        groups[e.loc].add(x)
    return tuple(frozenset(groups[loc]) for loc in sorted(groups))


def fence_relation(po: Rel, fences: Ids) -> Rel:
    """Pairs separated by a fence: po ; [fences] ; po."""
    return seq(seq(po, identity_on(fences)), po)
