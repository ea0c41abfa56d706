from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from catex import CandidateExecution, Event, EventKind, INIT_THREAD, load_model

REPO = Path(__file__).resolve().parent.parent
MODELS = REPO / "models"
LITMUS = REPO / "litmus"
DATA = Path(__file__).resolve().parent / "data"


def sb_candidate(r0_from: int = 1, r1_from: int = 0) -> CandidateExecution:
    """Hand-built store-buffering candidate.

    Events: 0/1 init writes of x/y, thread 0 runs `W x 1; R y`, thread 1
    runs `W y 1; R x`.  ``r0_from``/``r1_from`` pick the rf sources for the
    reads of y (event 3) and x (event 5); defaults read the initial writes.
    """
    values = {0: 0, 1: 0, 2: 1, 4: 1}
    events = (
        Event(0, EventKind.WRITE, INIT_THREAD, 0, "x", 0, initial=True),
        Event(1, EventKind.WRITE, INIT_THREAD, 0, "y", 0, initial=True),
        Event(2, EventKind.WRITE, 0, 0, "x", 1),
        Event(3, EventKind.READ, 0, 1, "y", values[r0_from]),
        Event(4, EventKind.WRITE, 1, 0, "y", 1),
        Event(5, EventKind.READ, 1, 1, "x", values[r1_from]),
    )
    return CandidateExecution(
        events,
        po=frozenset({(2, 3), (4, 5)}),
        rf=frozenset({(r0_from, 3), (r1_from, 5)}),
    )


@pytest.fixture
def sb_weak() -> CandidateExecution:
    return sb_candidate()


@pytest.fixture
def sc_model():
    return load_model(MODELS / "sc.cat")


@pytest.fixture
def coherence_model():
    return load_model(MODELS / "coherence.cat")
