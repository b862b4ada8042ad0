"""Shared fixtures: a seeded demo ledger and small fixture builders."""

from __future__ import annotations

import pytest

from agreementforge.demo import Clock, seed_demo
from agreementforge.ledger import Ledger, RecordObligation
from agreementforge.engine import build_kb, evaluate


@pytest.fixture
def demo_ledger() -> Ledger:
    ledger = Ledger()
    seed_demo(ledger)
    return ledger


@pytest.fixture
def demo_state(demo_ledger):
    return demo_ledger.state


@pytest.fixture
def demo_abox(demo_state):
    return demo_state.export_abox()


def evaluate_and_persist(ledger: Ledger, clock: Clock) -> list:
    """One evaluation round: emit, persist, return the new obligations."""
    kb = build_kb(ledger.state)
    obligations = evaluate(ledger.state.contracts.values(), kb)
    for obligation in obligations:
        ledger.append(RecordObligation(obligation), clock.next())
    return obligations
