"""Deterministic demo scenario: two passengers, one driver, one ride with
three seats, and a multimodal trip for the first passenger.

Used by the CLI ``demo`` subcommand and by the test fixtures.  Timestamps
are derived from a fixed base so reruns are byte-identical.
"""

from __future__ import annotations

from datetime import datetime, timedelta

from agreementforge.contracts import (
    Price,
    booking_policy_contract,
    builtin_contracts,
)
from agreementforge.ledger import (
    CreateInstance,
    Ledger,
    RecordBooking,
    RecordEvent,
    RecordRide,
    RegisterContract,
)
from agreementforge.rdf import AG, RBE, serialize_turtle
from agreementforge.contracts import contract_to_graph

DEMO_BASE_TIME = "2024-05-01T08:00:00Z"

DRIVER = AG.d1
PASSENGER_1 = AG.p1
PASSENGER_2 = AG.p2
RIDE = AG.r1
BOOKING_1 = AG.b1
BOOKING_2 = AG.b2


class Clock:
    """Hands out RFC 3339 timestamps one second apart."""

    def __init__(self, start: str = DEMO_BASE_TIME):
        self._current = datetime.fromisoformat(start[:-1])

    def next(self) -> str:
        ts = self._current.isoformat() + "Z"
        self._current += timedelta(seconds=1)
        return ts


def seed_demo(ledger: Ledger, clock: Clock | None = None) -> int:
    """Append the demo scenario; returns the number of records written."""
    clock = clock or Clock()
    before = ledger.state.last_seq

    for contract in builtin_contracts() + [booking_policy_contract()]:
        turtle = serialize_turtle(contract_to_graph(contract))
        ledger.append(RegisterContract(turtle), clock.next())

    ledger.append(RecordRide(RIDE.value, DRIVER.value, allocated_seats=3), clock.next())

    ledger.append(
        RecordBooking(
            booking=BOOKING_1.value,
            passenger=PASSENGER_1.value,
            offer_item=AG("b1-item").value,
            price=Price(1500, "EUR"),
            leg=AG("b1-leg").value,
            origin="stop:A",
            destination="stop:B",
            reservation=AG("b1-reservation").value,
            ride=RIDE.value,
            trip=AG.t1.value,
            other_episodes=((AG("t1-rail").value, False),),
            reserved_seats=1,
        ),
        clock.next(),
    )
    ledger.append(
        RecordBooking(
            booking=BOOKING_2.value,
            passenger=PASSENGER_2.value,
            offer_item=AG("b2-item").value,
            price=Price(1200, "EUR"),
            leg=AG("b2-leg").value,
            origin="stop:A",
            destination="stop:B",
            reservation=AG("b2-reservation").value,
            ride=RIDE.value,
            trip=AG.t2.value,
            other_episodes=(),
            reserved_seats=1,
        ),
        clock.next(),
    )

    ledger.append(
        CreateInstance(
            AG.RidesharingBookingSmartContract.value,
            tuple(
                sorted(
                    {
                        "driver": DRIVER.value,
                        "passenger": PASSENGER_1.value,
                        "booking": BOOKING_1.value,
                        "offerItem": AG("b1-item").value,
                        "price": AG("b1-item-price").value,
                        "leg": AG("b1-leg").value,
                        "reservation": AG("b1-reservation").value,
                        "ride": RIDE.value,
                        "allocation": AG("r1-allocation").value,
                    }.items()
                )
            ),
        ),
        clock.next(),
    )

    ledger.append(RecordEvent(BOOKING_1.value, RBE.RidesharingStarted.value), clock.next())
    ledger.append(RecordEvent(BOOKING_1.value, RBE.RidesharingCompleted.value), clock.next())

    return ledger.state.last_seq - before
