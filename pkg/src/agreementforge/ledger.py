"""Append-only, hash-chained, replayable agreement ledger.

Every state transition is a command appended as one JSON line::

    {"seq": N, "ts": RFC3339-UTC, "payload": {...}, "prev": hex, "hash": hex}

``hash = SHA-256(prev || decimal seq || ts || canonical payload bytes)``
where the canonical payload is JSON with lexicographically sorted keys, no
insignificant whitespace, UTF-8.  Record 1 links to 64 zero hex digits.
All state (and the exported A-Box) derives from replaying the log, so two
replays of the same log are digest-identical.

Commands are validated against the current state before anything is
persisted: ride capacity (reserved seats of non-cancelled bookings never
exceed the allocation) and the per-booking event state machine
(started -> completed; cancellation/no-show only before the start;
delays only until completion or a terminal event).
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from agreementforge.contracts import (
    Price,
    SmartContract,
    SmartContractInstance,
    contracts_in_graph,
    graph_to_contract,
    instantiate,
)
from agreementforge.engine import IssueVoucher, Obligation
from agreementforge.errors import (
    ChainIntegrityError,
    LedgerError,
    StructuralError,
    ValidationError,
)
from agreementforge.rdf import (
    AG,
    OASIS,
    OSDM,
    R2R,
    RDF,
    RDFS,
    TMORG,
    XSD,
    Graph,
    Iri,
    Literal,
    Triple,
    parse_turtle,
    serialize_turtle,
)
from agreementforge.vocabulary import CROWD_TSP, build_tbox, event_concepts, top_ancestor, _vocab_prefixes

GENESIS_HASH = "0" * 64

_RFC3339 = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d{1,6})?Z$")

STATUS_ACTIVE = "active"
STATUS_STARTED = "started"
STATUS_COMPLETED = "completed"
STATUS_CANCELLED = "cancelled"


def validate_timestamp(ts: str) -> str:
    if not _RFC3339.match(ts):
        raise ValidationError(f"timestamp must be RFC 3339 UTC ('...Z'), got {ts!r}")
    datetime.fromisoformat(ts[:-1])  # raises on impossible dates
    return ts


def _iri(value: str) -> str:
    return Iri(value).value  # raises TermError when not absolute


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RegisterContract:
    turtle: str


@dataclass(frozen=True)
class CreateInstance:
    contract: str
    bindings: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class RecordRide:
    ride: str
    driver: str
    allocated_seats: int


@dataclass(frozen=True)
class RecordBooking:
    booking: str
    passenger: str
    offer_item: str
    price: Price
    leg: str
    origin: str
    destination: str
    reservation: str
    ride: str
    trip: str
    other_episodes: tuple[tuple[str, bool], ...] = ()
    reserved_seats: int = 1


@dataclass(frozen=True)
class RecordEvent:
    booking: str
    concept: str


@dataclass(frozen=True)
class RecordObligation:
    obligation: Obligation


Command = RegisterContract | CreateInstance | RecordRide | RecordBooking | RecordEvent | RecordObligation


def command_to_json(cmd: Command) -> dict:
    if isinstance(cmd, RegisterContract):
        return {"type": "register_contract", "turtle": cmd.turtle}
    if isinstance(cmd, CreateInstance):
        return {"type": "create_instance", "contract": cmd.contract, "bindings": dict(cmd.bindings)}
    if isinstance(cmd, RecordRide):
        return {
            "type": "record_ride",
            "ride": cmd.ride,
            "driver": cmd.driver,
            "allocated_seats": cmd.allocated_seats,
        }
    if isinstance(cmd, RecordBooking):
        return {
            "type": "record_booking",
            "booking": cmd.booking,
            "passenger": cmd.passenger,
            "offer_item": cmd.offer_item,
            "amount_minor": cmd.price.amount_minor,
            "currency": cmd.price.currency,
            "leg": cmd.leg,
            "origin": cmd.origin,
            "destination": cmd.destination,
            "reservation": cmd.reservation,
            "ride": cmd.ride,
            "trip": cmd.trip,
            "other_episodes": [{"iri": iri, "ridesharing": flag} for iri, flag in cmd.other_episodes],
            "reserved_seats": cmd.reserved_seats,
        }
    if isinstance(cmd, RecordEvent):
        return {"type": "record_event", "booking": cmd.booking, "concept": cmd.concept}
    if isinstance(cmd, RecordObligation):
        return {"type": "record_obligation", "obligation": cmd.obligation.to_json()}
    raise ValidationError(f"unknown command {cmd!r}")


def command_from_json(payload: dict) -> Command:
    kind = payload.get("type")
    if kind == "register_contract":
        return RegisterContract(payload["turtle"])
    if kind == "create_instance":
        return CreateInstance(payload["contract"], tuple(sorted(payload["bindings"].items())))
    if kind == "record_ride":
        return RecordRide(payload["ride"], payload["driver"], payload["allocated_seats"])
    if kind == "record_booking":
        return RecordBooking(
            booking=payload["booking"],
            passenger=payload["passenger"],
            offer_item=payload["offer_item"],
            price=Price(payload["amount_minor"], payload["currency"]),
            leg=payload["leg"],
            origin=payload["origin"],
            destination=payload["destination"],
            reservation=payload["reservation"],
            ride=payload["ride"],
            trip=payload["trip"],
            other_episodes=tuple((e["iri"], e["ridesharing"]) for e in payload["other_episodes"]),
            reserved_seats=payload["reserved_seats"],
        )
    if kind == "record_event":
        return RecordEvent(payload["booking"], payload["concept"])
    if kind == "record_obligation":
        return RecordObligation(Obligation.from_json(payload["obligation"]))
    raise ValidationError(f"unknown command type {kind!r}")


def canonical_payload(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


# --------------------------------------------------------------------------
# Records and the chain
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LedgerRecord:
    seq: int
    ts: str
    payload: dict
    prev: str
    hash: str

    def to_line(self) -> str:
        return (
            f'{{"seq":{self.seq},"ts":{json.dumps(self.ts)},'
            f'"payload":{canonical_payload(self.payload)},'
            f'"prev":"{self.prev}","hash":"{self.hash}"}}'
        )


def record_hash(prev: str, seq: int, ts: str, payload: dict) -> str:
    material = prev + str(seq) + ts + canonical_payload(payload)
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


def make_record(seq: int, ts: str, payload: dict, prev: str) -> LedgerRecord:
    return LedgerRecord(seq, ts, payload, prev, record_hash(prev, seq, ts, payload))


def verify_chain(records: list[LedgerRecord]) -> int | None:
    """None when the chain is intact, else the first offending seq."""
    prev = GENESIS_HASH
    for position, rec in enumerate(records, start=1):
        if rec.seq != position or rec.prev != prev:
            return position
        if record_hash(rec.prev, rec.seq, rec.ts, rec.payload) != rec.hash:
            return position
        prev = rec.hash
    return None


def verify_file(path: Path) -> int | None:
    """Chain verification straight off the log file; malformed lines fail
    at their own position."""
    prev = GENESIS_HASH
    position = 0
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for line in fh:
            if not line.strip():
                continue
            position += 1
            try:
                raw = json.loads(line)
                rec = LedgerRecord(raw["seq"], raw["ts"], raw["payload"], raw["prev"], raw["hash"])
            except (ValueError, KeyError, TypeError):
                return position
            if rec.seq != position or rec.prev != prev:
                return position
            if record_hash(rec.prev, rec.seq, rec.ts, rec.payload) != rec.hash:
                return position
            prev = rec.hash
    return None


# --------------------------------------------------------------------------
# State
# --------------------------------------------------------------------------


@dataclass
class RideRecord:
    driver: str
    allocated_seats: int


@dataclass
class BookingRecord:
    passenger: str
    offer_item: str
    price: Price
    leg: str
    origin: str
    destination: str
    reservation: str
    ride: str
    trip: str
    other_episodes: tuple[tuple[str, bool], ...]
    reserved_seats: int
    status: str = STATUS_ACTIVE


@dataclass
class LedgerState:
    contracts: dict[str, SmartContract] = field(default_factory=dict)
    contract_graphs: dict[str, Graph] = field(default_factory=dict)
    instances: dict[str, SmartContractInstance] = field(default_factory=dict)
    rides: dict[str, RideRecord] = field(default_factory=dict)
    bookings: dict[str, BookingRecord] = field(default_factory=dict)
    events: list[tuple[str, str, int]] = field(default_factory=list)
    obligations: list[Obligation] = field(default_factory=list)
    last_seq: int = 0

    def reserved_on(self, ride: str) -> int:
        return sum(
            b.reserved_seats for b in self.bookings.values() if b.ride == ride and b.status != STATUS_CANCELLED
        )

    def export_abox(self) -> Graph:
        return export_abox(self)


def _event_kind(concept: str) -> str:
    top = top_ancestor(concept)
    return top.rsplit("#", 1)[-1]


def _admissible(status: str, kind: str) -> str | None:
    """New booking status for an event kind, or None when inadmissible."""
    if kind == "RidesharingStarted":
        return STATUS_STARTED if status == STATUS_ACTIVE else None
    if kind == "RidesharingCompleted":
        return STATUS_COMPLETED if status == STATUS_STARTED else None
    if kind in ("RidesharingCancelled", "RidesharingNoShow"):
        return STATUS_CANCELLED if status == STATUS_ACTIVE else None
    if kind == "RidesharingDelayed":
        return status if status in (STATUS_ACTIVE, STATUS_STARTED) else None
    return None


def _validate(state: LedgerState, cmd: Command, ts: str) -> None:
    if isinstance(cmd, RegisterContract):
        graph = parse_turtle(cmd.turtle)
        ids = contracts_in_graph(graph)
        if not ids:
            raise StructuralError("register_contract: no smart contract found in document")
        for cid in ids:
            graph_to_contract(graph, cid)
            if cid.value in state.contracts:
                raise LedgerError(f"contract {cid.value} already registered", code="DUPLICATE")
    elif isinstance(cmd, CreateInstance):
        contract = state.contracts.get(_iri(cmd.contract))
        if contract is None:
            raise LedgerError(f"unknown contract {cmd.contract}", code="UNKNOWN_REF")
        instance = instantiate(contract, dict(cmd.bindings), export_abox(state).union(build_tbox()), ts)
        if instance.id.value in state.instances:
            raise LedgerError(f"instance {instance.id.value} already exists", code="DUPLICATE")
    elif isinstance(cmd, RecordRide):
        _iri(cmd.ride)
        _iri(cmd.driver)
        if cmd.allocated_seats < 1:
            raise ValidationError("allocated_seats must be >= 1")
        if cmd.ride in state.rides:
            raise LedgerError(f"ride {cmd.ride} already recorded", code="DUPLICATE")
    elif isinstance(cmd, RecordBooking):
        for value in (cmd.booking, cmd.passenger, cmd.offer_item, cmd.leg, cmd.reservation, cmd.ride, cmd.trip):
            _iri(value)
        for iri, _ in cmd.other_episodes:
            _iri(iri)
        if cmd.reserved_seats < 1:
            raise ValidationError("reserved_seats must be >= 1")
        if cmd.booking in state.bookings:
            raise LedgerError(f"booking {cmd.booking} already recorded", code="DUPLICATE")
        ride = state.rides.get(cmd.ride)
        if ride is None:
            raise LedgerError(f"unknown ride {cmd.ride}", code="UNKNOWN_REF")
        if state.reserved_on(cmd.ride) + cmd.reserved_seats > ride.allocated_seats:
            raise LedgerError(
                f"ride {cmd.ride} has {ride.allocated_seats} seats, "
                f"{state.reserved_on(cmd.ride)} already reserved",
                code="CAPACITY",
            )
    elif isinstance(cmd, RecordEvent):
        booking = state.bookings.get(cmd.booking)
        if booking is None:
            raise LedgerError(f"unknown booking {cmd.booking}", code="UNKNOWN_REF")
        if cmd.concept not in event_concepts():
            raise LedgerError(f"unknown event concept {cmd.concept}", code="UNKNOWN_REF")
        if _admissible(booking.status, _event_kind(cmd.concept)) is None:
            raise LedgerError(
                f"event {cmd.concept} not admissible for booking {cmd.booking} "
                f"in status {booking.status}",
                code="EVENT_ORDER",
            )
    elif isinstance(cmd, RecordObligation):
        key = cmd.obligation.firing_key
        if any(o.firing_key == key for o in state.obligations):
            raise LedgerError(f"obligation with firing key {key} already recorded", code="DUPLICATE")
    else:
        raise ValidationError(f"unknown command {cmd!r}")


def _mutate(state: LedgerState, cmd: Command, seq: int, ts: str) -> None:
    if isinstance(cmd, RegisterContract):
        graph = parse_turtle(cmd.turtle)
        for cid in contracts_in_graph(graph):
            state.contracts[cid.value] = graph_to_contract(graph, cid)
            state.contract_graphs[cid.value] = graph
    elif isinstance(cmd, CreateInstance):
        contract = state.contracts[_iri(cmd.contract)]
        instance = instantiate(contract, dict(cmd.bindings), export_abox(state).union(build_tbox()), ts)
        state.instances[instance.id.value] = instance
    elif isinstance(cmd, RecordRide):
        state.rides[cmd.ride] = RideRecord(cmd.driver, cmd.allocated_seats)
    elif isinstance(cmd, RecordBooking):
        state.bookings[cmd.booking] = BookingRecord(
            passenger=cmd.passenger,
            offer_item=cmd.offer_item,
            price=cmd.price,
            leg=cmd.leg,
            origin=cmd.origin,
            destination=cmd.destination,
            reservation=cmd.reservation,
            ride=cmd.ride,
            trip=cmd.trip,
            other_episodes=cmd.other_episodes,
            reserved_seats=cmd.reserved_seats,
        )
    elif isinstance(cmd, RecordEvent):
        booking = state.bookings[cmd.booking]
        booking.status = _admissible(booking.status, _event_kind(cmd.concept))
        state.events.append((cmd.booking, cmd.concept, seq))
    elif isinstance(cmd, RecordObligation):
        state.obligations.append(cmd.obligation)
    state.last_seq = seq


def replay(records: list[LedgerRecord]) -> LedgerState:
    """Rebuild state from scratch; refuses tampered logs."""
    bad = verify_chain(records)
    if bad is not None:
        raise ChainIntegrityError(bad)
    state = LedgerState()
    for rec in records:
        cmd = command_from_json(rec.payload)
        _validate(state, cmd, rec.ts)
        _mutate(state, cmd, rec.seq, rec.ts)
    return state


# --------------------------------------------------------------------------
# The ledger handle
# --------------------------------------------------------------------------


class Ledger:
    """Single-writer command log, optionally persisted as JSON lines."""

    def __init__(self, path: Path | str | None = None):
        self.path = Path(path) if path is not None else None
        self.records: list[LedgerRecord] = []
        self.state = LedgerState()

    @classmethod
    def load(cls, path: Path | str) -> "Ledger":
        ledger = cls(path)
        path = Path(path)
        if path.exists():
            with open(path, "r", encoding="utf-8") as fh:
                for lineno, line in enumerate((l for l in fh if l.strip()), start=1):
                    try:
                        raw = json.loads(line)
                        rec = LedgerRecord(raw["seq"], raw["ts"], raw["payload"], raw["prev"], raw["hash"])
                    except (ValueError, KeyError, TypeError) as exc:
                        raise ChainIntegrityError(lineno) from exc
                    ledger.records.append(rec)
            ledger.state = replay(ledger.records)
        return ledger

    def append(self, cmd: Command, now: str) -> LedgerRecord:
        ts = validate_timestamp(now)
        _validate(self.state, cmd, ts)
        seq = self.state.last_seq + 1
        prev = self.records[-1].hash if self.records else GENESIS_HASH
        record = make_record(seq, ts, command_to_json(cmd), prev)
        _mutate(self.state, cmd, seq, ts)
        self.records.append(record)
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(record.to_line() + "\n")
        return record

    def verify(self) -> int | None:
        return verify_chain(self.records)

    def replay(self) -> LedgerState:
        return replay(self.records)


# --------------------------------------------------------------------------
# A-Box export
# --------------------------------------------------------------------------

_NNI = XSD.nonNegativeInteger.value
_INT = XSD.integer.value
_DT = XSD.dateTime.value


def export_abox(state: LedgerState) -> Graph:
    """Everything the ledger knows, as one queryable graph: registered
    contract structures, instances, rides, bookings, recorded events and
    issued vouchers."""
    g = Graph(prefixes=_vocab_prefixes())
    g.add(Triple(CROWD_TSP, RDF.type, TMORG.Operator))
    g.add(Triple(CROWD_TSP, RDFS.label, Literal("Crowd-based Travel Service Provider")))

    for cid in sorted(state.contract_graphs):
        g = g.union(state.contract_graphs[cid])

    for iri in sorted(state.instances):
        instance = state.instances[iri]
        node = Iri(iri)
        g.add(Triple(node, RDF.type, OASIS.SmartContractInstance))
        g.add(Triple(node, OASIS.instanceOf, Iri(instance.contract.value)))
        g.add(Triple(node, OASIS.createdAt, Literal(instance.created_at, _DT)))
        for name, value in instance.bindings:
            bnode = Iri(f"{iri}-binding-{name}")
            g.add(Triple(node, OASIS.hasEntryBinding, bnode))
            g.add(Triple(bnode, RDF.type, OASIS.EntryBinding))
            g.add(Triple(bnode, OASIS.entryRef, Literal(name)))
            g.add(Triple(bnode, OASIS.refersExactlyTo, value))

    for ride_iri in sorted(state.rides):
        ride = state.rides[ride_iri]
        node = Iri(ride_iri)
        driver = Iri(ride.driver)
        allocation = Iri(f"{ride_iri}-allocation")
        g.add(Triple(node, RDF.type, R2R.Ride))
        g.add(Triple(node, R2R.operatedBy, driver))
        g.add(Triple(driver, RDF.type, R2R.Driver))
        g.add(Triple(node, R2R.hasInventoryAllocation, allocation))
        g.add(Triple(allocation, RDF.type, R2R.InventoryAllocation))
        g.add(Triple(allocation, R2R.consumable, R2R.Seat))
        g.add(Triple(allocation, R2R.quantity, Literal(str(ride.allocated_seats), _NNI)))

    for booking_iri in sorted(state.bookings):
        b = state.bookings[booking_iri]
        booking = Iri(booking_iri)
        passenger = Iri(b.passenger)
        item = Iri(b.offer_item)
        price = Iri(f"{b.offer_item}-price")
        leg = Iri(b.leg)
        reservation = Iri(b.reservation)
        trip = Iri(b.trip)
        g.add(Triple(booking, RDF.type, R2R.RidesharingBooking))
        g.add(Triple(booking, R2R.bookedBy, passenger))
        g.add(Triple(passenger, RDF.type, OSDM.Passenger))
        g.add(Triple(booking, R2R.hasOfferItem, item))
        g.add(Triple(item, RDF.type, R2R.OfferItem))
        g.add(Triple(item, R2R.hasPrice, price))
        g.add(Triple(price, RDF.type, OSDM.Price))
        g.add(Triple(price, AG.amountMinor, Literal(str(b.price.amount_minor), _INT)))
        g.add(Triple(price, AG.currency, Literal(b.price.currency)))
        g.add(Triple(item, R2R.forTravelEpisode, leg))
        g.add(Triple(leg, RDF.type, R2R.RidesharingLeg))
        g.add(Triple(leg, R2R.origin, Literal(b.origin)))
        g.add(Triple(leg, R2R.destination, Literal(b.destination)))
        g.add(Triple(leg, R2R.hasTransportationService, Iri(b.ride)))
        g.add(Triple(item, R2R.includesReservation, reservation))
        g.add(Triple(reservation, RDF.type, R2R.InventoryReservation))
        g.add(Triple(reservation, R2R.consumable, R2R.Seat))
        g.add(Triple(reservation, R2R.quantity, Literal(str(b.reserved_seats), _NNI)))
        g.add(Triple(trip, RDF.type, OSDM.Trip))
        g.add(Triple(trip, R2R.includesTravelEpisode, leg))
        for episode_iri, ridesharing in b.other_episodes:
            episode = Iri(episode_iri)
            g.add(Triple(trip, R2R.includesTravelEpisode, episode))
            g.add(Triple(episode, RDF.type, R2R.RidesharingLeg if ridesharing else R2R.TravelEpisode))

    for booking_iri, concept, _seq in state.events:
        g.add(Triple(Iri(booking_iri), R2R.relatesToEvent, Iri(concept)))

    for obligation in state.obligations:
        action = obligation.action
        if not isinstance(action, IssueVoucher):
            continue  # pay/refund duties have no vocabulary terms; they stay ledger-only
        voucher = AG(f"voucher-{obligation.firing_key[:16]}")
        voucher_class = (
            R2R.DiscountVoucher if action.voucher_kind.value == "discount" else R2R.SeatUpgradeVoucher
        )
        g.add(Triple(voucher, RDF.type, voucher_class))
        g.add(Triple(voucher, R2R.issuedBy, Iri(action.issuer)))
        g.add(Triple(voucher, AG.beneficiary, Iri(action.beneficiary)))
        if action.percentage is not None:
            g.add(Triple(voucher, R2R.discountPercentage, Literal(format(action.percentage, "f"), XSD.decimal.value)))
    return g


def state_digest(state: LedgerState) -> str:
    """SHA-256 of the canonical Turtle serialization of the exported A-Box."""
    return hashlib.sha256(serialize_turtle(export_abox(state)).encode("utf-8")).hexdigest()
