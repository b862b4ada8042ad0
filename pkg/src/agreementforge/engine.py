"""Operational semantics for conditionals.

Bodies are matched against a knowledge-base snapshot, each distinct match
is identified by a firing key, and heads are discharged by emitting
obligations exactly once per key.

Operator semantics
------------------
``ag:isAssociatedWith(booking, concept)``
    Holds iff an event with that concept is recorded for the booking; a
    top-level concept also matches its narrower (broader-descendant)
    concepts.

``r2r:book(passenger, target-template)``
    With a ``r2r:Ride`` target: holds for ``(passenger, ride)`` pairs with
    a non-cancelled booking, its match is exposed under the synthetic
    binding name ``ride``; a second subject template carrying a
    distinct-from constraint demands a co-passenger on the same ride (the
    co-passenger itself is existential and never part of the match, so a
    passenger earns at most one match per shared ride).

    With an ``osdm:Offer`` target: holds once per non-cancelled booking
    whose trip satisfies the template's episode-class constraints (the
    booking is exposed under the synthetic name ``booking``).  A
    ``times = n`` operator argument aggregates instead: the match carries a
    repetition index k for every k with n*k <= count of such bookings.

Firing keys are SHA-256 over
``conditionalIRI "\\n" sorted name=IRI pairs joined by "\\n" "\\n" "k=" k``
and are stable across runs and processes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from decimal import Decimal
from typing import TYPE_CHECKING, Iterable, Mapping

from agreementforge.contracts import (
    Conditional,
    ConditionalAtom,
    EntryRef,
    EntryTemplate,
    Price,
    SmartContract,
    VoucherKind,
    extract_voucher_spec,
)
from agreementforge.errors import EvaluationError, UnsupportedOperatorError
from agreementforge.rdf import AG, OSDM, R2R, Graph, Iri
from agreementforge.vocabulary import event_parent

if TYPE_CHECKING:
    from agreementforge.ledger import LedgerState

#: Synthetic binding names used for existential matches.
RIDE_VAR = "ride"
BOOKING_VAR = "booking"

_STATUS_CANCELLED = "cancelled"


# --------------------------------------------------------------------------
# Knowledge base
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BookingView:
    passenger: str
    offer_item: str
    price: Price
    ride: str
    trip: str
    episodes: tuple[tuple[str, bool], ...]  # (episode IRI, is ridesharing leg)
    reserved_seats: int
    status: str

    @property
    def multimodal(self) -> bool:
        return any(r for _, r in self.episodes) and any(not r for _, r in self.episodes)


@dataclass(frozen=True)
class RideView:
    driver: str
    allocated_seats: int


@dataclass(frozen=True)
class KnowledgeBase:
    abox: Graph
    bookings: dict[str, BookingView]
    rides: dict[str, RideView]
    events: tuple[tuple[str, str, int], ...]  # (booking, concept, seq)
    firings: frozenset[str]
    seq: int = 0


def build_kb(state: "LedgerState") -> KnowledgeBase:
    """Project a replayed ledger state into the evaluation indices."""
    bookings = {}
    for iri, rec in state.bookings.items():
        episodes = ((rec.leg, True),) + tuple((e, flag) for e, flag in rec.other_episodes)
        bookings[iri] = BookingView(
            passenger=rec.passenger,
            offer_item=rec.offer_item,
            price=rec.price,
            ride=rec.ride,
            trip=rec.trip,
            episodes=episodes,
            reserved_seats=rec.reserved_seats,
            status=rec.status,
        )
    rides = {iri: RideView(rec.driver, rec.allocated_seats) for iri, rec in state.rides.items()}
    events = tuple((booking, concept, seq) for booking, concept, seq in state.events)
    firings = frozenset(o.firing_key for o in state.obligations)
    return KnowledgeBase(state.export_abox(), bookings, rides, events, firings, seq=state.last_seq)


# --------------------------------------------------------------------------
# Firing keys
# --------------------------------------------------------------------------


def binding_digest(conditional_id: str, bindings: Mapping[str, str], k: int = 0) -> str:
    """Stable hex digest identifying one distinct match of one conditional."""
    pairs = sorted(f"{name}={iri}" for name, iri in bindings.items())
    payload = conditional_id + "\n" + "\n".join(pairs) + "\n" + f"k={k}"
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# Obligations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IssueVoucher:
    voucher_kind: VoucherKind
    issuer: str
    beneficiary: str
    percentage: Decimal | None = None


@dataclass(frozen=True)
class Pay:
    price: Price
    payer: str
    payee: str


@dataclass(frozen=True)
class Refund:
    price: Price
    recipient: str


ObligationAction = IssueVoucher | Pay | Refund


@dataclass(frozen=True)
class Obligation:
    action: ObligationAction
    source_conditional: str
    firing_key: str
    created_at_seq: int

    def action_json(self) -> dict:
        a = self.action
        if isinstance(a, IssueVoucher):
            payload = {
                "type": "issue_voucher",
                "voucher_kind": a.voucher_kind.value,
                "issuer": a.issuer,
                "beneficiary": a.beneficiary,
            }
            if a.percentage is not None:
                payload["percentage"] = format(a.percentage, "f")
            return payload
        if isinstance(a, Pay):
            return {
                "type": "pay",
                "amount_minor": a.price.amount_minor,
                "currency": a.price.currency,
                "payer": a.payer,
                "payee": a.payee,
            }
        return {
            "type": "refund",
            "amount_minor": a.price.amount_minor,
            "currency": a.price.currency,
            "recipient": a.recipient,
        }

    def to_json(self) -> dict:
        return {
            "action": self.action_json(),
            "source_conditional": self.source_conditional,
            "firing_key": self.firing_key,
            "created_at_seq": self.created_at_seq,
        }

    @staticmethod
    def from_json(payload: dict) -> "Obligation":
        a = payload["action"]
        action: ObligationAction
        if a["type"] == "issue_voucher":
            pct = a.get("percentage")
            action = IssueVoucher(
                VoucherKind(a["voucher_kind"]),
                a["issuer"],
                a["beneficiary"],
                Decimal(pct) if pct is not None else None,
            )
        elif a["type"] == "pay":
            action = Pay(Price(a["amount_minor"], a["currency"]), a["payer"], a["payee"])
        elif a["type"] == "refund":
            action = Refund(Price(a["amount_minor"], a["currency"]), a["recipient"])
        else:
            raise EvaluationError(f"unknown obligation action type {a['type']!r}")
        return Obligation(action, payload["source_conditional"], payload["firing_key"], payload["created_at_seq"])


# --------------------------------------------------------------------------
# Body matching
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Match:
    bindings: tuple[tuple[str, str], ...]  # sorted (name, IRI) pairs
    k: int = 0

    def binding_map(self) -> dict[str, str]:
        return dict(self.bindings)


def _event_matches(event_concept: str, atom_concept: str) -> bool:
    parents = event_parent()
    current = event_concept
    while True:
        if current == atom_concept:
            return True
        if current not in parents:
            return False
        current = parents[current]


def _single_entry_subject(atom: ConditionalAtom, conditional: Conditional) -> str:
    if not atom.subjects or not isinstance(atom.subjects[0], str):
        raise UnsupportedOperatorError(
            f"operator {atom.operator.value} in {conditional.id.value} needs an entry-name subject"
        )
    return atom.subjects[0]


def _co_passenger_required(atom: ConditionalAtom, subject_var: str) -> bool:
    """True when a second subject template demands a distinct co-passenger."""
    for extra in atom.subjects[1:]:
        if not isinstance(extra, EntryTemplate):
            raise UnsupportedOperatorError("extra booking subjects must be templates")
        for c in extra.constraints:
            if c.predicate == AG.distinctFrom and isinstance(c.object, EntryRef) and c.object.name == subject_var:
                return True
        # Without a distinct-from constraint the subject itself satisfies
        # the template, so it adds no condition.
    return False


def _times_argument(atom: ConditionalAtom) -> int | None:
    for key, value in atom.operator_args:
        if key == "times":
            return int(value.lexical)
    return None


def _offer_template_accepts(template: EntryTemplate, booking: BookingView) -> bool:
    def episode_is(flag_ridesharing: bool, cls: Iri) -> bool:
        if cls == R2R.RidesharingLeg:
            return flag_ridesharing
        if cls == R2R.TravelEpisode:
            return True
        return False

    for c in template.constraints:
        if c.predicate == AG.tripIncludesEpisodeOfClass and isinstance(c.object, Iri):
            if not any(episode_is(flag, c.object) for _, flag in booking.episodes):
                return False
        elif c.predicate == AG.tripIncludesEpisodeNotOfClass and isinstance(c.object, Iri):
            if not any(not episode_is(flag, c.object) for _, flag in booking.episodes):
                return False
    return True


def _atom_solutions(
    conditional: Conditional, atom: ConditionalAtom, kb: KnowledgeBase, bound: dict[str, str]
) -> Iterable[tuple[dict[str, str], int]]:
    if atom.operator == AG.isAssociatedWith:
        var = _single_entry_subject(atom, conditional)
        if len(atom.objects) != 1 or not isinstance(atom.objects[0], Iri):
            raise UnsupportedOperatorError(
                f"{AG.isAssociatedWith.value} in {conditional.id.value} needs a single concept object"
            )
        concept = atom.objects[0].value
        candidates = sorted({b for b, c, _ in kb.events if _event_matches(c, concept)})
        if var in bound:
            if bound[var] in candidates:
                yield dict(bound), 0
            return
        for booking in candidates:
            out = dict(bound)
            out[var] = booking
            yield out, 0
        return

    if atom.operator == R2R.book:
        var = _single_entry_subject(atom, conditional)
        if len(atom.objects) != 1 or not isinstance(atom.objects[0], EntryTemplate):
            raise UnsupportedOperatorError(
                f"{R2R.book.value} in {conditional.id.value} needs a single template object"
            )
        template = atom.objects[0]
        times = _times_argument(atom)
        active = {
            iri: b for iri, b in kb.bookings.items() if b.status != _STATUS_CANCELLED
        }

        if template.required_class == R2R.Ride:
            if times is not None:
                raise EvaluationError("a times argument is not supported for ride targets")
            needs_other = _co_passenger_required(atom, var)
            by_ride: dict[str, set[str]] = {}
            for b in active.values():
                by_ride.setdefault(b.ride, set()).add(b.passenger)
            for ride in sorted(by_ride):
                passengers = by_ride[ride]
                for p in sorted(passengers):
                    if var in bound and bound[var] != p:
                        continue
                    if RIDE_VAR in bound and bound[RIDE_VAR] != ride:
                        continue
                    if needs_other and not (passengers - {p}):
                        continue
                    out = dict(bound)
                    out[var] = p
                    out[RIDE_VAR] = ride
                    yield out, 0
            return

        if template.required_class == OSDM.Offer:
            per_passenger: dict[str, list[str]] = {}
            for iri in sorted(active):
                b = active[iri]
                if _offer_template_accepts(template, b):
                    per_passenger.setdefault(b.passenger, []).append(iri)
            for passenger in sorted(per_passenger):
                if var in bound and bound[var] != passenger:
                    continue
                matching = per_passenger[passenger]
                if times is None:
                    for booking in matching:
                        if BOOKING_VAR in bound and bound[BOOKING_VAR] != booking:
                            continue
                        out = dict(bound)
                        out[var] = passenger
                        out[BOOKING_VAR] = booking
                        yield out, 0
                else:
                    for k in range(1, len(matching) // times + 1):
                        out = dict(bound)
                        out[var] = passenger
                        yield out, k
            return

        raise EvaluationError(
            f"unsupported booking target class {template.required_class.value} in {conditional.id.value}"
        )

    raise UnsupportedOperatorError(f"unknown body operator {atom.operator.value}")


def match_body(conditional: Conditional, kb: KnowledgeBase) -> list[Match]:
    """All distinct binding sets satisfying the body conjunction."""
    partials: list[tuple[dict[str, str], int]] = [({}, 0)]
    for atom in conditional.body:
        extended: list[tuple[dict[str, str], int]] = []
        for bound, k in partials:
            for solution, k2 in _atom_solutions(conditional, atom, kb, bound):
                if k and k2:
                    raise EvaluationError(
                        f"conditional {conditional.id.value}: multiple repetition-counted atoms"
                    )
                extended.append((solution, k or k2))
        partials = extended
    matches = {Match(tuple(sorted(b.items())), k) for b, k in partials}
    return sorted(matches, key=lambda m: (m.bindings, m.k))


# --------------------------------------------------------------------------
# Head discharge
# --------------------------------------------------------------------------


def _resolve_entries(contract: SmartContract, match: Match, kb: KnowledgeBase) -> dict[str, str]:
    """Entry name -> individual IRI, propagated through template constraints."""
    resolved = match.binding_map()
    for entry in contract.entries:
        if isinstance(entry.binding, Iri):
            resolved.setdefault(entry.name, entry.binding.value)

    changed = True
    while changed:
        changed = False
        for entry in contract.entries:
            source = resolved.get(entry.name)
            if source is None or not isinstance(entry.binding, EntryTemplate):
                continue
            for constraint in entry.binding.constraints:
                if not isinstance(constraint.object, EntryRef):
                    continue
                if constraint.predicate.value.startswith(AG.base):
                    continue  # structural pseudo-predicates carry no data
                target = constraint.object.name
                if target in resolved:
                    continue
                values = [
                    o for o in kb.abox.objects(Iri(source), constraint.predicate) if isinstance(o, Iri)
                ]
                if len(values) == 1:
                    resolved[target] = values[0].value
                    changed = True
    return resolved


def _require(resolved: dict[str, str], name: str, conditional: Conditional) -> str:
    value = resolved.get(name)
    if value is None:
        raise EvaluationError(
            f"conditional {conditional.id.value}: cannot resolve entry {name!r} for the head"
        )
    return value


def _head_obligation(
    contract: SmartContract,
    conditional: Conditional,
    atom: ConditionalAtom,
    match: Match,
    resolved: dict[str, str],
    kb: KnowledgeBase,
    firing_key: str,
) -> Obligation:
    if atom.operator == R2R.issue:
        spec = extract_voucher_spec(atom)
        if spec is None:
            raise EvaluationError(f"conditional {conditional.id.value}: issue head carries no voucher template")
        action: ObligationAction = IssueVoucher(
            spec.kind,
            _require(resolved, spec.issuer, conditional),
            _require(resolved, spec.beneficiary, conditional),
            spec.percentage,
        )
    elif atom.operator in (AG.pay, AG.refund):
        booking = match.binding_map().get(BOOKING_VAR)
        if booking is None or booking not in kb.bookings:
            raise EvaluationError(
                f"conditional {conditional.id.value}: pay/refund heads need a matched booking"
            )
        price = kb.bookings[booking].price
        if atom.operator == AG.pay:
            payer_entry = atom.subjects[0] if atom.subjects and isinstance(atom.subjects[0], str) else None
            payee_entry = atom.objects[0] if atom.objects and isinstance(atom.objects[0], str) else None
            if payer_entry is None or payee_entry is None:
                raise EvaluationError(f"conditional {conditional.id.value}: pay head needs entry references")
            action = Pay(price, _require(resolved, payer_entry, conditional), _require(resolved, payee_entry, conditional))
        else:
            recipient_entry = atom.objects[0] if atom.objects and isinstance(atom.objects[0], str) else None
            if recipient_entry is None:
                raise EvaluationError(f"conditional {conditional.id.value}: refund head needs an entry reference")
            action = Refund(price, _require(resolved, recipient_entry, conditional))
    else:
        raise UnsupportedOperatorError(f"unknown head operator {atom.operator.value}")
    return Obligation(action, conditional.id.value, firing_key, kb.seq)


def evaluate(contracts: Iterable[SmartContract], kb: KnowledgeBase) -> list[Obligation]:
    """Emit one obligation per head atom for every not-yet-fired match,
    in (contract id, conditional id, firing key) order."""
    keyed: list[tuple[str, str, str, int, Obligation]] = []
    for contract in sorted(contracts, key=lambda c: c.id.value):
        for conditional in contract.conditionals:
            for match in match_body(conditional, kb):
                firing_key = binding_digest(conditional.id.value, match.binding_map(), match.k)
                if firing_key in kb.firings:
                    continue
                resolved = _resolve_entries(contract, match, kb)
                for idx, atom in enumerate(conditional.head):
                    obligation = _head_obligation(contract, conditional, atom, match, resolved, kb, firing_key)
                    keyed.append((contract.id.value, conditional.id.value, firing_key, idx, obligation))
    keyed.sort(key=lambda item: item[:4])
    return [obligation for *_, obligation in keyed]
