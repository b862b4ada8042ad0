"""Independent oracles used to cross-check the engine and the query module.

Everything here works by exhaustive enumeration directly over A-Box
triples: no ledger indices, no firing keys, no join ordering.  Slow on
purpose, correct by construction.
"""

from __future__ import annotations

from agreementforge.query import Pattern, Var
from agreementforge.rdf import AG, R2R, RBE, RDF, SKOS, Graph, Iri, Term, ntriples
from agreementforge.vocabulary import build_event_taxonomy


def bf_select(g: Graph, patterns: list[Pattern]) -> tuple[tuple[str, ...], set[tuple[Term, ...]]]:
    """Try every assignment of graph triples to patterns."""
    columns: list[str] = []
    for pattern in patterns:
        for position in pattern:
            if isinstance(position, Var) and position.name not in columns:
                columns.append(position.name)
    triples = list(g)

    rows: set[tuple[Term, ...]] = set()

    def unify(pattern, triple, binding):
        new = dict(binding)
        for position, value in zip(pattern, (triple.subject, triple.predicate, triple.object)):
            if isinstance(position, Var):
                if position.name in new and new[position.name] != value:
                    return None
                new[position.name] = value
            elif position != value:
                return None
        return new

    def recurse(i, binding):
        if i == len(patterns):
            rows.add(tuple(binding[c] for c in columns))
            return
        for t in triples:
            extended = unify(patterns[i], t, binding)
            if extended is not None:
                recurse(i + 1, extended)

    recurse(0, {})
    return tuple(columns), rows


# -- A-Box predicates, all by raw triple scans -------------------------------

_TAXONOMY = build_event_taxonomy()


def _broader_chain(concept: Iri) -> list[Iri]:
    chain = [concept]
    while True:
        parents = [o for o in _TAXONOMY.objects(chain[-1], SKOS.broader) if isinstance(o, Iri)]
        if not parents:
            return chain
        chain.append(parents[0])


def event_matches(event_concept: Iri, atom_concept: Iri) -> bool:
    return atom_concept in _broader_chain(event_concept)


def bookings_of(abox: Graph) -> list[Iri]:
    return [t.subject for t in abox.match(None, RDF.type, R2R.RidesharingBooking) if isinstance(t.subject, Iri)]


def passengers_of(abox: Graph) -> list[Iri]:
    found = {t.object for t in abox.match(None, R2R.bookedBy, None) if isinstance(t.object, Iri)}
    return sorted(found, key=lambda i: i.value)


def rides_of(abox: Graph) -> list[Iri]:
    return [t.subject for t in abox.match(None, RDF.type, R2R.Ride) if isinstance(t.subject, Iri)]


def booking_cancelled(abox: Graph, booking: Iri) -> bool:
    for t in abox.match(booking, R2R.relatesToEvent, None):
        if not isinstance(t.object, Iri):
            continue
        top = _broader_chain(t.object)[-1]
        if top in (RBE.RidesharingCancelled, RBE.RidesharingNoShow):
            return True
    return False


def booking_passenger(abox: Graph, booking: Iri) -> Iri | None:
    values = [o for o in abox.objects(booking, R2R.bookedBy) if isinstance(o, Iri)]
    return values[0] if values else None


def booking_ride(abox: Graph, booking: Iri) -> Iri | None:
    for item in abox.objects(booking, R2R.hasOfferItem):
        for leg in abox.objects(item, R2R.forTravelEpisode):
            for ride in abox.objects(leg, R2R.hasTransportationService):
                if isinstance(ride, Iri):
                    return ride
    return None


def booking_trip_multimodal(abox: Graph, booking: Iri) -> bool:
    """Trip of the booking's leg has a ridesharing leg and a non-ridesharing one."""
    for item in abox.objects(booking, R2R.hasOfferItem):
        for leg in abox.objects(item, R2R.forTravelEpisode):
            for trip in abox.subjects(R2R.includesTravelEpisode, leg):
                episodes = [e for e in abox.objects(trip, R2R.includesTravelEpisode) if isinstance(e, Iri)]
                kinds = []
                for episode in episodes:
                    kinds.append(R2R.RidesharingLeg in abox.objects(episode, RDF.type))
                if any(kinds) and not all(kinds):
                    return True
    return False


def books_ride(abox: Graph, passenger: Iri, ride: Iri) -> bool:
    for booking in bookings_of(abox):
        if booking_cancelled(abox, booking):
            continue
        if booking_passenger(abox, booking) == passenger and booking_ride(abox, booking) == ride:
            return True
    return False


# -- Conditional-level oracles ----------------------------------------------


def oracle_associated(abox: Graph, concepts: list[Iri]) -> set[tuple[tuple[str, str], ...]]:
    """Bindings of the booking variable for an is-associated-with conjunction."""
    out = set()
    for booking in bookings_of(abox):
        recorded = [t.object for t in abox.match(booking, R2R.relatesToEvent, None) if isinstance(t.object, Iri)]
        if all(any(event_matches(r, concept) for r in recorded) for concept in concepts):
            out.add((("booking", booking.value),))
    return out


def oracle_ride_with_other(abox: Graph) -> set[tuple[tuple[str, str], ...]]:
    """Every (p1, ride) with a distinct co-passenger, by full enumeration."""
    out = set()
    for p1 in passengers_of(abox):
        for p2 in passengers_of(abox):
            for ride in rides_of(abox):
                if p2 == p1:
                    continue
                if books_ride(abox, p1, ride) and books_ride(abox, p2, ride):
                    out.add((("p1", p1.value), ("ride", ride.value)))
    return out


def oracle_multimodal(abox: Graph, subject_var: str, times: int | None) -> set[tuple[tuple[tuple[str, str], ...], int]]:
    """(bindings, k) pairs for the multimodal booking incentive."""
    out = set()
    per_passenger: dict[str, list[str]] = {}
    for booking in bookings_of(abox):
        if booking_cancelled(abox, booking):
            continue
        passenger = booking_passenger(abox, booking)
        if passenger is None or not booking_trip_multimodal(abox, booking):
            continue
        per_passenger.setdefault(passenger.value, []).append(booking.value)
    for passenger, matched in per_passenger.items():
        if times is None:
            for booking in matched:
                out.add(((("booking", booking), (subject_var, passenger)), 0))
        else:
            for k in range(1, len(matched) // times + 1):
                out.add((((subject_var, passenger),), k))
    return out
