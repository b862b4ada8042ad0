"""Conjunctive graph-pattern selection and the six competency questions.

``select`` evaluates a sequence of triple patterns (terms mixed with named
variables) by nested-loop join and returns deterministically sorted rows.
Each competency question is a named operation over the exported A-Box:

1. origin/destination of a booking's ridesharing leg
2. price agreed for a booking
3. seats declared for a ride
4. incentives naming a travel service provider
5. conditions of an incentive, rendered readably
6. benefit (voucher) granted by an incentive
"""

from __future__ import annotations

from dataclasses import dataclass

from agreementforge.contracts import (
    ConditionalAtom,
    EntryRef,
    EntryTemplate,
    SmartContract,
    VoucherSpec,
    extract_voucher_spec,
    graph_to_contract,
)
from agreementforge.errors import IntegrityError, NotFoundError
from agreementforge.rdf import (
    AG,
    DEFAULT_PREFIXES,
    OASIS,
    R2R,
    RDF,
    Graph,
    Iri,
    Literal,
    Term,
    Triple,
    ntriples,
)
from agreementforge.contracts import Price


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("variable name must be nonempty")


Pattern = tuple[Term | Var, Term | Var, Term | Var]


@dataclass(frozen=True)
class QueryResult:
    columns: tuple[str, ...]
    rows: tuple[tuple[Term, ...], ...]


def _bind(position, binding: dict[str, Term]):
    if isinstance(position, Var):
        return binding.get(position.name)
    return position


def select(g: Graph, patterns: list[Pattern]) -> QueryResult:
    """All assignments satisfying every pattern, joined on shared variables."""
    if not patterns:
        raise ValueError("select needs at least one pattern")
    columns: list[str] = []
    for pattern in patterns:
        for position in pattern:
            if isinstance(position, Var) and position.name not in columns:
                columns.append(position.name)

    bindings: list[dict[str, Term]] = [{}]
    for s, p, o in patterns:
        extended: list[dict[str, Term]] = []
        for binding in bindings:
            bs, bp, bo = _bind(s, binding), _bind(p, binding), _bind(o, binding)
            for t in g.match(bs, bp, bo):
                new = dict(binding)
                ok = True
                for position, value in ((s, t.subject), (p, t.predicate), (o, t.object)):
                    if isinstance(position, Var):
                        if position.name in new and new[position.name] != value:
                            ok = False
                            break
                        new[position.name] = value
                if ok:
                    extended.append(new)
        bindings = extended

    rows = {tuple(b[c] for c in columns) for b in bindings}
    ordered = sorted(rows, key=lambda row: tuple(ntriples(v) for v in row))
    return QueryResult(tuple(columns), tuple(ordered))


# --------------------------------------------------------------------------
# Competency questions
# --------------------------------------------------------------------------


def _require_booking(g: Graph, booking: Iri) -> None:
    if Triple(booking, RDF.type, R2R.RidesharingBooking) not in g:
        raise NotFoundError(f"booking {booking.value} not found")


def cq_leg_endpoints(g: Graph, booking: Iri) -> tuple[str, str]:
    """Origin and destination of the booking's ridesharing leg."""
    _require_booking(g, booking)
    result = select(
        g,
        [
            (booking, R2R.hasOfferItem, Var("item")),
            (Var("item"), R2R.forTravelEpisode, Var("leg")),
            (Var("leg"), RDF.type, R2R.RidesharingLeg),
            (Var("leg"), R2R.origin, Var("origin")),
            (Var("leg"), R2R.destination, Var("destination")),
        ],
    )
    endpoints = {
        (row[result.columns.index("origin")], row[result.columns.index("destination")])
        for row in result.rows
    }
    if not endpoints:
        raise NotFoundError(f"booking {booking.value} has no ridesharing leg with endpoints")
    if len(endpoints) > 1:
        raise IntegrityError(f"booking {booking.value} has conflicting leg endpoints")
    origin, destination = endpoints.pop()
    if not isinstance(origin, Literal) or not isinstance(destination, Literal):
        raise IntegrityError(f"booking {booking.value} endpoints must be literals")
    return origin.lexical, destination.lexical


def cq_agreed_price(g: Graph, booking: Iri) -> Price:
    """Price agreed for the booking's offer item."""
    _require_booking(g, booking)
    items = [o for o in g.objects(booking, R2R.hasOfferItem) if isinstance(o, Iri)]
    if not items:
        raise NotFoundError(f"booking {booking.value} has no offer item")
    if len(items) > 1:
        raise IntegrityError(f"booking {booking.value} has {len(items)} offer items")
    prices = [o for o in g.objects(items[0], R2R.hasPrice) if isinstance(o, Iri)]
    if not prices:
        raise NotFoundError(f"offer item {items[0].value} has no price")
    if len(prices) > 1:
        raise IntegrityError(f"offer item {items[0].value} has {len(prices)} price nodes")
    amount = g.value(prices[0], AG.amountMinor)
    currency = g.value(prices[0], AG.currency)
    if not isinstance(amount, Literal) or not isinstance(currency, Literal):
        raise NotFoundError(f"price {prices[0].value} lacks amount or currency")
    return Price(int(amount.lexical), currency.lexical)


def cq_declared_seats(g: Graph, ride: Iri) -> int:
    """Number of seats the driver declared for the ride."""
    if Triple(ride, RDF.type, R2R.Ride) not in g:
        raise NotFoundError(f"ride {ride.value} not found")
    result = select(
        g,
        [
            (ride, R2R.hasInventoryAllocation, Var("allocation")),
            (Var("allocation"), R2R.consumable, R2R.Seat),
            (Var("allocation"), R2R.quantity, Var("quantity")),
        ],
    )
    quantities = {row[result.columns.index("quantity")] for row in result.rows}
    if not quantities:
        raise NotFoundError(f"ride {ride.value} declares no seat allocation")
    if len(quantities) > 1:
        raise IntegrityError(f"ride {ride.value} declares conflicting seat allocations")
    quantity = quantities.pop()
    if not isinstance(quantity, Literal):
        raise IntegrityError(f"ride {ride.value}: seat quantity must be a literal")
    return int(quantity.lexical)


def cq_incentives_by_provider(g: Graph, tsp: Iri) -> list[Iri]:
    """Incentive agreements naming the provider as a fixed participant."""
    result = select(
        g,
        [
            (Var("incentive"), RDF.type, R2R.IncentiveSmartContract),
            (Var("incentive"), OASIS.hasSmartContractEntry, Var("entry")),
            (Var("entry"), OASIS.refersExactlyTo, tsp),
        ],
    )
    column = result.columns.index("incentive")
    found = {row[column] for row in result.rows}
    return sorted((i for i in found if isinstance(i, Iri)), key=lambda i: i.value)


def _curie(iri: Iri) -> str:
    for prefix, ns in sorted(DEFAULT_PREFIXES.items(), key=lambda kv: -len(kv[1])):
        if iri.value.startswith(ns):
            return f"{prefix}:{iri.value[len(ns):]}"
    return f"<{iri.value}>"


def _render_part(part) -> str:
    if isinstance(part, str):
        return part
    if isinstance(part, EntryTemplate):
        bits = [_curie(part.required_class)]
        for c in part.constraints:
            obj = c.object
            if isinstance(obj, EntryRef):
                rendered = obj.name
            elif isinstance(obj, Iri):
                rendered = _curie(obj)
            elif isinstance(obj, Literal):
                rendered = obj.lexical
            else:
                rendered = str(obj)
            bits.append(f"{_curie(c.predicate)} {rendered}")
        return "[" + "; ".join(bits) + "]"
    if isinstance(part, Iri):
        return _curie(part)
    if isinstance(part, Literal):
        return f'"{part.lexical}"'
    return str(part)


def _render_atom(atom: ConditionalAtom) -> str:
    text = ", ".join(_render_part(s) for s in atom.subjects) or "-"
    text += f" {_curie(atom.operator)}"
    if atom.operator_args:
        text += " (" + ", ".join(f"{k}={v.lexical}" for k, v in atom.operator_args) + ")"
    if atom.objects:
        text += " " + ", ".join(_render_part(o) for o in atom.objects)
    if atom.input_params:
        text += " with input " + ", ".join(atom.input_params)
    if atom.output_params:
        text += " with output " + ", ".join(atom.output_params)
    return text


def _load_contract(g: Graph, incentive: Iri) -> SmartContract:
    if not g.match(incentive, RDF.type, None):
        raise NotFoundError(f"{incentive.value} not found")
    return graph_to_contract(g, incentive)


def cq_incentive_conditions(g: Graph, incentive: Iri) -> list[str]:
    """Readable description of each conditional's applicability conditions."""
    contract = _load_contract(g, incentive)
    rendered = []
    for conditional in contract.conditionals:
        body = " AND ".join(_render_atom(a) for a in conditional.body)
        head = " AND ".join(_render_atom(a) for a in conditional.head)
        rendered.append(f"if {body} then {head}")
    return rendered


def cq_incentive_benefit(g: Graph, incentive: Iri) -> VoucherSpec:
    """The voucher an incentive's head promises."""
    contract = _load_contract(g, incentive)
    for conditional in contract.conditionals:
        for atom in conditional.head:
            spec = extract_voucher_spec(atom)
            if spec is not None:
                return spec
    raise NotFoundError(f"{incentive.value} grants no voucher benefit")
