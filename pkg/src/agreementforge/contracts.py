"""Smart-contract data model, the shipped agreement builders, and lossless
conversion between the model and RDF.

An agreement is a set of named entries (participants and values, each bound
either to a specific individual or to a class template) plus conditionals:
conjunctions of atoms in an antecedent that, when satisfied, oblige the
consequent atoms.  Four builders produce the ridesharing-booking agreement
and the three incentive agreements; a fifth wraps the booking agreement
with the pay/refund policy conditionals.

The RDF encoding reifies every ordered element (entries, atoms, subjects,
objects, parameters, arguments) as an individual carrying an explicit
index, so ``graph_to_contract(contract_to_graph(c)) == c`` holds exactly.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, replace
from decimal import Decimal, InvalidOperation
from enum import Enum

from agreementforge.errors import (
    BindingError,
    StructuralError,
    TemplateMismatchError,
    ValidationError,
)
from agreementforge.rdf import (
    AG,
    OASIS,
    OSDM,
    R2R,
    RBE,
    RDF,
    RDFS,
    XSD,
    Graph,
    Iri,
    Literal,
    Term,
    Triple,
)
from agreementforge.vocabulary import CROWD_TSP, _vocab_prefixes

_ENTRY_NAME = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


class EntryRole(Enum):
    PARTICIPANT = "participant"
    VALUE = "value"


@dataclass(frozen=True)
class EntryRef:
    """Reference to another entry by name, used inside template constraints."""

    name: str


@dataclass(frozen=True)
class TemplateConstraint:
    predicate: Iri
    object: Term | EntryRef


@dataclass(frozen=True)
class EntryTemplate:
    required_class: Iri
    constraints: tuple[TemplateConstraint, ...] = ()


@dataclass(frozen=True)
class Entry:
    name: str
    role: EntryRole
    binding: Iri | EntryTemplate

    def __post_init__(self):
        if not _ENTRY_NAME.match(self.name):
            raise ValidationError(f"invalid entry name: {self.name!r}")


@dataclass(frozen=True)
class ConditionalAtom:
    subjects: tuple[str | EntryTemplate, ...] = ()
    operator: Iri = OASIS.Action
    objects: tuple[str | EntryTemplate | Iri | Literal, ...] = ()
    input_params: tuple[str, ...] = ()
    output_params: tuple[str, ...] = ()
    operator_args: tuple[tuple[str, Literal], ...] = ()

    def __post_init__(self):
        keys = [k for k, _ in self.operator_args]
        if len(keys) != len(set(keys)):
            raise ValidationError("duplicate operator argument keys")

    def entry_names(self) -> set[str]:
        names = set(self.input_params) | set(self.output_params)
        for part in (self.subjects, self.objects):
            for item in part:
                if isinstance(item, str):
                    names.add(item)
                elif isinstance(item, EntryTemplate):
                    names.update(
                        c.object.name for c in item.constraints if isinstance(c.object, EntryRef)
                    )
        return names


@dataclass(frozen=True)
class Conditional:
    id: Iri
    body: tuple[ConditionalAtom, ...]
    head: tuple[ConditionalAtom, ...]

    def __post_init__(self):
        if not self.body or not self.head:
            raise ValidationError(f"conditional {self.id.value} needs a non-empty body and head")


class ContractKind(Enum):
    GENERIC = "generic"
    INCENTIVE = "incentive"


@dataclass(frozen=True)
class SmartContract:
    id: Iri
    label: str
    entries: tuple[Entry, ...]
    conditionals: tuple[Conditional, ...] = ()
    kind: ContractKind = ContractKind.GENERIC

    def entry(self, name: str) -> Entry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def participants(self) -> list[Entry]:
        return [e for e in self.entries if e.role is EntryRole.PARTICIPANT]


def validate_contract(contract: SmartContract) -> None:
    """Raise ValidationError when the model invariants do not hold."""
    if not contract.entries:
        raise ValidationError(f"contract {contract.id.value} declares no entries")
    names = [e.name for e in contract.entries]
    if len(names) != len(set(names)):
        raise ValidationError(f"contract {contract.id.value} has duplicate entry names")
    declared = set(names)
    for cond in contract.conditionals:
        for atom in cond.body + cond.head:
            missing = atom.entry_names() - declared
            if missing:
                raise ValidationError(
                    f"conditional {cond.id.value} references undeclared entries: {sorted(missing)}"
                )
    # Template constraints on entries may also point at other entries.
    for entry in contract.entries:
        if isinstance(entry.binding, EntryTemplate):
            for c in entry.binding.constraints:
                if isinstance(c.object, EntryRef) and c.object.name not in declared:
                    raise ValidationError(
                        f"entry {entry.name!r} constraint references undeclared entry {c.object.name!r}"
                    )


@dataclass(frozen=True)
class Price:
    amount_minor: int
    currency: str

    def __post_init__(self):
        if self.amount_minor < 0:
            raise ValidationError("price amount must be >= 0 minor units")
        if not re.match(r"^[A-Z]{3}$", self.currency):
            raise ValidationError(f"currency must be a 3-letter uppercase code, got {self.currency!r}")


class VoucherKind(Enum):
    DISCOUNT = "discount"
    SEAT_UPGRADE = "seat-upgrade"


@dataclass(frozen=True)
class VoucherSpec:
    kind: VoucherKind
    beneficiary: str
    issuer: str
    percentage: Decimal | None = None

    def __post_init__(self):
        if self.kind is VoucherKind.DISCOUNT:
            if self.percentage is None or not (0 < self.percentage <= 100):
                raise ValidationError("discount percentage must be in (0, 100]")
        elif self.percentage is not None:
            raise ValidationError("only discount vouchers carry a percentage")


@dataclass(frozen=True)
class SmartContractInstance:
    id: Iri
    contract: Iri
    bindings: tuple[tuple[str, Iri], ...]
    created_at: str

    def binding_map(self) -> dict[str, Iri]:
        return dict(self.bindings)


# --------------------------------------------------------------------------
# Builders for the shipped agreements
# --------------------------------------------------------------------------


def _c(predicate: Iri, obj: Term | EntryRef) -> TemplateConstraint:
    return TemplateConstraint(predicate, obj)


def ridesharing_booking_contract() -> SmartContract:
    """Driver/passenger booking agreement; carries no conditionals."""
    entries = (
        Entry("driver", EntryRole.PARTICIPANT, EntryTemplate(R2R.Driver)),
        Entry("passenger", EntryRole.PARTICIPANT, EntryTemplate(OSDM.Passenger)),
        Entry(
            "booking",
            EntryRole.VALUE,
            EntryTemplate(
                R2R.RidesharingBooking,
                (
                    _c(R2R.bookedBy, EntryRef("passenger")),
                    _c(R2R.hasOfferItem, EntryRef("offerItem")),
                ),
            ),
        ),
        Entry(
            "offerItem",
            EntryRole.VALUE,
            EntryTemplate(
                R2R.OfferItem,
                (
                    _c(R2R.hasPrice, EntryRef("price")),
                    _c(R2R.forTravelEpisode, EntryRef("leg")),
                    _c(R2R.includesReservation, EntryRef("reservation")),
                ),
            ),
        ),
        Entry("price", EntryRole.VALUE, EntryTemplate(OSDM.Price)),
        Entry(
            "leg",
            EntryRole.VALUE,
            EntryTemplate(R2R.RidesharingLeg, (_c(R2R.hasTransportationService, EntryRef("ride")),)),
        ),
        Entry("reservation", EntryRole.VALUE, EntryTemplate(R2R.InventoryReservation)),
        Entry(
            "ride",
            EntryRole.VALUE,
            EntryTemplate(
                R2R.Ride,
                (
                    _c(R2R.operatedBy, EntryRef("driver")),
                    _c(R2R.hasInventoryAllocation, EntryRef("allocation")),
                ),
            ),
        ),
        Entry("allocation", EntryRole.VALUE, EntryTemplate(R2R.InventoryAllocation)),
    )
    return SmartContract(
        AG.RidesharingBookingSmartContract,
        "Ridesharing Booking Smart Contract",
        entries,
    )


def example_conditionals() -> tuple[Conditional, Conditional, Conditional]:
    """Pay/refund policies over the booking agreement's entries."""
    pay = Conditional(
        AG.PayDriverOnCompletedRide,
        body=(
            ConditionalAtom(("booking",), AG.isAssociatedWith, (RBE.RidesharingStarted,)),
            ConditionalAtom(("booking",), AG.isAssociatedWith, (RBE.RidesharingCompleted,)),
        ),
        head=(
            ConditionalAtom(("passenger",), AG.pay, ("driver",), input_params=("price",)),
        ),
    )
    refund_cancel = Conditional(
        AG.RefundOnDriverCancellation,
        body=(ConditionalAtom(("booking",), AG.isAssociatedWith, (RBE.RidesharingCancelledByDriver,)),),
        head=(ConditionalAtom((), AG.refund, ("passenger",), output_params=("price",)),),
    )
    refund_noshow = Conditional(
        AG.RefundOnDriverNoShow,
        body=(ConditionalAtom(("booking",), AG.isAssociatedWith, (RBE.RidesharingNoShowDriver,)),),
        head=(ConditionalAtom((), AG.refund, ("passenger",), output_params=("price",)),),
    )
    return (pay, refund_cancel, refund_noshow)


def booking_policy_contract() -> SmartContract:
    """Booking agreement plus the executable pay/refund conditionals."""
    base = ridesharing_booking_contract()
    return replace(
        base,
        id=AG.RidesharingBookingPolicyContract,
        label="Ridesharing Booking Policy Contract",
        conditionals=example_conditionals(),
    )


def ride_with_other_passengers_incentive(provider: Iri = CROWD_TSP) -> SmartContract:
    """Seat upgrade when a passenger shares a ride with another passenger."""
    entries = (
        Entry("p1", EntryRole.PARTICIPANT, EntryTemplate(OSDM.Passenger)),
        Entry("tsp", EntryRole.PARTICIPANT, provider),
    )
    conditional = Conditional(
        AG("RideWithOtherPassengersIncentive-conditional"),
        body=(
            ConditionalAtom(
                subjects=(
                    "p1",
                    EntryTemplate(OSDM.Passenger, (_c(AG.distinctFrom, EntryRef("p1")),)),
                ),
                operator=R2R.book,
                objects=(EntryTemplate(R2R.Ride),),
            ),
        ),
        head=(
            ConditionalAtom(
                subjects=("tsp",),
                operator=R2R.issue,
                objects=(
                    EntryTemplate(
                        R2R.SeatUpgradeVoucher,
                        (
                            _c(R2R.issuedBy, EntryRef("tsp")),
                            _c(AG.beneficiary, EntryRef("p1")),
                        ),
                    ),
                ),
            ),
        ),
    )
    return SmartContract(
        AG.RideWithOtherPassengersIncentive,
        "Ride with Other Passengers Incentive",
        entries,
        (conditional,),
        ContractKind.INCENTIVE,
    )


def _decimal(value) -> Decimal:
    try:
        return Decimal(str(value))
    except InvalidOperation as exc:
        raise ValidationError(f"not a decimal: {value!r}") from exc


def multimodal_discount_incentive(percentage, repetitions: int = 1, provider: Iri = CROWD_TSP) -> SmartContract:
    """Discount voucher for booking an offer whose trip mixes a ridesharing
    leg with at least one other leg, optionally only every ``repetitions``-th
    time."""
    pct = _decimal(percentage)
    if not (0 < pct <= 100):
        raise ValidationError(f"discount percentage must be in (0, 100], got {pct}")
    if repetitions < 1:
        raise ValidationError("repetitions must be >= 1")

    suffix = "" if repetitions == 1 else str(repetitions)
    contract_id = AG(f"MultimodalDiscountIncentive{suffix}")
    args = (("times", Literal(str(repetitions), XSD.integer.value)),) if repetitions > 1 else ()

    conditional = Conditional(
        AG(f"MultimodalDiscountIncentive{suffix}-conditional"),
        body=(
            ConditionalAtom(
                subjects=("passenger",),
                operator=R2R.book,
                objects=(
                    EntryTemplate(
                        OSDM.Offer,
                        (
                            _c(AG.tripIncludesEpisodeOfClass, R2R.RidesharingLeg),
                            _c(AG.tripIncludesEpisodeNotOfClass, R2R.RidesharingLeg),
                        ),
                    ),
                ),
                operator_args=args,
            ),
        ),
        head=(
            ConditionalAtom(
                subjects=("tsp",),
                operator=R2R.issue,
                objects=(
                    EntryTemplate(
                        R2R.DiscountVoucher,
                        (
                            _c(R2R.discountPercentage, Literal(format(pct, "f"), XSD.decimal.value)),
                            _c(R2R.issuedBy, EntryRef("tsp")),
                            _c(AG.beneficiary, EntryRef("passenger")),
                        ),
                    ),
                ),
            ),
        ),
    )
    label = f"Multimodal Discount Incentive ({format(pct, 'f')}%"
    label += f", every {repetitions} bookings)" if repetitions > 1 else ")"
    return SmartContract(
        contract_id,
        label,
        (
            Entry("passenger", EntryRole.PARTICIPANT, EntryTemplate(OSDM.Passenger)),
            Entry("tsp", EntryRole.PARTICIPANT, provider),
        ),
        (conditional,),
        ContractKind.INCENTIVE,
    )


def builtin_contracts() -> list[SmartContract]:
    """The four published agreements."""
    return [
        ridesharing_booking_contract(),
        ride_with_other_passengers_incentive(),
        multimodal_discount_incentive(10, 1),
        multimodal_discount_incentive(20, 3),
    ]


def extract_voucher_spec(atom: ConditionalAtom) -> VoucherSpec | None:
    """VoucherSpec carried by an issue atom's object template, if any."""
    if atom.operator != R2R.issue or not atom.objects:
        return None
    template = atom.objects[0]
    if not isinstance(template, EntryTemplate):
        return None
    issuer = atom.subjects[0] if atom.subjects and isinstance(atom.subjects[0], str) else ""
    beneficiary = ""
    percentage = None
    for c in template.constraints:
        if c.predicate == AG.beneficiary and isinstance(c.object, EntryRef):
            beneficiary = c.object.name
        if c.predicate == R2R.issuedBy and isinstance(c.object, EntryRef):
            issuer = c.object.name or issuer
        if c.predicate == R2R.discountPercentage and isinstance(c.object, Literal):
            percentage = Decimal(c.object.lexical)
    if template.required_class == R2R.SeatUpgradeVoucher:
        return VoucherSpec(VoucherKind.SEAT_UPGRADE, beneficiary, issuer)
    if template.required_class == R2R.DiscountVoucher:
        return VoucherSpec(VoucherKind.DISCOUNT, beneficiary, issuer, percentage)
    return None


# --------------------------------------------------------------------------
# RDF conversion
# --------------------------------------------------------------------------

_INT = XSD.integer.value


def _index(node: Iri, i: int) -> Triple:
    return Triple(node, OASIS.index, Literal(str(i), _INT))


def _emit_template(g: Graph, node: Iri, template: EntryTemplate) -> None:
    g.add(Triple(node, RDF.type, OASIS.EntryTemplate))
    g.add(Triple(node, OASIS.requiredClass, template.required_class))
    for i, constraint in enumerate(template.constraints):
        cnode = Iri(f"{node.value}-c{i}")
        g.add(Triple(node, OASIS.hasConstraint, cnode))
        g.add(Triple(cnode, RDF.type, OASIS.TemplateConstraint))
        g.add(_index(cnode, i))
        g.add(Triple(cnode, OASIS.constraintPredicate, constraint.predicate))
        if isinstance(constraint.object, EntryRef):
            g.add(Triple(cnode, OASIS.constraintEntryRef, Literal(constraint.object.name)))
        else:
            g.add(Triple(cnode, OASIS.constraintObject, constraint.object))


def _emit_atom_part(g: Graph, atom_node: Iri, tag: str, i: int, link: Iri, node_type: Iri,
                    value: str | EntryTemplate | Iri | Literal) -> None:
    part = Iri(f"{atom_node.value}-{tag}{i}")
    g.add(Triple(atom_node, link, part))
    g.add(Triple(part, RDF.type, node_type))
    g.add(_index(part, i))
    if isinstance(value, str):
        g.add(Triple(part, OASIS.entryRef, Literal(value)))
    elif isinstance(value, EntryTemplate):
        _emit_template(g, Iri(f"{part.value}-template"), value)
        g.add(Triple(part, OASIS.refersAsNewTo, Iri(f"{part.value}-template")))
    elif isinstance(value, Iri):
        g.add(Triple(part, OASIS.refersExactlyTo, value))
    else:
        g.add(Triple(part, OASIS.hasValue, value))


def _emit_atom(g: Graph, owner: Iri, k: int, atom: ConditionalAtom) -> None:
    node = Iri(f"{owner.value}-atom{k}")
    g.add(Triple(owner, OASIS.hasConditionalAtom, node))
    g.add(Triple(node, RDF.type, OASIS.ConditionalAtom))
    g.add(_index(node, k))
    g.add(Triple(node, OASIS.hasConditionalOperator, atom.operator))
    for i, subject in enumerate(atom.subjects):
        _emit_atom_part(g, node, "s", i, OASIS.hasConditionalSubject, OASIS.ConditionalSubject, subject)
    for i, obj in enumerate(atom.objects):
        _emit_atom_part(g, node, "o", i, OASIS.hasConditionalObject, OASIS.ConditionalObject, obj)
    for i, name in enumerate(atom.input_params):
        _emit_atom_part(g, node, "in", i, OASIS.hasConditionalInputParameter, OASIS.ConditionalInputParameter, name)
    for i, name in enumerate(atom.output_params):
        _emit_atom_part(g, node, "out", i, OASIS.hasConditionalOutputParameter, OASIS.ConditionalOutputParameter, name)
    for i, (key, value) in enumerate(atom.operator_args):
        arg = Iri(f"{node.value}-arg{i}")
        g.add(Triple(node, OASIS.hasConditionalOperatorArgument, arg))
        g.add(Triple(arg, RDF.type, OASIS.ConditionalOperatorArgument))
        g.add(_index(arg, i))
        g.add(Triple(arg, OASIS.argumentKey, Literal(key)))
        g.add(Triple(arg, OASIS.hasValue, value))


def contract_to_graph(contract: SmartContract) -> Graph:
    validate_contract(contract)
    g = Graph(prefixes=_vocab_prefixes())
    cid = contract.id
    contract_type = OASIS.SmartContract if contract.kind is ContractKind.GENERIC else R2R.IncentiveSmartContract
    g.add(Triple(cid, RDF.type, contract_type))
    g.add(Triple(cid, RDFS.label, Literal(contract.label)))

    for i, entry in enumerate(contract.entries):
        node = Iri(f"{cid.value}-entry-{entry.name}")
        g.add(Triple(cid, OASIS.hasSmartContractEntry, node))
        role_type = (
            OASIS.SmartContractEntryParticipant
            if entry.role is EntryRole.PARTICIPANT
            else OASIS.SmartContractEntryValue
        )
        g.add(Triple(node, RDF.type, role_type))
        g.add(Triple(node, RDFS.label, Literal(entry.name)))
        g.add(_index(node, i))
        if isinstance(entry.binding, Iri):
            g.add(Triple(node, OASIS.refersExactlyTo, entry.binding))
        else:
            template_node = Iri(f"{node.value}-template")
            _emit_template(g, template_node, entry.binding)
            g.add(Triple(node, OASIS.refersAsNewTo, template_node))

    if contract.conditionals:
        cset = Iri(f"{cid.value}-conditionals")
        g.add(Triple(cid, OASIS.hasConditionalSet, cset))
        g.add(Triple(cset, RDF.type, OASIS.ConditionalSet))
        for j, cond in enumerate(contract.conditionals):
            g.add(Triple(cset, OASIS.hasConditional, cond.id))
            g.add(Triple(cond.id, RDF.type, OASIS.Conditional))
            g.add(_index(cond.id, j))
            body = Iri(f"{cond.id.value}-body")
            head = Iri(f"{cond.id.value}-head")
            g.add(Triple(cond.id, OASIS.hasConditionalBody, body))
            g.add(Triple(body, RDF.type, OASIS.ConditionalBody))
            g.add(Triple(cond.id, OASIS.hasConditionalHead, head))
            g.add(Triple(head, RDF.type, OASIS.ConditionalHead))
            for k, atom in enumerate(cond.body):
                _emit_atom(g, body, k, atom)
            for k, atom in enumerate(cond.head):
                _emit_atom(g, head, k, atom)
    return g


# -- parsing back -----------------------------------------------------------


def _the_one(g: Graph, node: Iri, predicate: Iri, what: str) -> Term:
    values = g.objects(node, predicate)
    if len(values) != 1:
        raise StructuralError(f"{what} at {node.value}: expected exactly one {predicate.value}, found {len(values)}")
    return values[0]


def _node_index(g: Graph, node: Iri) -> int:
    value = _the_one(g, node, OASIS.index, "ordered element")
    if not isinstance(value, Literal):
        raise StructuralError(f"index at {node.value} is not a literal")
    return int(value.lexical)


def _sorted_children(g: Graph, parent: Iri, predicate: Iri) -> list[Iri]:
    nodes = []
    for obj in g.objects(parent, predicate):
        if not isinstance(obj, Iri):
            raise StructuralError(f"{predicate.value} at {parent.value} must point at an IRI node")
        nodes.append(obj)
    return sorted(nodes, key=lambda n: (_node_index(g, n), n.value))


def _parse_template(g: Graph, node: Iri) -> EntryTemplate:
    required = _the_one(g, node, OASIS.requiredClass, "entry template")
    if not isinstance(required, Iri):
        raise StructuralError(f"template {node.value}: required class must be an IRI")
    constraints = []
    for cnode in _sorted_children(g, node, OASIS.hasConstraint):
        predicate = _the_one(g, cnode, OASIS.constraintPredicate, "template constraint")
        if not isinstance(predicate, Iri):
            raise StructuralError(f"constraint {cnode.value}: predicate must be an IRI")
        refs = g.objects(cnode, OASIS.constraintEntryRef)
        objs = g.objects(cnode, OASIS.constraintObject)
        if len(refs) + len(objs) != 1:
            raise StructuralError(f"constraint {cnode.value}: needs exactly one object or entry reference")
        if refs:
            if not isinstance(refs[0], Literal):
                raise StructuralError(f"constraint {cnode.value}: entry reference must be a literal")
            constraints.append(TemplateConstraint(predicate, EntryRef(refs[0].lexical)))
        else:
            constraints.append(TemplateConstraint(predicate, objs[0]))
    return EntryTemplate(required, tuple(constraints))


def _parse_atom_part(g: Graph, node: Iri, allow_terms: bool) -> str | EntryTemplate | Iri | Literal:
    refs = g.objects(node, OASIS.entryRef)
    templates = g.objects(node, OASIS.refersAsNewTo)
    exacts = g.objects(node, OASIS.refersExactlyTo)
    values = g.objects(node, OASIS.hasValue)
    present = [x for x in (refs, templates, exacts, values) if x]
    if len(present) != 1 or len(present[0]) != 1:
        raise StructuralError(f"atom part {node.value}: needs exactly one value")
    if refs:
        if not isinstance(refs[0], Literal):
            raise StructuralError(f"atom part {node.value}: entry reference must be a literal")
        return refs[0].lexical
    if templates:
        if not isinstance(templates[0], Iri):
            raise StructuralError(f"atom part {node.value}: template must be an IRI node")
        return _parse_template(g, templates[0])
    if not allow_terms:
        raise StructuralError(f"atom part {node.value}: only entry references and templates allowed here")
    if exacts:
        if not isinstance(exacts[0], Iri):
            raise StructuralError(f"atom part {node.value}: refersExactlyTo must name an IRI")
        return exacts[0]
    return values[0]


def _parse_atom(g: Graph, node: Iri) -> ConditionalAtom:
    operator = _the_one(g, node, OASIS.hasConditionalOperator, "conditional atom")
    if not isinstance(operator, Iri):
        raise StructuralError(f"atom {node.value}: operator must be an IRI")
    subjects = []
    for part in _sorted_children(g, node, OASIS.hasConditionalSubject):
        value = _parse_atom_part(g, part, allow_terms=False)
        subjects.append(value)
    objects = [
        _parse_atom_part(g, part, allow_terms=True)
        for part in _sorted_children(g, node, OASIS.hasConditionalObject)
    ]
    def names(predicate: Iri) -> list[str]:
        out = []
        for part in _sorted_children(g, node, predicate):
            value = _parse_atom_part(g, part, allow_terms=False)
            if not isinstance(value, str):
                raise StructuralError(f"parameter {part.value}: must reference an entry by name")
            out.append(value)
        return out

    args = []
    for arg in _sorted_children(g, node, OASIS.hasConditionalOperatorArgument):
        key = _the_one(g, arg, OASIS.argumentKey, "operator argument")
        value = _the_one(g, arg, OASIS.hasValue, "operator argument")
        if not isinstance(key, Literal) or not isinstance(value, Literal):
            raise StructuralError(f"operator argument {arg.value}: key and value must be literals")
        args.append((key.lexical, value))

    return ConditionalAtom(
        tuple(subjects),
        operator,
        tuple(objects),
        tuple(names(OASIS.hasConditionalInputParameter)),
        tuple(names(OASIS.hasConditionalOutputParameter)),
        tuple(args),
    )


def graph_to_contract(g: Graph, contract_id: Iri) -> SmartContract:
    types = set(g.objects(contract_id, RDF.type))
    if R2R.IncentiveSmartContract in types:
        kind = ContractKind.INCENTIVE
    elif OASIS.SmartContract in types:
        kind = ContractKind.GENERIC
    else:
        raise StructuralError(f"{contract_id.value} is not typed as a smart contract")

    label = _the_one(g, contract_id, RDFS.label, "smart contract")
    if not isinstance(label, Literal):
        raise StructuralError(f"{contract_id.value}: label must be a literal")

    entry_nodes = _sorted_children(g, contract_id, OASIS.hasSmartContractEntry)
    if not entry_nodes:
        raise StructuralError(f"{contract_id.value} declares no entries")
    entries = []
    for node in entry_nodes:
        node_types = set(g.objects(node, RDF.type))
        if OASIS.SmartContractEntryParticipant in node_types:
            role = EntryRole.PARTICIPANT
        elif OASIS.SmartContractEntryValue in node_types:
            role = EntryRole.VALUE
        else:
            raise StructuralError(f"entry {node.value} is neither participant nor value")
        name = _the_one(g, node, RDFS.label, "smart contract entry")
        if not isinstance(name, Literal):
            raise StructuralError(f"entry {node.value}: name must be a literal")
        exacts = g.objects(node, OASIS.refersExactlyTo)
        templates = g.objects(node, OASIS.refersAsNewTo)
        if len(exacts) + len(templates) != 1:
            raise StructuralError(f"entry {node.value}: needs exactly one binding")
        if exacts:
            if not isinstance(exacts[0], Iri):
                raise StructuralError(f"entry {node.value}: refersExactlyTo must name an IRI")
            binding: Iri | EntryTemplate = exacts[0]
        else:
            if not isinstance(templates[0], Iri):
                raise StructuralError(f"entry {node.value}: template must be an IRI node")
            binding = _parse_template(g, templates[0])
        entries.append(Entry(name.lexical, role, binding))

    conditionals: list[Conditional] = []
    csets = g.objects(contract_id, OASIS.hasConditionalSet)
    if len(csets) > 1:
        raise StructuralError(f"{contract_id.value}: more than one conditional set")
    if csets:
        if not isinstance(csets[0], Iri):
            raise StructuralError(f"{contract_id.value}: conditional set must be an IRI node")
        for cond_id in _sorted_children(g, csets[0], OASIS.hasConditional):
            body_node = _the_one(g, cond_id, OASIS.hasConditionalBody, "conditional")
            head_node = _the_one(g, cond_id, OASIS.hasConditionalHead, "conditional")
            if not isinstance(body_node, Iri) or not isinstance(head_node, Iri):
                raise StructuralError(f"conditional {cond_id.value}: body and head must be IRI nodes")
            body = tuple(_parse_atom(g, a) for a in _sorted_children(g, body_node, OASIS.hasConditionalAtom))
            head = tuple(_parse_atom(g, a) for a in _sorted_children(g, head_node, OASIS.hasConditionalAtom))
            if not body or not head:
                raise StructuralError(f"conditional {cond_id.value}: body and head must be non-empty")
            conditionals.append(Conditional(cond_id, body, head))

    contract = SmartContract(contract_id, label.lexical, tuple(entries), tuple(conditionals), kind)
    validate_contract(contract)
    return contract


def contracts_in_graph(g: Graph) -> list[Iri]:
    """IRIs of all smart contracts asserted in a graph, sorted."""
    found = {t.subject for t in g.match(None, RDF.type, OASIS.SmartContract) if isinstance(t.subject, Iri)}
    found |= {t.subject for t in g.match(None, RDF.type, R2R.IncentiveSmartContract) if isinstance(t.subject, Iri)}
    return sorted(found, key=lambda i: i.value)


# --------------------------------------------------------------------------
# Instantiation
# --------------------------------------------------------------------------


def _class_closure(abox: Graph, cls: Iri) -> set[Iri]:
    """cls plus everything the graph declares as its subclasses."""
    out = {cls}
    frontier = [cls]
    while frontier:
        current = frontier.pop()
        for sub in abox.subjects(RDFS.subClassOf, current):
            if isinstance(sub, Iri) and sub not in out:
                out.add(sub)
                frontier.append(sub)
    return out


def instantiate(
    contract: SmartContract,
    bindings: dict[str, Iri | str],
    abox: Graph,
    now: str,
) -> SmartContractInstance:
    """Bind a contract's entries to individuals, checking templates against
    the A-Box (pass the union with the T-Box when subclass reasoning is
    wanted)."""
    validate_contract(contract)
    declared = {e.name for e in contract.entries}
    normalized: dict[str, Iri] = {}
    for name, value in bindings.items():
        if name not in declared:
            raise BindingError(f"binding names unknown entry {name!r}")
        normalized[name] = value if isinstance(value, Iri) else Iri(value)

    for entry in contract.entries:
        if isinstance(entry.binding, Iri):
            bound = normalized.setdefault(entry.name, entry.binding)
            if bound != entry.binding:
                raise BindingError(
                    f"entry {entry.name!r} is fixed to {entry.binding.value}, cannot bind {bound.value}"
                )

    for entry in contract.participants():
        if entry.name not in normalized:
            raise BindingError(f"participant entry {entry.name!r} is not bound")

    for entry in contract.entries:
        individual = normalized.get(entry.name)
        if individual is None or not isinstance(entry.binding, EntryTemplate):
            continue
        template = entry.binding
        acceptable = _class_closure(abox, template.required_class)
        stated = set(abox.objects(individual, RDF.type))
        if not (stated & acceptable):
            raise TemplateMismatchError(
                f"{individual.value} bound to entry {entry.name!r} is not typed {template.required_class.value}"
            )
        for constraint in template.constraints:
            if constraint.predicate == AG.distinctFrom:
                other = normalized.get(constraint.object.name) if isinstance(constraint.object, EntryRef) else None
                if other is not None and other == individual:
                    raise TemplateMismatchError(
                        f"entry {entry.name!r} must be distinct from {constraint.object.name!r}"
                    )
                continue
            if isinstance(constraint.object, EntryRef):
                target = normalized.get(constraint.object.name)
                if target is None:
                    continue  # unbound value entry: nothing to check yet
                expected = Triple(individual, constraint.predicate, target)
            else:
                expected = Triple(individual, constraint.predicate, constraint.object)
            if expected not in abox:
                raise TemplateMismatchError(
                    f"{individual.value} violates constraint "
                    f"{constraint.predicate.value} of entry {entry.name!r}"
                )

    pairs = tuple(sorted(normalized.items()))
    digest = hashlib.sha256(
        "\n".join(f"{name}={iri.value}" for name, iri in pairs).encode("utf-8")
    ).hexdigest()[:12]
    instance_id = Iri(f"{contract.id.value}-instance-{digest}")
    return SmartContractInstance(instance_id, contract.id, pairs, now)
