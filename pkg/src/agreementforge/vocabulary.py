"""Vocabulary emission and lightweight structural validation.

Emits four graphs:

* :func:`build_tbox` — the ridesharing-agreements T-Box under ``r2r:``,
  with the reused booking/organisation classes it extends.
* :func:`build_event_taxonomy` — the SKOS scheme of ridesharing booking
  events under ``rbe:`` (five top concepts, responsibility split below).
* :func:`build_oasis_model` — declarations for the smart-contract model
  classes and the structural linking properties the RDF encoding uses.
* :func:`build_agreement_vocab` — agreement-dataset terms under ``ag:``:
  the pay/refund/association action individuals, voucher-beneficiary and
  price data properties, and the crowd TSP individual that acts as the
  incentive provider.

:func:`validate` checks an A-Box against a T-Box: undeclared predicates,
domain/range violations (closed world over stated types plus subclass
closure), subclass cycles, and untyped individuals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from agreementforge.rdf import (
    AG,
    DCTERMS,
    OASIS,
    OSDM,
    OWL,
    R2R,
    RBE,
    RDF,
    RDF_LANG_STRING,
    RDFS,
    SKOS,
    TMORG,
    XSD,
    BlankNode,
    Graph,
    Iri,
    Literal,
    Term,
    Triple,
    ntriples,
)

CC_BY = Iri("https://creativecommons.org/licenses/by/4.0/")

TERMS_ONTOLOGY = Iri("https://w3id.org/ride2rail/terms")
EVENTS_ONTOLOGY = Iri("https://w3id.org/ride2rail/rb-events")
EVENT_SCHEME = RBE.RidesharingBookingEvents

#: Default demo provider bound as the incentive issuer.
CROWD_TSP = AG.crowdTsp


class TermKind(Enum):
    CLASS = "class"
    OBJECT_PROPERTY = "object-property"
    DATA_PROPERTY = "data-property"
    INDIVIDUAL = "individual"
    SKOS_CONCEPT = "skos-concept"


@dataclass(frozen=True)
class VocabTerm:
    curie: str
    iri: Iri
    kind: TermKind


def _words(local: str) -> str:
    return " ".join(re.findall(r"[A-Z]+(?![a-z])|[A-Z][a-z0-9]*|[a-z0-9]+", local))


def _class_label(local: str) -> str:
    return _words(local)


def _property_label(local: str) -> str:
    return _words(local).lower()


# --------------------------------------------------------------------------
# Term tables
# --------------------------------------------------------------------------

_R2R_CLASSES = [
    "RidesharingBooking",
    "OfferItem",
    "TravelEpisode",
    "TransportationService",
    "RidesharingLeg",
    "Ride",
    "Driver",
    "InventoryAllocation",
    "Consumable",
    "InventoryReservation",
    "IncentiveSmartContract",
    "Voucher",
    "DiscountVoucher",
    "SeatUpgradeVoucher",
]

_REUSED_CLASSES = [
    ("osdm", OSDM.Booking),
    ("osdm", OSDM.Offer),
    ("osdm", OSDM.Trip),
    ("osdm", OSDM.Passenger),
    ("osdm", OSDM.Price),
    ("osdm", OSDM.Reservation),
    ("tmorg", TMORG.Operator),
    ("tmorg", TMORG.Organisation),
    ("oasis", OASIS.SmartContract),
    ("oasis", OASIS.Action),
    ("skos", SKOS.Concept),
]

_SUBCLASS_AXIOMS = [
    (R2R.RidesharingBooking, OSDM.Booking),
    (R2R.RidesharingLeg, R2R.TravelEpisode),
    (R2R.Ride, R2R.TransportationService),
    (R2R.Driver, TMORG.Operator),
    (R2R.InventoryReservation, OSDM.Reservation),
    (R2R.IncentiveSmartContract, OASIS.SmartContract),
    (R2R.DiscountVoucher, R2R.Voucher),
    (R2R.SeatUpgradeVoucher, R2R.Voucher),
    # An operator is an organisation; needed so vouchers issued by the
    # crowd TSP satisfy the issuedBy range.
    (TMORG.Operator, TMORG.Organisation),
]

# (local name, domain, range, is data property)
_R2R_PROPERTIES: list[tuple[str, Iri | None, Iri | None, bool]] = [
    ("hasOfferItem", OSDM.Booking, R2R.OfferItem, False),
    ("hasPrice", R2R.OfferItem, OSDM.Price, False),
    ("forTravelEpisode", R2R.OfferItem, R2R.TravelEpisode, False),
    ("includesReservation", R2R.OfferItem, R2R.InventoryReservation, False),
    ("hasTransportationService", R2R.TravelEpisode, R2R.TransportationService, False),
    ("operatedBy", R2R.TransportationService, R2R.Driver, False),
    ("hasInventoryAllocation", R2R.Ride, R2R.InventoryAllocation, False),
    ("consumable", None, R2R.Consumable, False),
    ("quantity", None, XSD.nonNegativeInteger, True),
    ("includesTravelEpisode", OSDM.Trip, R2R.TravelEpisode, False),
    ("origin", R2R.TravelEpisode, XSD.string, True),
    ("destination", R2R.TravelEpisode, XSD.string, True),
    ("issuedBy", R2R.Voucher, TMORG.Organisation, False),
    ("discountPercentage", R2R.DiscountVoucher, XSD.decimal, True),
    ("bookedBy", OSDM.Booking, OSDM.Passenger, False),
    ("relatesToEvent", OSDM.Booking, SKOS.Concept, False),
]

_R2R_INDIVIDUALS = [
    ("Seat", R2R.Consumable),
    ("issue", OASIS.Action),
    ("book", OASIS.Action),
]

#: Top-level event concepts mapped to their responsibility refinements.
EVENT_TAXONOMY: dict[str, list[str]] = {
    "RidesharingStarted": [],
    "RidesharingCompleted": [],
    "RidesharingCancelled": ["RidesharingCancelledByDriver", "RidesharingCancelledByPassenger"],
    "RidesharingDelayed": ["RidesharingDelayedByDriver", "RidesharingDelayedByPassenger"],
    "RidesharingNoShow": ["RidesharingNoShowDriver", "RidesharingNoShowPassenger"],
}

_OASIS_CLASSES = [
    "SmartContract",
    "SmartContractEntry",
    "SmartContractEntryParticipant",
    "SmartContractEntryValue",
    "EntryTemplate",
    "TemplateConstraint",
    "SmartContractInstance",
    "EntryBinding",
    "Action",
    "Conditional",
    "ConditionalSet",
    "ConditionalBody",
    "ConditionalHead",
    "ConditionalAtom",
    "ConditionalSubject",
    "ConditionalObject",
    "ConditionalOperator",
    "ConditionalParameter",
    "ConditionalInputParameter",
    "ConditionalOutputParameter",
    "ConditionalOperatorArgument",
]

_OASIS_SUBCLASS = [
    (OASIS.SmartContractEntryParticipant, OASIS.SmartContractEntry),
    (OASIS.SmartContractEntryValue, OASIS.SmartContractEntry),
    (OASIS.ConditionalInputParameter, OASIS.ConditionalParameter),
    (OASIS.ConditionalOutputParameter, OASIS.ConditionalParameter),
]

_OASIS_PROPERTIES: list[tuple[str, Iri | None, Iri | None, bool]] = [
    ("hasSmartContractEntry", OASIS.SmartContract, OASIS.SmartContractEntry, False),
    ("refersExactlyTo", None, None, False),
    ("refersAsNewTo", None, OASIS.EntryTemplate, False),
    ("requiredClass", OASIS.EntryTemplate, OWL.Class, False),
    ("hasConstraint", OASIS.EntryTemplate, OASIS.TemplateConstraint, False),
    ("constraintPredicate", OASIS.TemplateConstraint, None, False),
    ("constraintObject", OASIS.TemplateConstraint, None, False),
    ("constraintEntryRef", OASIS.TemplateConstraint, XSD.string, True),
    ("hasConditionalSet", OASIS.SmartContract, OASIS.ConditionalSet, False),
    ("hasConditional", OASIS.ConditionalSet, OASIS.Conditional, False),
    ("hasConditionalBody", OASIS.Conditional, OASIS.ConditionalBody, False),
    ("hasConditionalHead", OASIS.Conditional, OASIS.ConditionalHead, False),
    ("hasConditionalAtom", None, OASIS.ConditionalAtom, False),
    ("hasConditionalSubject", OASIS.ConditionalAtom, OASIS.ConditionalSubject, False),
    ("hasConditionalObject", OASIS.ConditionalAtom, OASIS.ConditionalObject, False),
    ("hasConditionalOperator", OASIS.ConditionalAtom, None, False),
    ("hasConditionalInputParameter", OASIS.ConditionalAtom, OASIS.ConditionalInputParameter, False),
    ("hasConditionalOutputParameter", OASIS.ConditionalAtom, OASIS.ConditionalOutputParameter, False),
    ("hasConditionalOperatorArgument", OASIS.ConditionalAtom, OASIS.ConditionalOperatorArgument, False),
    ("entryRef", None, XSD.string, True),
    ("hasValue", None, None, True),
    ("argumentKey", OASIS.ConditionalOperatorArgument, XSD.string, True),
    ("index", None, XSD.integer, True),
    ("instanceOf", OASIS.SmartContractInstance, OASIS.SmartContract, False),
    ("hasEntryBinding", OASIS.SmartContractInstance, OASIS.EntryBinding, False),
    ("createdAt", OASIS.SmartContractInstance, XSD.dateTime, True),
]

_AG_ACTIONS = ["isAssociatedWith", "pay", "refund"]

_AG_PROPERTIES: list[tuple[str, Iri | None, Iri | None, bool]] = [
    ("beneficiary", R2R.Voucher, OSDM.Passenger, False),
    ("distinctFrom", None, None, False),
    ("tripIncludesEpisodeOfClass", None, OWL.Class, False),
    ("tripIncludesEpisodeNotOfClass", None, OWL.Class, False),
    ("amountMinor", OSDM.Price, XSD.integer, True),
    ("currency", OSDM.Price, XSD.string, True),
]


def _declare_property(g: Graph, iri: Iri, domain: Iri | None, rng: Iri | None, data: bool) -> None:
    g.add(Triple(iri, RDF.type, OWL.DatatypeProperty if data else OWL.ObjectProperty))
    g.add(Triple(iri, RDFS.label, Literal(_property_label(iri.value.rsplit("#", 1)[-1]))))
    if domain is not None:
        g.add(Triple(iri, RDFS.domain, domain))
    if rng is not None:
        g.add(Triple(iri, RDFS.range, rng))


def _declare_class(g: Graph, iri: Iri) -> None:
    g.add(Triple(iri, RDF.type, OWL.Class))
    g.add(Triple(iri, RDFS.label, Literal(_class_label(iri.value.rsplit("#", 1)[-1]))))


# --------------------------------------------------------------------------
# Graph builders
# --------------------------------------------------------------------------


def build_tbox() -> Graph:
    """The agreements T-Box: classes, subclass axioms, properties, header."""
    g = Graph(prefixes={p: ns for p, ns in _vocab_prefixes().items()})
    g.add(Triple(TERMS_ONTOLOGY, RDF.type, OWL.Ontology))
    g.add(Triple(TERMS_ONTOLOGY, RDFS.label, Literal("Ride2Rail Ontology for Agreements")))
    g.add(Triple(TERMS_ONTOLOGY, DCTERMS.license, CC_BY))

    for local in _R2R_CLASSES:
        _declare_class(g, R2R(local))
    for _, iri in _REUSED_CLASSES:
        _declare_class(g, iri)
    for sub, sup in _SUBCLASS_AXIOMS:
        g.add(Triple(sub, RDFS.subClassOf, sup))
    for local, domain, rng, data in _R2R_PROPERTIES:
        _declare_property(g, R2R(local), domain, rng, data)
    for local, cls in _R2R_INDIVIDUALS:
        iri = R2R(local)
        g.add(Triple(iri, RDF.type, cls))
        g.add(Triple(iri, RDFS.label, Literal(_class_label(local) if local[0].isupper() else local)))
    return g


def build_event_taxonomy() -> Graph:
    """SKOS concept scheme for ridesharing booking events."""
    g = Graph(prefixes=_vocab_prefixes())
    g.add(Triple(EVENTS_ONTOLOGY, RDF.type, OWL.Ontology))
    g.add(Triple(EVENTS_ONTOLOGY, RDFS.label, Literal("Ridesharing Booking Events")))
    g.add(Triple(EVENTS_ONTOLOGY, DCTERMS.license, CC_BY))

    g.add(Triple(EVENT_SCHEME, RDF.type, SKOS.ConceptScheme))
    g.add(Triple(EVENT_SCHEME, SKOS.prefLabel, Literal("Ridesharing Booking Events", RDF_LANG_STRING, "en")))

    for top, children in EVENT_TAXONOMY.items():
        top_iri = RBE(top)
        g.add(Triple(top_iri, RDF.type, SKOS.Concept))
        g.add(Triple(top_iri, SKOS.inScheme, EVENT_SCHEME))
        g.add(Triple(top_iri, SKOS.topConceptOf, EVENT_SCHEME))
        g.add(Triple(EVENT_SCHEME, SKOS.hasTopConcept, top_iri))
        g.add(Triple(top_iri, SKOS.prefLabel, Literal(_class_label(top), RDF_LANG_STRING, "en")))
        for child in children:
            child_iri = RBE(child)
            g.add(Triple(child_iri, RDF.type, SKOS.Concept))
            g.add(Triple(child_iri, SKOS.inScheme, EVENT_SCHEME))
            g.add(Triple(child_iri, SKOS.broader, top_iri))
            g.add(Triple(child_iri, SKOS.prefLabel, Literal(_class_label(child), RDF_LANG_STRING, "en")))
    return g


def build_oasis_model() -> Graph:
    """Declarations for the smart-contract model vocabulary."""
    g = Graph(prefixes=_vocab_prefixes())
    for local in _OASIS_CLASSES:
        _declare_class(g, OASIS(local))
    for sub, sup in _OASIS_SUBCLASS:
        g.add(Triple(sub, RDFS.subClassOf, sup))
    for local, domain, rng, data in _OASIS_PROPERTIES:
        _declare_property(g, OASIS(local), domain, rng, data)
    return g


def build_agreement_vocab() -> Graph:
    """Agreement-dataset terms: action individuals, helper properties, demo TSP."""
    g = Graph(prefixes=_vocab_prefixes())
    for local in _AG_ACTIONS:
        iri = AG(local)
        g.add(Triple(iri, RDF.type, OASIS.Action))
        g.add(Triple(iri, RDFS.label, Literal(_property_label(local))))
    for local, domain, rng, data in _AG_PROPERTIES:
        _declare_property(g, AG(local), domain, rng, data)
    g.add(Triple(CROWD_TSP, RDF.type, TMORG.Operator))
    g.add(Triple(CROWD_TSP, RDFS.label, Literal("Crowd-based Travel Service Provider")))
    return g


def support_graph() -> Graph:
    """Everything contract graphs rely on beyond the T-Box itself."""
    return build_oasis_model().union(build_agreement_vocab())


def _vocab_prefixes() -> dict[str, str]:
    return {
        "rdf": RDF.base,
        "rdfs": RDFS.base,
        "owl": OWL.base,
        "xsd": XSD.base,
        "skos": SKOS.base,
        "dcterms": DCTERMS.base,
        "r2r": R2R.base,
        "rbe": RBE.base,
        "ag": AG.base,
        "oasis": OASIS.base,
        "osdm": OSDM.base,
        "tmorg": TMORG.base,
    }


def vocab_terms() -> list[VocabTerm]:
    """Registry of every declared term (one kind per IRI)."""
    terms: list[VocabTerm] = []
    for local in _R2R_CLASSES:
        terms.append(VocabTerm(f"r2r:{local}", R2R(local), TermKind.CLASS))
    for prefix, iri in _REUSED_CLASSES:
        terms.append(VocabTerm(f"{prefix}:{iri.value.rsplit('#', 1)[-1]}", iri, TermKind.CLASS))
    for local, _, _, data in _R2R_PROPERTIES:
        kind = TermKind.DATA_PROPERTY if data else TermKind.OBJECT_PROPERTY
        terms.append(VocabTerm(f"r2r:{local}", R2R(local), kind))
    for local, _ in _R2R_INDIVIDUALS:
        terms.append(VocabTerm(f"r2r:{local}", R2R(local), TermKind.INDIVIDUAL))
    for top, children in EVENT_TAXONOMY.items():
        terms.append(VocabTerm(f"rbe:{top}", RBE(top), TermKind.SKOS_CONCEPT))
        for child in children:
            terms.append(VocabTerm(f"rbe:{child}", RBE(child), TermKind.SKOS_CONCEPT))
    terms.append(VocabTerm("rbe:RidesharingBookingEvents", EVENT_SCHEME, TermKind.INDIVIDUAL))
    return terms


# --------------------------------------------------------------------------
# Event taxonomy helpers
# --------------------------------------------------------------------------


def event_parent() -> dict[str, str]:
    """Child concept IRI -> broader concept IRI."""
    out: dict[str, str] = {}
    for top, children in EVENT_TAXONOMY.items():
        for child in children:
            out[RBE(child).value] = RBE(top).value
    return out


def event_concepts() -> set[str]:
    all_iris = set(event_parent())
    all_iris.update(RBE(top).value for top in EVENT_TAXONOMY)
    return all_iris


def top_ancestor(concept: str) -> str:
    """Top-level concept IRI for any taxonomy concept (identity for tops)."""
    parents = event_parent()
    while concept in parents:
        concept = parents[concept]
    return concept


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Finding:
    severity: Severity
    code: str
    subject: str
    message: str


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity is Severity.ERROR]

    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity is Severity.WARNING]


#: Annotation/built-in predicates that need no declaration.
WELL_KNOWN_PREDICATES = {
    RDF.type,
    RDFS.subClassOf,
    RDFS.subPropertyOf,
    RDFS.domain,
    RDFS.range,
    RDFS.label,
    RDFS.comment,
    RDFS.seeAlso,
    DCTERMS.license,
    DCTERMS.title,
    OWL.versionInfo,
    SKOS.prefLabel,
    SKOS.altLabel,
    SKOS.definition,
    SKOS.broader,
    SKOS.narrower,
    SKOS.inScheme,
    SKOS.topConceptOf,
    SKOS.hasTopConcept,
}

_PROPERTY_TYPES = {OWL.ObjectProperty, OWL.DatatypeProperty, OWL.AnnotationProperty, RDF.Property}


def _subclass_closure(edges: dict[str, set[str]]) -> dict[str, set[str]]:
    """Reflexive-transitive superclass sets, tolerant of cycles."""
    closure: dict[str, set[str]] = {}

    def supers(node: str, seen: frozenset[str]) -> set[str]:
        if node in closure:
            return closure[node]
        result = {node}
        for parent in edges.get(node, ()):
            if parent in seen:
                continue
            result |= supers(parent, seen | {node})
        closure[node] = result
        return result

    for node in list(edges):
        supers(node, frozenset())
    return closure


def _find_cycles(edges: dict[str, set[str]]) -> list[list[str]]:
    """Strongly connected components of size > 1 (plus self loops)."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    sccs: list[list[str]] = []

    def strongconnect(v: str):
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        for w in sorted(edges.get(v, ())):
            if w not in index:
                strongconnect(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            if len(comp) > 1 or v in edges.get(v, ()):
                sccs.append(sorted(comp))
    for v in sorted(edges):
        if v not in index:
            strongconnect(v)
    return sccs


def _is_datatype(iri: Iri) -> bool:
    return iri.value.startswith(XSD.base) or iri.value == RDF_LANG_STRING


def validate(abox: Graph, tbox: Graph) -> ValidationReport:
    """Structural A-Box validation against T-Box declarations."""
    findings: list[Finding] = []

    declared: set[Iri] = set()
    for t in tbox:
        if t.predicate == RDF.type and t.object in _PROPERTY_TYPES and isinstance(t.subject, Iri):
            declared.add(t.subject)

    domains: dict[Iri, Iri] = {}
    ranges: dict[Iri, Iri] = {}
    for t in tbox:
        if t.predicate == RDFS.domain and isinstance(t.subject, Iri) and isinstance(t.object, Iri):
            domains[t.subject] = t.object
        if t.predicate == RDFS.range and isinstance(t.subject, Iri) and isinstance(t.object, Iri):
            ranges[t.subject] = t.object

    tbox_edges: dict[str, set[str]] = {}
    union_edges: dict[str, set[str]] = {}
    for source, edges in ((tbox, tbox_edges), (tbox, union_edges), (abox, union_edges)):
        for t in source:
            if t.predicate == RDFS.subClassOf and isinstance(t.subject, Iri) and isinstance(t.object, Iri):
                edges.setdefault(t.subject.value, set()).add(t.object.value)

    for comp in _find_cycles(tbox_edges):
        findings.append(
            Finding(
                Severity.ERROR,
                "CLASS_CYCLE",
                comp[0],
                "subclass cycle: " + " -> ".join(comp + [comp[0]]),
            )
        )

    closure = _subclass_closure(union_edges)

    def types_of(term: Term) -> set[str]:
        stated = set()
        for g in (abox, tbox):
            for t in g.match(term, RDF.type, None):
                if isinstance(t.object, Iri):
                    stated.add(t.object.value)
        expanded: set[str] = set()
        for cls in stated:
            expanded |= closure.get(cls, {cls})
        return expanded

    seen_predicates: set[Iri] = set()
    seen_subjects: list[Iri | BlankNode] = []
    seen_subject_keys: set[str] = set()

    for t in abox:
        if t.predicate not in seen_predicates:
            seen_predicates.add(t.predicate)
            if t.predicate not in declared and t.predicate not in WELL_KNOWN_PREDICATES:
                findings.append(
                    Finding(
                        Severity.WARNING,
                        "UNDECLARED_PROPERTY",
                        t.predicate.value,
                        f"predicate {t.predicate.value} is not declared in the T-Box",
                    )
                )
        key = ntriples(t.subject)
        if key not in seen_subject_keys:
            seen_subject_keys.add(key)
            seen_subjects.append(t.subject)

        if t.predicate in WELL_KNOWN_PREDICATES:
            continue

        domain = domains.get(t.predicate)
        if domain is not None:
            subject_types = types_of(t.subject)
            if subject_types and domain.value not in subject_types:
                findings.append(
                    Finding(
                        Severity.ERROR,
                        "DOMAIN_RANGE",
                        ntriples(t.subject),
                        f"subject of {t.predicate.value} is not typed {domain.value}",
                    )
                )
        rng = ranges.get(t.predicate)
        if rng is not None:
            if _is_datatype(rng):
                if not isinstance(t.object, Literal) or t.object.datatype != rng.value:
                    findings.append(
                        Finding(
                            Severity.ERROR,
                            "DOMAIN_RANGE",
                            ntriples(t.subject),
                            f"object of {t.predicate.value} must be a {rng.value} literal",
                        )
                    )
            else:
                if isinstance(t.object, Literal):
                    findings.append(
                        Finding(
                            Severity.ERROR,
                            "DOMAIN_RANGE",
                            ntriples(t.subject),
                            f"object of {t.predicate.value} must be an individual typed {rng.value}",
                        )
                    )
                else:
                    object_types = types_of(t.object)
                    if object_types and rng.value not in object_types:
                        findings.append(
                            Finding(
                                Severity.ERROR,
                                "DOMAIN_RANGE",
                                ntriples(t.object),
                                f"object of {t.predicate.value} is not typed {rng.value}",
                            )
                        )

    for subject in seen_subjects:
        if not abox.match(subject, RDF.type, None) and not tbox.match(subject, RDF.type, None):
            findings.append(
                Finding(
                    Severity.WARNING,
                    "UNTYPED",
                    ntriples(subject),
                    "individual has no rdf:type",
                )
            )

    findings.sort(key=lambda f: (f.severity.value, f.code, f.subject, f.message))
    return ValidationReport(findings)
