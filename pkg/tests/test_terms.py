import pytest

from agreementforge.errors import PrefixError, TermError
from agreementforge.rdf import (
    R2R,
    RDF,
    XSD,
    BlankNode,
    Graph,
    Iri,
    Literal,
    Triple,
    ntriples,
)


def test_iri_requires_scheme():
    Iri("urn:x")
    Iri("https://w3id.org/ride2rail/terms#Ride")
    for bad in ("no-scheme", "/path:oops", "#frag:oops", "?q:oops", "relative/path"):
        with pytest.raises(TermError):
            Iri(bad)


def test_blank_node_label_charset():
    BlankNode("b1")
    BlankNode("x_Y_9")
    for bad in ("", "a b", "a-b", "a:b"):
        with pytest.raises(TermError):
            BlankNode(bad)


def test_language_tag_needs_langstring():
    Literal("hi", "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString", "en")
    with pytest.raises(TermError):
        Literal("hi", XSD.string.value, "en")
    with pytest.raises(TermError):
        Literal("hi", "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString")


def test_triple_positions():
    with pytest.raises(TermError):
        Triple(Literal("x"), RDF.type, R2R.Ride)
    with pytest.raises(TermError):
        Triple(R2R.Ride, BlankNode("b"), R2R.Ride)  # type: ignore[arg-type]


def test_insert_is_idempotent():
    g = Graph()
    t = Triple(R2R.Seat, RDF.type, R2R.Consumable)
    g.add(t)
    g.add(t)
    assert len(g) == 1
    assert t in g


def test_prefix_rebinding_rejected():
    g = Graph()
    g.bind("r2r", R2R)
    g.bind("r2r", R2R)  # same namespace is fine
    with pytest.raises(PrefixError):
        g.bind("r2r", "http://elsewhere.example/")


def test_match_against_scan_oracle():
    fixture = [
        Triple(Iri("urn:ride1"), RDF.type, R2R.Ride),
        Triple(Iri("urn:ride2"), RDF.type, R2R.Ride),
        Triple(Iri("urn:ride1"), R2R.operatedBy, Iri("urn:d1")),
        Triple(Iri("urn:b1"), RDF.type, R2R.RidesharingBooking),
    ]
    g = Graph(fixture)
    expected = [t for t in fixture if t.predicate == RDF.type and t.object == R2R.Ride]
    assert len(expected) == 2
    assert set(g.match(None, RDF.type, R2R.Ride)) == set(expected)


def test_match_empty_graph():
    assert Graph().match() == []


def test_fully_bound_match_is_membership():
    t = Triple(Iri("urn:a"), RDF.type, R2R.Ride)
    g = Graph([t])
    assert g.match(t.subject, t.predicate, t.object) == [t]
    assert g.match(t.subject, t.predicate, R2R.Driver) == []


def test_match_returns_all_triples_sorted():
    triples = [
        Triple(Iri("urn:b"), RDF.type, R2R.Ride),
        Triple(Iri("urn:a"), RDF.type, R2R.Ride),
        Triple(Iri("urn:a"), R2R.origin, Literal("x")),
    ]
    g = Graph(triples)
    listed = g.match()
    assert len(listed) == len(triples)
    keys = [t.sort_key() for t in listed]
    assert keys == sorted(keys)


def test_ntriples_rendering():
    assert ntriples(Iri("urn:x")) == "<urn:x>"
    assert ntriples(BlankNode("b")) == "_:b"
    assert ntriples(Literal("a\nb")) == '"a\\nb"'
    assert ntriples(Literal("1", XSD.integer.value)) == '"1"^^<http://www.w3.org/2001/XMLSchema#integer>'
