import random

import pytest

from agreementforge.errors import ParseError, PrefixError, UnsupportedConstructError
from agreementforge.rdf import (
    R2R,
    RDF,
    RDF_LANG_STRING,
    XSD,
    BlankNode,
    Graph,
    Iri,
    Literal,
    Triple,
    isomorphic,
    parse_turtle,
    serialize_turtle,
)


def test_empty_graph_with_prefix_is_one_line():
    g = Graph(prefixes={"r2r": R2R})
    assert serialize_turtle(g) == "@prefix r2r: <https://w3id.org/ride2rail/terms#> .\n"


def test_seat_statement_compacts():
    g = Graph(prefixes={"r2r": R2R})
    g.add(Triple(R2R.Seat, RDF.type, R2R.Consumable))
    assert "r2r:Seat a r2r:Consumable ." in serialize_turtle(g)


def test_typed_literal_lexical_form_survives():
    g = Graph(prefixes={"xsd": XSD, "ex": "http://ex.org/"})
    g.add(Triple(Iri("http://ex.org/a"), Iri("http://ex.org/p"), Literal("10", XSD.decimal.value)))
    text = serialize_turtle(g)
    assert '"10"^^xsd:decimal' in text
    back = parse_turtle(text)
    literal = back.match()[0].object
    assert literal == Literal("10", XSD.decimal.value)


def test_serialization_deterministic():
    triples = [
        Triple(Iri("http://ex.org/s2"), Iri("http://ex.org/p"), Literal("x")),
        Triple(Iri("http://ex.org/s1"), RDF.type, R2R.Ride),
        Triple(Iri("http://ex.org/s1"), Iri("http://ex.org/p"), Iri("http://ex.org/o")),
    ]
    a = Graph(triples, prefixes={"r2r": R2R})
    b = Graph(reversed(triples), prefixes={"r2r": R2R})
    assert serialize_turtle(a) == serialize_turtle(b)


def test_parse_single_statement():
    g = parse_turtle("@prefix r2r: <https://w3id.org/ride2rail/terms#> .\nr2r:Seat a r2r:Consumable .")
    assert g.match() == [Triple(R2R.Seat, RDF.type, R2R.Consumable)]


def test_parse_object_and_predicate_lists():
    text = """
@prefix ex: <http://ex.org/> .
ex:s ex:p ex:a, ex:b ;
    ex:q "lit" .
"""
    g = parse_turtle(text)
    assert len(g) == 3


def test_parse_comments_and_blank_nodes():
    text = """
@prefix ex: <http://ex.org/> . # a comment
# full line comment
_:b1 ex:p _:b2 .
"""
    g = parse_turtle(text)
    assert g.match() == [Triple(BlankNode("b1"), Iri("http://ex.org/p"), BlankNode("b2"))]


def test_parse_language_tag():
    g = parse_turtle('@prefix ex: <http://ex.org/> .\nex:s ex:p "hallo"@de .')
    assert g.match()[0].object == Literal("hallo", RDF_LANG_STRING, "de")


def test_unknown_prefix_is_error():
    with pytest.raises(ParseError) as err:
        parse_turtle("x:a x:b x:c .")
    assert "unknown prefix" in str(err.value)


def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_turtle("@prefix ex: <http://ex.org/> .\nex:s ex:p .")
    assert err.value.line == 2
    assert err.value.column > 0


def test_collections_unsupported():
    with pytest.raises(UnsupportedConstructError):
        parse_turtle("@prefix x: <http://x.org/> .\nx:a x:b ( x:c ) .")


def test_anonymous_blank_nodes_unsupported():
    with pytest.raises(UnsupportedConstructError):
        parse_turtle("@prefix x: <http://x.org/> .\nx:a x:b [ x:c x:d ] .")


def test_numeric_shorthand_rejected():
    with pytest.raises(ParseError):
        parse_turtle("@prefix x: <http://x.org/> .\nx:a x:b 42 .")


def test_duplicate_prefix_directive_conflict():
    with pytest.raises(PrefixError):
        parse_turtle("@prefix x: <http://x.org/> .\n@prefix x: <http://y.org/> .")


def test_escapes_round_trip():
    tricky = 'quote " backslash \\ newline \n tab \t end'
    g = Graph(prefixes={"ex": "http://ex.org/"})
    g.add(Triple(Iri("http://ex.org/s"), Iri("http://ex.org/p"), Literal(tricky)))
    back = parse_turtle(serialize_turtle(g))
    assert back.match()[0].object == Literal(tricky)


# -- randomized round-trip corpus -------------------------------------------

_CLASSES = [R2R.Ride, R2R.Driver, R2R.RidesharingBooking, R2R.Voucher]
_PREDICATES = [RDF.type, R2R.origin, R2R.bookedBy, R2R.quantity, Iri("http://ex.org/p")]


def random_graph(rng: random.Random) -> Graph:
    g = Graph(prefixes={"r2r": R2R, "ex": "http://ex.org/", "xsd": XSD})
    subjects = [Iri(f"http://ex.org/s{i}") for i in range(4)] + [BlankNode(f"b{i}") for i in range(3)]
    for _ in range(rng.randrange(1, 18)):
        s = rng.choice(subjects)
        p = rng.choice(_PREDICATES)
        kind = rng.randrange(4)
        if kind == 0:
            o = rng.choice(_CLASSES)
        elif kind == 1:
            o = rng.choice(subjects)
            if isinstance(o, Literal):  # pragma: no cover - subjects never literals
                o = R2R.Ride
        elif kind == 2:
            o = Literal(rng.choice(["plain", 'with "quotes"', "line\nbreak", "unicode ✓", ""]))
        else:
            o = Literal(str(rng.randrange(100)), XSD.integer.value)
        g.add(Triple(s, p, o))
    return g


def test_round_trip_corpus():
    rng = random.Random(20240501)
    for _ in range(60):
        g = random_graph(rng)
        again = parse_turtle(serialize_turtle(g))
        assert isomorphic(g, again)
        # serialize is also a fixpoint after one round
        assert serialize_turtle(again) == serialize_turtle(g)
