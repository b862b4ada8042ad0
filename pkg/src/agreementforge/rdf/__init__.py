"""Minimal RDF substrate: terms, graphs, Turtle round-trip, isomorphism."""

from agreementforge.rdf.isomorphism import isomorphic
from agreementforge.rdf.terms import (
    AG,
    DCTERMS,
    DEFAULT_PREFIXES,
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
    XSD_STRING,
    BlankNode,
    Graph,
    Iri,
    Literal,
    Namespace,
    Term,
    Triple,
    ntriples,
)
from agreementforge.rdf.turtle import parse_turtle, serialize_turtle

__all__ = [
    "AG",
    "DCTERMS",
    "DEFAULT_PREFIXES",
    "OASIS",
    "OSDM",
    "OWL",
    "R2R",
    "RBE",
    "RDF",
    "RDF_LANG_STRING",
    "RDFS",
    "SKOS",
    "TMORG",
    "XSD",
    "XSD_STRING",
    "BlankNode",
    "Graph",
    "Iri",
    "Literal",
    "Namespace",
    "Term",
    "Triple",
    "isomorphic",
    "ntriples",
    "parse_turtle",
    "serialize_turtle",
]
