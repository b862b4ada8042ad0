"""RDF data model: terms, triples, and an in-memory graph.

The graph keeps set semantics over triples plus a prefix table used by the
Turtle serializer.  Term ordering everywhere is the lexicographic order of
the N-Triples rendering, which makes every listing operation deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from agreementforge.errors import PrefixError, TermError

_BLANK_LABEL = re.compile(r"^[A-Za-z0-9_]+$")
_IRI_FORBIDDEN = re.compile(r'[\x00-\x20<>"{}|^`\\]')

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _is_absolute_iri(text: str) -> bool:
    """A scheme separator ':' must come before any '/', '#' or '?'."""
    colon = text.find(":")
    if colon <= 0:
        return False
    for ch in "/#?":
        pos = text.find(ch)
        if pos != -1 and pos < colon:
            return False
    return True


@dataclass(frozen=True)
class Iri:
    value: str

    def __post_init__(self):
        if not _is_absolute_iri(self.value):
            raise TermError(f"not an absolute IRI: {self.value!r}")
        if _IRI_FORBIDDEN.search(self.value):
            raise TermError(f"IRI contains forbidden character: {self.value!r}")

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BlankNode:
    label: str

    def __post_init__(self):
        if not _BLANK_LABEL.match(self.label):
            raise TermError(f"invalid blank node label: {self.label!r}")

    def __str__(self) -> str:
        return f"_:{self.label}"


# Datatype IRIs needed for literal invariants; the full namespace objects
# live below and would be a circular definition here.
XSD_STRING = "http://www.w3.org/2001/XMLSchema#string"
RDF_LANG_STRING = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString"


@dataclass(frozen=True)
class Literal:
    """A literal with a verbatim lexical form (no value-space canonicalization)."""

    lexical: str
    datatype: str = XSD_STRING
    language: str | None = None

    def __post_init__(self):
        if not _is_absolute_iri(self.datatype):
            raise TermError(f"literal datatype is not an absolute IRI: {self.datatype!r}")
        if self.language is not None and self.datatype != RDF_LANG_STRING:
            raise TermError("language tag requires the rdf:langString datatype")
        if self.language is None and self.datatype == RDF_LANG_STRING:
            raise TermError("rdf:langString literal requires a language tag")
        if self.language is not None and not re.match(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$", self.language):
            raise TermError(f"invalid language tag: {self.language!r}")


Term = Iri | BlankNode | Literal


def escape_literal(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def ntriples(term: Term) -> str:
    """Render a term in N-Triples syntax (the canonical sort key)."""
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    if isinstance(term, Literal):
        body = f'"{escape_literal(term.lexical)}"'
        if term.language is not None:
            return f"{body}@{term.language}"
        if term.datatype != XSD_STRING:
            return f"{body}^^<{term.datatype}>"
        return body
    raise TermError(f"not a term: {term!r}")


@dataclass(frozen=True)
class Triple:
    subject: Iri | BlankNode
    predicate: Iri
    object: Term

    def __post_init__(self):
        if not isinstance(self.subject, (Iri, BlankNode)):
            raise TermError("triple subject must be an IRI or blank node")
        if not isinstance(self.predicate, Iri):
            raise TermError("triple predicate must be an IRI")
        if not isinstance(self.object, (Iri, BlankNode, Literal)):
            raise TermError("triple object must be a term")

    def sort_key(self) -> tuple[str, str, str]:
        return (ntriples(self.subject), ntriples(self.predicate), ntriples(self.object))


class Namespace:
    """Mints Iri terms under a fixed base, rdflib-style: ``R2R.Ride``."""

    def __init__(self, base: str):
        self._base = base

    @property
    def base(self) -> str:
        return self._base

    def __getattr__(self, local: str) -> Iri:
        if local.startswith("_"):
            raise AttributeError(local)
        return Iri(self._base + local)

    def __call__(self, local: str) -> Iri:
        return Iri(self._base + local)

    def __repr__(self) -> str:
        return f"Namespace({self._base!r})"


RDF = Namespace("http://www.w3.org/1999/02/22-rdf-syntax-ns#")
RDFS = Namespace("http://www.w3.org/2000/01/rdf-schema#")
OWL = Namespace("http://www.w3.org/2002/07/owl#")
XSD = Namespace("http://www.w3.org/2001/XMLSchema#")
SKOS = Namespace("http://www.w3.org/2004/02/skos/core#")
DCTERMS = Namespace("http://purl.org/dc/terms/")

R2R = Namespace("https://w3id.org/ride2rail/terms#")
RBE = Namespace("https://w3id.org/ride2rail/rb-events#")
AG = Namespace("https://w3id.org/ride2rail/agreements#")
OASIS = Namespace("http://www.dmi.unict.it/oasis.owl#")
OSDM = Namespace("https://w3id.org/mobility/osdm/core#")
TMORG = Namespace("https://w3id.org/mobility/transmodel/organisations#")

#: Prefixes bound by default on vocabulary and export graphs.
DEFAULT_PREFIXES: dict[str, str] = {
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


class Graph:
    """A set of triples plus a prefix table.

    Construction is single-threaded; once built, graphs are treated as
    immutable values (no triple is ever removed).
    """

    def __init__(self, triples: Iterable[Triple] = (), prefixes: dict[str, str] | None = None):
        self._triples = set()
        self._prefixes = {}
        if prefixes:
            for prefix, ns in prefixes.items():
                self.bind(prefix, ns)
        for t in triples:
            self.add(t)

    # -- prefixes ---------------------------------------------------------

    def bind(self, prefix: str, namespace: str | Namespace) -> None:
        ns = namespace.base if isinstance(namespace, Namespace) else namespace
        if not re.match(r"^[A-Za-z][A-Za-z0-9_-]*$|^$", prefix):
            raise PrefixError(f"invalid prefix: {prefix!r}")
        existing = self._prefixes.get(prefix)
        if existing is not None and existing != ns:
            raise PrefixError(f"prefix {prefix!r} already bound to {existing}")
        self._prefixes[prefix] = ns

    @property
    def prefixes(self) -> dict[str, str]:
        return dict(self._prefixes)

    # -- triples ----------------------------------------------------------

    def add(self, triple: Triple) -> "Graph":
        if not isinstance(triple, Triple):
            raise TermError("can only add Triple instances")
        self._triples.add(triple)
        return self

    def add_all(self, triples: Iterable[Triple]) -> "Graph":
        for t in triples:
            self.add(t)
        return self

    def union(self, *others: "Graph") -> "Graph":
        """New graph holding all triples and the merged prefix tables."""
        merged = Graph(self._triples, self._prefixes)
        for other in others:
            for prefix, ns in other._prefixes.items():
                if merged._prefixes.get(prefix, ns) == ns:
                    merged.bind(prefix, ns)
            merged._triples.update(other._triples)
        return merged

    def match(self, s: Term | None = None, p: Iri | None = None, o: Term | None = None) -> list[Triple]:
        """All triples agreeing with every bound position, deterministically ordered."""
        found = [
            t
            for t in self._triples
            if (s is None or t.subject == s) and (p is None or t.predicate == p) and (o is None or t.object == o)
        ]
        found.sort(key=Triple.sort_key)
        return found

    def objects(self, s: Term, p: Iri) -> list[Term]:
        return [t.object for t in self.match(s, p, None)]

    def subjects(self, p: Iri, o: Term) -> list[Term]:
        return [t.subject for t in self.match(None, p, o)]

    def value(self, s: Term, p: Iri) -> Term | None:
        """The unique object for (s, p), or None when absent or ambiguous."""
        objs = self.objects(s, p)
        return objs[0] if len(objs) == 1 else None

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(sorted(self._triples, key=Triple.sort_key))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples and self._prefixes == other._prefixes

    def __repr__(self) -> str:
        return f"Graph({len(self._triples)} triples, {len(self._prefixes)} prefixes)"
