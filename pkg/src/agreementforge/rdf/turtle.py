"""Deterministic Turtle serializer and a parser for the matching subset.

Supported syntax: ``@prefix`` directives, prefixed names, absolute IRIs in
angle brackets, the ``a`` keyword, ``;`` and ``,`` lists, labeled blank
nodes (``_:x``), string/typed/language-tagged literals and ``#`` line
comments.  Collections ``( )`` and anonymous blank nodes ``[ ]`` are
rejected with an explicit unsupported-construct error; numeric and boolean
shorthand is outside the subset as well.

Serialization is a pure function of the graph: prefix directives first
(sorted by prefix), then triples grouped by subject with subjects,
predicates and objects in N-Triples lexicographic order.  Equal graphs
always produce byte-identical documents.
"""

from __future__ import annotations

import re

from agreementforge.errors import ParseError, UnsupportedConstructError
from agreementforge.rdf.terms import (
    RDF,
    RDF_LANG_STRING,
    XSD_STRING,
    BlankNode,
    Graph,
    Iri,
    Literal,
    Term,
    Triple,
    escape_literal,
    ntriples,
)

RDF_TYPE = RDF.type

# Local names that survive prefixed-name compaction.  Deliberately narrower
# than the Turtle grammar: no dots, so a trailing '.' is always end of
# statement.
_SAFE_LOCAL = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")


def _compact(term: Term, by_namespace: list[tuple[str, str]]) -> str:
    """Turtle rendering of a term, using prefixed names where possible."""
    if isinstance(term, Iri):
        if term == RDF_TYPE:
            return "a"
        for ns, prefix in by_namespace:
            if term.value.startswith(ns):
                local = term.value[len(ns):]
                if _SAFE_LOCAL.match(local):
                    return f"{prefix}:{local}"
        return f"<{term.value}>"
    if isinstance(term, Literal):
        body = f'"{escape_literal(term.lexical)}"'
        if term.language is not None:
            return f"{body}@{term.language}"
        if term.datatype == XSD_STRING:
            return body
        return f"{body}^^{_compact(Iri(term.datatype), by_namespace)}"
    return ntriples(term)


def serialize_turtle(graph: Graph) -> str:
    prefixes = graph.prefixes
    # Longest namespace wins when namespaces nest.
    by_namespace = sorted(((ns, p) for p, ns in prefixes.items()), key=lambda x: (-len(x[0]), x[1]))

    lines = [f"@prefix {prefix}: <{prefixes[prefix]}> ." for prefix in sorted(prefixes)]

    by_subject: dict[tuple[str, Term], dict[Iri, list[Term]]] = {}
    for t in graph:
        key = (ntriples(t.subject), t.subject)
        preds = by_subject.setdefault(key, {})
        preds.setdefault(t.predicate, []).append(t.object)

    blocks = []
    for (_, subject) in sorted(by_subject, key=lambda k: k[0]):
        preds = by_subject[(ntriples(subject), subject)]
        subj_text = _compact(subject, by_namespace)
        parts = []
        for pred in sorted(preds, key=ntriples):
            objects = sorted(preds[pred], key=ntriples)
            rendered = ", ".join(_compact(o, by_namespace) for o in objects)
            parts.append(f"{_compact(pred, by_namespace)} {rendered}")
        blocks.append(f"{subj_text} " + " ;\n    ".join(parts) + " .")

    sections = []
    if lines:
        sections.append("\n".join(lines))
    if blocks:
        sections.append("\n\n".join(blocks))
    return "\n\n".join(sections) + "\n" if sections else ""


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN_PATTERNS = [
    ("IRIREF", re.compile(r"<([^<>\"{}|^`\\\x00-\x20]*)>")),
    ("BLANK", re.compile(r"_:([A-Za-z0-9_]+)")),
    ("STRING", re.compile(r'"((?:[^"\\\n\r]|\\.)*)"')),
    ("PREFIX_DECL", re.compile(r"@prefix(?![A-Za-z0-9])")),
    ("LANGTAG", re.compile(r"@([A-Za-z]+(?:-[A-Za-z0-9]+)*)")),
    ("DTYPE", re.compile(r"\^\^")),
    # Prefixed name, or the bare "prefix:" form used in @prefix directives.
    ("PNAME", re.compile(r"([A-Za-z][A-Za-z0-9_-]*)?:([A-Za-z0-9_][A-Za-z0-9_.-]*)?")),
    ("A", re.compile(r"a(?![A-Za-z0-9_:-])")),
    ("DOT", re.compile(r"\.")),
    ("SEMI", re.compile(r";")),
    ("COMMA", re.compile(r",")),
]

_STRING_ESCAPES = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}


class _Token:
    __slots__ = ("kind", "value", "line", "column")

    def __init__(self, kind: str, value, line: int, column: int):
        self.kind = kind
        self.value = value
        self.line = line
        self.column = column


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "(" or ch == ")":
            raise UnsupportedConstructError("collections '( )' are not supported", line, col)
        if ch == "[" or ch == "]":
            raise UnsupportedConstructError("anonymous blank nodes '[ ]' are not supported", line, col)
        if ch.isdigit() or (ch in "+-" and i + 1 < n and text[i + 1].isdigit()):
            raise ParseError("numeric literal shorthand is not supported; use a typed string literal", line, col)
        for kind, pattern in _TOKEN_PATTERNS:
            m = pattern.match(text, i)
            if m:
                end = m.end()
                groups = m.groups()
                if kind == "PNAME":
                    # A trailing '.' run belongs to the statement, not the name.
                    local = groups[1] or ""
                    trimmed = local.rstrip(".")
                    end -= len(local) - len(trimmed)
                    groups = (groups[0], trimmed)
                tokens.append(_Token(kind, groups, line, col))
                col += end - i
                i = end
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("EOF", None, line, col))
    return tokens


def _unescape(raw: str, line: int, col: int) -> str:
    out = []
    i, n = 0, len(raw)
    while i < n:
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= n:
            raise ParseError("dangling escape in string literal", line, col)
        esc = raw[i + 1]
        if esc in _STRING_ESCAPES:
            out.append(_STRING_ESCAPES[esc])
            i += 2
        elif esc == "u":
            if i + 6 > n:
                raise ParseError("truncated \\u escape", line, col)
            out.append(chr(int(raw[i + 2:i + 6], 16)))
            i += 6
        elif esc == "U":
            if i + 10 > n:
                raise ParseError("truncated \\U escape", line, col)
            out.append(chr(int(raw[i + 2:i + 10], 16)))
            i += 10
        else:
            raise ParseError(f"unknown escape '\\{esc}'", line, col)
    return "".join(out)


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.graph = Graph()

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self, kind: str | None = None) -> _Token:
        tok = self.tokens[self.pos]
        if kind is not None and tok.kind != kind:
            raise ParseError(f"expected {kind}, found {tok.kind}", tok.line, tok.column)
        self.pos += 1
        return tok

    def fail(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.column)

    def parse(self) -> Graph:
        while self.peek().kind != "EOF":
            if self.peek().kind == "PREFIX_DECL":
                self.prefix_directive()
            else:
                self.triples_statement()
        return self.graph

    def prefix_directive(self):
        self.take("PREFIX_DECL")
        tok = self.take("PNAME")
        prefix, local = tok.value
        if local:
            raise ParseError("prefix declaration must end with ':'", tok.line, tok.column)
        iri_tok = self.take("IRIREF")
        self.take("DOT")
        self.graph.bind(prefix or "", iri_tok.value[0])

    def resolve_pname(self, tok: _Token) -> Iri:
        prefix, local = tok.value[0] or "", tok.value[1] or ""
        ns = self.graph.prefixes.get(prefix)
        if ns is None:
            raise ParseError(f"unknown prefix {prefix!r}", tok.line, tok.column)
        return Iri(ns + local)

    def parse_iri(self) -> Iri:
        tok = self.peek()
        if tok.kind == "IRIREF":
            self.take()
            return Iri(tok.value[0])
        if tok.kind == "PNAME":
            self.take()
            return self.resolve_pname(tok)
        raise self.fail(f"expected IRI, found {tok.kind}")

    def parse_subject(self) -> Iri | BlankNode:
        tok = self.peek()
        if tok.kind == "BLANK":
            self.take()
            return BlankNode(tok.value[0])
        return self.parse_iri()

    def parse_object(self) -> Term:
        tok = self.peek()
        if tok.kind == "BLANK":
            self.take()
            return BlankNode(tok.value[0])
        if tok.kind == "STRING":
            self.take()
            lexical = _unescape(tok.value[0], tok.line, tok.column)
            nxt = self.peek()
            if nxt.kind == "LANGTAG":
                self.take()
                return Literal(lexical, RDF_LANG_STRING, nxt.value[0])
            if nxt.kind == "DTYPE":
                self.take()
                return Literal(lexical, self.parse_iri().value)
            return Literal(lexical)
        return self.parse_iri()

    def parse_predicate(self) -> Iri:
        if self.peek().kind == "A":
            self.take()
            return RDF_TYPE
        return self.parse_iri()

    def triples_statement(self):
        subject = self.parse_subject()
        while True:
            predicate = self.parse_predicate()
            while True:
                obj = self.parse_object()
                self.graph.add(Triple(subject, predicate, obj))
                if self.peek().kind == "COMMA":
                    self.take()
                    continue
                break
            if self.peek().kind == "SEMI":
                self.take()
                if self.peek().kind == "DOT":  # tolerate a trailing ';'
                    break
                continue
            break
        self.take("DOT")


def parse_turtle(text: str) -> Graph:
    return _Parser(text).parse()
