"""Graph isomorphism up to blank-node relabeling.

Ground triples must match exactly; blank nodes are matched by backtracking
over candidate bijections, pruned by a structural signature (which
predicates/positions/ground partners each blank node touches).  Bounded to
24 blank nodes total, which is far beyond anything the fixtures produce.
"""

from __future__ import annotations

from agreementforge.errors import CapacityError
from agreementforge.rdf.terms import BlankNode, Graph, Triple, ntriples

MAX_BLANK_NODES = 24


def _blank_nodes(graph: Graph) -> set[str]:
    labels = set()
    for t in graph:
        if isinstance(t.subject, BlankNode):
            labels.add(t.subject.label)
        if isinstance(t.object, BlankNode):
            labels.add(t.object.label)
    return labels


def _signature(graph: Graph, label: str) -> tuple:
    """Order-independent fingerprint of a blank node's neighborhood."""
    parts = []
    for t in graph:
        s_blank = isinstance(t.subject, BlankNode)
        o_blank = isinstance(t.object, BlankNode)
        if s_blank and t.subject.label == label:
            other = "*" if o_blank else ntriples(t.object)
            parts.append(("s", ntriples(t.predicate), other))
        if o_blank and t.object.label == label:
            other = "*" if s_blank else ntriples(t.subject)
            parts.append(("o", ntriples(t.predicate), other))
    return tuple(sorted(parts))


def _rename(triple: Triple, mapping: dict[str, str]) -> Triple:
    s = triple.subject
    o = triple.object
    if isinstance(s, BlankNode) and s.label in mapping:
        s = BlankNode(mapping[s.label])
    if isinstance(o, BlankNode) and o.label in mapping:
        o = BlankNode(mapping[o.label])
    return Triple(s, triple.predicate, o)


def isomorphic(g1: Graph, g2: Graph) -> bool:
    """True iff some blank-node bijection maps g1's triples onto g2's."""
    if len(g1) != len(g2):
        return False

    b1 = sorted(_blank_nodes(g1))
    b2 = sorted(_blank_nodes(g2))
    if len(b1) + len(b2) > MAX_BLANK_NODES:
        raise CapacityError(
            f"isomorphism check supports at most {MAX_BLANK_NODES} combined blank nodes, got {len(b1) + len(b2)}"
        )
    if len(b1) != len(b2):
        return False

    ground1 = {t for t in g1 if not isinstance(t.subject, BlankNode) and not isinstance(t.object, BlankNode)}
    ground2 = {t for t in g2 if not isinstance(t.subject, BlankNode) and not isinstance(t.object, BlankNode)}
    if ground1 != ground2:
        return False
    if not b1:
        return True

    rest1 = [t for t in g1 if t not in ground1]
    rest2 = {t for t in g2 if t not in ground2}

    sig1 = {label: _signature(g1, label) for label in b1}
    sig2 = {label: _signature(g2, label) for label in b2}
    if sorted(sig1.values()) != sorted(sig2.values()):
        return False

    # Most-constrained-first: fewer candidates earlier means faster pruning.
    order = sorted(b1, key=lambda l: (sum(1 for m in b2 if sig2[m] == sig1[l]), l))

    def extend(idx: int, mapping: dict[str, str], used: set[str]) -> bool:
        if idx == len(order):
            return {_rename(t, mapping) for t in rest1} == rest2
        label = order[idx]
        for candidate in b2:
            if candidate in used or sig2[candidate] != sig1[label]:
                continue
            mapping[label] = candidate
            used.add(candidate)
            # Check triples fully determined by the partial mapping.
            consistent = True
            for t in rest1:
                s_ok = not isinstance(t.subject, BlankNode) or t.subject.label in mapping
                o_ok = not isinstance(t.object, BlankNode) or t.object.label in mapping
                if s_ok and o_ok and _rename(t, mapping) not in rest2:
                    consistent = False
                    break
            if consistent and extend(idx + 1, mapping, used):
                return True
            del mapping[label]
            used.discard(candidate)
        return False

    return extend(0, {}, set())
