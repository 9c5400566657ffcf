"""Coxeter matrices, diagrams, and the indexed diagram families.

A diagram is the usual graph presentation of a Coxeter matrix: vertices are
generators, an edge {u,v} is present exactly when m(u,v) >= 3, and edges
labelled 3 are rendered unlabelled.  Families are sequences of diagrams in
which each term attaches a fresh preferred vertex to the previous preferred
vertex by an unlabelled edge; the sequence extends leftwards to indices 0
and -1 by deleting the preferred vertex (and, for -1, its neighbours).

Text grammar (one declaration per line, ';' also separates, '#' comments):

    vertices <name>+
    edge <u> <v> [<label>]      # omitted label = 3, 'inf' allowed
    preferred <name>

JSON objects with keys "vertices", "edges", "preferred" are accepted as an
alternate encoding.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from .errors import DiagramError

INF = math.inf

# Names reserved for the attached preferred chain in generated family terms.
_CHAIN_NAME = re.compile(r"^p[0-9]+$")


def _label_repr(label):
    return "inf" if label == INF else str(int(label))


@dataclass(frozen=True)
class CoxeterMatrix:
    """Symmetric matrix of bond orders m(s,t) over an ordered generator set."""

    generators: tuple[str, ...]
    orders: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        n = len(self.generators)
        if len(set(self.generators)) != n:
            raise DiagramError("duplicate generator names")
        if len(self.orders) != n or any(len(row) != n for row in self.orders):
            raise DiagramError("order table is not square")
        for i in range(n):
            if self.orders[i][i] != 1:
                raise DiagramError(f"m({self.generators[i]},{self.generators[i]}) must be 1")
            for j in range(i + 1, n):
                mij = self.orders[i][j]
                if mij != self.orders[j][i]:
                    raise DiagramError("order table is not symmetric")
                if mij != INF and (mij != int(mij) or mij < 2):
                    raise DiagramError(
                        f"m({self.generators[i]},{self.generators[j]}) must be an integer >= 2 or inf"
                    )

    @property
    def size(self):
        return len(self.generators)

    def index(self, name):
        return self.generators.index(name)

    def entry(self, s, t):
        return self.orders[self.index(s)][self.index(t)]

    def entry_by_index(self, i, j):
        return self.orders[i][j]

    def has_infinite_entry(self):
        return any(v == INF for row in self.orders for v in row)

    def diagram(self, preferred=None):
        edges = []
        for i in range(self.size):
            for j in range(i + 1, self.size):
                m = self.orders[i][j]
                if m >= 3:
                    edges.append((self.generators[i], self.generators[j], m))
        return Diagram(self.generators, tuple(edges), preferred)


@dataclass(frozen=True)
class Diagram:
    """Coxeter diagram: labelled graph on generator names.

    Edges are stored as (u, v, label) with u before v in vertex order and the
    edge list sorted; an absent edge means m = 2.
    """

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...] = ()
    preferred: str | None = None

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise DiagramError("duplicate vertex names")
        pos = {v: i for i, v in enumerate(self.vertices)}
        seen = set()
        canonical = []
        for u, v, label in self.edges:
            if u not in pos or v not in pos:
                raise DiagramError(f"edge references unknown vertex: {u} {v}")
            if u == v:
                raise DiagramError(f"self-loop on vertex {u!r}")
            if label != INF and (label != int(label) or label < 3):
                if label == 2:
                    raise DiagramError(
                        f"edge {u} {v} has label 2 (m=2 means no edge)"
                    )
                raise DiagramError(f"edge {u} {v} has invalid label {label!r}")
            key = frozenset((u, v))
            if key in seen:
                raise DiagramError(f"duplicate edge {u} {v}")
            seen.add(key)
            if pos[u] > pos[v]:
                u, v = v, u
            canonical.append((u, v, INF if label == INF else int(label)))
        canonical.sort(key=lambda e: (pos[e[0]], pos[e[1]]))
        object.__setattr__(self, "edges", tuple(canonical))
        if self.preferred is not None and self.preferred not in pos:
            raise DiagramError(f"preferred vertex {self.preferred!r} is not declared")

    def matrix(self):
        n = len(self.vertices)
        pos = {v: i for i, v in enumerate(self.vertices)}
        table = [[2.0] * n for _ in range(n)]
        for i in range(n):
            table[i][i] = 1.0
        for u, v, label in self.edges:
            table[pos[u]][pos[v]] = float(label)
            table[pos[v]][pos[u]] = float(label)
        return CoxeterMatrix(self.vertices, tuple(tuple(r) for r in table))

    def label(self, u, v):
        for a, b, m in self.edges:
            if {a, b} == {u, v}:
                return m
        return 2

    def neighbors(self, v):
        out = []
        for a, b, _ in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return tuple(out)

    def without(self, names):
        """Induced subdiagram after deleting the given vertices."""
        drop = set(names)
        keep = tuple(v for v in self.vertices if v not in drop)
        edges = tuple(e for e in self.edges if e[0] not in drop and e[1] not in drop)
        preferred = self.preferred if self.preferred not in drop else None
        return Diagram(keep, edges, preferred)

    def has_infinite_label(self):
        return any(label == INF for _, _, label in self.edges)

    def serialize(self):
        lines = []
        if self.vertices:
            lines.append("vertices " + " ".join(self.vertices))
        if self.preferred is not None:
            lines.append(f"preferred {self.preferred}")
        for u, v, label in self.edges:
            if label == 3:
                lines.append(f"edge {u} {v}")
            else:
                lines.append(f"edge {u} {v} {_label_repr(label)}")
        return "\n".join(lines) + ("\n" if lines else "")

    def to_json(self):
        doc = {
            "vertices": list(self.vertices),
            "edges": [
                [u, v, "inf" if label == INF else int(label)]
                for u, v, label in self.edges
            ],
        }
        if self.preferred is not None:
            doc["preferred"] = self.preferred
        return doc


def _parse_label_token(tok, line, col):
    if tok == "inf":
        return INF
    try:
        value = int(tok)
    except ValueError:
        raise DiagramError(f"bad edge label {tok!r}", line, col) from None
    if value == 2:
        raise DiagramError("edge label 2 is not allowed (m=2 means no edge)", line, col)
    if value < 3:
        raise DiagramError(f"edge label must be >= 3, got {value}", line, col)
    return value


def _parse_text(text):
    vertices: list[str] = []
    vertex_set: set[str] = set()
    edges: list[tuple[str, str, float]] = []
    edge_keys: set[frozenset] = set()
    preferred = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        offset = 0
        for stmt in line.split(";"):
            col = offset + (len(stmt) - len(stmt.lstrip())) + 1
            offset += len(stmt) + 1
            toks = stmt.split()
            if not toks:
                continue
            head, args = toks[0], toks[1:]
            if head == "vertices":
                if not args:
                    raise DiagramError("'vertices' needs at least one name", lineno, col)
                for name in args:
                    if name in vertex_set:
                        raise DiagramError(f"duplicate vertex {name!r}", lineno, col)
                    vertex_set.add(name)
                    vertices.append(name)
            elif head == "edge":
                if len(args) not in (2, 3):
                    raise DiagramError("'edge' takes two vertices and an optional label", lineno, col)
                u, v = args[0], args[1]
                for name in (u, v):
                    if name not in vertex_set:
                        raise DiagramError(f"unknown vertex {name!r} in edge", lineno, col)
                if u == v:
                    raise DiagramError(f"self-loop on vertex {u!r}", lineno, col)
                label = _parse_label_token(args[2], lineno, col) if len(args) == 3 else 3
                key = frozenset((u, v))
                if key in edge_keys:
                    raise DiagramError(f"duplicate edge {u} {v}", lineno, col)
                edge_keys.add(key)
                edges.append((u, v, label))
            elif head == "preferred":
                if len(args) != 1:
                    raise DiagramError("'preferred' takes exactly one name", lineno, col)
                if args[0] not in vertex_set:
                    raise DiagramError(f"unknown vertex {args[0]!r} in preferred", lineno, col)
                preferred = args[0]
            else:
                raise DiagramError(f"unknown declaration {head!r}", lineno, col)

    return Diagram(tuple(vertices), tuple(edges), preferred)


def _parse_json(doc):
    if not isinstance(doc, dict):
        raise DiagramError("JSON diagram must be an object")
    vertices = tuple(doc.get("vertices", ()))
    edges = []
    for entry in doc.get("edges", ()):
        if len(entry) == 2:
            u, v = entry
            label = 3
        elif len(entry) == 3:
            u, v, label = entry
            if label == "inf" or label is None:
                label = INF
        else:
            raise DiagramError(f"bad edge entry {entry!r}")
        edges.append((u, v, label))
    return Diagram(vertices, tuple(edges), doc.get("preferred"))


def parse_diagram(source):
    """Parse a diagram from grammar text, a JSON string, or a JSON object."""
    if isinstance(source, dict):
        return _parse_json(source)
    text = source.strip()
    if text.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DiagramError(f"bad JSON: {exc}") from None
        return _parse_json(doc)
    return _parse_text(source)


def serialize_diagram(diagram):
    return diagram.serialize()


@dataclass(frozen=True)
class FamilySpec:
    """Defining datum of a diagram family: the first term plus its preferred vertex."""

    gamma1: Diagram
    tag: str | None = None

    def __post_init__(self):
        if self.gamma1.preferred is None:
            raise DiagramError("family's first diagram must declare a preferred vertex")
        for name in self.gamma1.vertices:
            if _CHAIN_NAME.match(name):
                raise DiagramError(
                    f"vertex name {name!r} collides with generated chain names p1, p2, ..."
                )

    def name(self):
        return self.tag or "file"


def family_term(spec, n):
    """The n-th diagram of the family, for n >= -1."""
    if n < -1:
        raise ValueError(f"family index must be >= -1, got {n}")
    g1 = spec.gamma1
    if n == 0:
        return g1.without([g1.preferred])
    if n == -1:
        drop = set(g1.neighbors(g1.preferred))
        drop.add(g1.preferred)
        return g1.without(drop)
    vertices = list(g1.vertices)
    edges = list(g1.edges)
    prev = g1.preferred
    for i in range(1, n):
        fresh = f"p{i}"
        vertices.append(fresh)
        edges.append((prev, fresh, 3))
        prev = fresh
    return Diagram(tuple(vertices), tuple(edges), prev)


def preferred_chain(spec, n):
    """Names of the preferred vertices s_1, ..., s_n inside the n-th term."""
    if n < -1:
        raise ValueError(f"family index must be >= -1, got {n}")
    if n <= 0:
        return ()
    return (spec.gamma1.preferred,) + tuple(f"p{i}" for i in range(1, n))


def builtin_family(tag):
    """Family specs for the A, B, D sequences and the dihedral-headed I(m) one.

    At family index n the builtin diagrams are A_n, B_{n+1}, D_{n+2}, and the
    (n+1)-vertex chain headed by an m-labelled edge, each with the rightmost
    vertex preferred.
    """
    tag = tag.strip()
    if tag == "A":
        g1 = Diagram(("s1",), (), "s1")
        return FamilySpec(g1, "A")
    if tag == "B":
        g1 = Diagram(("b0", "s1"), (("b0", "s1", 4),), "s1")
        return FamilySpec(g1, "B")
    if tag == "D":
        g1 = Diagram(("d0", "d1", "s1"), (("d0", "s1", 3), ("d1", "s1", 3)), "s1")
        return FamilySpec(g1, "D")
    m = None
    match = re.match(r"^I[:(.]?\(?(\d+)\)?$", tag)
    if match:
        m = int(match.group(1))
    if m is None:
        raise ValueError(f"unknown builtin family {tag!r}")
    if m < 3:
        raise ValueError(f"I(m) needs m >= 3, got {m}")
    g1 = Diagram(("i0", "s1"), (("i0", "s1", m),), "s1")
    return FamilySpec(g1, f"I({m})")
