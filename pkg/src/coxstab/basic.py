"""Mirrored spaces, the basic construction, and the chamber filtration.

U(W, X) is the quotient of W x X identifying (v, x) ~ (w, x) when v^{-1}w
lies in the parabolic generated by the mirrors through x.  The quotient is
computed on vertices (mirrors are subcomplexes, so the relation is
vertex-determined on simplicial data) and extended simplex-wise.  Chambers
are glued in ShortLex order; the attachment of chamber w along the mirror
union X^{In(w)} is verified step by step, classified per its facet pattern,
and backed by a chain-level Mayer-Vietoris check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complexes import SimplicialComplex, base_chamber
from .engine import DEFAULT_GROUP_CAP, family_system
from .homology import (
    homologically_connected_through,
    mayer_vietoris_check,
    simplicial_homology,
)
from .report import Report


@dataclass
class MirroredSpace:
    """A finite complex with a subcomplex X_s for each generator."""

    complex: SimplicialComplex
    mirrors: dict[int, frozenset]  # generator -> face-closed set of simplices

    def __post_init__(self):
        for g, simplices in self.mirrors.items():
            for s in simplices:
                if s not in self.complex:
                    raise ValueError(f"mirror {g} contains a non-simplex {s}")
                for i in range(len(s)):
                    face = s[:i] + s[i + 1:]
                    if face and face not in simplices:
                        raise ValueError(f"mirror {g} is not face-closed at {s}")

    def vertex_gens(self, x):
        return frozenset(g for g, ms in self.mirrors.items() if (x,) in ms)


def delta_mirrored(chamber):
    """The abstract base chamber: an n-simplex on positions 0..n whose
    mirror for s spans the positions of Delta_s."""
    n = len(chamber.a) - 1
    simplex = SimplicialComplex.from_maximal(n + 1, [tuple(range(n + 1))])
    mirrors = {}
    for g, positions in chamber.mirror_positions.items():
        sub = SimplicialComplex.from_maximal(n + 1, [tuple(sorted(positions))])
        mirrors[g] = frozenset(sub.simplices())
    return MirroredSpace(simplex, mirrors)


def mirror_union(space, gens):
    """Union of the mirrors X_s over s in gens, as a subcomplex."""
    simplices = set()
    for g in gens:
        simplices |= space.mirrors.get(g, frozenset())
    return SimplicialComplex(space.complex.vertex_count, simplices, check=False)


@dataclass
class ChamberComplex:
    """The quotient complex U(W, X) with its chamber structure."""

    system: object
    space: MirroredSpace
    complex: SimplicialComplex
    vertex_of: dict          # (x, coset) -> quotient vertex id
    vertex_info: list        # quotient vertex id -> (x, coset)
    tables: dict             # x -> coset table of W/W_{J_x}
    perms: np.ndarray        # (ngens, V) left action

    def chamber_vertex(self, row, x):
        table = self.tables[x]
        return self.vertex_of[(x, int(table.element_coset[row]))]

    def chamber_simplices(self, row):
        out = set()
        for s in self.space.complex.simplices():
            out.add(tuple(sorted(self.chamber_vertex(row, x) for x in s)))
        return out

    def translate(self, word, simplices):
        perm = np.arange(len(self.vertex_info))
        for g in reversed(word):
            perm = self.perms[g][perm]
        return {tuple(sorted(int(perm[v]) for v in s)) for s in simplices}


def basic_construction(system, space, cap=DEFAULT_GROUP_CAP):
    et = system.elements(cap)
    tables = {}
    vertex_of = {}
    vertex_info = []
    for x in range(space.complex.vertex_count):
        table = system.coset_table(space.vertex_gens(x))
        tables[x] = table
        for c in range(len(table)):
            vertex_of[(x, c)] = len(vertex_info)
            vertex_info.append((x, c))

    V = len(vertex_info)
    perms = np.empty((system.ngens, V), dtype=np.int64)
    for g in range(system.ngens):
        for vid, (x, c) in enumerate(vertex_info):
            perms[g][vid] = vertex_of[(x, int(tables[x].table[c, g]))]

    cc = ChamberComplex(system, space, None, vertex_of, vertex_info, tables, perms)
    simplices = set()
    for row in range(et.order):
        simplices |= cc.chamber_simplices(row)
    cc.complex = SimplicialComplex(V, simplices)
    return cc


def check_basic_properties(spec, n, cap=DEFAULT_GROUP_CAP):
    """Equivariance, chamber counts, and vertex stabilizers of U(W_n, Delta)."""
    chamber = base_chamber(spec, n, cap)
    system = chamber.cn.system
    et = system.elements(cap)
    space = delta_mirrored(chamber)
    cc = basic_construction(system, space, cap)
    report = Report("check.basic-properties", {"family": spec.name(), "n": n})

    chambers = [frozenset(cc.chamber_simplices(row)) for row in range(et.order)]
    report.add("chamber-count-is-group-order", len(set(chambers)) == et.order)
    top = set(cc.complex.by_dim[cc.complex.dimension]) if cc.complex.dimension >= 0 else set()
    report.add("top-simplex-count-is-group-order", len(top) == et.order)
    report.add(
        "chambers-cover",
        set().union(*chambers) == set(cc.complex.simplices()),
    )

    ok = True
    for g in range(system.ngens):
        for row in range(et.order):
            translated = cc.translate((g,), chambers[row])
            target = chambers[int(et.left[g][row])]
            if translated != target:
                ok = False
    report.add("equivariance-g.wX-is-gwX", ok)

    ok = True
    for x in range(space.complex.vertex_count):
        stab = {row for row in range(et.order) if cc.chamber_vertex(row, x) == cc.chamber_vertex(0, x)}
        if stab != set(et.subgroup_rows(space.vertex_gens(x))):
            ok = False
    report.add("vertex-stabilizers-are-mirror-parabolics", ok)

    ok = True
    for row in range(et.order):
        seen = {cc.chamber_vertex(row, x) for x in range(space.complex.vertex_count)}
        if len(seen) != space.complex.vertex_count:
            ok = False
    report.add("chambers-embed", ok)
    return report


def classify_attachment(system, chamber, in_set_gens, n):
    """Lemma-6.7 trichotomy of the mirror union over In(w)."""
    if any(g in system.S(-1) for g in in_set_gens):
        return "full-chamber"
    omitted = set()
    for g in in_set_gens:
        missing = set(range(n + 1)) - set(chamber.mirror_positions[g])
        omitted |= missing
    if omitted == set(range(n + 1)):
        return "boundary"
    return "cone"


def check_chamber_filtration(spec, n, cap=DEFAULT_GROUP_CAP, with_mv=True):
    """Verify P_{m-1} /\\ w_m Delta = w_m Delta^{In(w_m)} at every step,
    classify each attachment, and run the chain-level triad check."""
    chamber = base_chamber(spec, n, cap)
    system = chamber.cn.system
    et = system.elements(cap)
    space = delta_mirrored(chamber)
    cc = basic_construction(system, space, cap)
    report = Report("check.filtration", {"family": spec.name(), "n": n, "mv": with_mv})

    order_ok = bool(np.all(np.diff(et.length) >= 0)) and et.words[0] == ()
    report.add("order-starts-at-identity-nondecreasing", order_ok)

    chambers = [cc.chamber_simplices(row) for row in range(et.order)]
    current = set(chambers[0])
    trace = []
    attach_ok = True
    nonempty_ok = True
    classify_ok = True
    mv_ok = True
    connect_ok = True
    witness = None

    for m in range(1, et.order):
        in_gens = et.in_set_of_row(m)
        if not in_gens:
            nonempty_ok = False
        union = mirror_union(space, in_gens)
        expected = {
            tuple(sorted(cc.chamber_vertex(m, x) for x in s)) for s in union.simplices()
        }
        actual = current & chambers[m]
        if actual != expected:
            attach_ok = False
            witness = witness or {"m": m, "element": str(et.element(m))}
        kind = classify_attachment(system, chamber, in_gens, n)
        # the classification must match the attachment's homology
        if kind == "boundary":
            sphere = simplicial_homology(union, "Z", reduced=True)
            if not (sphere.is_trivial_through(n - 2) and sphere.rank(n - 1) == 1):
                classify_ok = False
        else:
            if not homologically_connected_through(union, n - 1):
                classify_ok = False
        betti = simplicial_homology(union, "Z", reduced=True) if union.size() else None
        trace.append(
            {
                "m": m,
                "element": str(et.element(m)),
                "in_size": len(in_gens),
                "type": kind,
                "attachment_betti": [betti.rank(k) for k in range(max(n, 1))] if betti else [],
            }
        )
        prev = SimplicialComplex(cc.complex.vertex_count, current, check=False)
        current |= chambers[m]
        step = SimplicialComplex(cc.complex.vertex_count, current, check=False)
        if with_mv:
            wchamber = SimplicialComplex(cc.complex.vertex_count, chambers[m], check=False)
            mv = mayer_vietoris_check(step, prev, wchamber)
            if not mv.passed:
                mv_ok = False
            if not homologically_connected_through(step, n - 1):
                connect_ok = False

    report.add("attachment-identity", attach_ok, witness=witness)
    report.add("attachments-nonempty", nonempty_ok)
    report.add("attachment-classification-consistent", classify_ok)
    if with_mv:
        report.add("mayer-vietoris-exact-per-step", mv_ok)
        report.add("partial-unions-connected-through-n-1", connect_ok)
    report.data["trace"] = trace
    return report


def check_sd_iso(spec, n, cap=DEFAULT_GROUP_CAP):
    """The canonical equivariant map U(W_n, Delta) -> sd C^n is a simplicial
    isomorphism: bijective on vertices and simplex sets in both directions."""
    chamber = base_chamber(spec, n, cap)
    cn = chamber.cn
    system = cn.system
    et = system.elements(cap)
    space = delta_mirrored(chamber)
    cc = basic_construction(system, space, cap)
    report = Report("check.sd-iso", {"family": spec.name(), "n": n})

    cell_index = {s: i for i, s in enumerate(chamber.cells)}
    V = cn.complex.vertex_count

    phi = np.full(len(cc.vertex_info), -1, dtype=np.int64)
    for vid, (i, c) in enumerate(cc.vertex_info):
        rep = cc.tables[i].rep_words[c]
        perm = np.arange(V)
        for g in reversed(rep):
            perm = cn.action.perms[g][perm]
        flag = cn.base_flags[n - i]
        image = tuple(sorted(int(perm[v]) for v in flag))
        phi[vid] = cell_index[image]

    vertex_bijection = len(set(phi.tolist())) == len(phi) == chamber.sd.vertex_count
    report.add("vertex-bijection", vertex_bijection)

    if vertex_bijection:
        mapped = {
            tuple(sorted(int(phi[v]) for v in s)) for s in cc.complex.simplices()
        }
        target = set(chamber.sd.simplices())
        report.add("simplices-map-onto-simplices", mapped == target)
        ok = True
        for g in range(system.ngens):
            lhs = phi[cc.perms[g]]
            rhs = chamber.sd_action.perms[g][phi]
            if not np.array_equal(lhs, rhs):
                ok = False
        report.add("map-is-equivariant", ok)
        report.data["chambers"] = et.order
    return report
