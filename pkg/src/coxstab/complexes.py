"""The coset complex C^n, oracle complexes, subdivision, and action checks.

C^n has vertex set W_n/W_{n-1}; its k-simplices are the translates of the
base flag {s_{k+1}...s_n W_{n-1}, ..., s_n W_{n-1}, W_{n-1}}.  Each simplex
is stored together with one lifting element, discovered deterministically by
orbit closure, so downstream checks can reconstruct vertex orderings.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .engine import DEFAULT_GROUP_CAP, family_system
from .errors import SearchBudgetExceeded
from .report import Report


class SimplicialComplex:
    """Finite abstract simplicial complex on vertices 0..V-1.

    Simplices are sorted integer tuples; the set is face-closed (checked at
    construction).  `labels`, when present, names the vertices.
    """

    def __init__(self, vertex_count, simplices, labels=None, check=True):
        self.vertex_count = vertex_count
        by_dim: dict[int, set] = {}
        for s in simplices:
            t = tuple(sorted(set(s)))
            if not t:
                continue
            by_dim.setdefault(len(t) - 1, set()).add(t)
        self.dimension = max(by_dim, default=-1)
        self.by_dim = [sorted(by_dim.get(k, ())) for k in range(self.dimension + 1)]
        self._sets = [frozenset(level) for level in self.by_dim]
        self.labels = list(labels) if labels is not None else None
        if check:
            self._check_face_closure()

    @classmethod
    def from_maximal(cls, vertex_count, maximal, labels=None):
        simplices = set()
        for s in maximal:
            s = tuple(sorted(set(s)))
            for k in range(1, len(s) + 1):
                simplices.update(itertools.combinations(s, k))
        return cls(vertex_count, simplices, labels, check=False)

    def _check_face_closure(self):
        for k in range(1, self.dimension + 1):
            below = self._sets[k - 1]
            for s in self.by_dim[k]:
                for i in range(len(s)):
                    if s[:i] + s[i + 1:] not in below:
                        raise ValueError(f"face closure fails at {s}")

    def simplices(self):
        for level in self.by_dim:
            yield from level

    def __contains__(self, simplex):
        t = tuple(sorted(simplex))
        k = len(t) - 1
        return 0 <= k <= self.dimension and t in self._sets[k]

    def f_vector(self):
        return [len(level) for level in self.by_dim]

    def size(self):
        return sum(len(level) for level in self.by_dim)

    def euler_characteristic(self):
        return sum((-1) ** k * len(level) for k, level in enumerate(self.by_dim))

    def used_vertices(self):
        out = set()
        for v, in self.by_dim[0] if self.by_dim else ():
            out.add(v)
        return sorted(out)

    def star_degrees(self, v):
        """Per-dimension count of simplices containing v (an iso invariant)."""
        return tuple(sum(1 for s in level if v in s) for level in self.by_dim)

    def link(self, simplex):
        """Link subcomplex, compacted onto fresh vertex ids.

        Returns (complex, vertex_map) where vertex_map[i] is the original id
        of the link's vertex i.
        """
        t = tuple(sorted(simplex))
        if t not in self:
            raise ValueError(f"simplex {t} not in complex")
        base = set(t)
        found = []
        for level in self.by_dim:
            for s in level:
                if base.isdisjoint(s) and tuple(sorted(base.union(s))) in self:
                    found.append(s)
        verts = sorted({v for s in found for v in s})
        index = {v: i for i, v in enumerate(verts)}
        relabeled = [tuple(index[v] for v in s) for s in found]
        sub = SimplicialComplex(len(verts), relabeled, check=False)
        return sub, verts

    def is_cone(self):
        """True when some vertex joins every simplex (so the complex is a cone)."""
        if not self.by_dim:
            return False
        for v, in self.by_dim[0]:
            if all(
                v in s or tuple(sorted(set(s) | {v})) in self
                for level in self.by_dim
                for s in level
            ):
                return True
        return False


def oracle_complex(kind, *params):
    """Reference complexes built directly on labelled vertex sets.

    simplex(n): all nonempty subsets of {1..n+1}.
    hyperoctahedron(n): subsets of {+-1..+-(n+1)} with no antipodal pair.
    skeleton(N, k): k-skeleton of the N-dimensional hyperoctahedron.
    """
    if kind == "simplex":
        (n,) = params
        labels = [str(i) for i in range(1, n + 2)]
        return SimplicialComplex.from_maximal(n + 1, [tuple(range(n + 1))], labels)
    if kind in ("hyperoctahedron", "skeleton"):
        if kind == "hyperoctahedron":
            (n,) = params
            top = n
        else:
            n, top = params
            if top > n:
                raise ValueError(f"skeleton dimension {top} exceeds {n}")
        pairs = n + 1
        labels = [str(i + 1) for i in range(pairs)] + [str(-(i + 1)) for i in range(pairs)]
        simplices = []
        for size in range(1, top + 2):
            for chosen in itertools.combinations(range(pairs), size):
                for signs in itertools.product((0, 1), repeat=size):
                    simplices.append(tuple(sorted(p + pairs * sg for p, sg in zip(chosen, signs))))
        return SimplicialComplex(2 * pairs, simplices, labels, check=False)
    raise ValueError(f"unknown oracle kind {kind!r}")


@dataclass
class GroupAction:
    """Vertex permutations of a complex, one per generator."""

    system: object
    complex: SimplicialComplex
    perms: np.ndarray  # (ngens, V)

    def validate(self):
        V = self.complex.vertex_count
        identity = np.arange(V)
        for g in range(self.system.ngens):
            p = self.perms[g]
            assert np.array_equal(p[p], identity), "generator must act as an involution"
        for g in range(self.system.ngens):
            for h in range(g + 1, self.system.ngens):
                m = self.system.m(g, h)
                if m == float("inf"):
                    continue
                cur = identity
                for i in range(2 * int(m)):
                    cur = self.perms[g if i % 2 == 0 else h][cur]
                assert np.array_equal(cur, identity), "defining relation must act trivially"
        for g in range(self.system.ngens):
            p = self.perms[g]
            for level in self.complex.by_dim:
                for s in level:
                    image = tuple(sorted(int(p[v]) for v in s))
                    assert image in self.complex, "action must preserve the simplex set"

    def word_perm(self, word):
        V = self.complex.vertex_count
        cur = np.arange(V)
        for g in reversed(word):
            cur = self.perms[g][cur]  # left action: apply letters right-to-left
        return cur

    def apply(self, perm, simplex):
        return tuple(sorted(int(perm[v]) for v in simplex))


@dataclass
class CosetComplex:
    """build_Cn bundle: the complex, the action, and one lift per simplex."""

    system: object
    n: int
    table: object
    complex: SimplicialComplex
    action: GroupAction
    lifts: dict  # simplex -> element row of a lift
    base_flags: list  # base k-flag simplex per k

    def lift_of(self, simplex):
        return self.lifts[tuple(sorted(simplex))]


def build_Cn(spec, n, cap=DEFAULT_GROUP_CAP):
    """Construct C^n with its W_n-action and per-simplex lifts."""
    system = family_system(spec, n)
    system.require_finite_labels()
    et = system.elements(cap)
    table = system.coset_table(system.S(n - 1) if n >= 0 else system.S(-1))
    chain = system.chain
    V = len(table)

    perms = np.stack([np.asarray(table.column(g)) for g in range(system.ngens)]) \
        if system.ngens else np.empty((0, V), dtype=np.int64)

    base_flags = []
    for k in range(n + 1):
        flag = tuple(sorted(table.coset_of_word(chain[j:]) for j in range(n - k, n + 1)))
        base_flags.append(flag)

    simplices = set()
    lifts = {}
    for k in range(n + 1):
        base = base_flags[k]
        if base in lifts:
            continue
        lifts[base] = 0  # identity lift
        queue = [base]
        simplices.add(base)
        head = 0
        while head < len(queue):
            cur = queue[head]
            head += 1
            cur_lift = lifts[cur]
            for g in range(system.ngens):
                image = tuple(sorted(int(perms[g][v]) for v in cur))
                if image not in lifts:
                    lifts[image] = int(et.left[g][cur_lift])
                    simplices.add(image)
                    queue.append(image)

    complex_ = SimplicialComplex(V, simplices)
    action = GroupAction(system, complex_, perms)
    return CosetComplex(system, n, table, complex_, action, lifts, base_flags)


# ---------------------------------------------------------------------------
# Isomorphism search
# ---------------------------------------------------------------------------

def iso_check(a, b, budget=10**6):
    """Find a simplicial isomorphism a -> b, or None.

    Backtracking over vertices ordered by constraint, pruning on the
    per-dimension star degrees.  Deterministic.
    """
    if a.f_vector() != b.f_vector() or a.vertex_count != b.vertex_count:
        return None
    if a.dimension == -1:
        return []
    va = list(range(a.vertex_count))
    vb = list(range(b.vertex_count))
    sig_a = {v: a.star_degrees(v) for v in va}
    sig_b = {v: b.star_degrees(v) for v in vb}
    candidates = {v: [w for w in vb if sig_b[w] == sig_a[v]] for v in va}
    if any(not c for c in candidates.values()):
        return None
    order = sorted(va, key=lambda v: (len(candidates[v]), v))

    # adjacency oracle: simplices of a grouped by their max-ordered vertex
    pos = {v: i for i, v in enumerate(order)}
    pending = {v: [] for v in va}
    for level in a.by_dim:
        for s in level:
            last = max(s, key=lambda v: pos[v])
            pending[last].append(s)

    mapping = {}
    used = set()
    nodes = 0

    def extend(i):
        nonlocal nodes
        if i == len(order):
            return True
        v = order[i]
        for w in candidates[v]:
            if w in used:
                continue
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExceeded(f"isomorphism search exceeded {budget} nodes")
            mapping[v] = w
            used.add(w)
            ok = all(
                tuple(sorted(mapping[u] for u in s)) in b for s in pending[v]
            )
            if ok and extend(i + 1):
                return True
            del mapping[v]
            used.discard(w)
        return False

    if not extend(0):
        return None
    # forward-preservation plus equal f-vectors forces a bijection on simplices
    return [mapping[v] for v in va]


def link(complex_, simplex):
    sub, _ = complex_.link(simplex)
    return sub


# ---------------------------------------------------------------------------
# Barycentric subdivision
# ---------------------------------------------------------------------------

def barycentric_subdivision(complex_, action=None):
    """Subdivision whose vertices are the simplices of the input.

    Returns (sd_complex, sd_action_or_None, vertex_simplices).  When an
    action is supplied the induced action is validated against the
    fixed-vertex property on every generator: a generator fixes every common
    vertex of a chain and its image.
    """
    cells = [s for level in complex_.by_dim for s in level]
    index = {s: i for i, s in enumerate(cells)}
    supersets = [[] for _ in cells]
    for i, s in enumerate(cells):
        set_s = set(s)
        for j, t in enumerate(cells):
            if len(t) > len(s) and set_s.issubset(t):
                supersets[i].append(j)

    chains = []

    def grow(chain):
        chains.append(tuple(chain))
        for nxt in supersets[chain[-1]]:
            chain.append(nxt)
            grow(chain)
            chain.pop()

    for i in range(len(cells)):
        grow([i])

    sd = SimplicialComplex(len(cells), chains, check=False)

    sd_action = None
    if action is not None:
        perms = np.empty((action.system.ngens, len(cells)), dtype=np.int64)
        for g in range(action.system.ngens):
            p = action.perms[g]
            for s, i in index.items():
                perms[g][i] = index[tuple(sorted(int(p[v]) for v in s))]
        sd_action = GroupAction(action.system, sd, perms)
        for g in range(action.system.ngens):
            p = perms[g]
            for chain in chains:
                image = frozenset(int(p[v]) for v in chain)
                for v in set(chain) & image:
                    assert int(p[v]) == v, "generator must fix the intersection with its image"
    return sd, sd_action, cells


def check_fixed_point_property(sd, sd_action, et, max_pairs=2_000_000):
    """Exhaustive form of the intersection-fixing property, over all elements."""
    total = et.order * sd.size()
    if total > max_pairs:
        return None
    for row in range(et.order):
        perm = sd_action.word_perm(et.words[row])
        for level in sd.by_dim:
            for chain in level:
                image = {int(perm[v]) for v in chain}
                for v in set(chain) & image:
                    if int(perm[v]) != v:
                        return False
    return True


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def check_transitivity(spec, n, cap=DEFAULT_GROUP_CAP):
    """Orbit counts, facial saturation, vertex-permutation realization, and
    transitivity on the top simplices of the subdivision."""
    cn = build_Cn(spec, n, cap)
    et = cn.system.elements(cap)
    report = Report("check.transitivity", {"family": spec.name(), "n": n})

    ok = True
    witness = None
    for k in range(n + 1):
        orbit = _orbit_of(cn, cn.base_flags[k])
        if orbit != set(cn.complex.by_dim[k]):
            ok = False
            witness = {"k": k, "orbit_size": len(orbit), "simplices": len(cn.complex.by_dim[k])}
            break
    report.add("one-orbit-per-dimension", ok, witness=witness)

    top = cn.complex._sets[n] if cn.complex.dimension == n else frozenset()
    ok = all(
        any(set(s).issubset(t) for t in top)
        for level in cn.complex.by_dim
        for s in level
    )
    report.add("every-simplex-in-a-facet", ok)

    ok = True
    witness = None
    for k in range(n + 1):
        base = cn.base_flags[k]
        if not _permutations_realized(cn, et, base):
            ok = False
            witness = {"k": k, "simplex": list(base)}
            break
    report.add("vertex-permutations-realized", ok, witness=witness)

    sd, sd_action, cells = barycentric_subdivision(cn.complex, cn.action)
    if sd.dimension >= 0:
        tops = set(sd.by_dim[sd.dimension])
        seed = next(iter(sorted(tops)))
        orbit = _orbit_of_perms(sd_action, seed)
        report.add(
            "sd-top-simplices-one-orbit",
            orbit == tops,
            detail=f"{len(tops)} top chains",
        )
        fp = check_fixed_point_property(sd, sd_action, et)
        if fp is None:
            report.skip("sd-fixed-point-property", "too large for the exhaustive sweep")
        else:
            report.add("sd-fixed-point-property", fp)
    return report


def _orbit_of(cn, simplex):
    seen = {simplex}
    queue = [simplex]
    while queue:
        cur = queue.pop()
        for g in range(cn.system.ngens):
            image = cn.action.apply(cn.action.perms[g], cur)
            if image not in seen:
                seen.add(image)
                queue.append(image)
    return seen


def _orbit_of_perms(action, simplex):
    seen = {simplex}
    queue = [simplex]
    while queue:
        cur = queue.pop()
        for g in range(action.system.ngens):
            image = action.apply(action.perms[g], cur)
            if image not in seen:
                seen.add(image)
                queue.append(image)
    return seen


def _flag_vertices(cn, lift_row, k):
    """Vertices c.s_{n-k+j+1}...s_n W_{n-1} for j = 0..k, in display order."""
    et = cn.system.elements()
    chain = cn.system.chain
    n = cn.n
    word = et.words[lift_row]
    return [cn.table.coset_of_word(word + chain[n - k + j:]) for j in range(k + 1)]


def _permutations_realized(cn, et, simplex):
    k = len(simplex) - 1
    lift = cn.lift_of(simplex)
    base_order = _flag_vertices(cn, lift, k)
    chain = cn.system.chain
    n = cn.n
    # adjacent position swap i,i+1 is right multiplication by s_{n-k+i+1}
    for target in itertools.permutations(range(k + 1)):
        # bubble-sort decomposition of the permutation into adjacent swaps
        seq = list(target)
        swaps = []
        changed = True
        while changed:
            changed = False
            for i in range(k):
                if seq[i] > seq[i + 1]:
                    seq[i], seq[i + 1] = seq[i + 1], seq[i]
                    swaps.append(i)
                    changed = True
        new_lift = lift
        for i in reversed(swaps):
            new_lift = et.right_trace(new_lift, (chain[n - k + i],))
        moved = _flag_vertices(cn, new_lift, k)
        if set(moved) != set(simplex):
            return False
        # w = new_lift . lift^{-1} maps the i-th base vertex to moved[i]
        w_row = et.right_trace(new_lift, tuple(reversed(et.words[lift])))
        perm = cn.action.word_perm(et.words[w_row])
        if [int(perm[v]) for v in base_order] != moved:
            return False
        if tuple(sorted(moved)) != simplex:
            return False
    return True


def check_lift_consistency(spec, n, cap=DEFAULT_GROUP_CAP):
    """Every stored lift reproduces its simplex, and right multiplication by
    s_{n-k+i+1} transposes adjacent positions of the induced ordering."""
    cn = build_Cn(spec, n, cap)
    et = cn.system.elements(cap)
    chain = cn.system.chain
    report = Report("check.lifts", {"family": spec.name(), "n": n})
    ok_repr = True
    ok_swap = True
    for k in range(n + 1):
        for simplex in cn.complex.by_dim[k]:
            lift = cn.lift_of(simplex)
            order = _flag_vertices(cn, lift, k)
            if tuple(sorted(order)) != simplex:
                ok_repr = False
            for i in range(k):
                other = et.right_trace(lift, (chain[n - k + i],))
                moved = _flag_vertices(cn, other, k)
                expected = list(order)
                expected[i], expected[i + 1] = expected[i + 1], expected[i]
                if moved != expected:
                    ok_swap = False
    report.add("lift-reproduces-simplex", ok_repr)
    report.add("adjacent-transposition-pattern", ok_swap)
    return report


def check_link_iso(spec, n, cap=DEFAULT_GROUP_CAP, exhaustive=False):
    """Prop-5.1 style link identification: phi(d W_{n-p-2}) = c d s_{n-p}...s_n W_{n-1}.

    Checks one orbit representative per dimension unless `exhaustive`.
    """
    cn = build_Cn(spec, n, cap)
    et = cn.system.elements(cap)
    chain = cn.system.chain
    report = Report("check.links", {"family": spec.name(), "n": n, "exhaustive": exhaustive})
    for p in range(n + 1):
        if p == n:
            report.skip(f"p={p}", "links of top simplices are empty")
            continue
        small = build_Cn(spec, n - p - 1, cap)
        small_et = small.system.elements(cap)
        reps = cn.complex.by_dim[p] if exhaustive else [cn.base_flags[p]]
        ok = True
        witness = None
        for simplex in reps:
            c_row = cn.lift_of(simplex)
            c_word = et.words[c_row]
            lk, lk_vertices = cn.complex.link(simplex)
            phi = {}
            for d_coset in range(len(small.table)):
                d_word = _word_in_big(small, cn.system, small.table.rep_words[d_coset])
                phi[d_coset] = cn.table.coset_of_word(c_word + d_word + chain[n - p - 1:])
            if len(set(phi.values())) != len(phi) or set(phi.values()) != set(lk_vertices):
                ok = False
                witness = {"p": p, "simplex": list(simplex), "reason": "vertex bijection fails"}
                break
            # simplex-preserving in both directions
            to_lk = {orig: i for i, orig in enumerate(lk_vertices)}
            mapped = {
                tuple(sorted(to_lk[phi[v]] for v in s))
                for level in small.complex.by_dim
                for s in level
            }
            actual = {s for level in lk.by_dim for s in level}
            if mapped != actual:
                ok = False
                witness = {"p": p, "simplex": list(simplex), "reason": "simplex sets differ"}
                break
            if iso_check(small.complex, lk) is None:
                ok = False
                witness = {"p": p, "simplex": list(simplex), "reason": "iso_check cross-check fails"}
                break
        report.add(f"p={p}", ok, detail=f"link ~ C^{n - p - 1}", witness=witness)
    return report


def _word_in_big(small_cn, big_system, word):
    return tuple(big_system.gen_index(small_cn.system.gen_name(g)) for g in word)


# ---------------------------------------------------------------------------
# The base chamber of sd C^n
# ---------------------------------------------------------------------------

@dataclass
class BaseChamber:
    """The top simplex Delta of sd C^n spanned by the base flags, with the
    mirror assignment s -> Delta_s of the chamber structure."""

    cn: CosetComplex
    sd: SimplicialComplex
    sd_action: GroupAction
    cells: list
    a: list  # sd-vertex id of a_i
    delta: tuple
    mirror_positions: dict  # generator -> frozenset of omitted-complement positions

    def mirror_vertices(self, g):
        return tuple(self.a[i] for i in sorted(self.mirror_positions[g]))


def base_chamber(spec, n, cap=DEFAULT_GROUP_CAP):
    cn = build_Cn(spec, n, cap)
    sd, sd_action, cells = barycentric_subdivision(cn.complex, cn.action)
    index = {s: i for i, s in enumerate(cells)}
    # a_i is the flag {s_{i+1}...s_n W_{n-1}, ..., W_{n-1}}: the (n-i)-simplex
    # of C^n, so a_0 is the barycentre of the base facet and a_n its vertex
    a = [index[cn.base_flags[n - i]] for i in range(n + 1)]
    delta = tuple(sorted(a))
    system = cn.system
    chain = system.chain
    positions = {}
    s_minus1 = system.S(-1)
    all_pos = frozenset(range(n + 1))
    for g in range(system.ngens):
        if g in s_minus1:
            positions[g] = all_pos
        elif g in chain:
            i = chain.index(g) + 1
            positions[g] = all_pos - {i}
        else:
            # g in S_0 outside S_{-1}: the mirror omits a_0
            positions[g] = all_pos - {0}
    return BaseChamber(cn, sd, sd_action, cells, a, delta, positions)


def check_stabilizers(spec, n, cap=DEFAULT_GROUP_CAP):
    """Setwise stabilizer of each face of Delta equals the parabolic
    generated by the mirrors containing it; setwise = pointwise on sd."""
    chamber = base_chamber(spec, n, cap)
    cn = chamber.cn
    et = cn.system.elements(cap)
    report = Report("check.stabilizers", {"family": spec.name(), "n": n})

    elem_perms = [chamber.sd_action.word_perm(et.words[row]) for row in range(et.order)]

    ok_match = True
    ok_pointwise = True
    witness = None
    for r in range(1, n + 2):
        for positions in itertools.combinations(range(n + 1), r):
            face = tuple(sorted(chamber.a[i] for i in positions))
            face_set = set(face)
            setwise = set()
            for row in range(et.order):
                perm = elem_perms[row]
                if {int(perm[v]) for v in face} == face_set:
                    setwise.add(row)
                    if any(int(perm[v]) != v for v in face):
                        ok_pointwise = False
            gens = [g for g in range(cn.system.ngens)
                    if set(positions).issubset(chamber.mirror_positions[g])]
            parabolic = set(et.subgroup_rows(gens))
            if setwise != parabolic:
                ok_match = False
                witness = {
                    "positions": list(positions),
                    "stabilizer_order": len(setwise),
                    "parabolic_order": len(parabolic),
                }
    report.add("stabilizer-equals-mirror-parabolic", ok_match, witness=witness)
    report.add("setwise-equals-pointwise", ok_pointwise)
    return report
