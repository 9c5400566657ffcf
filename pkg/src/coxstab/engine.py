"""Word-level and enumeration-level Coxeter group computation.

Elements are kept in ShortLex normal form.  For finite systems the normal
form comes from a breadth-first enumeration of the whole group (so lookups
are table traces); for infinite systems words are reduced by exhaustive
braid moves plus cancellation, which is complete but exponential and
therefore guarded by a length bound.

Coset enumeration closes the Schreier graph of W/W_J from the Coxeter
presentation.  Tables are standardized after closure: rows are numbered by
breadth-first discovery from coset 0 scanning generators in ShortLex order,
which makes row numbering reproducible across runs and strategies.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagrams import INF, FamilySpec, family_term, preferred_chain
from .errors import CapExceeded, InfiniteLabelError, ReductionBoundExceeded

DEFAULT_GROUP_CAP = 10**6
DEFAULT_COSET_CAP = 10**5
DEFAULT_WORD_BOUND = 16
_TITS_CLOSURE_CAP = 250_000


# ---------------------------------------------------------------------------
# Schreier graph closure (Todd-Coxeter)
# ---------------------------------------------------------------------------

class _Closure:
    """Union-find Schreier graph closed under a set of relator words.

    Edges are per-generator involutions (all Coxeter generators are), so the
    graph is undirected within each generator colour.  Every relator is
    traced once at every live vertex in creation order; because the
    involution relators (s,s) are part of the relator set, a visited vertex
    has all its generator edges defined, so later coincidences can only
    identify vertices, never invalidate a traced cycle.
    """

    def __init__(self, ngens, cap, created_cap):
        self.ngens = ngens
        self.cap = cap
        self.created_cap = created_cap
        self.parent = []
        self.nbrs = []
        self.dead = 0
        self.add_vertex()

    def add_vertex(self):
        idx = len(self.parent)
        if idx >= self.created_cap or idx - self.dead > self.cap:
            raise CapExceeded(
                f"coset enumeration exceeded cap ({self.cap} live rows)", cap=self.cap
            )
        self.parent.append(idx)
        self.nbrs.append([-1] * self.ngens)
        return idx

    def find(self, c):
        parent = self.parent
        root = c
        while parent[root] != root:
            root = parent[root]
        while parent[c] != root:
            parent[c], c = root, parent[c]
        return root

    def unify(self, a, b):
        queue = [(a, b)]
        while queue:
            a, b = queue.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            if a > b:
                a, b = b, a
            self.parent[b] = a
            self.dead += 1
            row_a, row_b = self.nbrs[a], self.nbrs[b]
            for g in range(self.ngens):
                nb = row_b[g]
                if nb == -1:
                    continue
                na = row_a[g]
                if na == -1:
                    row_a[g] = nb
                else:
                    queue.append((na, nb))

    def follow(self, c, g):
        c = self.find(c)
        target = self.nbrs[c][g]
        if target == -1:
            target = self.add_vertex()
            self.nbrs[c][g] = target
            self.nbrs[target][g] = c
        return self.find(target)

    def trace(self, c, word):
        for g in word:
            c = self.follow(c, g)
        return c

    def close(self, relators, subgroup_gens):
        for g in subgroup_gens:
            self.unify(self.follow(0, g), 0)
        v = 0
        while v < len(self.parent):
            if self.find(v) == v:
                for rel in relators:
                    self.unify(self.trace(v, rel), v)
            v += 1

    def live_table(self):
        live = [i for i in range(len(self.parent)) if self.find(i) == i]
        index = {old: new for new, old in enumerate(live)}
        table = np.empty((len(live), self.ngens), dtype=np.int64)
        for new, old in enumerate(live):
            for g in range(self.ngens):
                target = self.nbrs[old][g]
                if target == -1:
                    raise CapExceeded("enumeration failed to close", cap=self.cap)
                table[new, g] = index[self.find(target)]
        return table, index[self.find(0)]


def _standardize(table, root):
    """Renumber rows by BFS from the root scanning generators in order.

    Returns the renumbered table and, per new row, the BFS path word (letters
    in traversal order) that reaches it from the root.
    """
    n, ngens = table.shape
    order = np.full(n, -1, dtype=np.int64)
    order[root] = 0
    queue = [root]
    words = [()]
    head = 0
    while head < len(queue):
        cur = queue[head]
        head += 1
        for g in range(ngens):
            target = int(table[cur, g])
            if order[target] == -1:
                order[target] = len(queue)
                queue.append(target)
                words.append(words[head - 1] + (g,))
    if len(queue) != n:
        raise CapExceeded("coset graph is not connected")  # cannot happen after closure
    new_table = np.empty_like(table)
    for old in range(n):
        new_table[order[old]] = order[table[old]]
    return new_table, words


def _relator_words(system):
    rels = [(s, s) for s in range(system.ngens)]
    for s in range(system.ngens):
        for t in range(s + 1, system.ngens):
            m = system.m(s, t)
            if m == INF:
                continue
            rels.append(tuple(s if i % 2 == 0 else t for i in range(2 * int(m))))
    return rels


def _schreier_table(system, subgroup_gens, cap):
    closure = _Closure(system.ngens, cap, created_cap=4 * cap + 1000)
    closure.close(_relator_words(system), sorted(subgroup_gens))
    table, root = closure.live_table()
    return _standardize(table, root)


# ---------------------------------------------------------------------------
# Systems and elements
# ---------------------------------------------------------------------------

class CoxeterSystem:
    """A Coxeter matrix with a fixed generator order (used for ShortLex).

    When built from a family term the system also records the preferred
    chain s_1, ..., s_n as generator indices, from which the standard
    subsets S_m (with S_{-1} per the leftward family extension) are derived.
    """

    def __init__(self, matrix, chain=(), s_minus1=None):
        self.matrix = matrix
        self.gens = matrix.generators
        self.ngens = len(self.gens)
        self._orders = matrix.orders
        self.chain = tuple(self.gens.index(name) for name in chain)
        self._s_minus1 = (
            None if s_minus1 is None else frozenset(self.gens.index(n) for n in s_minus1)
        )
        self._elements = None
        self._coset_tables = {}
        self._nf_cache = {}

    @classmethod
    def from_diagram(cls, diagram, chain=(), s_minus1=None):
        return cls(diagram.matrix(), chain, s_minus1)

    def __repr__(self):
        return f"CoxeterSystem({', '.join(self.gens)})"

    def m(self, i, j):
        return self._orders[i][j]

    def gen_name(self, i):
        return self.gens[i]

    def gen_index(self, name):
        return self.gens.index(name)

    def has_infinite_label(self):
        return self.matrix.has_infinite_entry()

    def require_finite_labels(self):
        if self.has_infinite_label():
            raise InfiniteLabelError(
                "operation requires finite bond labels (some m_st is infinity)"
            )

    @property
    def n(self):
        return len(self.chain)

    def S(self, m):
        """Generator indices of the parabolic subset S_m, -1 <= m <= n."""
        if not (-1 <= m <= self.n):
            raise ValueError(f"S_m defined for -1 <= m <= {self.n}, got {m}")
        s0 = frozenset(range(self.ngens)) - frozenset(self.chain)
        if m == -1:
            if self._s_minus1 is not None:
                return self._s_minus1
            if not self.chain:
                return s0
            s1 = self.chain[0]
            return frozenset(g for g in s0 if self.m(g, s1) == 2)
        return s0 | frozenset(self.chain[:m])

    def identity(self):
        return GroupElement(self, ())

    def element(self, word):
        return GroupElement(self, self.reduce(word))

    def element_from_names(self, names):
        return self.element(tuple(self.gen_index(n) for n in names))

    # -- normal forms -------------------------------------------------------

    def reduce(self, word, word_bound=DEFAULT_WORD_BOUND):
        word = tuple(word)
        for g in word:
            if not (0 <= g < self.ngens):
                raise ValueError(f"letter {g} is not a generator index")
        if self._elements is not None:
            et = self._elements
            return et.words[et.word_row(word)]
        return self._tits_normal_form(word, word_bound)

    def _braid_closure(self, word, cap):
        seen = {word}
        queue = [word]
        while queue:
            w = queue.pop()
            for i in range(len(w) - 1):
                s, t = w[i], w[i + 1]
                if s == t:
                    continue
                m = self.m(s, t)
                if m == INF:
                    continue
                m = int(m)
                if i + m > len(w):
                    continue
                ok = all(w[i + k] == (s if k % 2 == 0 else t) for k in range(m))
                if not ok:
                    continue
                flip = tuple(t if k % 2 == 0 else s for k in range(m))
                new = w[:i] + flip + w[i + m:]
                if new not in seen:
                    seen.add(new)
                    queue.append(new)
                    if len(seen) > cap:
                        raise ReductionBoundExceeded(
                            f"braid closure exceeded {cap} words (word length {len(word)})"
                        )
        return seen

    def _tits_normal_form(self, word, word_bound):
        if len(word) > word_bound:
            raise ReductionBoundExceeded(
                f"word of length {len(word)} exceeds the M-move bound {word_bound}"
            )
        cached = self._nf_cache.get(word)
        if cached is not None:
            return cached
        current = word
        while True:
            closure = self._braid_closure(current, _TITS_CLOSURE_CAP)
            shorter = None
            for w in closure:
                for i in range(len(w) - 1):
                    if w[i] == w[i + 1]:
                        shorter = w[:i] + w[i + 2:]
                        break
                if shorter is not None:
                    break
            if shorter is None:
                nf = min(closure)
                self._nf_cache[word] = nf
                return nf
            current = shorter

    # -- enumeration --------------------------------------------------------

    def elements(self, cap=DEFAULT_GROUP_CAP):
        if self._elements is None:
            self._elements = _build_element_table(self, cap)
        return self._elements

    def coset_table(self, subgroup, cap=DEFAULT_COSET_CAP):
        key = frozenset(subgroup)
        if key not in self._coset_tables:
            if self._elements is not None:
                self._coset_tables[key] = _cosets_from_elements(self, self._elements, key)
            else:
                self._coset_tables[key] = _cosets_by_enumeration(self, key, cap)
        return self._coset_tables[key]


@dataclass(frozen=True)
class GroupElement:
    """A group element held as its ShortLex-least reduced word."""

    system: CoxeterSystem
    word: tuple[int, ...]

    def __mul__(self, other):
        if other.system is not self.system:
            raise ValueError("elements belong to different systems")
        return GroupElement(self.system, self.system.reduce(self.word + other.word))

    def inverse(self):
        # generators are involutions, so the reversed word inverts
        return GroupElement(self.system, self.system.reduce(tuple(reversed(self.word))))

    def length(self):
        return len(self.word)

    def names(self):
        return tuple(self.system.gen_name(g) for g in self.word)

    def __repr__(self):
        return "e" if not self.word else "*".join(self.names())


def reduce_word(system, word):
    return system.element(word)


def length(w):
    return len(w.word)


def in_set(w):
    """Right descent set In(w) = {s : l(ws) < l(w)}."""
    system = w.system
    out = set()
    for s in range(system.ngens):
        if len(system.reduce(w.word + (s,))) < len(w.word):
            out.add(s)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Element tables
# ---------------------------------------------------------------------------

class ElementTable:
    """All elements of a finite system in ShortLex-BFS order.

    Row 0 is the identity; `words[i]` is the ShortLex normal form of row i;
    `right[g]` and `left[g]` are the permutations of rows given by right and
    left multiplication by generator g.
    """

    def __init__(self, system, words, right, left):
        self.system = system
        self.words = words
        self.right = right
        self.left = left
        self.order = len(words)
        self.length = np.fromiter((len(w) for w in words), dtype=np.int64, count=self.order)
        self._row_of_word = {w: i for i, w in enumerate(words)}
        self._subgroups = {}
        self._mult = None
        self._inv = None

    def __len__(self):
        return self.order

    def element(self, row):
        return GroupElement(self.system, self.words[row])

    def row_of(self, element):
        return self._row_of_word[element.word]

    def right_trace(self, row, word):
        right = self.right
        for g in word:
            row = int(right[g][row])
        return row

    def word_row(self, word):
        return self.right_trace(0, word)

    def mul_rows(self, a, b):
        return self.right_trace(a, self.words[b])

    def inv_rows(self):
        if self._inv is None:
            inv = np.empty(self.order, dtype=np.int64)
            for i, w in enumerate(self.words):
                inv[i] = self.right_trace(0, tuple(reversed(w)))
            self._inv = inv
        return self._inv

    def in_set_of_row(self, row):
        ln = self.length[row]
        return frozenset(
            g for g in range(self.system.ngens) if self.length[self.right[g][row]] < ln
        )

    def subgroup_rows(self, gens):
        """Rows of the standard parabolic generated by the given generators."""
        key = frozenset(gens)
        cached = self._subgroups.get(key)
        if cached is not None:
            return cached
        gens = sorted(key)
        seen = {0}
        queue = [0]
        head = 0
        while head < len(queue):
            cur = queue[head]
            head += 1
            for g in gens:
                nxt = int(self.right[g][cur])
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        rows = tuple(sorted(seen))
        self._subgroups[key] = rows
        return rows

    def mult_table(self, max_entries=4_000_000):
        """Dense row-by-row multiplication table (lazy; gated by size)."""
        if self._mult is None:
            if self.order * self.order > max_entries:
                raise CapExceeded(
                    f"multiplication table for group of order {self.order} exceeds gate"
                )
            table = np.empty((self.order, self.order), dtype=np.int32)
            table[:, 0] = np.arange(self.order)
            # columns in BFS order: col(h's) = right_s applied to col(h) when h' = h*s
            for b in range(1, self.order):
                w = self.words[b]
                prefix = self._row_of_word[w[:-1]]
                table[:, b] = self.right[w[-1]][table[:, prefix]]
            self._mult = table
        return self._mult

    def length_generating_function(self):
        coeffs = np.zeros(int(self.length.max(initial=0)) + 1, dtype=np.int64)
        for ln in self.length:
            coeffs[ln] += 1
        return coeffs.tolist()


def _build_element_table(system, cap):
    if system.ngens == 0:
        return ElementTable(system, [()], np.empty((0, 1), dtype=np.int64),
                            np.empty((0, 1), dtype=np.int64))
    table, _ = _schreier_table(system, (), cap)
    n = table.shape[0]
    left = table.T.copy()  # edge (x, g) read as g.x

    # right multiplication commutes with left: propagate rho_s over left edges
    right = np.full((system.ngens, n), -1, dtype=np.int64)
    for s in range(system.ngens):
        right[s][0] = left[s][0]
    queue = [0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    head = 0
    while head < len(queue):
        cur = queue[head]
        head += 1
        for t in range(system.ngens):
            nxt = int(left[t][cur])
            if not seen[nxt]:
                seen[nxt] = True
                for s in range(system.ngens):
                    right[s][nxt] = left[t][right[s][cur]]
                queue.append(nxt)

    # renumber rows in ShortLex-BFS order (right multiplication, FIFO)
    order = np.full(n, -1, dtype=np.int64)
    order[0] = 0
    bfs = [0]
    words = [()]
    head = 0
    while head < len(bfs):
        cur = bfs[head]
        head += 1
        for s in range(system.ngens):
            nxt = int(right[s][cur])
            if order[nxt] == -1:
                order[nxt] = len(bfs)
                bfs.append(nxt)
                words.append(words[head - 1] + (s,))
    new_right = np.empty_like(right)
    new_left = np.empty_like(left)
    for g in range(system.ngens):
        new_right[g][order] = order[right[g]]
        new_left[g][order] = order[left[g]]
    return ElementTable(system, words, new_right, new_left)


def enumerate_group(system, cap=DEFAULT_GROUP_CAP):
    return system.elements(cap)


# ---------------------------------------------------------------------------
# Coset tables
# ---------------------------------------------------------------------------

class CosetTable:
    """Left cosets W/W_J with the left multiplication action.

    `table[c, g]` is the coset g.c; `rep_words[c]` is the ShortLex normal
    form of the unique minimal-length element of coset c.  Row numbering is
    breadth-first discovery from coset 0 scanning generators in order.
    """

    def __init__(self, system, subgroup, table, rep_words, element_coset=None):
        self.system = system
        self.subgroup = frozenset(subgroup)
        self.table = table
        self.rep_words = rep_words
        self.element_coset = element_coset
        self.index = table.shape[0]

    def __len__(self):
        return self.index

    def column(self, g):
        return self.table[:, g]

    def act(self, g, c):
        return int(self.table[c, g])

    def coset_of_word(self, word):
        c = 0
        for g in reversed(word):
            c = int(self.table[c, g])
        return c

    def perm_of_word(self, word):
        perm = np.arange(self.index, dtype=np.int64)
        for g in reversed(word):
            perm = self.table[perm, g]
        return perm

    def representative(self, c):
        return GroupElement(self.system, self.rep_words[c])

    def check_invariants(self):
        for g in range(self.system.ngens):
            col = self.table[:, g]
            assert np.array_equal(col[col], np.arange(self.index)), "generator not an involution"
        assert self.rep_words[0] == (), "representative of coset 0 must be the identity"
        for c in range(self.index):
            assert self.coset_of_word(self.rep_words[c]) == c, "representative does not reach its coset"


def _cosets_by_enumeration(system, subgroup, cap):
    table, path_words = _schreier_table(system, subgroup, cap)
    reps = []
    for path in path_words:
        # path semantics apply letters in traversal order, so the coset
        # representative is the reversed word; it is automatically of minimal
        # length, and the braid closure finds its ShortLex form
        word = tuple(reversed(path))
        reps.append(system.reduce(word, word_bound=max(DEFAULT_WORD_BOUND, len(word))))
    return CosetTable(system, subgroup, table, reps)


def _cosets_from_elements(system, et, subgroup):
    n = et.order
    gens = sorted(subgroup)
    orbit = np.full(n, -1, dtype=np.int64)
    norbits = 0
    for start in range(n):
        if orbit[start] != -1:
            continue
        orbit[start] = norbits
        queue = [start]
        head = 0
        while head < len(queue):
            cur = queue[head]
            head += 1
            for g in gens:
                nxt = int(et.right[g][cur])
                if orbit[nxt] == -1:
                    orbit[nxt] = norbits
                    queue.append(nxt)
        norbits += 1
    # temporary orbit ids are by minimal member; renumber by left BFS from coset of e
    min_row = np.full(norbits, n, dtype=np.int64)
    for row in range(n):
        o = orbit[row]
        if row < min_row[o]:
            min_row[o] = row
    raw = np.empty((norbits, system.ngens), dtype=np.int64)
    for o in range(norbits):
        rep = int(min_row[o])
        for g in range(system.ngens):
            raw[o, g] = orbit[et.left[g][rep]]
    order = np.full(norbits, -1, dtype=np.int64)
    root = int(orbit[0])
    order[root] = 0
    queue = [root]
    head = 0
    while head < len(queue):
        cur = queue[head]
        head += 1
        for g in range(system.ngens):
            nxt = int(raw[cur, g])
            if order[nxt] == -1:
                order[nxt] = len(queue)
                queue.append(nxt)
    table = np.empty_like(raw)
    for o in range(norbits):
        table[order[o]] = order[raw[o]]
    reps = [None] * norbits
    for o in range(norbits):
        reps[order[o]] = et.words[int(min_row[o])]
    element_coset = order[orbit]
    return CosetTable(system, subgroup, table, reps, element_coset)


def coset_enumerate(system, subgroup, cap=DEFAULT_COSET_CAP):
    return system.coset_table(subgroup, cap)


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

def family_system(spec, n):
    """Coxeter system of the n-th family term, with the preferred chain recorded."""
    diagram = family_term(spec, n)
    s_minus1 = family_term(spec, -1).vertices if n >= 0 else diagram.vertices
    return CoxeterSystem.from_diagram(
        diagram, chain=preferred_chain(spec, n), s_minus1=s_minus1
    )


def flag_cosets(system, table):
    """Cosets s_j...s_n W_{n-1} for j = 1..n+1 (empty product at j = n+1)."""
    chain = system.chain
    n = len(chain)
    return [table.coset_of_word(chain[j - 1:]) for j in range(1, n + 2)]


# ---------------------------------------------------------------------------
# Section-3 style brute-force checks
# ---------------------------------------------------------------------------

def check_section3(spec, n, cap=DEFAULT_GROUP_CAP):
    """Exhaustively verify the four coset propositions for W_n.

    3.1: left multiplication by s_i transposes two adjacent flag cosets and
         fixes the rest.
    3.2: W_{i-1} meets the conjugate (s_i...s_n) W_{n-1} (s_n...s_i) in W_{i-2}.
    3.3: elements agreeing on the coset tuple from position i differ by W_{i-2}.
    3.4: the n+1 flag cosets translated by any c are pairwise distinct.
    """
    from .report import Report

    system = family_system(spec, n)
    system.require_finite_labels()
    report = Report("check.s3", {"family": spec.name(), "n": n, "cap": cap})
    if n < 1:
        report.skip("section3", "needs n >= 1")
        return report
    et = system.elements(cap)
    table = system.coset_table(system.S(n - 1))
    chain = system.chain
    flags = flag_cosets(system, table)

    # 3.1 -- transposition pattern of left multiplication
    ok31 = True
    witness = None
    for i in range(1, n + 1):
        perm = table.column(chain[i - 1])
        for j in range(1, n + 2):
            image = int(perm[flags[j - 1]])
            expected = flags[i] if j == i else flags[i - 1] if j == i + 1 else flags[j - 1]
            if image != expected:
                ok31 = False
                witness = {"i": i, "j": j, "image": image, "expected": expected}
                break
        if not ok31:
            break
    report.add("prop3.1-permutations", ok31, witness=witness)

    # 3.2 -- subgroup intersection, element by element
    ok32 = True
    witness = None
    wn1 = et.subgroup_rows(system.S(n - 1))
    for i in range(1, n + 1):
        u_word = chain[i - 1:]
        u_row = et.word_row(u_word)
        u_inv_word = tuple(reversed(u_word))
        conjugate = set()
        for w in wn1:
            r = et.right_trace(u_row, et.words[w])
            conjugate.add(et.right_trace(r, u_inv_word))
        left = set(et.subgroup_rows(system.S(i - 1))) & conjugate
        expected = set(et.subgroup_rows(system.S(i - 2)))
        if left != expected:
            ok32 = False
            witness = {"i": i, "extra": sorted(
                str(et.element(r)) for r in left.symmetric_difference(expected))[:5]}
            break
    report.add("prop3.2-intersection", ok32, witness=witness)

    # flag tuples for every element (reused by 3.3 and 3.4)
    tuples = []
    for row in range(et.order):
        perm = table.perm_of_word(et.words[row])
        tuples.append(tuple(int(perm[f]) for f in flags))

    # 3.3 -- tuple stabilizer
    ok33 = True
    witness = None
    inv = et.inv_rows()
    for i in range(1, n + 1):
        buckets = {}
        for row in range(et.order):
            buckets.setdefault(tuples[row][i - 1:], []).append(row)
        allowed = set(et.subgroup_rows(system.S(i - 2)))
        for members in buckets.values():
            for a in members:
                inv_a = int(inv[a])
                for b in members:
                    if et.right_trace(inv_a, et.words[b]) not in allowed:
                        ok33 = False
                        witness = {"i": i, "sigma": str(et.element(a)), "tau": str(et.element(b))}
                        break
                if not ok33:
                    break
            if not ok33:
                break
        if not ok33:
            break
    report.add("prop3.3-tuple-stabilizer", ok33, witness=witness)

    # 3.4 -- distinctness of the translated flag
    ok34 = True
    witness = None
    for row in range(et.order):
        t = tuples[row]
        if len(set(t)) != len(t):
            ok34 = False
            witness = {"c": str(et.element(row)), "cosets": list(t)}
            break
    report.add("prop3.4-distinct", ok34, witness=witness)
    return report
