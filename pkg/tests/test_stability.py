"""Bar-resolution homology, stabilization maps, and the spectral sequence.

The independent oracle: a naive dense construction of the normalized bar
boundary using itertools tuples and engine-level multiplication, row-reduced
mod 2 with plain numpy.
"""

import itertools

import numpy as np
import pytest

from coxstab.diagrams import builtin_family
from coxstab.engine import family_system
from coxstab.errors import BudgetExceeded
from coxstab.stability import (
    BarComplex,
    PermutationModule,
    borel_spectral_sequence,
    f2_matrix_rank,
    group_homology,
    h1_formula,
    homology_basis,
    homology_with_coefficients,
    lemma83_check,
    map_verdict,
    stabilization_map,
    verify_main_theorem,
    StabilityTable,
)


# -- oracle ---------------------------------------------------------------------

def dense_bar_homology_f2(et, maxdeg):
    """Naive normalized bar dims over F_2 via dense elimination."""
    order = et.order
    letters = list(range(1, order))

    def basis(k):
        return list(itertools.product(letters, repeat=k))

    def boundary(k):
        rows = {b: i for i, b in enumerate(basis(k - 1))}
        cols = basis(k)
        mat = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for j, tup in enumerate(cols):
            terms = [tup[1:]]
            for i in range(1, k):
                merged = et.mul_rows(tup[i - 1], tup[i])
                if merged != 0:
                    terms.append(tup[: i - 1] + (merged,) + tup[i + 1:])
            terms.append(tup[:-1])
            for t in terms:
                mat[rows[t], j] ^= 1
        return mat

    def rank2(mat):
        m = mat.copy() % 2
        r = 0
        for c in range(m.shape[1]):
            piv = None
            for i in range(r, m.shape[0]):
                if m[i, c]:
                    piv = i
                    break
            if piv is None:
                continue
            m[[r, piv]] = m[[piv, r]]
            for i in range(m.shape[0]):
                if i != r and m[i, c]:
                    m[i] ^= m[r]
            r += 1
        return r

    dims = []
    ranks = {k: rank2(boundary(k)) for k in range(1, maxdeg + 2)}
    for l in range(maxdeg + 1):
        dim_l = len(basis(l))
        r_out = ranks.get(l, 0)
        r_in = ranks.get(l + 1, 0)
        dims.append(dim_l - r_out - r_in)
    return dims


# -- group homology -------------------------------------------------------------

def test_c2_homology_every_degree():
    system = family_system(builtin_family("A"), 1)  # Sigma_2
    table = group_homology(system, "f2", maxdeg=4)
    assert [table.rank(l) for l in range(5)] == [1, 1, 1, 1, 1]
    et = system.elements()
    assert dense_bar_homology_f2(et, 4) == [1, 1, 1, 1, 1]


def test_sigma3_homology_matches_dense_oracle():
    system = family_system(builtin_family("A"), 2)
    table = group_homology(system, "f2", maxdeg=2)
    dims = [table.rank(l) for l in range(3)]
    assert dims == [1, 1, 1]
    assert dims == dense_bar_homology_f2(system.elements(), 2)


def test_b1_homology_matches_dense_oracle():
    system = family_system(builtin_family("B"), 1)  # order 8
    table = group_homology(system, "f2", maxdeg=2)
    dims = [table.rank(l) for l in range(3)]
    assert dims == dense_bar_homology_f2(system.elements(), 2)


def test_degree_zero_always_one():
    for tag, n in (("A", 2), ("B", 1), ("D", 1), ("I(7)", 1)):
        system = family_system(builtin_family(tag), n)
        assert group_homology(system, "f2", maxdeg=0).rank(0) == 1


def test_trivial_group_homology():
    system = family_system(builtin_family("A"), 0)
    table = group_homology(system, "f2", maxdeg=3)
    assert [table.rank(l) for l in range(4)] == [1, 0, 0, 0]


def test_normalized_and_unnormalized_agree():
    for tag, n in (("A", 1), ("A", 2)):
        system = family_system(builtin_family(tag), n)
        a = group_homology(system, "f2", maxdeg=2, normalized=True)
        b = group_homology(system, "f2", maxdeg=2, normalized=False)
        assert [a.rank(l) for l in range(3)] == [b.rank(l) for l in range(3)]


def test_bar_rank_formula():
    system = family_system(builtin_family("B"), 1)
    et = system.elements()
    bar = BarComplex(et)
    for k in range(4):
        assert bar.dim(k) == (et.order - 1) ** k
    module = PermutationModule(et, system.coset_table(system.S(0)))
    bar_m = BarComplex(et, module)
    assert bar_m.dim(2) == module.size * (et.order - 1) ** 2


def test_integer_homology_small():
    system = family_system(builtin_family("A"), 2)  # Sigma_3
    table = group_homology(system, "z", maxdeg=2)
    assert table.rank(0) == 1 and not table.torsion(0)
    assert table.rank(1) == 0 and table.torsion(1) == [2]
    assert table.rank(2) == 0 and not table.torsion(2)


def test_integer_homology_gate():
    system = family_system(builtin_family("A"), 4)  # Sigma_5: gated
    with pytest.raises(BudgetExceeded):
        group_homology(system, "z", maxdeg=2)


def test_budget_exceeded_reported():
    system = family_system(builtin_family("B"), 3)  # order 384
    with pytest.raises(BudgetExceeded):
        group_homology(system, "f2", maxdeg=2, budget=10**6)


# -- h1 formula -------------------------------------------------------------------

def test_h1_formula_values():
    assert h1_formula(family_system(builtin_family("A"), 3)) == 1
    assert h1_formula(family_system(builtin_family("B"), 2)) == 2
    assert h1_formula(family_system(builtin_family("A"), 1)) == 1  # single vertex
    assert h1_formula(family_system(builtin_family("D"), 2)) == 1
    assert h1_formula(family_system(builtin_family("I(7)"), 1)) == 1
    assert h1_formula(family_system(builtin_family("I(4)"), 1)) == 2


def test_h1_formula_matches_bar():
    for tag, n in (("A", 1), ("A", 2), ("A", 3), ("B", 1), ("B", 2), ("D", 1), ("I(5)", 1), ("I(4)", 1)):
        system = family_system(builtin_family(tag), n)
        assert group_homology(system, "f2", maxdeg=1).rank(1) == h1_formula(system)


# -- coefficients and Shapiro ------------------------------------------------------

def test_trivial_module_agrees_with_group_homology():
    system = family_system(builtin_family("A"), 2)
    et = system.elements()
    module = PermutationModule.trivial(et)
    a = homology_with_coefficients(system, module, maxdeg=2)
    b = group_homology(system, "f2", maxdeg=2)
    assert [a.rank(l) for l in range(3)] == [b.rank(l) for l in range(3)]


def test_shapiro_sigma3():
    system = family_system(builtin_family("A"), 2)
    et = system.elements()
    module = PermutationModule(et, system.coset_table(system.S(1)))
    table = homology_with_coefficients(system, module, maxdeg=2)
    # H_l(Sigma_3; F2[Sigma_3/Sigma_2]) = H_l(Sigma_2; F2)
    assert [table.rank(l) for l in range(3)] == [1, 1, 1]


def test_shapiro_b1():
    system = family_system(builtin_family("B"), 1)
    et = system.elements()
    module = PermutationModule(et, system.coset_table(system.S(0)))
    table = homology_with_coefficients(system, module, maxdeg=1)
    small = family_system(builtin_family("B"), 0)  # C_2
    expected = group_homology(small, "f2", maxdeg=1)
    assert [table.rank(l) for l in range(2)] == [expected.rank(l) for l in range(2)]


def test_free_module_is_acyclic():
    # coefficients in F2[W] itself: homology of a point above degree 0
    system = family_system(builtin_family("A"), 2)
    et = system.elements()
    module = PermutationModule(et, system.coset_table(frozenset()))
    table = homology_with_coefficients(system, module, maxdeg=2)
    assert [table.rank(l) for l in range(3)] == [1, 0, 0]


# -- stabilization maps --------------------------------------------------------------

def test_stabilization_h0_identity():
    for m in (1, 2, 3):
        stab = stabilization_map(builtin_family("A"), m, 0)
        assert stab.matrix == ((1,),)
        assert stab.verdict == "iso"


def test_stabilization_a_l1_m2():
    stab = stabilization_map(builtin_family("A"), 2, 1)
    assert stab.source_dim == 1 and stab.target_dim == 1
    assert stab.matrix == ((1,),)
    assert stab.verdict == "iso"


def test_stabilization_out_of_range_can_fail():
    # H_1(W_0) -> H_1(W_1) for the A family: source is trivial group
    stab = stabilization_map(builtin_family("A"), 1, 1)
    assert stab.source_dim == 0 and stab.target_dim == 1
    assert stab.verdict == "injection-only"


def test_map_verdict_classification():
    assert map_verdict(((1,),), 1, 1) == (1, "iso")
    assert map_verdict(((0,),), 1, 1) == (0, "fail")
    assert map_verdict(((1, 0),), 2, 1) == (1, "surjection-only")
    assert f2_matrix_rank(((1, 1), (1, 1))) == 1


# -- spectral sequence ----------------------------------------------------------------

def test_borel_ss_a2():
    page, report = borel_spectral_sequence(builtin_family("A"), 2, maxdeg=2)
    assert report.passed, report.to_json()
    # E^1_{k,l} = H_l(BW_{1-k}): W_1 = Sigma_2, W_0 = W_{-1} = trivial
    assert page.dims[(0, 0)] == 1 and page.dims[(1, 0)] == 1 and page.dims[(2, 0)] == 1
    assert page.dims[(0, 1)] == 1 and page.dims[(1, 1)] == 0
    assert page.dims[(0, 2)] == 1
    # row l = 0: d^1 alternates 0, iso, 0, ...
    assert page.d1_rank[(1, 0)] == 0
    assert page.d1_rank[(2, 0)] == 1


def test_borel_ss_b2():
    page, report = borel_spectral_sequence(builtin_family("B"), 2, maxdeg=1)
    assert report.passed, report.to_json()


def test_lemma83_roundtrip():
    table = verify_main_theorem(builtin_family("A"), 3, maxdeg=1)
    for n, rep in table.lemma83.items():
        assert rep.passed, rep.to_json()


def test_lemma83_detects_bad_table():
    table = StabilityTable("A", "f2", 1, 4)
    for m in range(-1, 5):
        table.dims[(m, 0)] = 1
        table.dims[(m, 1)] = 1 if m >= 1 else 0
    for m in range(0, 5):
        table.map_ranks[(m, 0)] = 1
        table.map_ranks[(m, 1)] = 0  # fabricated: stabilization rank zero
        table.verdicts[(m, 0)] = "iso"
        table.verdicts[(m, 1)] = "fail"
    report = lemma83_check(table, 4)
    assert not report.passed
    failing = [item for item in report.items if item.status == "fail"]
    assert failing and failing[0].witness["cell"] is not None


def test_verify_main_theorem_a3():
    table = verify_main_theorem(builtin_family("A"), 3, maxdeg=1)
    assert table.main_theorem_holds()
    for (m, l), verdict in table.verdicts.items():
        if m >= 1 and 2 * l <= m:
            assert verdict == "iso", (m, l, verdict)
    rows = table.csv_rows()
    assert rows[0] == ("family", "m", "l", "dim", "map_rank", "verdict")
    assert len(rows) > 5


def test_verify_main_theorem_marks_untested_on_budget():
    table = verify_main_theorem(builtin_family("B"), 3, maxdeg=2, budget=10**5)
    assert any(v == "untested" for v in table.verdicts.values())
