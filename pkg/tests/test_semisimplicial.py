"""The semisimplicial coset model, ordered simplices, and phi."""

import numpy as np

from coxstab.complexes import build_Cn, oracle_complex
from coxstab.diagrams import builtin_family
from coxstab.homology import homology
from coxstab.semisimplicial import (
    PAPER_LITERAL_IDENTITY,
    STANDARD_IDENTITY,
    build_Dn,
    check_dn_connectivity,
    check_phi_iso,
    ordered_simplices,
    realization_chain_complex,
)


def test_dn_level_sizes_a2():
    dn = build_Dn(builtin_family("A"), 2)
    assert dn.level_sizes == [3, 6, 6]


def test_dn_levels_empty_above_n():
    dn = build_Dn(builtin_family("A"), 2)
    assert dn.size(3) == 0
    assert dn.top == 2


def test_d0_face_is_projection():
    # d_0 is the empty product: c W_{n-k-1} -> c W_{n-k}
    spec = builtin_family("B")
    dn = build_Dn(spec, 2)
    from coxstab.engine import family_system

    system = family_system(spec, 2)
    system.elements()
    t1 = system.coset_table(system.S(0))
    t0 = system.coset_table(system.S(1))
    arr = dn.faces[(1, 0)]
    for c in range(dn.size(1)):
        word = t1.rep_words[c]
        assert int(arr[c]) == t0.coset_of_word(word)


def test_face_identity_standard_holds_literal_fails():
    # instances of the second convention only exist from level 3 up
    for tag, n in (("A", 3), ("B", 3)):
        dn = build_Dn(builtin_family(tag), n)
        verdicts = dn.face_identity_report()
        assert verdicts[STANDARD_IDENTITY]["holds"] is True
        assert verdicts[STANDARD_IDENTITY]["instances"] > 0
        assert verdicts[PAPER_LITERAL_IDENTITY]["holds"] is False
        assert dn.holds_identity() == STANDARD_IDENTITY


def test_face_identity_literal_vacuous_below_level_3():
    dn = build_Dn(builtin_family("A"), 2)
    verdicts = dn.face_identity_report()
    assert verdicts[PAPER_LITERAL_IDENTITY] == {"holds": True, "instances": 0}
    assert dn.holds_identity() == STANDARD_IDENTITY


def test_boundary_squares_to_zero():
    for tag, n in (("A", 3), ("B", 2), ("D", 1)):
        dn = build_Dn(builtin_family(tag), n)
        cc = realization_chain_complex(dn, "Z", reduced=True)
        assert cc.check_dd_zero()


def test_ordered_simplices_counts():
    seg = ordered_simplices(oracle_complex("simplex", 1))
    assert seg.level_sizes == [2, 2]
    tri = ordered_simplices(oracle_complex("simplex", 2))
    assert tri.level_sizes[2] == 6  # 3! orderings of the one triangle
    cn = build_Cn(builtin_family("A"), 2)
    assert ordered_simplices(cn.complex).level_sizes == [3, 6, 6]


def test_ordered_simplices_face_identity():
    ss = ordered_simplices(oracle_complex("simplex", 3))
    verdict = ss.face_identity_report()[STANDARD_IDENTITY]
    assert verdict["holds"] and verdict["instances"] > 0


def test_phi_iso():
    assert check_phi_iso(builtin_family("A"), 2).passed
    assert check_phi_iso(builtin_family("A"), 3).passed
    assert check_phi_iso(builtin_family("B"), 2).passed


def test_dn_realization_homology_a1():
    dn = build_Dn(builtin_family("A"), 1)
    cc = realization_chain_complex(dn, "Z", reduced=True)
    assert cc.dims == [2, 2]
    table = homology(cc)
    assert table.rank(0) == 0  # connected


def test_ordered_realization_of_triangle_connected_through_1():
    ss = ordered_simplices(oracle_complex("simplex", 2))
    table = homology(realization_chain_complex(ss, "Z", reduced=True))
    assert table.is_trivial_through(1)
    # cross-check over F2 by independent elimination
    table2 = homology(realization_chain_complex(ss, "F2", reduced=True))
    assert table2.rank(0) == 0 and table2.rank(1) == 0


def test_dn_connectivity_reports():
    for tag, n in (("A", 2), ("A", 3), ("B", 2)):
        report = check_dn_connectivity(builtin_family(tag), n)
        assert report.passed, report.to_json()
        assert report.data["recorded_identity"] == STANDARD_IDENTITY


def test_level_sizes_match_parabolic_indices():
    report = check_dn_connectivity(builtin_family("B"), 2)
    names = {item.name: item.status for item in report.items}
    assert names["level-sizes-are-coset-indices"] == "pass"
