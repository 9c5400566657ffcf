"""Coset complexes, oracles, links, subdivision, chamber, stabilizers."""

import itertools
import math

import pytest

from coxstab.diagrams import FamilySpec, builtin_family, parse_diagram
from coxstab.complexes import (
    SimplicialComplex,
    barycentric_subdivision,
    base_chamber,
    build_Cn,
    check_lift_consistency,
    check_link_iso,
    check_stabilizers,
    check_transitivity,
    iso_check,
    link,
    oracle_complex,
)


def cycle_complex(n):
    return SimplicialComplex(n, [(i,) for i in range(n)] + [tuple(sorted((i, (i + 1) % n))) for i in range(n)])


# -- construction -------------------------------------------------------------

def test_build_a2_is_full_triangle():
    cn = build_Cn(builtin_family("A"), 2)
    assert cn.complex.f_vector() == [3, 3, 1]


def test_build_b1_is_four_cycle():
    cn = build_Cn(builtin_family("B"), 1)
    assert cn.complex.f_vector() == [4, 4]
    assert iso_check(cn.complex, cycle_complex(4)) is not None


def test_build_d1_is_octahedron_skeleton():
    cn = build_Cn(builtin_family("D"), 1)
    assert cn.complex.f_vector() == [6, 12]


def test_build_c0_discrete():
    cn = build_Cn(builtin_family("B"), 0)
    assert cn.complex.f_vector() == [2]
    cn_a = build_Cn(builtin_family("A"), 0)
    assert cn_a.complex.f_vector() == [1]


def test_action_is_valid():
    for tag, n in (("A", 3), ("B", 2), ("D", 1)):
        cn = build_Cn(builtin_family(tag), n)
        cn.action.validate()


def test_counting_a_family_binomials():
    for n in range(1, 5):
        cn = build_Cn(builtin_family("A"), n)
        assert cn.complex.f_vector() == [
            math.comb(n + 1, k + 1) for k in range(n + 1)
        ]


def test_counting_b_family_matches_sign_subset_oracle():
    for n in range(1, 4):
        cn = build_Cn(builtin_family("B"), n)
        oracle = oracle_complex("hyperoctahedron", n)
        assert cn.complex.f_vector() == oracle.f_vector()
        # the oracle's counts come from enumerating sign-consistent subsets
        assert oracle.f_vector() == [2 ** (k + 1) * math.comb(n + 1, k + 1) for k in range(n + 1)]


# -- oracle complexes ----------------------------------------------------------

def test_oracle_octahedron_counts():
    assert oracle_complex("hyperoctahedron", 2).f_vector() == [6, 12, 8]


def test_oracle_simplex_face_count():
    assert oracle_complex("simplex", 3).size() == 15


def test_oracle_skeleton_restriction():
    skel = oracle_complex("skeleton", 2, 1)
    octa = oracle_complex("hyperoctahedron", 2)
    assert skel.f_vector() == octa.f_vector()[:2]
    with pytest.raises(ValueError):
        oracle_complex("skeleton", 2, 3)


# -- isomorphism ----------------------------------------------------------------

def test_iso_a2_vs_simplex():
    cn = build_Cn(builtin_family("A"), 2)
    assert iso_check(cn.complex, oracle_complex("simplex", 2)) is not None


def test_iso_b2_vs_hyperoctahedron():
    cn = build_Cn(builtin_family("B"), 2)
    mapping = iso_check(cn.complex, oracle_complex("hyperoctahedron", 2))
    assert mapping is not None
    # verify it is a genuine simplicial bijection
    target = oracle_complex("hyperoctahedron", 2)
    images = {tuple(sorted(mapping[v] for v in s)) for s in cn.complex.simplices()}
    assert images == set(target.simplices())


def test_iso_d_vs_skeleton():
    for n in (1, 2):
        cn = build_Cn(builtin_family("D"), n)
        assert iso_check(cn.complex, oracle_complex("skeleton", n + 1, n)) is not None


def test_iso_negative():
    assert iso_check(cycle_complex(4), cycle_complex(3)) is None
    # same f-vector, different structure: 6-cycle vs two triangles
    two_triangles = SimplicialComplex(
        6, [(i,) for i in range(6)] + [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    )
    assert iso_check(cycle_complex(6), two_triangles) is None


# -- links ----------------------------------------------------------------------

def test_link_of_vertex_in_octahedron():
    octa = oracle_complex("hyperoctahedron", 2)
    lk = link(octa, (0,))
    assert lk.f_vector() == [4, 4]
    assert iso_check(lk, cycle_complex(4)) is not None


def test_link_of_top_simplex_is_empty():
    octa = oracle_complex("hyperoctahedron", 2)
    top = octa.by_dim[2][0]
    lk = link(octa, top)
    assert lk.size() == 0


def test_link_of_edge_in_simplex3():
    s3 = oracle_complex("simplex", 3)
    lk = link(s3, (0, 1))
    assert lk.f_vector() == [2, 1]


def test_link_absent_simplex_raises():
    with pytest.raises(ValueError):
        link(cycle_complex(4), (0, 2))


def test_check_link_iso():
    assert check_link_iso(builtin_family("A"), 3).passed
    assert check_link_iso(builtin_family("B"), 2, exhaustive=True).passed
    assert check_link_iso(builtin_family("D"), 1).passed


# -- subdivision ------------------------------------------------------------------

def test_sd_of_segment():
    seg = oracle_complex("simplex", 1)
    sd, _, _ = barycentric_subdivision(seg)
    assert sd.f_vector() == [3, 2]


def test_sd_of_triangle():
    sd, _, _ = barycentric_subdivision(oracle_complex("simplex", 2))
    assert sd.f_vector() == [7, 12, 6]


def test_sd_top_count_equals_group_order():
    cn = build_Cn(builtin_family("A"), 2)
    sd, sd_action, _ = barycentric_subdivision(cn.complex, cn.action)
    assert len(sd.by_dim[2]) == 6  # |Sigma_3|


def test_transitivity_checks():
    assert check_transitivity(builtin_family("A"), 2).passed
    assert check_transitivity(builtin_family("B"), 1).passed
    assert check_transitivity(builtin_family("A"), 0).passed


def test_lift_consistency():
    for tag, n in (("A", 3), ("B", 2)):
        assert check_lift_consistency(builtin_family(tag), n).passed


# -- base chamber and stabilizers ---------------------------------------------------

def test_base_chamber_mirrors_a2():
    chamber = base_chamber(builtin_family("A"), 2)
    system = chamber.cn.system
    s2 = system.chain[1]
    assert chamber.mirror_positions[s2] == frozenset({0, 1})
    s1 = system.chain[0]
    assert chamber.mirror_positions[s1] == frozenset({0, 2})


def test_base_chamber_mirrors_b2_s0():
    chamber = base_chamber(builtin_family("B"), 2)
    system = chamber.cn.system
    b0 = system.gen_index("b0")
    # b0 does not commute with s1, so its mirror omits a_0
    assert chamber.mirror_positions[b0] == frozenset({1, 2})


def test_base_chamber_s_minus_one_full_mirror():
    # custom family: vertex 'a' is not a neighbour of the preferred vertex,
    # so it lies in S_{-1} and its mirror is all of Delta
    spec = FamilySpec(parse_diagram("vertices a b c; edge b c; preferred c"))
    chamber = base_chamber(spec, 1)
    a = chamber.cn.system.gen_index("a")
    assert chamber.mirror_positions[a] == frozenset({0, 1})


def test_base_chamber_a1_single_mirror():
    chamber = base_chamber(builtin_family("A"), 1)
    s1 = chamber.cn.system.chain[0]
    assert chamber.mirror_positions[s1] == frozenset({0})
    assert len(chamber.mirror_positions) == 1


def test_stabilizers_a2():
    assert check_stabilizers(builtin_family("A"), 2).passed


def test_stabilizers_b1_and_d1():
    assert check_stabilizers(builtin_family("B"), 1).passed
    assert check_stabilizers(builtin_family("D"), 1).passed


def test_stabilizer_of_ai_is_parabolic():
    # stabilizer of {a_i} must be generated by S_n minus S_{=i}
    chamber = base_chamber(builtin_family("B"), 2)
    cn = chamber.cn
    et = cn.system.elements()
    for i in range(3):
        face = (chamber.a[i],)
        stab = set()
        for row in range(et.order):
            perm = chamber.sd_action.word_perm(et.words[row])
            if int(perm[face[0]]) == face[0]:
                stab.add(row)
        gens = [g for g in range(cn.system.ngens) if i in chamber.mirror_positions[g]]
        assert stab == set(et.subgroup_rows(gens))


def test_face_closure_validation():
    with pytest.raises(ValueError):
        SimplicialComplex(3, [(0, 1, 2)])
