"""coxstab: exact desk-scale computations with Coxeter coset complexes.

Builds the coset complexes attached to indexed families of Coxeter diagrams,
verifies their combinatorial and homological properties by exhaustive
computation, and replicates the homological-stability pattern of the A, B,
and D families at small parameters.
"""

__version__ = "0.1.0"

from .basic import (
    MirroredSpace,
    basic_construction,
    check_basic_properties,
    check_chamber_filtration,
    check_sd_iso,
    delta_mirrored,
    mirror_union,
)
from .complexes import (
    BaseChamber,
    GroupAction,
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
from .diagrams import (
    INF,
    CoxeterMatrix,
    Diagram,
    FamilySpec,
    builtin_family,
    family_term,
    parse_diagram,
    preferred_chain,
    serialize_diagram,
)
from .engine import (
    CoxeterSystem,
    CosetTable,
    ElementTable,
    GroupElement,
    check_section3,
    coset_enumerate,
    enumerate_group,
    family_system,
    in_set,
    length,
    reduce_word,
)
from .errors import (
    BudgetExceeded,
    CapExceeded,
    CoxstabError,
    DiagramError,
    InfiniteLabelError,
    ReductionBoundExceeded,
    SearchBudgetExceeded,
)
from .homology import (
    ChainComplex,
    HomologyTable,
    chain_complex_of,
    check_dfamily_top_betti,
    check_weakly_cm,
    connectivity_report,
    homology,
    mayer_vietoris_check,
    simplicial_homology,
)
from .linalg import SparseMatrix, smith_normal_form
from .semisimplicial import (
    SemisimplicialSet,
    build_Dn,
    check_dn_connectivity,
    check_phi_iso,
    ordered_simplices,
    realization_chain_complex,
)
from .stability import (
    BarComplex,
    PermutationModule,
    SpectralPage,
    StabilityTable,
    borel_spectral_sequence,
    group_homology,
    h1_formula,
    homology_with_coefficients,
    lemma83_check,
    stabilization_map,
    verify_main_theorem,
)

__all__ = [name for name in dir() if not name.startswith("_")]
