"""Colimits of finite presheaf diagrams and the Van Kampen property.

The package computes colimits of diagrams of finite presheaves (sorts plus
unary operations), decides whether the colimiting cocone is Van Kampen via
uniqueness of proper mapping paths, and exercises the instance semantics:
pullback of typed instances along the cocone, pushforward of cartesian
families, and the unit/counit round-trips that witness or refute VK on
concrete data.
"""

from .presheaves import (
    BaseSignature,
    Congruence,
    OpSymbol,
    Presheaf,
    PresheafMorphism,
    compose,
    coproduct,
    identity,
    is_iso,
    is_monic,
    pullback,
    pullback_mediator,
    quotient,
    validate_morphism,
    validate_presheaf,
)
from .shapes import (
    Branch,
    Diagram,
    DiagramTransformation,
    ShapeEdge,
    ShapeGraph,
    branching_indices,
    cartesian_check,
    classify_vertices,
    enumerate_branches,
    is_acyclic,
    min_indices,
    undirected_cycles,
    validate_diagram,
    validate_transformation,
)
from .paths import (
    MappingPath,
    PathSegment,
    canonical_cycle,
    concat_paths,
    enumerate_proper_paths,
    is_inner_cycle_free,
    is_proper,
    reduce_inner_cycles,
    reverse_path,
    validate_path,
)
from .colimits import (
    Cocone,
    PreconditionError,
    affected_minimal,
    coequalizer_as_pushout,
    cocones_equivalent,
    colimit_specialized,
    colimit_universal,
    mediating_morphism,
    primary_identifications,
    simplify_diagram,
    universal_coequalizer_form,
)
from .verify import (
    NOT_VK,
    UNDETERMINED,
    VK,
    CyclicPath,
    DistinctPaths,
    DomainCycle,
    ImageOverlap,
    OrbitWitness,
    VkVerdict,
    agreement_suite,
    check_affected_minimal,
    check_bruteforce,
    check_combined,
    check_cyclic_branching,
    check_directed_cycle,
    check_image_disjoint,
    check_monic_shortcut,
    decision_route,
    domain_cycle_search,
    domain_cycle_to_distinct_paths,
    validate_domain_cycle,
    validate_witness,
)
from .instances import (
    CartesianFamily,
    RoundtripReport,
    TypedInstance,
    pullback_along_cocone,
    pushforward,
    roundtrip_counit,
    roundtrip_unit,
    sample_cartesian_families,
)
from .workspace import (
    Workspace,
    WorkspaceError,
    load_workspace,
    resolve_typed_instance,
    save_cocone,
    save_workspace,
)

__version__ = "0.1.0"
