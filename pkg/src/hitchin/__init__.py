"""Properly convex foliated projective structures from surface-group
representations into PSL(4, R).

The package builds the genus-2 octagon group, composes it with the
irreducible or diagonal embedding of SL(2, R) into SL(4, R), samples the
equivariant flag curve on the boundary circle from eigenvector data,
evaluates and classifies the developing maps of the two foliated
structures, certifies convexity of the leaf domains, and recovers the
invariant symplectic form with its contact geometry.  The ``hitchin``
console script (or ``python -m hitchin``) exposes generation,
deformation, certification, sampling, and rendering.
"""

from .contact import (
    ComplexStructure,
    ContactVector,
    contact_field,
    contact_plane,
    definiteness_check,
    j_from_lagrangians,
    lagrangian_residual,
    oriented_form,
)
from .devmap import (
    DevResult,
    LeafDomain,
    SectorVerdict,
    classify,
    convex_complement_check,
    dev,
    dev_prime,
    dev_table_csv,
    equivariance_residual,
    geodesic_endpoints,
    leaf_boundary,
    leaf_to_svg,
    model_base_triple,
    sector_check,
    xi1_from_lines,
    xi2_recover,
    xi_t,
)
from .errors import GeometryError
from .frenet import (
    FlagCurve,
    FlagSample,
    check_sum_partitions,
    curve_to_csv,
    dual_curve,
    flag_equivariance_residual,
    flag_from_element,
    osculation_check,
    sample_curve,
    veronese_flag,
)
from .projective import (
    Flag3,
    Map4,
    ProjLine,
    ProjPlane,
    ProjPoint,
    cross_ratio,
    join,
    line_plane_meet,
    meet_planes,
)
from .reps import (
    Rep4,
    SymplecticForm,
    deform,
    diag_embed,
    diag_rep,
    invariant_symplectic,
    project_to_variety,
    relation_residual,
    sym3,
    sym3_rep,
)
from .surface import (
    BoundaryPoint,
    BoundaryTriple,
    Rep2,
    enumerate_words,
    fuchsian_octagon,
    translation_length,
)

__version__ = "0.1.0"
