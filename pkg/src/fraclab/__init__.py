"""Self-similar sets, their projections and images, and dimension estimates."""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    FraclabError,
    NotFoundError,
    PreconditionError,
    ResourceError,
    UnsupportedError,
)
from .ifs import (
    CylinderCover,
    Ifs,
    Similitude,
    SSCCertificate,
    SSCStatus,
    WeightedCloud,
    bounding_ball,
    chaos_game,
    check_ssc,
    compose,
    cylinder_cover,
    fixed_point,
    ifs_from_dict,
    level_cover,
    natural_projection_point,
    product_ifs,
    sample_cloud,
    similarity_dimension,
)
from .subsystem import (
    HomogenizeFailure,
    detect_exact_overlaps,
    greedy_ssc_subsystem,
    homogenize,
    iterate,
    remove_words,
)
from .maps import (
    SmoothMap,
    algebraic_product,
    angle_coordinate,
    curvy_check,
    distance_from,
    distance_set,
    geodesic_project,
    linear,
    map_image,
    orthogonal_project_cloud,
    poly,
    product2,
    product3,
    project_ifs,
    project_ifs_plane,
    radial_project,
    tmain_condition_check,
)
from .geometry import (
    ConeOutcome,
    DoubleCone,
    SeparationReport,
    affine_dimension,
    collinearity_check,
    cone_contains,
    cone_intersect_test,
    separation_spectrum,
    two_to_one_direction,
)
from .dimension import (
    BoxCountResult,
    Ltech1Certificate,
    box_count,
    direction_sweep,
    estimate_set_dimension,
    local_dimension,
    ltech1_certificate,
)
from .estimators import (
    BoxCountingDimension,
    OrthogonalProjection,
    RadialProjection,
    SmoothMapTransformer,
)
