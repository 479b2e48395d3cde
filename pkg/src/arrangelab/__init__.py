"""Monte Carlo laboratory for random real arrangements and obstacle graphs.

Submodules:
  linalg      packed symmetric matrices, eigenvalue kernels, definiteness
  sampling    seeded RNG streams, Kostlan polynomials, GOE matrices, spheres
  geometry    obstacles on the sphere, cap geometry, good cones, coverage
  pencil      definite-matrix search in 2d pencils and the zero-set link
  varieties   real root counting on RP^1 and conic pair intersections
  graphs      obstacle graphs, quadric intersection graphs, region counts
  experiments seeded experiment harness, persistence, CLI
"""

from .errors import (
    ConvergenceFailure,
    DegeneratePair,
    DegeneratePencil,
    InvalidInput,
    Timeout,
    UnsupportedDimension,
)
from .linalg import (
    SymMatrix,
    definite_batch,
    frobenius_batch,
    min_eigenvalue,
    min_eigenvalues_batch,
    pack_dense_batch,
    packed_length,
    plane_projection_norm,
    sym_eigenvalues,
    unpack_batch,
)
from .sampling import (
    BinaryForm,
    KostlanPoly,
    RngState,
    binary_form,
    canonical_rep,
    kostlan_variance,
    mix_seed,
    multi_indices,
    sample_goe,
    sample_goe_batch,
    sample_kostlan,
    sample_sphere_batch,
    sample_sphere_point,
)
from .geometry import (
    CapObstacle,
    Obstacle,
    PsdConeObstacle,
    cap_volume_fraction,
    coverage_count,
    good_cone_fraction,
)
from .pencil import (
    BORDERLINE,
    CONSISTENT,
    CONTAINS_DEFINITE,
    INCONSISTENT,
    NO_DEFINITE,
    PencilVerdict,
    calabi_check,
    common_zero_oracle,
    pencil_contains_definite,
    pencil_outcomes_batch,
)
from .varieties import (
    ZeroCount,
    arrangement_zeros_detail,
    arrangement_b0_rp1,
    conic_intersection_count,
    ekss_leading_term,
    projective_zero_count_rp1,
    univariate_real_roots,
)
from .graphs import (
    Dsu,
    ObstacleGraph,
    build_obstacle_graph,
    connected_components,
    degree_histogram,
    isolated_count,
    quadric_intersection_graph,
    region_counts,
)
from .experiments import (
    EXPERIMENTS,
    ExperimentConfig,
    ExperimentResult,
    SummaryRecord,
    cli_main,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "BORDERLINE",
    "BinaryForm",
    "CONSISTENT",
    "CONTAINS_DEFINITE",
    "CapObstacle",
    "ConvergenceFailure",
    "DegeneratePair",
    "DegeneratePencil",
    "Dsu",
    "EXPERIMENTS",
    "ExperimentConfig",
    "ExperimentResult",
    "INCONSISTENT",
    "InvalidInput",
    "KostlanPoly",
    "NO_DEFINITE",
    "Obstacle",
    "ObstacleGraph",
    "PencilVerdict",
    "PsdConeObstacle",
    "RngState",
    "SummaryRecord",
    "SymMatrix",
    "Timeout",
    "UnsupportedDimension",
    "ZeroCount",
    "arrangement_zeros_detail",
    "arrangement_b0_rp1",
    "binary_form",
    "build_obstacle_graph",
    "calabi_check",
    "canonical_rep",
    "cap_volume_fraction",
    "cli_main",
    "common_zero_oracle",
    "conic_intersection_count",
    "connected_components",
    "coverage_count",
    "definite_batch",
    "degree_histogram",
    "ekss_leading_term",
    "frobenius_batch",
    "good_cone_fraction",
    "isolated_count",
    "kostlan_variance",
    "min_eigenvalue",
    "min_eigenvalues_batch",
    "mix_seed",
    "multi_indices",
    "pack_dense_batch",
    "packed_length",
    "pencil_contains_definite",
    "pencil_outcomes_batch",
    "plane_projection_norm",
    "projective_zero_count_rp1",
    "quadric_intersection_graph",
    "region_counts",
    "run_experiment",
    "sample_goe",
    "sample_goe_batch",
    "sample_kostlan",
    "sample_sphere_batch",
    "sample_sphere_point",
    "sym_eigenvalues",
    "univariate_real_roots",
    "unpack_batch",
]
