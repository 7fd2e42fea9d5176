"""Stationary Poisson hyperplane tessellations: simulation, section
processes, reference-body solvers, shape deviation metrics, and seeded
Monte Carlo experiments."""

from .arrangement import (
    DegeneratePositionError,
    FaceComplex,
    NoInteriorFacesError,
    build_face_complex,
    plane_euler_characteristic,
    typical_face_statistic,
    weighted_face_statistic,
)
from .experiments import (
    SCENARIOS,
    ExperimentConfig,
    ResultTable,
    cross_direction_distribution,
    default_config,
    render_plot,
    run_scenario,
)
from .grassmann import (
    Rotation,
    Subspace,
    in_neighborhood,
    minimal_rotation,
    minimal_rotations,
    principal_angles,
    rotation_defect,
    subspace_distance,
)
from .measures import (
    SphericalMeasure,
    make_even,
    merge_atoms,
    nondegeneracy,
    project_measure,
    prokhorov_distance,
)
from .minkowski import (
    MinkowskiSolution,
    NonConvergenceError,
    blaschke_body,
    solve_minkowski,
    solve_minkowski_2d,
    solve_minkowski_iterative,
    tail_rate_coefficient,
)
from .polytope import (
    EmptyPolytopeError,
    Halfspace,
    Polytope,
    intersect_halfspaces,
)
from .process import (
    FlatDistribution,
    ProcessSpec,
    SectionSpec,
    ZeroCellError,
    intersection_direction_distribution,
    sample_hyperplanes,
    sample_weighted_typical_face,
    section_params,
    zero_cell,
    zero_cell_in_section,
)
from .shape import (
    DeviationResult,
    deviation_cross_space,
    deviation_same_space,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
