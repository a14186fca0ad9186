"""Douglas-Rachford iteration for a line paired with an ellipse or p-sphere.

Projections, orbits, periodic-point detection and classification, local
convergence certificates, infeasible-case divergence verification, basin
of attraction rendering, and a small HTTP service feeding the interactive
explorer.
"""

from .geometry import (
    ConstraintSet,
    Ellipse,
    Line,
    PSphere,
    ProjectionResult,
    Region,
    as_point,
    feasible_points,
    gap_attaining_point,
    line_from_slope_intercept,
    project_ellipse,
    project_line,
    project_psphere,
    reflect,
    set_distance,
)
from .dynamics import (
    DRConfig,
    Orbit,
    Terminated,
    dr_iterate,
    dr_orbit_batch,
    dr_step,
    dr_step_two_lines,
    shadow_sequence,
    twisted_dr_step,
)
from .stability import (
    ConvergenceCertificate,
    PeriodicPoint,
    eigen_modulus_sq,
    find_periodic_point,
    local_convergence_certificate,
    numeric_jacobian,
    periodic_scan,
    tangent_line_at,
    tangent_projection_matrix,
    two_line_dr_matrix,
    two_line_projection_matrix,
)
from .divergence import (
    DivergenceReport,
    SeparationCertificate,
    ShadowReport,
    estimate_minimal_displacement,
    separating_functional,
    shadow_limit,
    verify_linear_divergence,
)
from .basins import (
    AttractorEntry,
    AttractorTable,
    BasinGrid,
    build_attractor_table,
    default_palette,
    encode_ppm,
    grid_to_json,
    render_basins,
)
from .estimator import BasinClassifier
from .tolerances import DEFAULT, Tolerances

__version__ = "0.1.0"
