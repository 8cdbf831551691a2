"""Convex-ring level-set laboratory in support-function coordinates."""

from .errors import (
    ConfigError,
    GeometryNotNested,
    InvalidGeometry,
    InvalidProblem,
    LevelCurveError,
    NewtonDiverged,
    NoRadialSolution,
    NonConvexBody,
    NonConvexIterate,
    OutOfRange,
    TooFewSamples,
)
from .jets import (
    ChainReport,
    Jet,
    check_chain,
    enforce_first_order_condition,
    eval_L_phi_direct,
    eval_L_phi_paper,
    make_jet,
    run_chain_batch,
    sample_jet,
)
from .oracles import (
    Circle2D,
    exact_eccentric_harmonic,
    exact_radial_green,
    exact_radial_minimal,
    exact_radial_ring,
)
from .profiles import (
    CheckReport,
    HeightProfile,
    boundary_extrema,
    check_affine,
    check_concave,
    check_convex,
    check_endpoint_bound,
    default_tolerance,
    interior_levels,
    profile_from_solution,
)
from .solver import NewtonOptions, RingProblem, SupportSolution, residual, solve
from .support import (
    CircleSupport,
    MeridianSupport,
    PrincipalRadii,
    check_strict_convexity,
    principal_radii_axisym,
    principal_radius_2d,
    support_of_circle,
    support_of_ellipse,
    support_of_offset_circle,
    support_of_sphere,
    support_of_spheroid,
)

__version__ = "0.1.0"
