"""Numerical laboratory for quantitative Gaffney, Korn and trace inequalities
on parametrized domains with positive reach."""
from .calculus import (
    BoundaryCondition,
    Norms,
    bc_residual,
    boundary_mean_term,
    boundary_shape_term,
    curl_matrix,
    divergence,
    norms,
    satisfies_bc,
    sym_grad,
)
from .domains import (
    BoundaryPoint,
    Domain,
    Family,
    ReachEstimate,
    boundary_point,
    div_extension,
    div_extension_bound,
    extension_field,
    make_domain,
    metric_determinant,
    nearest_point,
    parse_domain_config,
    reach_analytic,
    reach_numeric,
    signed_distance,
    tubular_map,
)
from .errors import (
    AxisTooClose,
    BCViolated,
    ConfigError,
    DomainNotConvex,
    EigenNoConvergence,
    GaffKornError,
    InvalidAspect,
    InvalidDimension,
    InvalidParams,
    NoConvergence,
    NotPositiveDefinite,
    NotUnique,
    OutOfChart,
    OutOfTube,
    QuadratureUnderResolved,
    RankDeficient,
    SingularPoint,
    SupportTouchesBoundary,
    UnsupportedDomainForSearch,
    ZeroField,
)
from .fields import VectorField, perp_rotate, position, resolve_field, rotation_xy
from .inequalities import (
    EpsilonChoice,
    QuotientReport,
    constant_c1,
    constant_c2,
    convexity_special_case,
    corollary_transfer,
    gaffney_identity_residual,
    homogeneous_quotients,
    korn_identity_residual,
    optimal_epsilon,
    trace_slack,
)
from .oracles import argmax_sweep, ball_killing_case, torus_gamma, torus_lower_bound
from .quadrature import QuadratureRule, make_rule
from .search import (
    GramPair,
    Kind,
    TrialSpace,
    assemble_grams,
    build_trial_space,
    estimate_constant,
    max_generalized_rayleigh,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AxisTooClose",
    "BCViolated",
    "BoundaryCondition",
    "BoundaryPoint",
    "ConfigError",
    "Domain",
    "DomainNotConvex",
    "EigenNoConvergence",
    "EpsilonChoice",
    "Family",
    "GaffKornError",
    "GramPair",
    "InvalidAspect",
    "InvalidDimension",
    "InvalidParams",
    "Kind",
    "NoConvergence",
    "Norms",
    "NotPositiveDefinite",
    "NotUnique",
    "OutOfChart",
    "OutOfTube",
    "QuadratureRule",
    "QuadratureUnderResolved",
    "QuotientReport",
    "RankDeficient",
    "ReachEstimate",
    "SingularPoint",
    "SupportTouchesBoundary",
    "TrialSpace",
    "UnsupportedDomainForSearch",
    "VectorField",
    "ZeroField",
    "argmax_sweep",
    "assemble_grams",
    "ball_killing_case",
    "bc_residual",
    "boundary_mean_term",
    "boundary_point",
    "boundary_shape_term",
    "build_trial_space",
    "constant_c1",
    "constant_c2",
    "convexity_special_case",
    "corollary_transfer",
    "curl_matrix",
    "div_extension",
    "div_extension_bound",
    "divergence",
    "estimate_constant",
    "extension_field",
    "gaffney_identity_residual",
    "homogeneous_quotients",
    "korn_identity_residual",
    "make_domain",
    "make_rule",
    "max_generalized_rayleigh",
    "metric_determinant",
    "nearest_point",
    "norms",
    "optimal_epsilon",
    "parse_domain_config",
    "perp_rotate",
    "position",
    "reach_analytic",
    "reach_numeric",
    "resolve_field",
    "rotation_xy",
    "satisfies_bc",
    "signed_distance",
    "sweep",
    "sym_grad",
    "torus_gamma",
    "torus_lower_bound",
    "trace_slack",
    "tubular_map",
]
