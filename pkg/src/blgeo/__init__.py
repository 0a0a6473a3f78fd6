"""Brascamp-Lieb constants via geodesically convex optimization on the
positive-definite cone."""

from .datum import (
    BLDatum,
    FeasibilityReport,
    Verdict,
    datum_from_json,
    f_euclidean_gradient,
    f_objective,
    feasibility_screen,
    load_datum,
    log_bl_objective,
    validate_datum,
)
from .errors import (
    BLGeoError,
    DimensionCapExceeded,
    DimensionMismatch,
    Diverged,
    NegativeExponent,
    NotConverged,
    NotPositiveDefinite,
    RankDeficient,
    ScalingViolation,
    SingularAggregate,
    SingularOperator,
)
from .opscale import KrausSet, CapacityResult, build_scaling_operator, capacity, log_bl_from_capacity
from .solvers import (
    FixedStep,
    GeodesicArmijo,
    SolveResult,
    SolverConfig,
    extract_maximizer,
    solve_fixed_point,
    solve_geodesic_ascent,
    stationarity_residual,
)
from .spd import geodesic, geometric_mean, log_det, loewner_leq, metric_inner, spd_sqrt

__version__ = "0.1.0"
