"""Stochastic-geometry model of content caching in small cell networks.

Closed-form cache hit, outage and density-planning expressions over a
Poisson field of cache-equipped small cell base stations, paired with an
independent Monte Carlo engine that validates every formula.
"""

__version__ = "0.1.0"

from .analytic import (
    FeasibilityBound,
    QuadratureError,
    cache_hit_prob,
    min_density_area_for_target,
    replication_ratio_bounds,
    content_outage,
    content_outage_quadrature,
    kappa,
    hit_target_feasible,
    optimal_density,
    outage_at_distance,
    serving_distance_pdf,
)
from .model import (
    ParameterError,
    ReplicationRatio,
    SystemParams,
    db_to_linear,
    replication_ratio,
    validate,
    with_replication_ratio,
)
from .simulate import (
    DegenerateSampleError,
    Estimate,
    Mode,
    PointSet,
    SimConfig,
    TruncationWindowWarning,
    binomial_ci,
    draw_serving_distance,
    estimate_cache_hit,
    estimate_content_outage,
    estimate_physical,
    interference_tail_mean,
    recommended_window_radius,
    sample_ppp,
    sir_sample,
    trial_stream,
)
from .sweep import (
    Axis,
    Quantity,
    SweepRow,
    SweepSpec,
    SweepTable,
    emit_csv,
    emit_json,
    figure_preset,
    read_json,
    run_sweep,
)

__all__ = [
    "__version__",
    "ParameterError",
    "ReplicationRatio",
    "SystemParams",
    "db_to_linear",
    "replication_ratio",
    "validate",
    "with_replication_ratio",
    "FeasibilityBound",
    "QuadratureError",
    "kappa",
    "outage_at_distance",
    "cache_hit_prob",
    "hit_target_feasible",
    "min_density_area_for_target",
    "replication_ratio_bounds",
    "serving_distance_pdf",
    "content_outage",
    "content_outage_quadrature",
    "optimal_density",
    "Mode",
    "SimConfig",
    "Estimate",
    "PointSet",
    "TruncationWindowWarning",
    "DegenerateSampleError",
    "trial_stream",
    "sample_ppp",
    "draw_serving_distance",
    "sir_sample",
    "interference_tail_mean",
    "recommended_window_radius",
    "estimate_content_outage",
    "estimate_cache_hit",
    "estimate_physical",
    "binomial_ci",
    "Axis",
    "Quantity",
    "SweepSpec",
    "SweepRow",
    "SweepTable",
    "run_sweep",
    "figure_preset",
    "emit_csv",
    "emit_json",
    "read_json",
]
