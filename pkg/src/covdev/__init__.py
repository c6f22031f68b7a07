"""Deviation bounds for Gaussian sample covariance with a variance profile.

The library computes the scalar parameters and closed-form bounds for
||X X^T - E X X^T|| where X_ij = b_ij g_ij, verifies the underlying
per-shape combinatorics exactly at desk scale, and estimates the same
quantities by seeded Monte Carlo.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundConfig,
    BoundReport,
    chz_bound,
    diagonal_bound,
    free_probability_bound,
    kl_comparator,
    lower_bound_opnorm,
    lower_bound_schatten,
    main_upper_bound,
    schatten_upper_bound,
    standard_gaussian_bound,
)
from .montecarlo import (
    MomentEstimate,
    SimConfig,
    estimate_opnorm_deviation,
    estimate_schatten_trace,
    sample_deviation,
    sample_stream,
    tightness_report,
)
from .oracle import (
    ExactMoment,
    diag_trace_moment,
    full_trace_moment,
    joint_moment,
    joint_moment_table,
    offdiag_trace_moment,
)
from .params import (
    ProfileParams,
    SchattenParams,
    closed_form_params,
    compute_params,
    compute_schatten_params,
)
from .profile import (
    ProfileDomainError,
    ProfileFamily,
    ProfileFormatError,
    ResourceLimitError,
    VarianceProfile,
    generate,
    load_profile,
)
from .shapes import (
    CeilingWitness,
    Shape,
    ShapeGraph,
    L_value,
    W_value,
    check_opnorm_ceiling,
    check_schatten_ceiling,
    enumerate_shapes,
    shape_of,
    spanning_tree,
    trace_moment_via_shapes,
)

__all__ = [
    "__version__",
    "VarianceProfile", "ProfileFamily", "load_profile", "generate",
    "ProfileFormatError", "ProfileDomainError", "ResourceLimitError",
    "ProfileParams", "SchattenParams", "compute_params", "compute_schatten_params", "closed_form_params",
    "BoundConfig", "BoundReport", "main_upper_bound", "schatten_upper_bound", "diagonal_bound",
    "standard_gaussian_bound", "chz_bound", "free_probability_bound",
    "lower_bound_schatten", "lower_bound_opnorm", "kl_comparator",
    "Shape", "ShapeGraph", "CeilingWitness", "shape_of", "enumerate_shapes",
    "L_value", "W_value", "trace_moment_via_shapes", "spanning_tree",
    "check_opnorm_ceiling", "check_schatten_ceiling",
    "ExactMoment", "joint_moment", "joint_moment_table",
    "offdiag_trace_moment", "diag_trace_moment", "full_trace_moment",
    "SimConfig", "MomentEstimate", "sample_stream", "sample_deviation",
    "estimate_opnorm_deviation", "estimate_schatten_trace", "tightness_report",
]
