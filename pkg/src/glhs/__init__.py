"""Hybrid global-local surrogates for rare-event probability estimation.

Builds a sparse polynomial chaos surrogate over [-1, 1]^d, then patches
it near its own zero set with locally weighted fits until the remaining
surrogate error no longer moves the failure classification. Failure
probabilities come from sweeping a large uniform Monte Carlo set through
the resulting piecewise model; only the local fits spend evaluations of
the expensive model.
"""
from . import _kernels, basis, christoffel, domain_learning, errors, estimators
from . import glhs as _core
from . import regression, testcases
from ._kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .basis import PceSurrogate, hyperbolic_cross_indices, index_set
from .errors import (
    ConfigValidationError,
    DegeneratePointError,
    DomainViolationError,
    EmptyZoneError,
    GlhsError,
    IllPosedFitError,
    InfeasibleDrawError,
    InsufficientBudgetError,
    NeedsMoreSamplesError,
    ResourceLimitError,
    StarvationError,
    VanishingBufferError,
)
from .estimators import (
    FailureReport,
    empirical_quantile_threshold,
    failure_fraction,
    iterative_li_pf,
    materialize_mc_points,
    mc_failure_probability,
    non_iterative_pf,
    threshold_limit_state,
)
from .glhs import (
    GlhsConfig,
    GlobalStage,
    HybridSurrogate,
    build_global_stage,
    run_glhs,
    run_repetition,
)
from .testcases import LIMIT_STATES, reference_case, reference_config

__version__ = "0.1.0"

__all__ = [
    "ConfigValidationError",
    "DegeneratePointError",
    "DomainViolationError",
    "EmptyZoneError",
    "FailureReport",
    "GlhsConfig",
    "GlhsError",
    "GlobalStage",
    "HybridSurrogate",
    "IllPosedFitError",
    "InfeasibleDrawError",
    "InsufficientBudgetError",
    "KERNEL_IMPLEMENTATION",
    "LIMIT_STATES",
    "NeedsMoreSamplesError",
    "PceSurrogate",
    "ResourceLimitError",
    "StarvationError",
    "VanishingBufferError",
    "basis",
    "build_global_stage",
    "christoffel",
    "domain_learning",
    "empirical_quantile_threshold",
    "errors",
    "estimators",
    "failure_fraction",
    "hyperbolic_cross_indices",
    "index_set",
    "iterative_li_pf",
    "materialize_mc_points",
    "mc_failure_probability",
    "non_iterative_pf",
    "reference_case",
    "reference_config",
    "regression",
    "run_glhs",
    "run_repetition",
    "testcases",
    "threshold_limit_state",
]
