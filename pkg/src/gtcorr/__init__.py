"""Correct localization accuracy statistics for ground-truth errors.

Human marking error and map translation error inflate reported localization
error. Under isotropic Gaussian error models, the norm of the error follows a
Rayleigh distribution (marking) or a Rice distribution (map offset); this
package inverts those models to recover the real algorithmic error from the
validation statistics.
"""

from gtcorr._backend import BACKEND
from gtcorr.approx import (
    ApproxConstants,
    MetricKind,
    builtin_constants,
    delta_approx,
    delta_exact,
    fit_constants,
)
from gtcorr.compare import (
    DominanceVerdict,
    compare_impacts,
    find_lambda_star,
    g_lambda,
    impact_threshold,
)
from gtcorr.correct import (
    CorrectionConfig,
    CorrectionResult,
    InfeasibleCorrection,
    correct_map,
    correct_marking,
    correct_pipeline,
    marking_impact_bounds,
    tail_ratios,
)
from gtcorr.dist import RayleighParams, RiceParams

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ApproxConstants",
    "CorrectionConfig",
    "CorrectionResult",
    "DominanceVerdict",
    "InfeasibleCorrection",
    "MetricKind",
    "RayleighParams",
    "RiceParams",
    "builtin_constants",
    "compare_impacts",
    "correct_map",
    "correct_marking",
    "correct_pipeline",
    "delta_approx",
    "delta_exact",
    "find_lambda_star",
    "fit_constants",
    "g_lambda",
    "impact_threshold",
    "marking_impact_bounds",
    "tail_ratios",
]
