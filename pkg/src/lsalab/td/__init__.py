"""TD(λ) policy evaluation with truncated eligibility traces."""

from .models import FeatureMap, Mrp, TdConfig, TdHurwitzReport
from .td import (
    build_td_model,
    eligibility,
    feature_covariance,
    finite_mrp,
    load_finite_mrp,
    mrp_value_function,
    positivity_factor,
    td_drift_certificate,
    td_matrix_exact,
    td_update_loop,
    verify_hurwitz_td,
)

__all__ = [
    # Models
    "FeatureMap",
    "Mrp",
    "TdConfig",
    "TdHurwitzReport",
    # Reduction to LSA
    "build_td_model",
    "eligibility",
    "td_matrix_exact",
    "td_update_loop",
    # Verification
    "feature_covariance",
    "mrp_value_function",
    "positivity_factor",
    "td_drift_certificate",
    "verify_hurwitz_td",
    # Loading
    "finite_mrp",
    "load_finite_mrp",
]
