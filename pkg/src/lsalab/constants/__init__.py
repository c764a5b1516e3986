"""Explicit constants of the stability and error bounds, with dual evaluation."""

from .calculator import (
    build_report,
    ergodic_scalars,
    evaluate_constants,
    level_radius,
    log_phi,
    log_psi,
    lsa_constants,
    moment_scale_constants,
    poly_drift_constants,
    rosenthal_constants,
    rosenthal_constants_V,
    rosenthal_general,
    solve_beta0,
    stability_constants,
    stationary_moment_check,
    sup_term,
    td_constants,
)
from .models import (
    ConstantsInputs,
    ConstantsReport,
    DriftScalars,
    ErgodicScalars,
    LsaConstants,
    MatrixScalars,
    MomentBoundEntry,
    PolyDrift,
    RosenthalConstants,
    RosenthalConstantsV,
    StabilityConstants,
    StationaryMomentReport,
    TdConstants,
    TdInputs,
)
from .reference import ReferenceEvaluator, reference_values

__all__ = [
    # Models
    "ConstantsInputs",
    "ConstantsReport",
    "DriftScalars",
    "ErgodicScalars",
    "LsaConstants",
    "MatrixScalars",
    "MomentBoundEntry",
    "PolyDrift",
    "RosenthalConstants",
    "RosenthalConstantsV",
    "StabilityConstants",
    "StationaryMomentReport",
    "TdConstants",
    "TdInputs",
    # Calculators
    "build_report",
    "ergodic_scalars",
    "evaluate_constants",
    "level_radius",
    "log_phi",
    "log_psi",
    "lsa_constants",
    "moment_scale_constants",
    "poly_drift_constants",
    "rosenthal_constants",
    "rosenthal_constants_V",
    "rosenthal_general",
    "solve_beta0",
    "stability_constants",
    "stationary_moment_check",
    "sup_term",
    "td_constants",
    # Reference evaluation
    "ReferenceEvaluator",
    "reference_values",
]
