"""Markov chain simulators, stationary laws and drift-condition certification."""

from .drift import (
    ar1_drift_certificate,
    ar1_log_pv,
    certify_ergodicity,
    check_drift,
    check_iterated_drift,
    drift_lambda,
    drift_rhs,
    ergodicity_constants,
    log_v_moment,
    minorization_constants,
    uniform_certificate,
)
from .markov import (
    CallableTail,
    DiscreteTail,
    MarkovModel,
    PowerLawTail,
    TailLaw,
    ar_stationary_covariance,
    finite_chain,
    forward_recurrence_chain,
    gaussian_ar_chain,
    load_kernel_csv,
    truncated_tail,
    window_chain,
)
from .models import (
    DistributionKind,
    DriftCertificate,
    DriftPoint,
    DriftReport,
    ErgodicityConstants,
    IteratedDriftReport,
    MinorizationResult,
    SmallSetEntry,
    SmallSetSpec,
    StateFunction,
    StateKind,
    StationaryDistribution,
)
from .stationary import (
    check_irreducible_aperiodic,
    kernel_period,
    stationary_exact,
    stationary_forward_recurrence,
    stationary_sample,
)

__all__ = [
    # Models
    "DistributionKind",
    "DriftCertificate",
    "DriftPoint",
    "DriftReport",
    "ErgodicityConstants",
    "IteratedDriftReport",
    "MinorizationResult",
    "SmallSetEntry",
    "SmallSetSpec",
    "StateFunction",
    "StateKind",
    "StationaryDistribution",
    # Chains
    "CallableTail",
    "DiscreteTail",
    "MarkovModel",
    "PowerLawTail",
    "TailLaw",
    "ar_stationary_covariance",
    "finite_chain",
    "forward_recurrence_chain",
    "gaussian_ar_chain",
    "load_kernel_csv",
    "truncated_tail",
    "window_chain",
    # Stationary laws
    "check_irreducible_aperiodic",
    "kernel_period",
    "stationary_exact",
    "stationary_forward_recurrence",
    "stationary_sample",
    # Drift
    "ar1_drift_certificate",
    "ar1_log_pv",
    "certify_ergodicity",
    "check_drift",
    "check_iterated_drift",
    "drift_lambda",
    "drift_rhs",
    "ergodicity_constants",
    "log_v_moment",
    "minorization_constants",
    "uniform_certificate",
]
