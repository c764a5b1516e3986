"""Moment estimation for random matrix products and LSA errors, plus the counterexample."""

from .counterexample import cap_consistency, counterexample_exact
from .models import (
    MOMENT_COLUMNS,
    BoundCurve,
    CapConsistency,
    CounterexampleResult,
    DecayFit,
    MomentComponent,
    MomentPoint,
    MomentSeries,
)
from .moments import (
    enumerate_gamma_moment,
    estimate_gamma_moment,
    estimate_gamma_moments,
    estimate_lsa_moment,
    fit_decay,
    h0_envelope,
    lsa_envelope,
    theory_envelope,
)

__all__ = [
    # Models
    "MOMENT_COLUMNS",
    "BoundCurve",
    "CapConsistency",
    "CounterexampleResult",
    "DecayFit",
    "MomentComponent",
    "MomentPoint",
    "MomentSeries",
    # Estimators
    "enumerate_gamma_moment",
    "estimate_gamma_moment",
    "estimate_gamma_moments",
    "estimate_lsa_moment",
    # Envelopes and fits
    "fit_decay",
    "h0_envelope",
    "lsa_envelope",
    "theory_envelope",
    # Counterexample
    "cap_consistency",
    "counterexample_exact",
]
