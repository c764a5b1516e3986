"""Dense real square-matrix kernel."""

from .matrices import (
    as_matrix,
    check_contraction,
    deterministic_product,
    gamma_product,
    operator_norm,
    positivity_implies_hurwitz_check,
    q_norm,
    solve_lyapunov,
    spectral_abscissa,
)
from .models import ContractionCheck, LyapunovSolution

__all__ = [
    # Models
    "ContractionCheck",
    "LyapunovSolution",
    # Operations
    "as_matrix",
    "check_contraction",
    "deterministic_product",
    "gamma_product",
    "operator_norm",
    "positivity_implies_hurwitz_check",
    "q_norm",
    "solve_lyapunov",
    "spectral_abscissa",
]
