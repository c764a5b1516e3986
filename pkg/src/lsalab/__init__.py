"""lsalab - verification lab for linear stochastic approximation driven by Markov chains.

Simulates random matrix products and LSA recursions under Markovian noise,
evaluates the explicit constants of their stability and error bounds, and
checks drift certificates, step-size conditions and TD(λ) policy evaluation.
"""

import logging
import os

from dotenv import load_dotenv

from .chains import (
    DriftCertificate,
    MarkovModel,
    PowerLawTail,
    check_drift,
    finite_chain,
    forward_recurrence_chain,
    gaussian_ar_chain,
    stationary_exact,
    uniform_certificate,
    window_chain,
)
from .common import (
    ConfigError,
    InvariantViolationError,
    LsaLabError,
    OutputError,
    ReplicaRunner,
    stream,
)
from .constants import ConstantsInputs, ConstantsReport, build_report
from .linalg import check_contraction, gamma_product, operator_norm, solve_lyapunov
from .lsa import LsaModel, build_model, decompose, run_lsa
from .schedules import StepSchedule, validate_A5, validate_A6
from .stability import (
    counterexample_exact,
    estimate_gamma_moment,
    estimate_lsa_moment,
    fit_decay,
    theory_envelope,
)
from .td import FeatureMap, Mrp, TdConfig, build_td_model, td_matrix_exact

# Load environment variables
load_dotenv()

# Setup logging
logging.basicConfig(
    level=os.getenv("LOG_LEVEL", "INFO"),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)

logger = logging.getLogger(__name__)

__version__ = "0.1.0"

__all__ = [
    # Errors
    "ConfigError",
    "InvariantViolationError",
    "LsaLabError",
    "OutputError",
    # Randomness
    "ReplicaRunner",
    "stream",
    # Linear algebra
    "check_contraction",
    "gamma_product",
    "operator_norm",
    "solve_lyapunov",
    # Chains
    "DriftCertificate",
    "MarkovModel",
    "PowerLawTail",
    "check_drift",
    "finite_chain",
    "forward_recurrence_chain",
    "gaussian_ar_chain",
    "stationary_exact",
    "uniform_certificate",
    "window_chain",
    # Schedules
    "StepSchedule",
    "validate_A5",
    "validate_A6",
    # Constants
    "ConstantsInputs",
    "ConstantsReport",
    "build_report",
    # LSA
    "LsaModel",
    "build_model",
    "decompose",
    "run_lsa",
    # Stability
    "counterexample_exact",
    "estimate_gamma_moment",
    "estimate_lsa_moment",
    "fit_decay",
    "theory_envelope",
    # TD
    "FeatureMap",
    "Mrp",
    "TdConfig",
    "build_td_model",
    "td_matrix_exact",
]
