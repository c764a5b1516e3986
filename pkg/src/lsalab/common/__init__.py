"""Common utilities and base classes."""

from .base import ReplicaRunner, create_retry_decorator, default_workers
from .exceptions import (
    AlphaOutOfRangeError,
    AveragingNotConvergedError,
    BadTailError,
    BoundViolatedError,
    ConfigError,
    DecompositionMismatchError,
    DegenerateWindowError,
    DimMismatchError,
    DualEvaluationMismatchError,
    EpsilonTooLargeError,
    HypothesisFailedError,
    IllConditionedError,
    InvariantViolationError,
    LemmaViolationError,
    LsaLabError,
    MethodUnavailableError,
    MissingSmallSetError,
    NoFeasibleBetaError,
    NotHurwitzError,
    NotNonIncreasingError,
    NotPositiveDefiniteError,
    NotSquareSummableError,
    NotStochasticError,
    OutputError,
    PeriodicError,
    ProductOverflowError,
    QNotPdError,
    RangeViolationError,
    ReducibleError,
    SingularAError,
    StepAboveCapError,
    StepTooLargeError,
    UnstableError,
    WindowLengthMismatchError,
)
from .models import (
    Abscissa,
    AveragingConfig,
    AveragingMode,
    ConfidenceInterval,
    ExpectationMethod,
    MonteCarloConfig,
)
from .rng import batch_sizes, stream
from .utils import (
    config_hash,
    log_mean_exp,
    mean_interval,
    moment_interval,
    normal_quantile,
    read_matrix_csv,
    relative_gap,
    write_csv,
)

__all__ = [
    # Base
    "ReplicaRunner",
    "create_retry_decorator",
    "default_workers",
    # Exceptions
    "AlphaOutOfRangeError",
    "AveragingNotConvergedError",
    "BadTailError",
    "BoundViolatedError",
    "ConfigError",
    "DecompositionMismatchError",
    "DegenerateWindowError",
    "DimMismatchError",
    "DualEvaluationMismatchError",
    "EpsilonTooLargeError",
    "HypothesisFailedError",
    "IllConditionedError",
    "InvariantViolationError",
    "LemmaViolationError",
    "LsaLabError",
    "MethodUnavailableError",
    "MissingSmallSetError",
    "NoFeasibleBetaError",
    "NotHurwitzError",
    "NotNonIncreasingError",
    "NotPositiveDefiniteError",
    "NotSquareSummableError",
    "NotStochasticError",
    "OutputError",
    "PeriodicError",
    "ProductOverflowError",
    "QNotPdError",
    "RangeViolationError",
    "ReducibleError",
    "SingularAError",
    "StepAboveCapError",
    "StepTooLargeError",
    "UnstableError",
    "WindowLengthMismatchError",
    # Models
    "Abscissa",
    "AveragingConfig",
    "AveragingMode",
    "ConfidenceInterval",
    "ExpectationMethod",
    "MonteCarloConfig",
    # Randomness
    "batch_sizes",
    "stream",
    # Utils
    "config_hash",
    "log_mean_exp",
    "mean_interval",
    "moment_interval",
    "normal_quantile",
    "read_matrix_csv",
    "relative_gap",
    "write_csv",
]
