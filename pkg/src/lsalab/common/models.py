"""Common data models shared across lsalab modules."""

from enum import Enum

from pydantic import BaseModel, Field


class ExpectationMethod(str, Enum):
    """How a one-step expectation PV(z) is evaluated."""

    EXACT = "exact"
    QUADRATURE = "quadrature"
    MONTECARLO = "montecarlo"


class AveragingMode(str, Enum):
    """How the stationary averages A and b are obtained."""

    EXACT = "exact"
    MONTECARLO = "montecarlo"


class Abscissa(str, Enum):
    """Abscissa for decay-rate fits."""

    SUM_ALPHA = "sum_alpha"
    LOG_N = "log_n"


class AveragingConfig(BaseModel):
    """Configuration for computing the averaged pair (A, b).

    Monte Carlo averaging runs ``batches`` independent chains after a burn-in and
    is retried with ``growth_factor`` times more samples while the relative CI
    half-width exceeds ``relative_tolerance``.
    """

    mode: AveragingMode = Field(default=AveragingMode.EXACT)
    samples: int = Field(default=1_000_000, ge=1000, description="Post burn-in samples")
    burn_in: int = Field(default=10_000, ge=0)
    batches: int = Field(default=50, ge=2, le=10_000)
    relative_tolerance: float = Field(default=1e-3, gt=0.0, le=1.0)
    confidence: float = Field(default=0.99, gt=0.5, lt=1.0)
    max_attempts: int = Field(default=3, ge=1, le=10)
    growth_factor: float = Field(default=4.0, ge=1.0, le=100.0)


class MonteCarloConfig(BaseModel):
    """Replica layout for moment estimators."""

    replicas: int = Field(default=10_000, ge=1)
    batches: int = Field(default=50, ge=2, le=10_000)
    workers: int | None = Field(default=None, ge=1, description="Thread pool size")
    confidence: float = Field(default=0.99, gt=0.5, lt=1.0)


class ConfidenceInterval(BaseModel):
    """Point estimate with a normal-approximation interval."""

    estimate: float
    ci_low: float
    ci_high: float
    std_error: float = Field(..., ge=0.0)
