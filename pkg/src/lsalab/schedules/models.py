"""Data models for step-size schedules."""

from enum import Enum

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..common.exceptions import NotNonIncreasingError, RangeViolationError


class ScheduleKind(str, Enum):
    """Step-size schedule family."""

    CONSTANT = "constant"
    POLYNOMIAL = "polynomial"
    EXPLICIT = "explicit"


class StepSchedule(BaseModel):
    """Step sizes α_k indexed from k = 1 (index 0 where the family defines it).

    - constant: α_k = alpha
    - polynomial: α_k = C/(k + n0)^t, t ∈ (0, 1]
    - explicit: α_k = values[k − first_index], and 0 past the end of the list
    """

    kind: ScheduleKind
    alpha: float | None = Field(None, gt=0.0)
    C: float | None = Field(None, gt=0.0)
    n0: float = Field(default=0.0, ge=0.0)
    t: float | None = Field(None, gt=0.0, le=1.0)
    values: list[float] = Field(default_factory=list)
    first_index: int = Field(default=1, ge=0, le=1)

    @model_validator(mode="after")
    def _check_family(self) -> "StepSchedule":
        if self.kind is ScheduleKind.CONSTANT and self.alpha is None:
            raise ValueError("constant schedule needs alpha")
        if self.kind is ScheduleKind.POLYNOMIAL and (self.C is None or self.t is None):
            raise ValueError("polynomial schedule needs C and t")
        if self.kind is ScheduleKind.EXPLICIT:
            steps = np.asarray(self.values, dtype=float)
            if np.any(steps < 0.0) or not np.all(np.isfinite(steps)):
                raise ValueError("explicit step sizes must be finite and non-negative")
            rises = np.nonzero(np.diff(steps) > 0.0)[0]
            if rises.size:
                raise NotNonIncreasingError(index=int(rises[0]) + self.first_index)
        return self

    @classmethod
    def constant(cls, alpha: float) -> "StepSchedule":
        """α_k ≡ alpha."""
        return cls(kind=ScheduleKind.CONSTANT, alpha=alpha)

    @classmethod
    def polynomial(cls, C: float, n0: float, t: float) -> "StepSchedule":
        """α_k = C/(k + n0)^t."""
        return cls(kind=ScheduleKind.POLYNOMIAL, C=C, n0=n0, t=t)

    @classmethod
    def explicit(cls, values: list[float], *, first_index: int = 1) -> "StepSchedule":
        """Listed step sizes, zero after the list ends."""
        return cls(kind=ScheduleKind.EXPLICIT, values=list(values), first_index=first_index)

    @property
    def start(self) -> int:
        """Smallest index at which α_k is defined."""
        if self.kind is ScheduleKind.POLYNOMIAL:
            return 0 if self.n0 > 0 else 1
        if self.kind is ScheduleKind.EXPLICIT:
            return self.first_index
        return 0

    @property
    def square_summable(self) -> bool:
        """Whether Σ α_k² < ∞."""
        if self.kind is ScheduleKind.CONSTANT:
            return False
        if self.kind is ScheduleKind.POLYNOMIAL:
            return self.t is not None and self.t > 0.5
        return True

    def steps(self, indices: np.ndarray) -> np.ndarray:
        """Vectorized α_k for integer indices k ≥ start."""
        k = np.asarray(indices)
        if np.any(k < self.start):
            raise RangeViolationError(f"Step index below {self.start} is undefined for this schedule", parameter="index")
        if self.kind is ScheduleKind.CONSTANT:
            return np.full(k.shape, float(self.alpha or 0.0))
        if self.kind is ScheduleKind.POLYNOMIAL:
            return float(self.C or 0.0) / (k.astype(float) + self.n0) ** float(self.t or 1.0)
        table = np.asarray(self.values, dtype=float)
        offset = k.astype(int) - self.first_index
        inside = offset < table.size
        out = np.zeros(k.shape)
        out[inside] = table[offset[inside]]
        return out

    def step(self, k: int) -> float:
        """α_k for a single index."""
        return float(self.steps(np.asarray([k]))[0])

    def first(self, n: int) -> np.ndarray:
        """α_1, …, α_n."""
        return self.steps(np.arange(1, n + 1))

    def partial_sums(self, n: int) -> np.ndarray:
        """Σ_{ℓ=1}^{k} α_ℓ for k = 0, …, n."""
        return np.concatenate([[0.0], np.cumsum(self.first(n))])


class TailSum(BaseModel):
    """𝒜_n = Σ_{ℓ≥n} α_ℓ² with its truncation error bound."""

    n: int = Field(..., ge=0)
    value: float = Field(..., ge=0.0)
    truncation_bound: float = Field(..., ge=0.0)


class StepConditionReport(BaseModel):
    """Outcome of a finite-horizon step-size condition scan."""

    minimal_c_alpha: float = Field(..., description="Smallest c_α satisfying the scanned conditions")
    ratio_bound: float | None = Field(None, description="max α_k/𝒜_{k+1} over the scan")
    threshold: float = Field(..., description="Largest admissible c_α")
    passes: bool
    applicable: bool = True
    horizon: int


class IdentityCheck(BaseModel):
    """Both sides of a summation identity."""

    lhs: float
    rhs: float
    gap: float = Field(..., ge=0.0)
    printed_gap: float | None = Field(
        default=None, ge=0.0, description="Gap against the right side with the product started at l = 1"
    )


class SumBoundCheck(BaseModel):
    """A weighted step-size sum against its bound, scanned over n ≤ N."""

    sum_value: float = Field(..., description="Weighted sum at n = N")
    bound: float = Field(..., description="Bound at n = N")
    holds: bool = Field(..., description="Bound holds at every n ≤ N")
    worst_ratio: float = Field(..., description="max over n of sum/bound")
    worst_index: int
