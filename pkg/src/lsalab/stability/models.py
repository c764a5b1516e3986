"""Data models for moment estimation, decay fits and the counterexample."""

import math
from enum import Enum

from pydantic import BaseModel, Field, model_validator

from ..common.models import Abscissa


class MomentComponent(str, Enum):
    """Quantity whose L_p moment is estimated."""

    GAMMA = "gamma"
    THETA_TILDE = "thetaTilde"
    THETA_TR = "thetaTr"
    J0 = "J0"
    H0 = "H0"
    J1 = "J1"
    H1 = "H1"


class MomentPoint(BaseModel):
    """E^{1/p}[X_n^p] at one grid point."""

    n: int = Field(..., ge=0)
    sum_alpha: float = Field(..., ge=0.0, description="Σ_{ℓ≤n} α_ℓ")
    estimate: float
    ci_low: float
    ci_high: float
    std_error: float = Field(default=0.0, ge=0.0)
    bound: float | None = Field(None, description="Theoretical envelope at n, when evaluated")

    @model_validator(mode="after")
    def _check_interval(self) -> "MomentPoint":
        if math.isnan(self.estimate):
            return self
        if self.estimate < 0.0:
            raise ValueError("moment estimates are non-negative")
        if not self.ci_low <= self.estimate * (1.0 + 1e-12) or not self.estimate <= self.ci_high * (1.0 + 1e-12):
            raise ValueError("estimate must lie inside its confidence interval")
        return self


class MomentSeries(BaseModel):
    """L_p moment estimates over an n grid."""

    component: MomentComponent = MomentComponent.GAMMA
    p: float = Field(..., ge=1.0)
    points: list[MomentPoint]
    replicas: int = Field(..., ge=1)
    seed: int = Field(..., ge=0)

    def estimates(self) -> list[float]:
        """Point estimates in grid order."""
        return [point.estimate for point in self.points]

    def csv_rows(self, experiment: str) -> list[list]:
        """Rows of the moment CSV schema."""
        return [
            [
                experiment,
                self.component.value,
                point.n,
                point.sum_alpha,
                self.p,
                point.estimate,
                point.ci_low,
                point.ci_high,
                "" if point.bound is None else point.bound,
                self.replicas,
                self.seed,
            ]
            for point in self.points
        ]


MOMENT_COLUMNS = [
    "experiment",
    "component",
    "n",
    "sum_alpha",
    "p",
    "estimate",
    "ci_low",
    "ci_high",
    "bound",
    "replicas",
    "seed",
]


class DecayFit(BaseModel):
    """Least-squares fit of log(estimate) against an abscissa."""

    slope: float
    intercept: float
    r_squared: float = Field(..., ge=0.0, le=1.0)
    window: tuple[int, int]
    abscissa: Abscissa
    points_used: int = Field(..., ge=4)
    excluded: list[int] = Field(default_factory=list, description="Grid n values dropped as non-finite")


class BoundCurve(BaseModel):
    """A theoretical envelope evaluated on an n grid."""

    name: str
    n: list[int]
    values: list[float]


class CounterexampleResult(BaseModel):
    """Exact u_n for the scalar counterexample and its lower bound."""

    epsilon: float = Field(..., ge=0.0)
    alpha: float = Field(..., ge=0.0, lt=1.0)
    theta0: float
    K: int = Field(..., ge=1)
    pi_one: float = Field(..., gt=0.0, le=1.0, description="Stationary mass of state 1")
    truncation_mass: float = Field(..., ge=0.0)
    u: list[float]
    lower_bound: list[float]
    slack: list[float] = Field(..., description="Truncation slack allowed at each n")

    @property
    def max_growth(self) -> float:
        """max_n u_n/u_0."""
        return max(self.u) / self.u[0] if self.u[0] else math.nan

    def first_growth_index(self, factor: float) -> int | None:
        """Smallest n with u_n ≥ factor·u_0, if any."""
        for n, value in enumerate(self.u):
            if value >= factor * self.u[0]:
                return n
        return None


class CapConsistency(BaseModel):
    """u_n at caps K and 2K against the truncation bound n·m·(1+αε)ⁿθ₀."""

    max_gap: float = Field(..., ge=0.0)
    worst_index: int
    holds: bool
