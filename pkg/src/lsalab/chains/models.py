"""Data models for Markov chains, drift certificates and stationary laws."""

import math
from collections.abc import Callable
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..common.exceptions import MissingSmallSetError
from ..common.models import ExpectationMethod

StateFunction = Callable[[np.ndarray], np.ndarray]


class StateKind(str, Enum):
    """Variant of the chain state, fixed per model."""

    FINITE = "finite"
    INTEGER = "integer"
    REAL = "real"
    WINDOW = "window"


class DistributionKind(str, Enum):
    """How a stationary distribution was obtained."""

    EXACT = "exact"
    TRUNCATED_SERIES = "truncated_series"
    SAMPLE = "sample"


class SmallSetEntry(BaseModel):
    """(m_R, ε_R) for the sublevel set {W ≤ R}; radius None covers every R."""

    radius: float | None = Field(None, ge=1.0)
    m: int = Field(..., ge=1)
    eps: float = Field(..., gt=0.0, le=1.0)
    nu_mass: float = Field(default=1.0, gt=0.0, le=1.0, description="ν(C_R)")


class SmallSetSpec(BaseModel):
    """Finitely many certified small sets; lookups pick the smallest radius ≥ R."""

    entries: list[SmallSetEntry] = Field(..., min_length=1)

    def lookup(self, radius: float) -> SmallSetEntry:
        """Constants valid for {W ≤ radius}.

        Raises:
            MissingSmallSetError: If no entry covers the radius
        """
        covering = [
            entry
            for entry in self.entries
            if entry.radius is None or entry.radius >= radius * (1.0 - 1e-12)
        ]
        if not covering:
            raise MissingSmallSetError(radius=radius)
        return min(covering, key=lambda entry: math.inf if entry.radius is None else entry.radius)


class ErgodicityConstants(BaseModel):
    """(B_V, ρ) of V-uniform geometric ergodicity."""

    B_V: float = Field(..., ge=0.0)
    rho: float = Field(..., gt=0.0, lt=1.0)
    horizon: int | None = Field(None, ge=1, description="Last n scanned for B_V")


class DriftCertificate(BaseModel):
    """Instantiation of the super-Lyapunov drift condition for one chain.

    PV ≤ exp(−cW^δ)V on {W > R0} and PV ≤ b on {W ≤ R0}, with V = e^W.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    W: StateFunction = Field(..., description="log V, batched over states")
    c: float = Field(..., gt=0.0)
    b: float = Field(..., gt=0.0)
    delta: float = Field(..., gt=0.5, le=1.0)
    R0: float = Field(..., ge=0.0)
    small_set: SmallSetSpec | None = None
    ergodicity: ErgodicityConstants | None = None
    w_inf: float | None = Field(None, ge=1.0, description="inf of W over {W > R0}")
    superlevel_empty: bool = Field(default=False, description="{W > R0} is empty")
    pv_closed_form: StateFunction | None = Field(None, description="Exact PV, batched")
    description: str = ""

    @model_validator(mode="after")
    def _check_infimum(self) -> "DriftCertificate":
        if self.w_inf is not None and self.w_inf < self.R0:
            raise ValueError("w_inf cannot be below R0")
        return self

    def V(self, states: np.ndarray) -> np.ndarray:
        """V = exp(W) on a batch of states."""
        return np.exp(self.W(states))


class StationaryDistribution(BaseModel):
    """Stationary law on an enumerated support."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: DistributionKind
    states: np.ndarray
    weights: np.ndarray
    truncation_error: float = Field(default=0.0, ge=0.0)
    residual: float = Field(default=0.0, ge=0.0, description="‖πP − π‖₁ when exact")

    @model_validator(mode="after")
    def _check_weights(self) -> "StationaryDistribution":
        if np.any(self.weights < 0.0):
            raise ValueError("stationary weights must be non-negative")
        if abs(float(self.weights.sum()) - 1.0) > self.truncation_error + 1e-9:
            raise ValueError("stationary weights do not sum to one")
        return self

    def expect(self, values: np.ndarray) -> np.ndarray:
        """Σ_z π(z) f(z) for tabulated f (leading axis over states)."""
        return np.tensordot(self.weights, np.asarray(values, dtype=float), axes=(0, 0))


class MinorizationResult(BaseModel):
    """P^m(z, ·) ≥ ε ν(·) for z ∈ C."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eps: float = Field(..., ge=0.0, le=1.0 + 1e-12)
    nu: np.ndarray
    m: int = Field(..., ge=1)


class DriftPoint(BaseModel):
    """Drift inequality evaluated at one state."""

    state: list[float]
    W: float
    pv: float
    ci_low: float
    ci_high: float
    rhs: float
    violated: bool


class DriftReport(BaseModel):
    """Outcome of check_drift over a set of test states."""

    method: ExpectationMethod
    points: list[DriftPoint]
    violations: int = Field(..., ge=0)

    @property
    def holds(self) -> bool:
        """No test state violates the drift inequality."""
        return self.violations == 0

    @property
    def worst_ratio(self) -> float:
        """max PV / rhs over the test states."""
        return max(point.pv / point.rhs for point in self.points)


class IteratedDriftReport(BaseModel):
    """PⁿV ≤ λⁿV + b/(1−λ) checked on every state of a finite chain."""

    n: int = Field(..., ge=1)
    lam: float = Field(..., gt=0.0, lt=1.0)
    worst_ratio: float
    holds: bool
