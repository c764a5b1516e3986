"""Data models for TD(λ) policy evaluation."""

from collections.abc import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..chains.markov import MarkovModel

StateFunction = Callable[[np.ndarray], np.ndarray]


class Mrp(BaseModel):
    """Discounted Markov reward process: state chain, reward and discount."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    chain: MarkovModel
    reward: StateFunction = Field(..., description="Batched state → reward")
    gamma: float = Field(..., gt=0.0, lt=1.0)


class FeatureMap(BaseModel):
    """ψ: batched state → (N, d), with optional growth metadata ‖ψ‖ ≤ C_ψ W^{β/2}."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    psi: StateFunction
    dim: int = Field(..., ge=1)
    C_psi: float | None = Field(None, gt=0.0, description="Feature bound constant")
    beta: float = Field(default=0.0, ge=0.0, description="Growth exponent in W")

    def __call__(self, states: np.ndarray) -> np.ndarray:
        values = np.asarray(self.psi(states), dtype=float)
        return values.reshape(values.shape[0], self.dim)


class TdConfig(BaseModel):
    """Trace decay λ and truncation length τ of the eligibility trace."""

    lambda_trace: float = Field(default=0.0, ge=0.0, lt=1.0)
    tau: int = Field(default=1, ge=1)

    def trace_weights(self, gamma: float) -> np.ndarray:
        """(λγ)^{τ−1−i} for window positions i = 0, …, τ−1."""
        return (self.lambda_trace * gamma) ** np.arange(self.tau - 1, -1, -1, dtype=float)


class TdHurwitzReport(BaseModel):
    """Quadratic-form lower bound on A against the feature covariance."""

    lambda_min_sym: float = Field(..., description="λ_min((A + Aᵀ)/2)")
    lambda_min_sigma: float = Field(..., gt=0.0, description="λ_min(Σψ)")
    positivity_factor: float = Field(..., gt=0.0, le=1.0)
    bound: float
    spectral_abscissa: float = Field(..., description="Largest real part of the eigenvalues of −A")

    @property
    def margin(self) -> float:
        """λ_min_sym − bound."""
        return self.lambda_min_sym - self.bound
