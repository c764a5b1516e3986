"""Data models for the dense matrix kernel."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class LyapunovSolution(BaseModel):
    """Solution Q of AᵀQ + QA = I with its derived contraction constants."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    Q: np.ndarray = Field(..., description="Symmetric positive definite solution")
    kappa_q: float = Field(..., ge=1.0, description="λ_max(Q)/λ_min(Q)")
    a: float = Field(..., gt=0.0, description="Contraction rate 1/(2‖Q‖)")
    alpha_cap: float = Field(..., gt=0.0, description="(1/2)‖A‖_Q⁻²‖Q‖⁻¹")
    norm_a_q: float = Field(..., ge=0.0, description="‖A‖_Q")
    residual: float = Field(..., ge=0.0, description="‖AᵀQ + QA − I‖_F")

    @property
    def dim(self) -> int:
        """Matrix dimension d."""
        return int(self.Q.shape[0])

    @property
    def norm_q(self) -> float:
        """Spectral norm ‖Q‖ = λ_max(Q)."""
        return 1.0 / (2.0 * self.a)


class ContractionCheck(BaseModel):
    """Result of checking ‖I − αA‖_Q² ≤ 1 − aα."""

    alpha: float = Field(..., ge=0.0)
    qnorm_sq: float = Field(..., ge=0.0)
    bound: float
    holds: bool
    unweighted_norm: float = Field(..., ge=0.0, description="‖I − αA‖")
    unweighted_bound: float = Field(..., description="√κ_Q (1 − aα/2)")
