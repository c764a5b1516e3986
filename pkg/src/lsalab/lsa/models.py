"""Data models for the LSA recursion engine."""

from collections.abc import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..chains.markov import MarkovModel
from ..common.models import AveragingMode

MatrixField = Callable[[np.ndarray], np.ndarray]
VectorField = Callable[[np.ndarray], np.ndarray]

DECOMPOSITION_COLUMNS = ["step", "thetaTilde_norm", "thetaTr_norm", "J0_norm", "H0_norm", "J1_norm", "H1_norm"]


class AveragingMeta(BaseModel):
    """How (A, b) were obtained."""

    mode: AveragingMode
    samples: int | None = Field(None, ge=1, description="Post burn-in samples (Monte Carlo)")
    burn_in: int | None = Field(None, ge=0)
    batches: int | None = Field(None, ge=2)
    attempts: int = Field(default=1, ge=1)
    relative_width: float = Field(default=0.0, ge=0.0, description="Relative CI half-width reached")
    A_half_width: list[list[float]] | None = None
    b_half_width: list[float] | None = None


class LsaModel:
    """Ā(·), b̄(·) over a chain, the averaged pair (A, b) and θ* = A⁻¹b.

    ``Abar`` maps a batch of states (N, *state_shape) to (N, d, d) and ``bbar``
    to (N, d).
    """

    def __init__(
        self,
        *,
        chain: MarkovModel,
        Abar: MatrixField,
        bbar: VectorField,
        A: np.ndarray,
        b: np.ndarray,
        theta_star: np.ndarray,
        meta: AveragingMeta,
    ) -> None:
        self.chain = chain
        self.Abar = Abar
        self.bbar = bbar
        self.A = A
        self.b = b
        self.theta_star = theta_star
        self.meta = meta

    def __repr__(self) -> str:
        return f"LsaModel(d={self.dim}, {self.meta.mode.value} averaging over {self.chain.description})"

    @property
    def dim(self) -> int:
        """Parameter dimension d."""
        return int(self.A.shape[0])

    def Atilde(self, states: np.ndarray) -> np.ndarray:
        """Ã(z) = Ā(z) − A on a batch of states."""
        return self.Abar(states) - self.A

    def noise(self, states: np.ndarray) -> np.ndarray:
        """ε̄(z) = b̄(z) − b − (Ā(z) − A)θ* on a batch of states."""
        return self.bbar(states) - self.b - np.einsum("nij,j->ni", self.Atilde(states), self.theta_star)


class NoiseVector:
    """The noise map ε̄ of a model."""

    def __init__(self, model: LsaModel) -> None:
        self.model = model

    def __call__(self, states: np.ndarray) -> np.ndarray:
        return self.model.noise(states)

    def stationary_mean(self, weights: np.ndarray, states: np.ndarray) -> np.ndarray:
        """Σ_z π(z)ε̄(z) for an enumerated stationary law."""
        return np.tensordot(np.asarray(weights, dtype=float), self(states), axes=(0, 0))


class ChainPath(BaseModel):
    """Recorded path Z_0, …, Z_n of one replica."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    states: np.ndarray
    seed: int = Field(..., ge=0)
    replica: int = Field(default=0, ge=0)

    @property
    def length(self) -> int:
        """Number of transitions n."""
        return int(self.states.shape[0]) - 1


class Decomposition(BaseModel):
    """Per-step error terms of one trajectory, each of shape (n+1, d)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    theta_tilde: np.ndarray
    theta_tr: np.ndarray
    J0: np.ndarray
    H0: np.ndarray
    J1: np.ndarray
    H1: np.ndarray
    fluctuation_gap: float = Field(..., ge=0.0, description="max relative gap of θ̃ = θ̃tr + J0 + H0")
    second_order_gap: float = Field(..., ge=0.0, description="max relative gap of H0 = J1 + H1")

    def norm_rows(self) -> list[list[float]]:
        """Rows (step, ‖θ̃‖, ‖θ̃tr‖, ‖J0‖, ‖H0‖, ‖J1‖, ‖H1‖) for CSV dumps."""
        terms = [self.theta_tilde, self.theta_tr, self.J0, self.H0, self.J1, self.H1]
        norms = np.stack([np.linalg.norm(term, axis=1) for term in terms], axis=1)
        return [[k, *row] for k, row in enumerate(norms.tolist())]
