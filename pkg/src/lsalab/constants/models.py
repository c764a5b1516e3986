"""Data models for the theoretical-constant calculators."""

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..chains.drift import drift_lambda
from ..chains.models import DriftCertificate, SmallSetSpec
from ..linalg.models import LyapunovSolution


class DriftScalars(BaseModel):
    """Scalar part of a drift certificate plus λ and the ergodicity pair."""

    c: float = Field(..., gt=0.0)
    b: float = Field(..., gt=0.0)
    delta: float = Field(..., gt=0.5, le=1.0)
    R0: float = Field(..., ge=0.0)
    lam: float = Field(..., gt=0.0, lt=1.0, description="exp(−c inf_{W>R0} W^δ)")
    small_set: SmallSetSpec | None = None
    B_V: float | None = Field(None, ge=0.0)
    rho: float | None = Field(None, gt=0.0, lt=1.0)

    @classmethod
    def from_certificate(
        cls,
        cert: DriftCertificate,
        support: np.ndarray | None = None,
    ) -> "DriftScalars":
        """Extract the scalars; ``support`` pins the infimum in λ for finite chains."""
        ergodicity = cert.ergodicity
        return cls(
            c=cert.c,
            b=cert.b,
            delta=cert.delta,
            R0=cert.R0,
            lam=drift_lambda(cert, support),
            small_set=cert.small_set,
            B_V=ergodicity.B_V if ergodicity else None,
            rho=ergodicity.rho if ergodicity else None,
        )


class MatrixScalars(BaseModel):
    """Norms of the averaged matrix A and its Lyapunov solution Q."""

    d: int = Field(..., ge=1)
    norm_a: float = Field(..., gt=0.0, description="‖A‖")
    norm_a_q: float = Field(..., gt=0.0, description="‖A‖_Q")
    norm_q: float = Field(..., gt=0.0, description="‖Q‖")
    kappa_q: float = Field(..., ge=1.0)
    a: float = Field(..., gt=0.0)

    @classmethod
    def from_lyapunov(cls, A: np.ndarray, sol: LyapunovSolution) -> "MatrixScalars":
        """Collect the norms from a Lyapunov solution of A."""
        return cls(
            d=sol.dim,
            norm_a=float(np.linalg.norm(A, ord=2)),
            norm_a_q=sol.norm_a_q,
            norm_q=sol.norm_q,
            kappa_q=sol.kappa_q,
            a=sol.a,
        )


class ErgodicScalars(BaseModel):
    """λ, b̃ and b′ of the drift consequences."""

    lam: float
    sup_term: float = Field(..., description="sup_{r>0}(cr^δ − r), possibly inf")
    b_tilde: float
    b_prime: float
    infinite: bool = False


class PolyDrift(BaseModel):
    """(c_γ, b_γ, R_γ) of the polynomial drift PW^{γ+1−δ} ≤ W^{γ+1−δ} − c_γW^γ + b_γ."""

    gamma: float = Field(..., gt=0.0)
    c_gamma: float
    b_gamma: float
    R_gamma: float
    log_b_gamma: float = Field(..., description="log b_γ (−inf when b_γ = 0)")


class RosenthalConstants(BaseModel):
    """C_f, C_W and C_ros for f = W^γ (log C_ros kept for large p)."""

    p: float
    gamma: float
    C_f: float
    C_W: float
    C_ros: float
    log_C_ros: float


class RosenthalConstantsV(BaseModel):
    """C_f, C_W and D_ros for f = V^{1/p}."""

    p: float
    C_f_V: float
    C_W_V: float
    D_ros: float
    log_D_ros: float


class StabilityConstants(BaseModel):
    """Constants of the exponential stability bound for random matrix products."""

    p: float
    C0: float
    C1: float
    C2p: float
    r_A: float
    p_tilde: float
    h: int = Field(..., ge=1)
    alpha_inf: float = Field(..., ge=0.0, le=1.0)
    log_alpha_inf: float
    log_alpha_terms: list[float] = Field(..., min_length=7, max_length=7)
    C_st: float


class LsaConstants(BaseModel):
    """Constant chain of the LSA error bounds (second-order entries None when not evaluated)."""

    p: float
    K: int
    alpha_inf0: float
    alpha_inf1: float
    C_eps: float
    CbarA: float
    Cbarb: float
    CbarEps: float
    ConstJ0: float
    ConstJ0_4p: float
    ConstH0: float
    ConstS: float | None = None
    ConstB: float | None = None
    Const1: float | None = None
    Const2: float | None = None
    Const3: float | None = None
    Const4: float | None = None
    Const5: float | None = None
    ConstJ1f: float | None = None
    ConstJ1d: float | None = None
    ConstH1f: float | None = None
    ConstH1d: float | None = None
    Cf: float | None = None
    Cd: float | None = None


class TdConstants(BaseModel):
    """Drift constants of the TD window chain and the TD moment-bound constants."""

    beta0: float
    c_tilde: float
    c0: float
    cP: float
    R1: float
    R2: float
    RP: float
    bP: float
    CbarA_td: float
    CbarbK_td: float


class TdInputs(BaseModel):
    """Primitives of the TD(λ) constants."""

    tau: int = Field(..., ge=1)
    gamma: float = Field(..., gt=0.0, lt=1.0)
    lambda_trace: float = Field(..., ge=0.0, lt=1.0)
    C_psi: float = Field(..., gt=0.0)
    C_RK: float = Field(..., ge=0.0)


class ConstantsInputs(BaseModel):
    """Every primitive consumed by build_report."""

    drift: DriftScalars
    matrix: MatrixScalars
    beta: float = Field(..., gt=0.0, description="Growth exponent of Ā in W")
    epsilon: float = Field(default=0.5, gt=0.0, lt=1.0)
    C_A: float = Field(..., ge=0.0)
    C_bK: float = Field(..., ge=0.0)
    K: int = Field(..., ge=1)
    p: float = Field(..., ge=2.0)
    theta_star_norm: float = Field(..., ge=0.0)
    norm_b: float = Field(..., ge=0.0)
    c_alpha: float = Field(default=0.0, ge=0.0)
    m_cst: int = Field(default=0, ge=0, description="Conditioning horizon m in C_st,p")
    td: TdInputs | None = None


class ConstantsReport(BaseModel):
    """Evaluated constants with the inputs that produced them."""

    model_config = ConfigDict(frozen=True)

    inputs: ConstantsInputs
    values: dict[str, float]
    warnings: list[str] = Field(default_factory=list)
    max_dual_gap: float = Field(default=0.0, ge=0.0)

    def key_values(self) -> list[str]:
        """``name=value`` lines in insertion order."""
        return [f"{name}={value!r}" for name, value in self.values.items()]

    def finite(self, name: str) -> bool:
        """Whether a named value is finite."""
        return math.isfinite(self.values[name])


class MomentBoundEntry(BaseModel):
    """One stationary moment against its drift bound."""

    name: str
    value: float
    bound: float
    holds: bool


class StationaryMomentReport(BaseModel):
    """π(V) ≤ b/(1−λ) and π(W^γ) ≤ b_γ/c_γ on a finite chain."""

    lam: float
    entries: list[MomentBoundEntry]

    @property
    def holds(self) -> bool:
        """Every bound holds."""
        return all(entry.holds for entry in self.entries)
