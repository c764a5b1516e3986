"""Dense real matrix kernel: Lyapunov solve, Q-norms and step products."""

import logging
from collections.abc import Sequence

import numpy as np

from ..common.exceptions import (
    AlphaOutOfRangeError,
    DimMismatchError,
    IllConditionedError,
    LemmaViolationError,
    NotHurwitzError,
    QNotPdError,
)
from .models import ContractionCheck, LyapunovSolution

logger = logging.getLogger(__name__)

HURWITZ_TOL = 1e-9
MAX_DIM = 64


def as_matrix(M: np.ndarray | Sequence[Sequence[float]] | float) -> np.ndarray:
    """Validate and return a finite square float matrix (scalars become 1×1)."""
    array = np.atleast_2d(np.asarray(M, dtype=float))
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise DimMismatchError(f"Expected a square matrix, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise DimMismatchError("Matrix has non-finite entries")
    return array


def spectral_abscissa(M: np.ndarray) -> float:
    """Largest real part of the eigenvalues of M."""
    return float(np.max(np.linalg.eigvals(as_matrix(M)).real))


def operator_norm(M: np.ndarray) -> np.ndarray | float:
    """Spectral norm of a matrix or of every matrix in a stack (..., d, d)."""
    array = np.asarray(M, dtype=float)
    if array.ndim == 2:
        return float(np.linalg.norm(array, ord=2))
    return np.linalg.norm(array, ord=2, axis=(-2, -1))


def _sqrt_pair(Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (Q^{1/2}, Q^{-1/2}), raising QNotPdError unless Q is SPD."""
    scale = max(1.0, float(np.max(np.abs(Q))))
    if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12 * scale):
        raise QNotPdError("Q is not symmetric")
    w, U = np.linalg.eigh((Q + Q.T) / 2.0)
    if w.min() <= 0.0:
        raise QNotPdError()
    root = np.sqrt(w)
    return (U * root) @ U.T, (U / root) @ U.T


def q_norm(M: np.ndarray, Q: np.ndarray) -> float:
    """Operator norm induced by ‖x‖_Q = √(xᵀQx).

    Args:
        M: Square matrix
        Q: Symmetric positive definite weight

    Returns:
        Largest singular value of Q^{1/2} M Q^{-1/2}

    Raises:
        QNotPdError: If Q is not symmetric positive definite
    """
    M = as_matrix(M)
    Q = as_matrix(Q)
    if M.shape != Q.shape:
        raise DimMismatchError(f"M is {M.shape} but Q is {Q.shape}")
    half, inv_half = _sqrt_pair(Q)
    return float(np.linalg.norm(half @ M @ inv_half, ord=2))


def solve_lyapunov(A: np.ndarray) -> LyapunovSolution:
    """Solve AᵀQ + QA = I for a matrix A with −A Hurwitz.

    The equation is vectorized row-major into the d²×d² system
    (Aᵀ ⊗ I + I ⊗ Aᵀ) vec(Q) = vec(I) and solved densely.

    Args:
        A: d×d matrix, d ≤ 64

    Returns:
        Q with κ_Q, a = 1/(2‖Q‖) and the contraction cap (1/2)‖A‖_Q⁻²‖Q‖⁻¹

    Raises:
        NotHurwitzError: If the spectral abscissa of −A is ≥ −1e−9
        IllConditionedError: If the residual exceeds 1e−10·d

    Example:
        ```python
        sol = solve_lyapunov(np.diag([1.0, 2.0]))
        sol.kappa_q  # 2.0
        ```
    """
    A = as_matrix(A)
    d = A.shape[0]
    if d > MAX_DIM:
        raise DimMismatchError(f"Dense Lyapunov solve supports d ≤ {MAX_DIM}, got {d}")

    abscissa = spectral_abscissa(-A)
    if abscissa >= -HURWITZ_TOL:
        raise NotHurwitzError(spectral_abscissa=abscissa)

    eye = np.eye(d)
    system = np.kron(A.T, eye) + np.kron(eye, A.T)
    Q = np.linalg.solve(system, eye.reshape(-1)).reshape(d, d)
    Q = (Q + Q.T) / 2.0

    residual = float(np.linalg.norm(A.T @ Q + Q @ A - eye, ord="fro"))
    if residual > 1e-10 * d:
        raise IllConditionedError(residual=residual)

    eigenvalues = np.linalg.eigvalsh(Q)
    if eigenvalues[0] <= 0.0:
        raise IllConditionedError("Lyapunov solution is not positive definite", residual)

    norm_q = float(eigenvalues[-1])
    norm_a_q = q_norm(A, Q)
    solution = LyapunovSolution(
        Q=Q,
        kappa_q=max(1.0, norm_q / float(eigenvalues[0])),
        a=1.0 / (2.0 * norm_q),
        alpha_cap=0.5 / (norm_a_q**2 * norm_q),
        norm_a_q=norm_a_q,
        residual=residual,
    )
    logger.debug(
        f"Lyapunov solve d={d}: residual={residual:.2e}, "
        f"kappa_Q={solution.kappa_q:.4g}, a={solution.a:.4g}"
    )
    return solution


def check_contraction(
    A: np.ndarray,
    sol: LyapunovSolution,
    alpha: float,
) -> ContractionCheck:
    """Check the one-step contraction ‖I − αA‖_Q² ≤ 1 − aα.

    Args:
        A: Matrix the solution was computed for
        sol: Lyapunov solution of A
        alpha: Step size in [0, alpha_cap]

    Returns:
        Weighted and unweighted contraction figures

    Raises:
        AlphaOutOfRangeError: If alpha is outside [0, alpha_cap]
    """
    A = as_matrix(A)
    if alpha < 0.0 or alpha > sol.alpha_cap * (1.0 + 1e-12):
        raise AlphaOutOfRangeError(alpha=alpha, alpha_cap=sol.alpha_cap)

    step = np.eye(A.shape[0]) - alpha * A
    qnorm_sq = q_norm(step, sol.Q) ** 2
    bound = 1.0 - sol.a * alpha
    return ContractionCheck(
        alpha=alpha,
        qnorm_sq=qnorm_sq,
        bound=bound,
        holds=qnorm_sq <= bound + 1e-12,
        unweighted_norm=float(np.linalg.norm(step, ord=2)),
        unweighted_bound=float(np.sqrt(sol.kappa_q)) * (1.0 - sol.a * alpha / 2.0),
    )


def gamma_product(
    factors: Sequence[tuple[float, np.ndarray]],
    *,
    dim: int | None = None,
) -> np.ndarray:
    """Ordered product ∏ (I − α_i M_i) with the last factor left-most.

    Args:
        factors: (alpha, M) pairs in increasing index order
        dim: Dimension used for the empty product

    Returns:
        d×d product; I_d for an empty sequence

    Raises:
        DimMismatchError: If the factors disagree in shape
    """
    if not factors:
        if dim is None:
            raise DimMismatchError("Empty product needs an explicit dimension")
        return np.eye(dim)

    d = as_matrix(factors[0][1]).shape[0]
    if dim is not None and dim != d:
        raise DimMismatchError(f"Factors have dimension {d}, expected {dim}")
    eye = np.eye(d)
    product = eye.copy()
    for index, (alpha, M) in enumerate(factors):
        M = as_matrix(M)
        if M.shape != (d, d):
            raise DimMismatchError(f"Factor {index} has shape {M.shape}, expected {(d, d)}")
        product = (eye - alpha * M) @ product
    return product


def deterministic_product(A: np.ndarray, alphas: Sequence[float]) -> np.ndarray:
    """The product G = ∏ (I − α_ℓ A) for a constant matrix A."""
    A = as_matrix(A)
    return gamma_product([(float(alpha), A) for alpha in alphas], dim=A.shape[0])


def positivity_implies_hurwitz_check(A: np.ndarray) -> bool:
    """Return whether xᵀAx > 0 for all x ≠ 0, asserting −A Hurwitz when it is.

    Args:
        A: Square matrix

    Returns:
        True iff λ_min((A + Aᵀ)/2) > 1e−10

    Raises:
        LemmaViolationError: If positivity holds but some eigenvalue of A has
            non-positive real part
    """
    A = as_matrix(A)
    lam_min = float(np.linalg.eigvalsh((A + A.T) / 2.0)[0])
    if lam_min <= 1e-10:
        return False
    abscissa = spectral_abscissa(-A)
    if abscissa >= 0.0:
        raise LemmaViolationError(
            "Positive symmetric part but -A is not Hurwitz",
            {"lambda_min_sym": lam_min, "spectral_abscissa": abscissa},
        )
    return True
