"""LSA recursion on a recorded chain path, its error decomposition and closed-form oracles."""

import logging
import math

import numpy as np

from ..chains.markov import MarkovModel
from ..chains.stationary import stationary_exact
from ..common.base import create_retry_decorator
from ..common.exceptions import (
    AveragingNotConvergedError,
    DecompositionMismatchError,
    MethodUnavailableError,
    NotHurwitzError,
    RangeViolationError,
    SingularAError,
)
from ..common.models import AveragingConfig, AveragingMode
from ..common.rng import stream
from ..common.utils import mean_interval
from ..linalg.matrices import gamma_product, operator_norm, spectral_abscissa
from ..schedules.models import StepSchedule
from .models import AveragingMeta, ChainPath, Decomposition, LsaModel, MatrixField, NoiseVector, VectorField

logger = logging.getLogger(__name__)

HURWITZ_TOL = 1e-9
SOLVE_TOL = 1e-10
COND_LIMIT = 1e12
# σ_min(A) relative to max(1, max_z ‖Ā(z)‖)
SINGULAR_TOL = 1e-12
IDENTITY_TOL = 1e-8
CLOSED_FORM_MAX = 512


def _default_start(chain: MarkovModel) -> np.ndarray:
    try:
        return chain.enumerate_states()[0]
    except MethodUnavailableError:
        return np.zeros(chain.state_shape)


def _ergodic_average(
    chain: MarkovModel,
    Abar: MatrixField,
    bbar: VectorField,
    z0: np.ndarray,
    config: AveragingConfig,
    seed: int,
) -> tuple[np.ndarray, np.ndarray, AveragingMeta]:
    """Batch-means ergodic averages of Ā and b̄, retried with a growing sample size."""
    budget = {"samples": config.samples, "attempt": 0}

    @create_retry_decorator(config)
    def attempt() -> tuple[np.ndarray, np.ndarray, AveragingMeta]:
        budget["attempt"] += 1
        samples = budget["samples"]
        per_batch = max(1, samples // config.batches)
        rng = stream(seed, budget["attempt"] - 1)

        states = chain.initial(z0, config.batches)
        for _ in range(config.burn_in):
            states = chain.step(states, rng)
        sum_A = np.zeros_like(Abar(states), dtype=float)
        sum_b = np.zeros_like(bbar(states), dtype=float)
        for _ in range(per_batch):
            states = chain.step(states, rng)
            sum_A += Abar(states)
            sum_b += bbar(states)

        A, A_half = mean_interval(sum_A / per_batch, confidence=config.confidence)
        b, b_half = mean_interval(sum_b / per_batch, confidence=config.confidence)
        width = float(np.max(A_half)) / max(float(np.linalg.norm(A, ord=2)), 1e-300)
        if np.any(b_half > 0.0):
            width = max(width, float(np.max(b_half)) / max(float(np.linalg.norm(b)), 1e-300))
        logger.debug(f"Averaging attempt {budget['attempt']}: {per_batch * config.batches} samples, width {width:.2e}")
        if width > config.relative_tolerance:
            budget["samples"] = int(math.ceil(samples * config.growth_factor))
            raise AveragingNotConvergedError(relative_width=width)
        meta = AveragingMeta(
            mode=AveragingMode.MONTECARLO,
            samples=per_batch * config.batches,
            burn_in=config.burn_in,
            batches=config.batches,
            attempts=budget["attempt"],
            relative_width=width,
            A_half_width=np.atleast_2d(A_half).tolist(),
            b_half_width=np.atleast_1d(b_half).tolist(),
        )
        return A, b, meta

    return attempt()


def build_model(
    chain: MarkovModel,
    Abar: MatrixField,
    bbar: VectorField,
    averaging: AveragingConfig | None = None,
    *,
    z0: np.ndarray | int | float | None = None,
    seed: int = 0,
) -> LsaModel:
    """Average Ā and b̄ under the stationary law and solve for θ*.

    Args:
        chain: Driving chain
        Abar: Batched state → d×d map
        bbar: Batched state → d map
        averaging: Exact (default) or Monte Carlo averaging
        z0: Start of the averaging chains (Monte Carlo only)
        seed: Master seed of the averaging streams

    Returns:
        Model with A, b and θ*

    Raises:
        SingularAError: If A is singular or numerically so
        NotHurwitzError: If −A is not Hurwitz
        AveragingNotConvergedError: If the CI stays wider than the tolerance

    Example:
        ```python
        chain = finite_chain([[0.5, 0.5], [1.0, 0.0]])
        model = build_model(chain, lambda z: np.where(z == 0, 2.0, -1.0)[:, None, None],
                            lambda z: np.ones((z.shape[0], 1)))
        model.A  # [[1.0]]
        ```
    """
    config = averaging or AveragingConfig()
    if config.mode is AveragingMode.EXACT:
        pi = stationary_exact(chain)
        table = Abar(pi.states)
        A = np.einsum("s,sij->ij", pi.weights, table)
        b = np.einsum("s,si->i", pi.weights, bbar(pi.states))
        scale = float(np.max(operator_norm(table)))
        meta = AveragingMeta(mode=AveragingMode.EXACT)
    else:
        start = _default_start(chain) if z0 is None else np.asarray(z0)
        A, b, meta = _ergodic_average(chain, Abar, bbar, start, config, seed)
        scale = float(np.linalg.norm(np.atleast_2d(A), ord=2))

    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    sigma_min = float(np.linalg.svd(A, compute_uv=False).min())
    condition = float(np.linalg.cond(A))
    if sigma_min <= SINGULAR_TOL * max(1.0, scale) or not np.isfinite(condition) or condition > COND_LIMIT:
        raise SingularAError("Averaged matrix A is singular", {"sigma_min": sigma_min, "condition": condition})
    theta_star = np.linalg.solve(A, b)
    residual = float(np.linalg.norm(A @ theta_star - b)) / max(float(np.linalg.norm(b)), 1e-300)
    if meta.mode is AveragingMode.EXACT and residual > SOLVE_TOL and np.linalg.norm(b) > 0.0:
        raise SingularAError("Dense solve for θ* is inaccurate", {"residual": residual})

    abscissa = spectral_abscissa(-A)
    if abscissa >= -HURWITZ_TOL:
        raise NotHurwitzError(spectral_abscissa=abscissa)
    logger.info(f"Built LSA model d={A.shape[0]} ({meta.mode.value} averaging, spectral abscissa of −A {abscissa:.4g})")
    return LsaModel(chain=chain, Abar=Abar, bbar=bbar, A=A, b=b, theta_star=theta_star, meta=meta)


def noise_vector(model: LsaModel) -> NoiseVector:
    """The noise map ε̄(z) = b̄(z) − b − (Ā(z) − A)θ*."""
    return NoiseVector(model)


def sample_path(
    model: LsaModel | MarkovModel,
    z0: np.ndarray | int | float,
    n: int,
    seed: int,
    *,
    replica: int = 0,
) -> ChainPath:
    """Record Z_0 = z0, …, Z_n on stream (seed, replica)."""
    chain = model.chain if isinstance(model, LsaModel) else model
    states = chain.simulate(z0, n, stream(seed, replica))
    return ChainPath(states=states, seed=seed, replica=replica)


def run_lsa(
    model: LsaModel,
    schedule: StepSchedule,
    theta0: np.ndarray,
    z0: np.ndarray | int | float,
    n: int,
    seed: int,
    *,
    replica: int = 0,
    path: ChainPath | None = None,
) -> np.ndarray:
    """θ_{k+1} = θ_k + α_{k+1}(−Ā(Z_{k+1})θ_k + b̄(Z_{k+1})).

    Returns:
        Trajectory of shape (n+1, d), row 0 = θ_0
    """
    if n < 1:
        raise RangeViolationError("n must be at least 1", parameter="n")
    if path is None:
        path = sample_path(model, z0, n, seed, replica=replica)
    alphas = schedule.first(n)
    A_seq = model.Abar(path.states[1 : n + 1])
    b_seq = model.bbar(path.states[1 : n + 1])

    theta = np.empty((n + 1, model.dim))
    theta[0] = np.asarray(theta0, dtype=float)
    for k in range(n):
        theta[k + 1] = theta[k] + alphas[k] * (-(A_seq[k] @ theta[k]) + b_seq[k])
    return theta


def identity_gap(lhs: np.ndarray, parts: list[np.ndarray], floor: np.ndarray) -> float:
    """max_k ‖lhs_k − Σ parts_k‖ / max(Σ‖part_k‖ + ‖lhs_k‖, floor_k)."""
    diff = np.linalg.norm(lhs - sum(parts), axis=1)
    scale = np.linalg.norm(lhs, axis=1) + sum(np.linalg.norm(part, axis=1) for part in parts)
    scale = np.maximum(scale, floor)
    safe = np.where(scale > 0.0, scale, 1.0)
    return float(np.max(np.where(scale > 0.0, diff / safe, 0.0)))


def decompose(
    model: LsaModel,
    schedule: StepSchedule,
    theta0: np.ndarray,
    z0: np.ndarray | int | float,
    n: int,
    seed: int,
    *,
    replica: int = 0,
    check: bool = True,
) -> Decomposition:
    """Run the main recursion and the four error recursions on one chain path.

    J0_{k+1} = (I − αA)J0_k + αε̄,        H0_{k+1} = (I − αĀ)H0_k − αÃJ0_k,
    J1_{k+1} = (I − αA)J1_k − αÃJ0_k,    H1_{k+1} = (I − αĀ)H1_k − αÃJ1_k,
    with Ā, Ã, ε̄ evaluated at Z_{k+1} and α = α_{k+1}.

    θ̃ comes from run_lsa; the identity gap is measured relative to the norms
    entering each side (and ‖θ_k‖ + ‖θ*‖ for θ̃ itself).

    Raises:
        DecompositionMismatchError: If ``check`` and an identity gap exceeds 1e−8
    """
    path = sample_path(model, z0, n, seed, replica=replica)
    theta = run_lsa(model, schedule, theta0, z0, n, seed, path=path)
    d = model.dim
    alphas = schedule.first(n)
    states = path.states[1 : n + 1]
    A_seq = model.Abar(states)
    At_seq = A_seq - model.A
    eps_seq = model.noise(states)
    A = model.A

    tilde = theta - model.theta_star
    tr, J0, H0, J1, H1 = (np.zeros((n + 1, d)) for _ in range(5))
    tr[0] = tilde[0]
    for k in range(n):
        a, Ak, Atk = alphas[k], A_seq[k], At_seq[k]
        tr[k + 1] = tr[k] - a * (Ak @ tr[k])
        J0[k + 1] = J0[k] - a * (A @ J0[k]) + a * eps_seq[k]
        H0[k + 1] = H0[k] - a * (Ak @ H0[k]) - a * (Atk @ J0[k])
        J1[k + 1] = J1[k] - a * (A @ J1[k]) - a * (Atk @ J0[k])
        H1[k + 1] = H1[k] - a * (Ak @ H1[k]) - a * (Atk @ J1[k])

    floor = np.linalg.norm(theta, axis=1) + float(np.linalg.norm(model.theta_star))
    first = identity_gap(tilde, [tr, J0, H0], floor)
    second = identity_gap(H0, [J1, H1], np.zeros(n + 1))
    if check and max(first, second) > IDENTITY_TOL:
        raise DecompositionMismatchError(
            "Error decomposition identity failed",
            {"fluctuation_gap": first, "second_order_gap": second, "replica": replica},
        )
    logger.debug(f"Decomposition n={n} replica={replica}: gaps {first:.2e}, {second:.2e}")
    return Decomposition(
        theta_tilde=tilde, theta_tr=tr, J0=J0, H0=H0, J1=J1, H1=H1,
        fluctuation_gap=first, second_order_gap=second,
    )


def _oracle_inputs(
    model: LsaModel, path: ChainPath, schedule: StepSchedule, at: list[int] | None
) -> tuple[list[int], np.ndarray, np.ndarray, np.ndarray]:
    n = path.length
    indices = [n] if at is None else list(at)
    if max(indices) > min(n, CLOSED_FORM_MAX) or min(indices) < 0:
        raise RangeViolationError(f"Closed forms are evaluated for 0 ≤ m ≤ min(n, {CLOSED_FORM_MAX})", parameter="at")
    top = max(indices)
    states = path.states[1 : top + 1]
    return indices, schedule.first(top), model.Abar(states), model.noise(states)


def _suffix_sum(m: int, alphas: np.ndarray, factors: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Σ_{j=1}^{m} α_j ∏_{ℓ=j+1}^{m}(I − α_ℓ M_ℓ) v_j, folded from the right.

    ``factors`` is either a single d×d matrix or a stack indexed by ℓ − 1.
    """
    d = vectors.shape[1]
    eye = np.eye(d)
    product = eye.copy()
    total = np.zeros(d)
    for j in range(m, 0, -1):
        total += alphas[j - 1] * (product @ vectors[j - 1])
        M = factors if factors.ndim == 2 else factors[j - 1]
        product = product @ (eye - alphas[j - 1] * M)
    return total


def error_closed_form(
    model: LsaModel,
    path: ChainPath,
    schedule: StepSchedule,
    theta0: np.ndarray,
    *,
    at: list[int] | None = None,
) -> np.ndarray:
    """θ̃_m = Γ_{1:m}θ̃_0 + Σ_{j≤m} α_j Γ_{j+1:m} ε̄(Z_j) rebuilt on a recorded path.

    Returns:
        Array (len(at), d); ``at`` defaults to [n]
    """
    indices, alphas, A_seq, eps_seq = _oracle_inputs(model, path, schedule, at)
    start = np.asarray(theta0, dtype=float) - model.theta_star
    rows = []
    for m in indices:
        transient = gamma_product([(alphas[k], A_seq[k]) for k in range(m)], dim=model.dim) @ start
        rows.append(transient + _suffix_sum(m, alphas, A_seq, eps_seq))
    return np.asarray(rows)


def fluctuation_closed_forms(
    model: LsaModel,
    path: ChainPath,
    schedule: StepSchedule,
    *,
    at: list[int] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """J0_m = Σ α_j G_{j+1:m}ε̄(Z_j) and H0_m = −Σ α_j Γ_{j+1:m}Ã(Z_j)J0_{j−1}.

    Quadratic in m; limited to m ≤ 512.
    """
    indices, alphas, A_seq, eps_seq = _oracle_inputs(model, path, schedule, at)
    top = max(indices)
    J0_all = np.asarray([_suffix_sum(k, alphas, model.A, eps_seq) for k in range(top + 1)])
    At_seq = A_seq - model.A
    drive = -np.einsum("kij,kj->ki", At_seq, J0_all[:top])
    J0 = J0_all[indices]
    H0 = np.asarray([_suffix_sum(m, alphas, A_seq, drive) for m in indices])
    return J0, H0


def j1_direct_sum(
    model: LsaModel,
    path: ChainPath,
    schedule: StepSchedule,
    *,
    at: list[int] | None = None,
) -> np.ndarray:
    """J1_m = Σ_{j<m} α_j S_{j+1:m} ε̄(Z_j) by direct summation.

    S_{j+1:m} = −Σ_{k=j+1}^{m} α_k G_{k+1:m} Ã(Z_k) G_{j+1:k−1}, with every
    deterministic product G built explicitly.
    """
    indices, alphas, A_seq, eps_seq = _oracle_inputs(model, path, schedule, at)
    d = model.dim
    eye = np.eye(d)
    At_seq = A_seq - model.A
    steps = [eye - alphas[k] * model.A for k in range(len(alphas))]
    rows = []
    for m in indices:
        # tail[k] = G_{k+1:m}
        tail = [eye] * (m + 1)
        for k in range(m - 1, -1, -1):
            tail[k] = tail[k + 1] @ steps[k]
        total = np.zeros(d)
        for j in range(1, m):
            head = eye
            S = np.zeros((d, d))
            for k in range(j + 1, m + 1):
                S -= alphas[k - 1] * (tail[k] @ At_seq[k - 1] @ head)
                head = steps[k - 1] @ head
            total += alphas[j - 1] * (S @ eps_seq[j - 1])
        rows.append(total)
    return np.asarray(rows)
