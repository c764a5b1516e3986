"""TD(λ) with τ-truncated eligibility traces as an LSA model on the window chain."""

import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from ..chains.markov import MarkovModel, finite_chain, load_kernel_csv, window_chain
from ..chains.models import DriftCertificate, SmallSetEntry, SmallSetSpec
from ..chains.stationary import stationary_exact
from ..common.exceptions import (
    BoundViolatedError,
    DimMismatchError,
    HypothesisFailedError,
    NotPositiveDefiniteError,
    RangeViolationError,
    WindowLengthMismatchError,
)
from ..common.models import AveragingConfig
from ..common.rng import stream
from ..common.utils import read_matrix_csv
from ..constants.models import TdConstants
from ..linalg.matrices import spectral_abscissa
from ..lsa.engine import build_model
from ..lsa.models import LsaModel
from ..schedules.models import StepSchedule
from .models import FeatureMap, Mrp, TdConfig, TdHurwitzReport

logger = logging.getLogger(__name__)

HURWITZ_BOUND_TOL = 1e-10


def _features_over(states: np.ndarray, features: FeatureMap, leading: int) -> np.ndarray:
    """ψ over a (N, T, *base) block of states, returned as (N, T, d)."""
    N, T = states.shape[0], states.shape[1]
    flat = states.reshape(N * T, *states.shape[2:])
    return features(flat).reshape(N, T, features.dim)[:, :leading]


def _traces(psi: np.ndarray, cfg: TdConfig, gamma: float) -> np.ndarray:
    """φ_τ from ψ over window positions 0..τ−1, accumulated position by position."""
    weights = cfg.trace_weights(gamma)
    phi = np.zeros((psi.shape[0], psi.shape[2]))
    for i in range(cfg.tau):
        phi = phi + weights[i] * psi[:, i]
    return phi


def _window_terms(
    windows: np.ndarray, mrp: Mrp, features: FeatureMap, cfg: TdConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(φ_τ, ψ(x_{τ−1}) − γψ(x_τ), 𝑅(x_{τ−1})) for a batch of windows x_{0:τ}."""
    tau = cfg.tau
    if windows.shape[1] != tau + 1:
        raise WindowLengthMismatchError(f"Windows carry {windows.shape[1]} states, expected τ+1 = {tau + 1}")
    psi = _features_over(windows, features, tau + 1)
    phi = _traces(psi, cfg, mrp.gamma)
    temporal = psi[:, tau - 1] - mrp.gamma * psi[:, tau]
    reward = np.asarray(mrp.reward(windows[:, tau - 1]), dtype=float).reshape(-1)
    return phi, temporal, reward


def eligibility(
    window: np.ndarray | Sequence,
    features: FeatureMap,
    cfg: TdConfig,
    gamma: float,
) -> np.ndarray:
    """φ_τ = Σ_{s<τ} (λγ)^s ψ(x_{τ−1−s}) for one window x_{0:τ−1}.

    Raises:
        WindowLengthMismatchError: If the window does not hold τ states

    Example:
        ```python
        psi = FeatureMap(psi=lambda x: np.asarray(x, float).reshape(-1, 1), dim=1)
        eligibility([1, 2, 4], psi, TdConfig(lambda_trace=0.625, tau=3), gamma=0.8)  # [5.25]
        ```
    """
    states = np.asarray(window)
    if states.shape[0] != cfg.tau:
        raise WindowLengthMismatchError(f"Window holds {states.shape[0]} states, expected τ = {cfg.tau}")
    psi = _features_over(states[None, ...], features, cfg.tau)
    return _traces(psi, cfg, gamma)[0]


def _check_discount(mrp: Mrp, cfg: TdConfig) -> None:
    if cfg.lambda_trace * mrp.gamma >= 1.0:
        raise HypothesisFailedError("λγ must be below 1", hypothesis="trace discount")


def build_td_model(
    mrp: Mrp,
    features: FeatureMap,
    cfg: TdConfig,
    averaging: AveragingConfig | None = None,
    *,
    z0: np.ndarray | None = None,
    seed: int = 0,
) -> LsaModel:
    """TD(λ) as LSA on the window chain.

    Ā(z) = φ_τ(x_{0:τ−1})(ψ(x_{τ−1}) − γψ(x_τ))ᵀ and b̄(z) = φ_τ(x_{0:τ−1})𝑅(x_{τ−1})
    for z = x_{0:τ}. Finite MRPs average exactly over the admissible windows.

    Raises:
        HypothesisFailedError: If λγ ≥ 1
        NotHurwitzError: Propagated from build_model
    """
    _check_discount(mrp, cfg)
    chain = window_chain(mrp.chain, cfg.tau)

    def Abar(windows: np.ndarray) -> np.ndarray:
        phi, temporal, _ = _window_terms(windows, mrp, features, cfg)
        return phi[:, :, None] * temporal[:, None, :]

    def bbar(windows: np.ndarray) -> np.ndarray:
        phi, _, reward = _window_terms(windows, mrp, features, cfg)
        return phi * reward[:, None]

    model = build_model(chain, Abar, bbar, averaging, z0=z0, seed=seed)
    logger.info(f"TD(λ={cfg.lambda_trace}, τ={cfg.tau}) model over {mrp.chain.description}, γ={mrp.gamma}")
    return model


def _finite_tables(mrp: Mrp, features: FeatureMap) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(Q, π₀, Ψ, 𝑅) over the enumerated states of a finite MRP."""
    pi = stationary_exact(mrp.chain)
    Q = mrp.chain.exact_kernel
    Psi = features(pi.states)
    R = np.asarray(mrp.reward(pi.states), dtype=float).reshape(-1)
    return Q, pi.weights, Psi, R


def td_matrix_exact(mrp: Mrp, features: FeatureMap, cfg: TdConfig) -> tuple[np.ndarray, np.ndarray]:
    """A = Σ_ℓ (λγ)^ℓ Ψᵀ D_π Q^ℓ (I − γQ)Ψ and b = Σ_ℓ (λγ)^ℓ Ψᵀ D_π Q^ℓ 𝑅 over ℓ < τ.

    Uses powers of the base kernel only, independently of the window chain.
    """
    _check_discount(mrp, cfg)
    Q, weights, Psi, R = _finite_tables(mrp, features)
    left = Psi.T * weights
    temporal = Psi - mrp.gamma * (Q @ Psi)
    decay = cfg.lambda_trace * mrp.gamma
    A = np.zeros((features.dim, features.dim))
    b = np.zeros(features.dim)
    power = np.eye(Q.shape[0])
    for ell in range(cfg.tau):
        A += decay**ell * (left @ power @ temporal)
        b += decay**ell * (left @ power @ R)
        power = power @ Q
    return A, b


def mrp_value_function(mrp: Mrp) -> np.ndarray:
    """V* = (I − γQ)⁻¹𝑅 on the enumerated states."""
    Q = mrp.chain.exact_kernel
    R = np.asarray(mrp.reward(mrp.chain.enumerate_states()), dtype=float).reshape(-1)
    return np.linalg.solve(np.eye(Q.shape[0]) - mrp.gamma * Q, R)


def feature_covariance(mrp: Mrp, features: FeatureMap) -> np.ndarray:
    """Σψ = E_{π₀}[ψψᵀ]."""
    _, weights, Psi, _ = _finite_tables(mrp, features)
    return (Psi.T * weights) @ Psi


def positivity_factor(gamma: float, cfg: TdConfig) -> float:
    """((1−γ)/(1−λγ))(1 − (λγ)^τ)."""
    decay = cfg.lambda_trace * gamma
    return (1.0 - gamma) / (1.0 - decay) * (1.0 - decay**cfg.tau)


def verify_hurwitz_td(
    A: np.ndarray,
    Sigma_psi: np.ndarray,
    gamma: float,
    cfg: TdConfig,
) -> TdHurwitzReport:
    """Check λ_min((A + Aᵀ)/2) ≥ factor·λ_min(Σψ) and that −A is Hurwitz.

    Raises:
        NotPositiveDefiniteError: If Σψ is not symmetric positive definite
        BoundViolatedError: If the quadratic-form bound or the Hurwitz property fails
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Sigma = np.atleast_2d(np.asarray(Sigma_psi, dtype=float))
    if A.shape != Sigma.shape:
        raise DimMismatchError(f"A is {A.shape} but Σψ is {Sigma.shape}")
    if not np.allclose(Sigma, Sigma.T, rtol=1e-12, atol=1e-14):
        raise NotPositiveDefiniteError("Σψ is not symmetric")
    sigma_min = float(np.linalg.eigvalsh((Sigma + Sigma.T) / 2.0)[0])
    if sigma_min <= 0.0:
        raise NotPositiveDefiniteError("Σψ is not positive definite", {"lambda_min": sigma_min})

    factor = positivity_factor(gamma, cfg)
    sym_min = float(np.linalg.eigvalsh((A + A.T) / 2.0)[0])
    bound = factor * sigma_min
    if sym_min < bound - HURWITZ_BOUND_TOL:
        raise BoundViolatedError(
            f"λ_min of the symmetric part of A is {sym_min:.6g}, below {bound:.6g}",
            margin=sym_min - bound,
        )
    abscissa = spectral_abscissa(-A)
    if abscissa >= 0.0:
        raise BoundViolatedError(f"−A is not Hurwitz (spectral abscissa {abscissa:.3g})", margin=-abscissa)
    return TdHurwitzReport(
        lambda_min_sym=sym_min,
        lambda_min_sigma=sigma_min,
        positivity_factor=factor,
        bound=bound,
        spectral_abscissa=abscissa,
    )


def _window_small_sets(base: SmallSetSpec | None, tau: int) -> SmallSetSpec | None:
    """{W ≤ R} is (τ+1, (ε_R ν(C_R))^{τ+1})-small when C_R is 1-small for the base chain."""
    if base is None:
        return None
    if any(entry.m != 1 for entry in base.entries):
        raise HypothesisFailedError("Base small sets must be 1-small", hypothesis="m = 1")
    entries = [
        SmallSetEntry(radius=entry.radius, m=tau + 1, eps=(entry.eps * entry.nu_mass) ** (tau + 1))
        for entry in base.entries
        if (entry.eps * entry.nu_mass) ** (tau + 1) > 0.0
    ]
    return SmallSetSpec(entries=entries) if entries else None


def td_drift_certificate(
    base_cert: DriftCertificate,
    tau: int,
    constants: TdConstants,
) -> DriftCertificate:
    """Drift certificate of the window chain x_{0:τ}.

    W(x_{0:τ}) = c₀ Σ_{i<τ}(i+1)W̃^δ(x_i) + W̃(x_τ), with rate c_P, bound b_P and
    radius R_P from the TD constants.

    Raises:
        HypothesisFailedError: If the base small sets are not 1-small
    """
    if tau < 1:
        raise RangeViolationError("tau must be at least 1", parameter="tau")
    delta, c0 = base_cert.delta, constants.c0
    multipliers = np.arange(1, tau + 1, dtype=float)

    def base_W(windows: np.ndarray) -> np.ndarray:
        N, T = windows.shape[0], windows.shape[1]
        flat = windows.reshape(N * T, *windows.shape[2:])
        return np.asarray(base_cert.W(flat), dtype=float).reshape(N, T)

    def W(windows: np.ndarray) -> np.ndarray:
        values = base_W(np.asarray(windows))
        return c0 * (values[:, :tau] ** delta) @ multipliers + values[:, tau]

    pv_closed_form = None
    if base_cert.pv_closed_form is not None:
        base_pv = base_cert.pv_closed_form

        def pv_closed_form(windows: np.ndarray) -> np.ndarray:
            windows = np.asarray(windows)
            values = base_W(windows)
            shifted = c0 * (values[:, 1 : tau + 1] ** delta) @ multipliers
            return np.exp(shifted) * np.asarray(base_pv(windows[:, tau]), dtype=float)

    logger.debug(f"Window certificate τ={tau}: c_P={constants.cP:.4g}, b_P={constants.bP:.4g}, R_P={constants.RP:.4g}")
    return DriftCertificate(
        W=W,
        c=constants.cP,
        b=constants.bP,
        delta=delta,
        R0=constants.RP,
        small_set=_window_small_sets(base_cert.small_set, tau),
        pv_closed_form=pv_closed_form,
        description=f"window certificate (τ={tau}) over {base_cert.description or 'base chain'}",
    )


def load_finite_mrp(
    kernel_csv: str | Path,
    reward: Sequence[float] | str | Path,
    features: Sequence[Sequence[float]] | str | Path,
    gamma: float,
) -> tuple[Mrp, FeatureMap]:
    """Finite MRP from a kernel CSV, a reward vector and an S×d feature matrix.

    Rewards and features may be given inline or as CSV paths.

    Raises:
        DimMismatchError: If the tables do not match the number of states
    """
    chain = load_kernel_csv(kernel_csv)
    S = chain.num_states
    R = read_matrix_csv(reward).reshape(-1) if isinstance(reward, str | Path) else np.asarray(reward, dtype=float)
    Psi = read_matrix_csv(features) if isinstance(features, str | Path) else np.atleast_2d(np.asarray(features, dtype=float))
    if R.shape != (S,):
        raise DimMismatchError(f"Reward has {R.size} entries for {S} states")
    if Psi.shape[0] != S:
        raise DimMismatchError(f"Feature matrix has {Psi.shape[0]} rows for {S} states")
    return _finite_mrp(chain, R, Psi, gamma)


def _finite_mrp(chain: MarkovModel, R: np.ndarray, Psi: np.ndarray, gamma: float) -> tuple[Mrp, FeatureMap]:
    bound = float(np.max(np.linalg.norm(Psi, axis=1)))
    mrp = Mrp(chain=chain, reward=lambda x: R[np.asarray(x).astype(np.int64).reshape(-1)], gamma=gamma)
    features = FeatureMap(
        psi=lambda x: Psi[np.asarray(x).astype(np.int64).reshape(-1)],
        dim=Psi.shape[1],
        C_psi=bound if bound > 0.0 else None,
    )
    return mrp, features


def finite_mrp(
    P: np.ndarray | Sequence[Sequence[float]],
    reward: Sequence[float],
    features: Sequence[Sequence[float]],
    gamma: float,
) -> tuple[Mrp, FeatureMap]:
    """Finite MRP from in-memory tables (features as an S×d matrix)."""
    chain = finite_chain(np.asarray(P, dtype=float))
    R = np.asarray(reward, dtype=float).reshape(-1)
    Psi = np.atleast_2d(np.asarray(features, dtype=float))
    if R.shape != (chain.num_states,) or Psi.shape[0] != chain.num_states:
        raise DimMismatchError(f"Tables do not match {chain.num_states} states")
    return _finite_mrp(chain, R, Psi, gamma)


def td_update_loop(
    mrp: Mrp,
    features: FeatureMap,
    cfg: TdConfig,
    schedule: StepSchedule,
    theta0: np.ndarray,
    z0: np.ndarray,
    n: int,
    seed: int,
) -> np.ndarray:
    """Hand-written TD(λ) recursion on stream (seed, 0).

    θ ← θ + α(φ_τ(𝑅(x_{τ−1}) + γψ(x_τ)ᵀθ − ψ(x_{τ−1})ᵀθ)), arranged as
    θ + α(−φ(ψ − γψ')ᵀθ + φ𝑅) so that it matches run_lsa on the TD model bit for bit.

    Returns:
        Trajectory of shape (n+1, d)
    """
    _check_discount(mrp, cfg)
    rng = stream(seed, 0)
    window = window_chain(mrp.chain, cfg.tau).initial(z0, 1)
    alphas = schedule.first(n)
    theta = np.empty((n + 1, features.dim))
    theta[0] = np.asarray(theta0, dtype=float)
    for k in range(n):
        fresh = mrp.chain.step(window[:, -1], rng)
        window = np.concatenate([window[:, 1:], fresh[:, None]], axis=1)
        phi, temporal, reward = _window_terms(window, mrp, features, cfg)
        A_k = np.outer(phi[0], temporal[0])
        b_k = phi[0] * reward[0]
        theta[k + 1] = theta[k] + alphas[k] * (-(A_k @ theta[k]) + b_k)
    return theta
