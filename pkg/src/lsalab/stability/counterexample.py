"""Exact evaluation of the scalar counterexample on the forward recurrence chain.

With A(1) = 1 and A(z) = −ε for z > 1, the mean matrix π(1) − ε(1 − π(1)) is
positive once ε < π(1), yet E_1[∏(1 − αA(Z_k))]θ₀ grows without bound when the
return time Y has a heavy tail.
"""

import logging
import math

import numpy as np

from ..chains.markov import TailLaw, truncated_tail
from ..chains.stationary import stationary_forward_recurrence
from ..common.exceptions import BoundViolatedError, EpsilonTooLargeError, LemmaViolationError, RangeViolationError
from .models import CapConsistency, CounterexampleResult

logger = logging.getLogger(__name__)


def _check_parameters(epsilon: float, alpha: float, theta0: float, n_max: int) -> None:
    if not 0.0 <= alpha < 1.0:
        raise RangeViolationError(f"alpha must lie in [0, 1), got {alpha}", parameter="alpha")
    if epsilon < 0.0:
        raise RangeViolationError(f"epsilon must be non-negative, got {epsilon}", parameter="epsilon")
    if theta0 <= 0.0:
        raise RangeViolationError(f"theta0 must be positive, got {theta0}", parameter="theta0")
    if n_max < 0:
        raise RangeViolationError(f"n_max must be non-negative, got {n_max}", parameter="n_max")


def _products(pmf: np.ndarray, epsilon: float, alpha: float, theta0: float, n_max: int) -> np.ndarray:
    """u_n = θ₀ v_n(1) where v_n(z) = E_z[∏_{k=1}^{n} f(Z_k)], f(1) = 1 − α, f(z>1) = 1 + αε.

    States 2..K move deterministically to z − 1; only state 1 redraws.
    """
    K = pmf.size
    f = np.full(K, 1.0 + alpha * epsilon)
    f[0] = 1.0 - alpha
    weighted = pmf * f
    v = np.ones(K)
    u = np.empty(n_max + 1)
    u[0] = theta0
    for n in range(1, n_max + 1):
        head = float(np.dot(weighted, v))
        v[1:] = f[:-1] * v[:-1]
        v[0] = head
        u[n] = theta0 * v[0]
    return u


def _slack(mass: float, epsilon: float, alpha: float, theta0: float, n_max: int) -> np.ndarray:
    """θ₀ n m/(1 − m) (1 + αε)ⁿ: effect of a support truncation of mass m over n steps."""
    n = np.arange(n_max + 1)
    return theta0 * n * (mass / (1.0 - mass)) * (1.0 + alpha * epsilon) ** n


def counterexample_exact(
    tail: TailLaw,
    K: int,
    epsilon: float,
    alpha: float,
    theta0: float,
    n_max: int,
) -> CounterexampleResult:
    """Exact u_n and the lower bound θ₀(1 + αε)ⁿP(Y > n + 1) for n ≤ n_max.

    Args:
        tail: Law of the return time Y
        K: Support cap of the truncated chain
        epsilon: Perturbation, 0 ≤ ε < π(1)
        alpha: Constant step size in [0, 1)
        theta0: Positive initial value
        n_max: Last horizon

    Returns:
        u, lower bound and the truncation slack at every n

    Raises:
        EpsilonTooLargeError: If ε ≥ π(1)
        BoundViolatedError: If u_n < lowerBound_n − slack_n for some n

    Example:
        ```python
        result = counterexample_exact(PowerLawTail(3.0), 10_000, 0.36, 0.5, 1.0, 200)
        result.max_growth  # > 10
        ```
    """
    _check_parameters(epsilon, alpha, theta0, n_max)
    pi_one = float(stationary_forward_recurrence(tail, K).weights[0])
    if epsilon >= pi_one:
        raise EpsilonTooLargeError(epsilon=epsilon, pi_one=pi_one)

    _, pmf, mass = truncated_tail(tail, K)
    u = _products(pmf, epsilon, alpha, theta0, n_max)
    n = np.arange(n_max + 1)
    lower = theta0 * (1.0 + alpha * epsilon) ** n * tail.survival(n + 2)
    slack = _slack(mass, epsilon, alpha, theta0, n_max)

    shortfall = lower - slack - u
    worst = int(np.argmax(shortfall))
    if shortfall[worst] > 1e-12 * max(1.0, abs(float(u[worst]))):
        raise BoundViolatedError(
            f"u_{worst} = {u[worst]:.6g} is below the lower bound {lower[worst]:.6g}",
            margin=float(shortfall[worst]),
        )

    logger.info(
        f"Counterexample ε={epsilon}, α={alpha}, K={K}: max u_n/u_0 = {float(u.max()) / theta0:.4g} "
        f"(π(1) = {pi_one:.5f}, truncation mass {mass:.2e})"
    )
    return CounterexampleResult(
        epsilon=epsilon,
        alpha=alpha,
        theta0=theta0,
        K=K,
        pi_one=pi_one,
        truncation_mass=mass,
        u=u.tolist(),
        lower_bound=lower.tolist(),
        slack=slack.tolist(),
    )


def cap_consistency(
    tail: TailLaw,
    K: int,
    epsilon: float,
    alpha: float,
    theta0: float,
    n_max: int,
) -> CapConsistency:
    """Compare u_n at caps K and 2K against θ₀ n m_K/(1 − m_K)(1 + αε)ⁿ.

    Raises:
        LemmaViolationError: If the caps disagree beyond the bound
    """
    _check_parameters(epsilon, alpha, theta0, n_max)
    _, pmf_K, mass = truncated_tail(tail, K)
    _, pmf_2K, _ = truncated_tail(tail, 2 * K)
    first = _products(pmf_K, epsilon, alpha, theta0, n_max)
    second = _products(pmf_2K, epsilon, alpha, theta0, n_max)
    bound = _slack(mass, epsilon, alpha, theta0, n_max)

    excess = np.abs(first - second) - bound - 1e-12 * np.maximum(np.abs(first), 1.0)
    worst = int(np.argmax(excess))
    holds = bool(excess[worst] <= 0.0)
    if not holds:
        raise LemmaViolationError(
            f"Caps {K} and {2 * K} differ by {abs(first[worst] - second[worst]):.3e} at n={worst}",
            {"bound": float(bound[worst]), "n": worst},
        )
    gap = float(np.max(np.abs(first - second))) if n_max > 0 else 0.0
    if not math.isfinite(gap):
        raise LemmaViolationError("Counterexample products overflowed", {"n_max": n_max})
    return CapConsistency(max_gap=gap, worst_index=int(np.argmax(np.abs(first - second))), holds=holds)
