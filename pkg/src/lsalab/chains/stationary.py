"""Stationary distributions: exact kernels, forward recurrence series, samples."""

import logging
import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from ..common.exceptions import BadTailError, IllConditionedError, PeriodicError, ReducibleError
from .markov import MarkovModel, TailLaw, truncated_tail
from .models import DistributionKind, StationaryDistribution

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-12


def kernel_period(P: np.ndarray) -> int:
    """Period of an irreducible kernel.

    With BFS distances d from state 0, the period is the gcd of
    d(u) + 1 − d(v) over all edges u → v.
    """
    graph = csr_matrix(np.asarray(P) > 0.0)
    dist = shortest_path(graph, unweighted=True, indices=0)
    rows, cols = graph.nonzero()
    offsets = (dist[rows] + 1.0 - dist[cols]).astype(np.int64)
    return int(np.gcd.reduce(np.abs(offsets)))


def check_irreducible_aperiodic(P: np.ndarray) -> None:
    """Raise unless the kernel is irreducible and aperiodic.

    Raises:
        ReducibleError: If the transition graph has more than one strong component
        PeriodicError: If the period exceeds one
    """
    graph = csr_matrix(np.asarray(P) > 0.0)
    count, _ = connected_components(graph, directed=True, connection="strong")
    if count > 1:
        raise ReducibleError(
            "Kernel is reducible", {"strong_components": int(count)}
        )
    period = kernel_period(P)
    if period > 1:
        raise PeriodicError(period=period)


def stationary_exact(model: MarkovModel) -> StationaryDistribution:
    """Stationary law of a finite chain from its exact kernel.

    Solves π(P − I) = 0 with the normalization Σπ = 1 replacing one equation.

    Args:
        model: Model with an exact kernel

    Returns:
        Exact distribution over ``model.enumerate_states()``

    Raises:
        ReducibleError: If the kernel is reducible
        PeriodicError: If the kernel is periodic
        IllConditionedError: If ‖πP − π‖₁ exceeds 1e−12

    Example:
        ```python
        pi = stationary_exact(finite_chain([[0.9, 0.1], [0.2, 0.8]]))
        pi.weights  # array([0.6667, 0.3333])
        ```
    """
    P = model.exact_kernel
    check_irreducible_aperiodic(P)

    S = P.shape[0]
    system = P.T - np.eye(S)
    system[-1, :] = 1.0
    rhs = np.zeros(S)
    rhs[-1] = 1.0
    weights = np.clip(np.linalg.solve(system, rhs), 0.0, None)
    weights /= weights.sum()

    residual = float(np.abs(weights @ P - weights).sum())
    if residual > RESIDUAL_TOL:
        raise IllConditionedError(
            f"Stationary residual {residual:.2e} exceeds {RESIDUAL_TOL:.0e} ({model.description})", residual
        )
    return StationaryDistribution(
        kind=DistributionKind.EXACT,
        states=model.enumerate_states(),
        weights=weights,
        residual=residual,
    )


def stationary_forward_recurrence(tail: TailLaw, K: int) -> StationaryDistribution:
    """π(z) = P(Y ≥ z)/E[Y] on 1..K for the forward recurrence chain.

    Raises:
        BadTailError: If the tail is invalid
    """
    survival, _, _ = truncated_tail(tail, K)
    mean = tail.mean()
    if not math.isfinite(mean) or mean <= 0.0:
        raise BadTailError("E[Y] must be finite and positive")
    weights = survival[:-1] / mean
    truncation_error = max(0.0, 1.0 - float(weights.sum()))
    logger.debug(f"Forward recurrence stationary law on 1..{K}: truncation error {truncation_error:.3e}")
    return StationaryDistribution(
        kind=DistributionKind.TRUNCATED_SERIES,
        states=np.arange(1, K + 1),
        weights=weights,
        truncation_error=truncation_error,
    )


def stationary_sample(
    model: MarkovModel,
    z0: np.ndarray | int | float,
    *,
    samples: int,
    burn_in: int,
    rng: np.random.Generator,
) -> StationaryDistribution:
    """Equally weighted states of one long path after a burn-in."""
    states = model.initial(z0, 1)
    for _ in range(burn_in):
        states = model.step(states, rng)
    recorded = np.empty((samples, *states.shape[1:]), dtype=states.dtype)
    for k in range(samples):
        states = model.step(states, rng)
        recorded[k] = states[0]
    return StationaryDistribution(
        kind=DistributionKind.SAMPLE,
        states=recorded,
        weights=np.full(samples, 1.0 / samples),
    )
