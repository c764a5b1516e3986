"""Markov chain simulators on finite, integer, real-vector and window state spaces.

Every stepper is batched: it advances an array of independent states (leading
axis = replica) by one transition using a single generator.
"""

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Callable
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.linalg import solve_discrete_lyapunov
from scipy.special import zeta
from scipy.stats import norm

from ..common.exceptions import (
    BadTailError,
    DimMismatchError,
    MethodUnavailableError,
    NotPositiveDefiniteError,
    NotStochasticError,
    RangeViolationError,
    UnstableError,
)
from ..common.utils import read_matrix_csv
from ..linalg.matrices import as_matrix
from .models import StateKind

logger = logging.getLogger(__name__)

Stepper = Callable[[np.ndarray, np.random.Generator], np.ndarray]
Integrator = Callable[[np.ndarray, Callable[[np.ndarray], np.ndarray]], float]

STOCHASTIC_TOL = 1e-12
MAX_DENSE_STATES = 4096
QUADRATURE_WIDTH = 10.0


class MarkovModel:
    """A Markov chain: batched stepper plus optional exact kernel and quadrature.

    Kernel-backed models enumerate their support in kernel order; ``index_of``
    maps states to kernel rows.
    """

    def __init__(
        self,
        *,
        kind: StateKind,
        stepper: Stepper,
        description: str,
        kernel_factory: Callable[[], np.ndarray] | None = None,
        support: np.ndarray | None = None,
        index_of: Callable[[np.ndarray], np.ndarray] | None = None,
        integrate: Integrator | None = None,
        state_shape: tuple[int, ...] = (),
        truncation_mass: float = 0.0,
    ) -> None:
        """Initialize Markov model.

        Args:
            kind: State variant
            stepper: (states, rng) -> next states
            description: Human-readable description
            kernel_factory: Builds the exact S×S kernel on demand
            support: Enumerated states in kernel order
            index_of: Maps a batch of states to kernel indices
            integrate: One-step expectation E[f(Z')|Z=state] by quadrature
            state_shape: Shape of a single state
            truncation_mass: Probability mass removed by support truncation
        """
        self.kind = kind
        self.description = description
        self.state_shape = state_shape
        self.truncation_mass = truncation_mass
        self.integrate = integrate
        self._stepper = stepper
        self._kernel_factory = kernel_factory
        self._kernel: np.ndarray | None = None
        self._support = support
        self._index_of = index_of

    def __repr__(self) -> str:
        return f"MarkovModel({self.kind.value}: {self.description})"

    @property
    def has_kernel(self) -> bool:
        """Whether an exact kernel can be built."""
        return self._kernel_factory is not None

    @property
    def exact_kernel(self) -> np.ndarray:
        """Exact stochastic matrix.

        Raises:
            MethodUnavailableError: If the model has no exact kernel
        """
        if self._kernel_factory is None:
            raise MethodUnavailableError(
                f"{self.description} has no exact kernel", method="exact"
            )
        if self._kernel is None:
            self._kernel = self._kernel_factory()
        return self._kernel

    @property
    def num_states(self) -> int:
        """Size of the enumerated support."""
        return int(self.enumerate_states().shape[0])

    def enumerate_states(self) -> np.ndarray:
        """States in kernel order."""
        if self._support is None:
            raise MethodUnavailableError(
                f"{self.description} has no enumerable support", method="exact"
            )
        return self._support

    def index_of(self, states: np.ndarray) -> np.ndarray:
        """Kernel indices of a batch of states."""
        if self._index_of is None:
            raise MethodUnavailableError(
                f"{self.description} has no state index", method="exact"
            )
        return self._index_of(np.asarray(states))

    def step(self, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Advance a batch of states by one transition."""
        return self._stepper(states, rng)

    def initial(self, z0: np.ndarray | int | float, size: int) -> np.ndarray:
        """Replicate one initial state into a batch of ``size`` states."""
        state = np.asarray(z0)
        if self.kind is StateKind.REAL:
            state = state.astype(float).reshape(self.state_shape)
        elif self.kind in (StateKind.FINITE, StateKind.INTEGER):
            state = state.astype(np.int64).reshape(())
        elif state.shape != self.state_shape:
            raise DimMismatchError(
                f"Initial window has shape {state.shape}, expected {self.state_shape}"
            )
        return np.repeat(state[None, ...], size, axis=0)

    def simulate(
        self,
        z0: np.ndarray | int | float,
        n: int,
        rng: np.random.Generator,
    ) -> np.ndarray:
        """Single path Z_0 = z0, Z_1, …, Z_n (leading axis = time)."""
        states = self.initial(z0, 1)
        path = np.empty((n + 1, *states.shape[1:]), dtype=states.dtype)
        path[0] = states[0]
        for k in range(1, n + 1):
            states = self.step(states, rng)
            path[k] = states[0]
        return path


def _check_stochastic(P: np.ndarray) -> np.ndarray:
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise NotStochasticError(f"Kernel must be square, got shape {P.shape}")
    if not np.all(np.isfinite(P)) or np.any(P < 0.0):
        raise NotStochasticError("Kernel entries must be finite and non-negative")
    row_sums = P.sum(axis=1)
    worst = float(np.max(np.abs(row_sums - 1.0)))
    if worst > STOCHASTIC_TOL:
        raise NotStochasticError(
            "Kernel rows must sum to one", {"max_row_error": worst}
        )
    return P


def _row_sampler(P: np.ndarray) -> Callable[[np.ndarray, np.random.Generator], np.ndarray]:
    """Inverse-CDF sampling of next indices from kernel rows."""
    cdf = np.cumsum(P, axis=1)
    cdf[:, -1] = 1.0

    def sample(indices: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(indices.shape[0])
        return np.sum(u[:, None] >= cdf[indices], axis=1).astype(np.int64)

    return sample


def finite_chain(P: np.ndarray, *, description: str | None = None) -> MarkovModel:
    """Chain on {0, …, S−1} with kernel P.

    Irreducibility is not checked here.

    Raises:
        NotStochasticError: If P is not a stochastic matrix
    """
    P = _check_stochastic(P)
    S = P.shape[0]
    sample = _row_sampler(P)
    return MarkovModel(
        kind=StateKind.FINITE,
        stepper=sample,
        description=description or f"finite chain on {S} states",
        kernel_factory=lambda: P,
        support=np.arange(S),
        index_of=lambda states: states.astype(np.int64),
    )


def load_kernel_csv(path: str | Path) -> MarkovModel:
    """Finite chain from a CSV of S rows with S comma-separated probabilities."""
    return finite_chain(read_matrix_csv(path), description=f"kernel from {Path(path).name}")


class TailLaw(ABC):
    """Law of a positive integer Y given by its survival function k ↦ P(Y ≥ k)."""

    description = "tail law"

    @abstractmethod
    def survival(self, k: np.ndarray) -> np.ndarray:
        """P(Y ≥ k) for integer k."""

    @abstractmethod
    def mean(self) -> float:
        """E[Y] = Σ_{k≥1} P(Y ≥ k)."""


class PowerLawTail(TailLaw):
    """P(Y = k) ∝ k^{−s}, k ≥ 1, through Hurwitz zeta values."""

    def __init__(self, exponent: float) -> None:
        if exponent <= 2.0:
            raise BadTailError("Power-law exponent must exceed 2 for a finite mean")
        self.exponent = exponent
        self.description = f"P(Y=k) ∝ k^-{exponent:g}"

    def survival(self, k: np.ndarray) -> np.ndarray:
        k = np.maximum(np.asarray(k, dtype=float), 1.0)
        return zeta(self.exponent, k) / zeta(self.exponent, 1.0)

    def mean(self) -> float:
        return float(zeta(self.exponent - 1.0, 1.0) / zeta(self.exponent, 1.0))


class DiscreteTail(TailLaw):
    """Y with P(Y = k) = weights[k−1] on a finite support."""

    def __init__(self, weights: list[float]) -> None:
        w = np.asarray(weights, dtype=float)
        if w.size == 0 or np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > 1e-12:
            raise BadTailError("Weights must be non-negative and sum to one")
        self.weights = w
        self._survival = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
        self.description = f"discrete Y on 1..{w.size}"

    def survival(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=np.int64)
        index = np.clip(k - 1, 0, self.weights.size)
        return np.where(k <= 1, 1.0, self._survival[index])

    def mean(self) -> float:
        return float(np.sum(np.arange(1, self.weights.size + 1) * self.weights))


class CallableTail(TailLaw):
    """Survival function supplied as a callable together with E[Y]."""

    def __init__(self, survival: Callable[[np.ndarray], np.ndarray], mean: float) -> None:
        if not math.isfinite(mean) or mean < 1.0:
            raise BadTailError("E[Y] must be finite and at least 1")
        self._fn = survival
        self._mean = mean
        self.description = "callable tail"

    def survival(self, k: np.ndarray) -> np.ndarray:
        return np.asarray(self._fn(np.asarray(k)), dtype=float)

    def mean(self) -> float:
        return self._mean


def truncated_tail(tail: TailLaw, K: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Validated (survival on 1..K+1, renormalized pmf on 1..K, truncation mass).

    Raises:
        BadTailError: If the survival function is not a valid tail
    """
    if K < 1:
        raise BadTailError("Support cap K must be at least 1")
    survival = tail.survival(np.arange(1, K + 2))
    if abs(float(survival[0]) - 1.0) > 1e-12:
        raise BadTailError("P(Y ≥ 1) must equal 1")
    if np.any(survival < 0.0) or np.any(np.diff(survival) > 1e-15):
        raise BadTailError("Survival function must be non-negative and non-increasing")
    mass = float(survival[-1])
    if mass >= 1.0:
        raise BadTailError("Truncation at K removes all mass")
    pmf = np.maximum(survival[:-1] - survival[1:], 0.0)
    return survival, pmf / pmf.sum(), mass


def forward_recurrence_chain(tail: TailLaw, K: int) -> MarkovModel:
    """Countdown chain: Z' = Z − 1 if Z > 1, else a fresh draw of Y capped at K.

    Args:
        tail: Law of Y
        K: Support cap; the mass P(Y > K) is redistributed proportionally

    Returns:
        Integer-valued model (exact kernel available for K ≤ 4096)

    Raises:
        BadTailError: If the tail is invalid
    """
    _, pmf, mass = truncated_tail(tail, K)
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0

    def step(states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(states.shape[0])
        fresh = np.minimum(np.searchsorted(cdf, u, side="right") + 1, K)
        return np.where(states > 1, states - 1, fresh).astype(np.int64)

    def kernel() -> np.ndarray:
        P = np.zeros((K, K))
        P[0, :] = pmf
        P[np.arange(1, K), np.arange(0, K - 1)] = 1.0
        return P

    logger.debug(f"Forward recurrence chain ({tail.description}), K={K}, mass={mass:.3e}")
    return MarkovModel(
        kind=StateKind.INTEGER,
        stepper=step,
        description=f"forward recurrence chain, {tail.description}, K={K}",
        kernel_factory=kernel if K <= MAX_DENSE_STATES else None,
        support=np.arange(1, K + 1),
        index_of=lambda states: states.astype(np.int64) - 1,
        truncation_mass=mass,
    )


def ar_stationary_covariance(rho: np.ndarray, noise_cov: np.ndarray) -> np.ndarray:
    """Σ solving Σ = ρΣρᵀ + noiseCov."""
    return np.asarray(solve_discrete_lyapunov(as_matrix(rho), as_matrix(noise_cov)))


def gaussian_ar_chain(rho: np.ndarray | float, noise_cov: np.ndarray | float) -> MarkovModel:
    """Vector auto-regression X' = ρX + ξ, ξ ~ N(0, noiseCov).

    Scalar chains carry a quadrature integrator on ±10σ (neglected Gaussian
    mass below 2e−23).

    Raises:
        UnstableError: If the spectral radius of ρ is ≥ 1
        NotPositiveDefiniteError: If noiseCov is not SPD
    """
    rho_m = as_matrix(rho)
    cov = as_matrix(noise_cov)
    if rho_m.shape != cov.shape:
        raise DimMismatchError(f"rho is {rho_m.shape} but noise_cov is {cov.shape}")
    radius = float(np.max(np.abs(np.linalg.eigvals(rho_m))))
    if radius >= 1.0:
        raise UnstableError(spectral_radius=radius)
    try:
        chol = np.linalg.cholesky((cov + cov.T) / 2.0)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefiniteError("noise covariance is not positive definite") from e

    dx = rho_m.shape[0]

    def step(states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        noise = rng.standard_normal((states.shape[0], dx)) @ chol.T
        return states @ rho_m.T + noise

    integrate: Integrator | None = None
    if dx == 1:
        coefficient = float(rho_m[0, 0])
        sigma = float(chol[0, 0])

        def integrate(state: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> float:
            mean = coefficient * float(np.asarray(state).reshape(-1)[0])

            def integrand(u: float) -> float:
                value = f(np.array([[mean + u]]))
                return float(np.asarray(value).reshape(-1)[0]) * float(norm.pdf(u, scale=sigma))

            width = QUADRATURE_WIDTH * sigma
            value, _ = quad(integrand, -width, width, limit=200, epsabs=0.0, epsrel=1e-11)
            return float(value)

    return MarkovModel(
        kind=StateKind.REAL,
        stepper=step,
        description=f"Gaussian AR({dx}-dim), spectral radius {radius:.3g}",
        integrate=integrate,
        state_shape=(dx,),
    )


def _admissible_windows(P: np.ndarray, tau: int) -> np.ndarray | None:
    """Index paths (i_0, …, i_tau) with positive probability, or None if too many."""
    paths = np.arange(P.shape[0])[:, None]
    for _ in range(tau):
        rows, cols = np.nonzero(P[paths[:, -1]] > 0.0)
        paths = np.concatenate([paths[rows], cols[:, None]], axis=1)
        if paths.shape[0] > MAX_DENSE_STATES:
            return None
    return paths


def window_chain(base: MarkovModel, tau: int) -> MarkovModel:
    """Chain of windows (x_0, …, x_τ): shift left and append one base step from x_τ.

    For kernel-backed bases the support is the set of admissible windows (positive
    path probability) and the window kernel is exact.

    Args:
        base: Base chain
        tau: Window length minus one (τ ≥ 1)
    """
    if tau < 1:
        raise RangeViolationError("tau must be at least 1", parameter="tau")

    def step(states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        fresh = base.step(states[:, -1], rng)
        return np.concatenate([states[:, 1:], fresh[:, None]], axis=1)

    support = None
    index_of = None
    kernel_factory = None
    if base.has_kernel:
        P = base.exact_kernel
        paths = _admissible_windows(P, tau)
        if paths is not None:
            lookup = {tuple(path): i for i, path in enumerate(paths.tolist())}
            support = base.enumerate_states()[paths]

            def index_of(states: np.ndarray) -> np.ndarray:
                flat = base.index_of(states.reshape(-1)).reshape(states.shape)
                try:
                    return np.asarray([lookup[tuple(row)] for row in flat.tolist()], dtype=np.int64)
                except KeyError as e:
                    raise RangeViolationError(f"Window {e.args[0]} has zero probability", parameter="window") from e

            def kernel_factory() -> np.ndarray:
                Pw = np.zeros((paths.shape[0], paths.shape[0]))
                for i, path in enumerate(paths.tolist()):
                    head = tuple(path[1:])
                    for j in np.nonzero(P[path[-1]] > 0.0)[0]:
                        Pw[i, lookup[(*head, int(j))]] = P[path[-1], j]
                return Pw
        else:
            logger.warning(f"Window chain over {base.description}: too many windows for an exact kernel")

    integrate: Integrator | None = None
    if base.integrate is not None:
        base_integrate = base.integrate

        def integrate(state: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> float:
            head = np.asarray(state)[1:]

            def extend(nexts: np.ndarray) -> np.ndarray:
                count = nexts.shape[0]
                return f(np.concatenate([np.repeat(head[None], count, axis=0), nexts[:, None]], axis=1))

            return base_integrate(np.asarray(state)[-1], extend)

    return MarkovModel(
        kind=StateKind.WINDOW,
        stepper=step,
        description=f"window chain (tau={tau}) over {base.description}",
        kernel_factory=kernel_factory,
        support=support,
        index_of=index_of,
        integrate=integrate,
        state_shape=(tau + 1, *base.state_shape),
        truncation_mass=base.truncation_mass,
    )
