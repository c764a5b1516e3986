"""Monte Carlo L_p moments of random matrix products and LSA errors, envelopes and decay fits."""

import logging
import math
from collections.abc import Callable, Sequence

import numpy as np

from ..chains.markov import MarkovModel
from ..common.base import ReplicaRunner
from ..common.exceptions import (
    DecompositionMismatchError,
    DegenerateWindowError,
    HypothesisFailedError,
    MethodUnavailableError,
    ProductOverflowError,
    RangeViolationError,
    StepAboveCapError,
)
from ..common.models import Abscissa
from ..common.utils import log_mean_exp, moment_interval
from ..constants.models import ConstantsReport
from ..linalg.matrices import operator_norm
from ..lsa.engine import IDENTITY_TOL, identity_gap
from ..lsa.models import LsaModel, MatrixField
from ..schedules.models import ScheduleKind, StepSchedule
from ..schedules.schedule import tail_sum_sq
from .models import BoundCurve, DecayFit, MomentComponent, MomentPoint, MomentSeries

logger = logging.getLogger(__name__)

MIN_REPLICAS = 100
LOG_OVERFLOW = math.log(1e300)
MAX_ENUMERATED_PATHS = 2_000_000

ThetaStart = np.ndarray | Callable[[np.random.Generator, int], np.ndarray]

LSA_COMPONENTS = (
    MomentComponent.THETA_TILDE,
    MomentComponent.J0,
    MomentComponent.H0,
    MomentComponent.J1,
    MomentComponent.H1,
)


def _grid(n_grid: Sequence[int]) -> list[int]:
    grid = sorted({int(n) for n in n_grid})
    if not grid or grid[0] < 0:
        raise RangeViolationError("n grid must be non-empty with n ≥ 0", parameter="n_grid")
    return grid


def _check_orders(ps: Sequence[float], replicas: int) -> list[float]:
    if replicas < MIN_REPLICAS:
        raise RangeViolationError(f"At least {MIN_REPLICAS} replicas are required, got {replicas}", parameter="replicas")
    orders = [float(p) for p in ps]
    if not orders or min(orders) < 1.0:
        raise RangeViolationError("Moment orders must satisfy p ≥ 1", parameter="p")
    return orders


def _log_norms(vectors: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.linalg.norm(vectors, axis=-1))


def _batch_log_moments(log_norms: np.ndarray, orders: list[float]) -> np.ndarray:
    """log of the batch mean of X^p for every order."""
    return np.asarray([log_mean_exp(p * log_norms) for p in orders])


def _series(
    component: MomentComponent,
    batch_logs: np.ndarray,
    orders: list[float],
    grid: list[int],
    sums: np.ndarray,
    *,
    replicas: int,
    seed: int,
    confidence: float,
) -> list[MomentSeries]:
    """Merge per-batch log moments of shape (batches, len(grid), len(orders))."""
    out = []
    for j, p in enumerate(orders):
        points = []
        for i, n in enumerate(grid):
            interval = moment_interval(batch_logs[:, i, j], p, confidence=confidence)
            points.append(MomentPoint(n=n, sum_alpha=float(sums[n]), **interval.model_dump()))
        out.append(MomentSeries(component=component, p=p, points=points, replicas=replicas, seed=seed))
    return out


def estimate_gamma_moments(
    chain: MarkovModel,
    Abar: MatrixField,
    schedule: StepSchedule,
    z0: np.ndarray | int | float,
    ps: Sequence[float],
    n_grid: Sequence[int],
    replicas: int,
    seed: int,
    *,
    batches: int = 50,
    workers: int | None = None,
    confidence: float = 0.99,
) -> list[MomentSeries]:
    """E_{z0}^{1/p}‖Γ_{1:n}‖^p for several orders on one set of paths.

    Γ_{1:k} = (I − α_kĀ(Z_k))Γ_{1:k−1} is updated in place and renormalized by
    its largest entry after every step, the scale being kept in log space.

    Raises:
        RangeViolationError: If replicas < 100 or some p < 1
        ProductOverflowError: If ‖Γ_{1:k}‖ exceeds 1e300
    """
    orders = _check_orders(ps, replicas)
    grid = _grid(n_grid)
    horizon = grid[-1]
    alphas = schedule.first(horizon)
    sums = schedule.partial_sums(horizon)

    def task(rng: np.random.Generator, size: int, batch: int) -> np.ndarray:
        states = chain.initial(z0, size)
        d = np.asarray(Abar(states[:1])).shape[-1]
        product = np.broadcast_to(np.eye(d), (size, d, d)).copy()
        log_scale = np.zeros(size)
        out = np.empty((len(grid), len(orders)))
        slot = 0
        for k in range(horizon + 1):
            if k > 0:
                states = chain.step(states, rng)
                product -= alphas[k - 1] * np.matmul(Abar(states), product)
                scale = np.max(np.abs(product), axis=(1, 2))
                live = scale > 0.0
                product[live] /= scale[live, None, None]
                log_scale[live] += np.log(scale[live])
            if slot < len(grid) and grid[slot] == k:
                with np.errstate(divide="ignore"):
                    log_norms = np.log(operator_norm(product)) + log_scale
                if np.max(log_norms) > LOG_OVERFLOW:
                    raise ProductOverflowError(step=k)
                out[slot] = _batch_log_moments(log_norms, orders)
                slot += 1
            elif k > 0 and np.max(log_scale) > LOG_OVERFLOW:
                raise ProductOverflowError(step=k)
        logger.debug(f"Γ moments: batch {batch} ({size} replicas) done")
        return out

    runner = ReplicaRunner(seed, replicas=replicas, batches=batches, workers=workers)
    batch_logs = np.stack(runner.map(task))
    logger.info(f"Estimated Γ moments for p={orders} on {len(grid)} grid points ({replicas} replicas)")
    return _series(
        MomentComponent.GAMMA, batch_logs, orders, grid, sums,
        replicas=replicas, seed=seed, confidence=confidence,
    )


def estimate_gamma_moment(
    chain: MarkovModel,
    Abar: MatrixField,
    schedule: StepSchedule,
    z0: np.ndarray | int | float,
    p: float,
    n_grid: Sequence[int],
    replicas: int,
    seed: int,
    *,
    batches: int = 50,
    workers: int | None = None,
    confidence: float = 0.99,
) -> MomentSeries:
    """Monte Carlo estimate of E_{z0}[‖Γ_{1:n}‖^p]^{1/p} on an n grid.

    Args:
        chain: Driving chain
        Abar: Batched state → d×d map
        schedule: Step sizes
        z0: Initial state
        p: Moment order (≥ 1)
        n_grid: Grid of horizons n
        replicas: Number of independent paths (≥ 100)
        seed: Master seed
        batches: CI batches
        workers: Thread pool size
        confidence: Two-sided CI level

    Returns:
        Moment series with batch-means confidence intervals

    Example:
        ```python
        series = estimate_gamma_moment(chain, Abar, StepSchedule.constant(0.02), 0, 2.0,
                                       [100, 200, 400], replicas=10_000, seed=1)
        ```
    """
    return estimate_gamma_moments(
        chain, Abar, schedule, z0, [p], n_grid, replicas, seed,
        batches=batches, workers=workers, confidence=confidence,
    )[0]


def enumerate_gamma_moment(
    chain: MarkovModel,
    Abar: MatrixField,
    schedule: StepSchedule,
    z0: np.ndarray | int | float,
    p: float,
    n: int,
) -> float:
    """Exact E_{z0}‖Γ_{1:n}‖^p summed over every path with positive probability.

    Raises:
        MethodUnavailableError: Without an exact kernel or beyond 2·10⁶ paths
    """
    P = chain.exact_kernel
    support = chain.enumerate_states()
    S = P.shape[0]
    factors = Abar(support)
    d = factors.shape[-1]
    start = int(chain.index_of(np.asarray([z0]))[0])

    weights = np.ones(1)
    current = np.asarray([start])
    products = np.eye(d)[None, :, :]
    eye = np.eye(d)
    for k, alpha in enumerate(schedule.first(n), start=1):
        rows, nxt = np.nonzero(P[current] > 0.0)
        if rows.size > MAX_ENUMERATED_PATHS:
            raise MethodUnavailableError(
                f"Path enumeration needs {rows.size} paths at step {k} (S={S})", method="enumeration"
            )
        weights = weights[rows] * P[current[rows], nxt]
        products = np.matmul(eye - alpha * factors[nxt], products[rows])
        current = nxt
    return float(np.dot(weights, operator_norm(products) ** p))


def _suffix(report: ConstantsReport, p: float) -> str:
    if math.isclose(p, report.inputs.p):
        return "P"
    if math.isclose(p, 2.0 * report.inputs.p):
        return "2P"
    raise RangeViolationError(
        f"Report holds stability constants for p={report.inputs.p:g} and {2 * report.inputs.p:g}, not {p:g}",
        parameter="p",
    )


def _require(report: ConstantsReport, *names: str) -> list[float]:
    missing = [name for name in names if name not in report.values]
    if missing:
        raise HypothesisFailedError(
            f"Constants report lacks {', '.join(missing)}", hypothesis="constants-available"
        )
    return [report.values[name] for name in names]


def theory_envelope(
    report: ConstantsReport,
    schedule: StepSchedule,
    V_z0: float,
    p: float,
    n_grid: Sequence[int],
    *,
    enforce_cap: bool = True,
) -> BoundCurve:
    """C_{st,p} exp(−(a/4)Σ_{ℓ≤n}α_ℓ) V(z0)^{1/(2p)} on a grid.

    Args:
        report: Constants report (p must be its p or 2p)
        schedule: Step sizes
        V_z0: Lyapunov function at the start state
        p: Moment order
        n_grid: Grid of horizons
        enforce_cap: Require α_1 < α_{∞,p}

    Raises:
        StepAboveCapError: If ``enforce_cap`` and α_1 ≥ α_{∞,p}
    """
    suffix = _suffix(report, p)
    C_st, log_cap = _require(report, f"Cst{suffix}", f"log_alphaInf{suffix}")
    alpha_1 = schedule.step(1)
    if enforce_cap and alpha_1 > 0.0 and math.log(alpha_1) >= log_cap:
        raise StepAboveCapError(alpha=alpha_1, alpha_cap=math.exp(log_cap))

    grid = _grid(n_grid)
    sums = schedule.partial_sums(grid[-1])[grid]
    a = report.inputs.matrix.a
    values = C_st * np.exp(-(a / 4.0) * sums) * V_z0 ** (1.0 / (2.0 * p))
    return BoundCurve(name=f"stability_p{p:g}", n=grid, values=values.tolist())


def lsa_envelope(
    report: ConstantsReport,
    schedule: StepSchedule,
    V_z0: float,
    n_grid: Sequence[int],
    *,
    M0: float,
) -> BoundCurve:
    """Envelope of E^{1/p}‖θ̃_n‖ with p and K taken from the report.

    M₀C_{st,2p}e^{−(a/4)Σα}V^{1/(4p)} + (Const_J0 + Const_H0)√α_n V^{2/K + 1/(4p)}.
    """
    p, K = report.inputs.p, report.inputs.K
    C_st, J0, H0 = _require(report, "Cst2P", "ConstJ0", "ConstH0")
    grid = _grid(n_grid)
    sums = schedule.partial_sums(grid[-1])[grid]
    steps = schedule.steps(np.maximum(np.asarray(grid), 1))
    a = report.inputs.matrix.a
    transient = M0 * C_st * np.exp(-(a / 4.0) * sums) * V_z0 ** (1.0 / (4.0 * p))
    fluctuation = (J0 + H0) * np.sqrt(steps) * V_z0 ** (2.0 / K + 1.0 / (4.0 * p))
    return BoundCurve(name=f"lsa_p{p:g}", n=grid, values=(transient + fluctuation).tolist())


def h0_envelope(
    report: ConstantsReport,
    schedule: StepSchedule,
    V_z0: float,
    n_grid: Sequence[int],
) -> BoundCurve:
    """Envelope of E^{1/p}‖H0_n‖.

    Constant steps: C_f α√log(1/α). Decreasing steps: C_d √(α_n 𝒜_n log(1/α_n)).
    Both carry the factor V^{3/K + 9/(16p)}.
    """
    p, K = report.inputs.p, report.inputs.K
    grid = _grid(n_grid)
    weight = V_z0 ** (3.0 / K + 9.0 / (16.0 * p))
    steps = schedule.steps(np.maximum(np.asarray(grid), 1))
    if np.any(steps >= 1.0) or np.any(steps <= 0.0):
        raise RangeViolationError("The H0 envelope needs step sizes in (0, 1)", parameter="alpha")

    if schedule.kind is ScheduleKind.CONSTANT:
        (Cf,) = _require(report, "Cf")
        values = Cf * steps * np.sqrt(np.log(1.0 / steps)) * weight
    else:
        (Cd,) = _require(report, "Cd")
        tails = np.asarray([tail_sum_sq(schedule, max(n, 1)).value for n in grid])
        values = Cd * np.sqrt(steps * tails * np.log(1.0 / steps)) * weight
    return BoundCurve(name=f"h0_p{p:g}", n=grid, values=values.tolist())


def fit_decay(
    series: MomentSeries,
    abscissa: Abscissa = Abscissa.SUM_ALPHA,
    window: tuple[int, int] | None = None,
) -> DecayFit:
    """Least-squares line through log(estimate) against Σα or log n.

    Points with non-finite or non-positive estimates (and n = 0 on the log n
    abscissa) are excluded and listed in the result.

    Raises:
        DegenerateWindowError: If fewer than 4 usable points remain
    """
    lo, hi = window if window is not None else (series.points[0].n, series.points[-1].n)
    xs, ys, excluded = [], [], []
    for point in series.points:
        if not lo <= point.n <= hi:
            continue
        usable = math.isfinite(point.estimate) and point.estimate > 0.0
        if abscissa is Abscissa.LOG_N:
            usable = usable and point.n > 0
        if not usable:
            excluded.append(point.n)
            continue
        xs.append(point.sum_alpha if abscissa is Abscissa.SUM_ALPHA else math.log(point.n))
        ys.append(math.log(point.estimate))

    if len(xs) < 4 or np.ptp(xs) == 0.0:
        raise DegenerateWindowError(
            f"Decay fit needs 4 distinct usable points in [{lo}, {hi}], got {len(xs)}",
            {"window": [lo, hi], "excluded": excluded},
        )
    if excluded:
        logger.warning(f"Decay fit excluded grid points {excluded}")

    x, y = np.asarray(xs), np.asarray(ys)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sum((y - (slope * x + intercept)) ** 2))
    total = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if total == 0.0 else min(1.0, max(0.0, 1.0 - residual / total))
    return DecayFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
        window=(lo, hi),
        abscissa=abscissa,
        points_used=len(xs),
        excluded=excluded,
    )


def _initial_thetas(theta0: ThetaStart, rng: np.random.Generator, size: int, d: int) -> np.ndarray:
    if callable(theta0):
        thetas = np.asarray(theta0(rng, size), dtype=float).reshape(size, d)
    else:
        thetas = np.broadcast_to(np.asarray(theta0, dtype=float).reshape(d), (size, d)).copy()
    return thetas


def estimate_lsa_moment(
    model: LsaModel,
    schedule: StepSchedule,
    theta0: ThetaStart,
    z0: np.ndarray | int | float,
    ps: Sequence[float],
    n_grid: Sequence[int],
    replicas: int,
    seed: int,
    *,
    batches: int = 50,
    workers: int | None = None,
    confidence: float = 0.99,
) -> dict[MomentComponent, list[MomentSeries]]:
    """L_p moments of θ̃ and of J0, H0, J1, H1 on shared chain paths.

    Every batch runs the main recursion and the four error recursions on the
    same states, and checks θ̃ = θ̃tr + J0 + H0 and H0 = J1 + H1 at each grid point.

    Args:
        model: LSA model
        schedule: Step sizes
        theta0: Initial parameter, or a sampler (rng, size) -> (size, d)
        z0: Initial chain state
        ps: Moment orders
        n_grid: Grid of horizons
        replicas: Number of paths (≥ 100)
        seed: Master seed
        batches: CI batches
        workers: Thread pool size
        confidence: Two-sided CI level

    Returns:
        Series per component, one per order

    Raises:
        ProductOverflowError: If an iterate exceeds 1e300 in norm
        DecompositionMismatchError: If an identity fails beyond 1e−8
    """
    orders = _check_orders(ps, replicas)
    grid = _grid(n_grid)
    horizon = grid[-1]
    alphas = schedule.first(horizon)
    sums = schedule.partial_sums(horizon)
    d, A, theta_star = model.dim, model.A, model.theta_star
    star_norm = float(np.linalg.norm(theta_star))

    def task(rng: np.random.Generator, size: int, batch: int) -> np.ndarray:
        theta = _initial_thetas(theta0, rng, size, d)
        states = model.chain.initial(z0, size)
        tr = theta - theta_star
        J0, H0, J1, H1 = (np.zeros((size, d)) for _ in range(4))
        out = np.empty((len(LSA_COMPONENTS), len(grid), len(orders)))
        slot = 0
        for k in range(horizon + 1):
            if k > 0:
                a = alphas[k - 1]
                states = model.chain.step(states, rng)
                Ak = model.Abar(states)
                Atk = Ak - A
                drive = np.einsum("nij,nj->ni", Atk, J0)
                theta = theta + a * (-np.einsum("nij,nj->ni", Ak, theta) + model.bbar(states))
                tr = tr - a * np.einsum("nij,nj->ni", Ak, tr)
                H0 = H0 - a * np.einsum("nij,nj->ni", Ak, H0) - a * drive
                H1 = H1 - a * np.einsum("nij,nj->ni", Ak, H1) - a * np.einsum("nij,nj->ni", Atk, J1)
                J1 = J1 - a * (J1 @ A.T) - a * drive
                J0 = J0 - a * (J0 @ A.T) + a * model.noise(states)
            if slot < len(grid) and grid[slot] == k:
                tilde = theta - theta_star
                _check_identities(tilde, tr, J0, H0, J1, H1, theta, star_norm, step=k, batch=batch)
                for c, values in enumerate((tilde, J0, H0, J1, H1)):
                    log_norms = _log_norms(values)
                    if np.max(log_norms) > LOG_OVERFLOW:
                        raise ProductOverflowError(step=k)
                    out[c, slot] = _batch_log_moments(log_norms, orders)
                slot += 1
        logger.debug(f"LSA moments: batch {batch} ({size} replicas) done")
        return out

    runner = ReplicaRunner(seed, replicas=replicas, batches=batches, workers=workers)
    batch_logs = np.stack(runner.map(task))
    logger.info(f"Estimated LSA error moments for p={orders} on {len(grid)} grid points ({replicas} replicas)")
    return {
        component: _series(
            component, batch_logs[:, c], orders, grid, sums,
            replicas=replicas, seed=seed, confidence=confidence,
        )
        for c, component in enumerate(LSA_COMPONENTS)
    }


def _check_identities(
    tilde: np.ndarray,
    tr: np.ndarray,
    J0: np.ndarray,
    H0: np.ndarray,
    J1: np.ndarray,
    H1: np.ndarray,
    theta: np.ndarray,
    star_norm: float,
    *,
    step: int,
    batch: int,
) -> None:
    first = identity_gap(tilde, [tr, J0, H0], np.linalg.norm(theta, axis=1) + star_norm)
    second = identity_gap(H0, [J1, H1], np.zeros(tilde.shape[0]))
    if max(first, second) > IDENTITY_TOL:
        raise DecompositionMismatchError(
            "Error decomposition identity failed inside the moment estimator",
            {"step": step, "batch": batch, "fluctuation_gap": first, "second_order_gap": second},
        )
