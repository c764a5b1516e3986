"""Step-size condition checks, tail sums and weighted-sum bounds."""

import logging
import math

import numpy as np

from ..common.exceptions import (
    HypothesisFailedError,
    NotNonIncreasingError,
    NotSquareSummableError,
    RangeViolationError,
    StepTooLargeError,
)
from .models import (
    IdentityCheck,
    ScheduleKind,
    StepConditionReport,
    StepSchedule,
    SumBoundCheck,
    TailSum,
)

logger = logging.getLogger(__name__)

DEFAULT_HORIZON = 1_000_000
TAIL_TERMS = 1_000_000


def _ratio_scan(s: StepSchedule, horizon: int) -> np.ndarray:
    """(α_k − α_{k+1})/α_{k+1}² for start ≤ k < horizon."""
    k = np.arange(s.start, horizon)
    current = s.steps(k)
    following = s.steps(k + 1)
    rises = np.nonzero(following > current * (1.0 + 1e-15))[0]
    if rises.size:
        raise NotNonIncreasingError(index=int(k[rises[0]]))

    ratio = np.zeros_like(current)
    positive = following > 0.0
    ratio[positive] = (current[positive] - following[positive]) / following[positive] ** 2
    ratio[~positive & (current > 0.0)] = math.inf
    return ratio


def _polynomial_tail(s: StepSchedule, last: int) -> tuple[float, float]:
    """Σ_{ℓ>last} α_ℓ² by Euler–Maclaurin with a first-derivative error bound."""
    C, n0, t = float(s.C or 0.0), s.n0, float(s.t or 1.0)
    x = last + n0
    integral = C**2 * x ** (1.0 - 2.0 * t) / (2.0 * t - 1.0)
    f = C**2 * x ** (-2.0 * t)
    df = -2.0 * t * C**2 * x ** (-2.0 * t - 1.0)
    return integral - f / 2.0 - df / 12.0, abs(df) / 12.0


def _tail_beyond(s: StepSchedule, last: int) -> tuple[float, float]:
    """(Σ_{ℓ>last} α_ℓ², error bound) for a square-summable schedule."""
    if s.kind is ScheduleKind.POLYNOMIAL:
        return _polynomial_tail(s, last)
    table = np.asarray(s.values, dtype=float)
    offset = max(0, last + 1 - s.first_index)
    return float(np.sum(table[offset:] ** 2)), 0.0


def _require_square_summable(s: StepSchedule) -> None:
    if not s.square_summable:
        raise NotSquareSummableError(
            f"Σ α_k² diverges for this {s.kind.value} schedule",
            {"kind": s.kind.value, "t": s.t},
        )


def _tail_sums(s: StepSchedule, first: int, last: int) -> np.ndarray:
    """𝒜_j for first ≤ j ≤ last."""
    squares = s.steps(np.arange(first, last + 1)) ** 2
    remainder, _ = _tail_beyond(s, last)
    return np.cumsum(squares[::-1])[::-1] + remainder


def tail_sum_sq(s: StepSchedule, n: int) -> TailSum:
    """Tail sum 𝒜_n = Σ_{ℓ≥n} α_ℓ².

    Polynomial schedules add a partial sum over 10⁶ terms to the integral tail
    C²/((2t−1)(N+n0)^{2t−1}) corrected by Euler–Maclaurin terms.

    Args:
        s: Square-summable schedule
        n: First index of the tail

    Returns:
        Tail sum with its truncation bound

    Raises:
        NotSquareSummableError: For constant schedules or t ≤ 1/2
    """
    _require_square_summable(s)
    n = max(n, s.start)
    if s.kind is ScheduleKind.EXPLICIT:
        table = np.asarray(s.values, dtype=float)
        offset = max(0, n - s.first_index)
        return TailSum(n=n, value=float(np.sum(table[offset:] ** 2)), truncation_bound=0.0)

    last = n + TAIL_TERMS
    partial = float(np.sum(s.steps(np.arange(n, last + 1)) ** 2))
    remainder, bound = _polynomial_tail(s, last)
    return TailSum(n=n, value=partial + remainder, truncation_bound=bound)


def validate_A5(s: StepSchedule, a: float, horizon: int = DEFAULT_HORIZON) -> StepConditionReport:
    """Smallest c_α with α_k/α_{k+1} ≤ 1 + c_α α_{k+1} over k < horizon.

    Args:
        s: Step schedule
        a: Contraction rate from the Lyapunov solution
        horizon: Scan length (≥ 2)

    Returns:
        Report; passes iff the minimal c_α is finite and ≤ a/16

    Raises:
        NotNonIncreasingError: If the schedule increases within the horizon
    """
    if horizon < 2:
        raise RangeViolationError("horizon must be at least 2", parameter="horizon")
    minimal = float(np.max(_ratio_scan(s, horizon)))
    threshold = a / 16.0
    return StepConditionReport(
        minimal_c_alpha=minimal,
        threshold=threshold,
        passes=math.isfinite(minimal) and minimal <= threshold,
        horizon=horizon,
    )


def validate_A6(s: StepSchedule, a: float, horizon: int = DEFAULT_HORIZON) -> StepConditionReport:
    """Square-summable step-size condition with c_α ≤ a/32.

    The minimal c_α satisfies both α_k/α_{k+1} ≤ 1 + c_α α_{k+1} and
    α_k/𝒜_{k+1} ≤ (2/3)c_α over the horizon. Constant schedules are reported as
    not applicable (the constant-step branch of the bound does not need it).

    Raises:
        NotSquareSummableError: For polynomial schedules with t ≤ 1/2
    """
    if horizon < 2:
        raise RangeViolationError("horizon must be at least 2", parameter="horizon")
    threshold = a / 32.0
    ratio = _ratio_scan(s, horizon)
    if s.kind is ScheduleKind.CONSTANT:
        return StepConditionReport(
            minimal_c_alpha=float(np.max(ratio)),
            threshold=threshold,
            passes=False,
            applicable=False,
            horizon=horizon,
        )
    _require_square_summable(s)

    k = np.arange(s.start, horizon)
    current = s.steps(k)
    tails = _tail_sums(s, s.start + 1, horizon)
    with np.errstate(divide="ignore", invalid="ignore"):
        quotient = np.where(tails > 0.0, current / tails, np.where(current > 0.0, math.inf, 0.0))
    ratio_bound = float(np.max(quotient))
    minimal = max(float(np.max(ratio)), 1.5 * ratio_bound)
    return StepConditionReport(
        minimal_c_alpha=minimal,
        ratio_bound=ratio_bound,
        threshold=threshold,
        passes=math.isfinite(minimal) and minimal <= threshold,
        horizon=horizon,
    )


def weighted_sum_identity(s: StepSchedule, a: float, N: int) -> IdentityCheck:
    """Check Σ_{j=0}^{N} α_j ∏_{l=j+1}^{N}(1 − α_l a) = (1/a)(1 − ∏_{l=0}^{N}(1 − α_l a)).

    Raises:
        HypothesisFailedError: If the schedule does not define α_0
        StepTooLargeError: If α_0 ≥ 1/a
    """
    if s.start != 0:
        raise HypothesisFailedError("The identity needs α_0", hypothesis="alpha_0 defined")
    alphas = s.steps(np.arange(0, N + 1))
    if alphas[0] * a >= 1.0:
        raise StepTooLargeError("α_0 must be below 1/a", {"alpha_0": float(alphas[0]), "a": a})

    lhs = 0.0
    for alpha in alphas:
        lhs = lhs * (1.0 - alpha * a) + alpha
    rhs = (1.0 - float(np.prod(1.0 - alphas * a))) / a
    printed_rhs = (1.0 - float(np.prod(1.0 - alphas[1:] * a))) / a
    return IdentityCheck(lhs=lhs, rhs=rhs, gap=abs(lhs - rhs), printed_gap=abs(lhs - printed_rhs))


def weighted_sum_bounds(
    s: StepSchedule,
    b: float,
    p: float,
    N: int,
    *,
    q: float = 0.0,
    part: int = 1,
) -> SumBoundCheck:
    """Check Σ_{k≤n} α_k^p 𝒜_k^q ∏_{j=k+1}^{n}(1 − bα_j) ≤ (2/b) α_n^{p−1} 𝒜_n^q for n ≤ N.

    Part 1 uses q = 0 and needs c_α ≤ b/2; part 2 adds the tail-sum condition
    α_k/𝒜_{k+1} ≤ (2/3)c_α with c_α ≤ b/4 and α_0 ≤ (2c_α)⁻¹.

    Raises:
        HypothesisFailedError: If the selected part's hypotheses fail
    """
    if part not in (1, 2):
        raise RangeViolationError("part must be 1 or 2", parameter="part")
    if not 1.0 < p <= 2.0:
        raise HypothesisFailedError("p must lie in (1, 2]", hypothesis="p")
    if s.start != 0:
        raise HypothesisFailedError("The bound needs α_0", hypothesis="alpha_0 defined")
    alpha_0 = s.step(0)
    if alpha_0 >= 1.0 / (2.0 * b):
        raise HypothesisFailedError("α_0 must be below 1/(2b)", hypothesis="alpha_0")

    horizon = max(N + 1, 2)
    if part == 1:
        q = 0.0
        report = validate_A5(s, a=8.0 * b, horizon=horizon)
        c_alpha, limit = report.minimal_c_alpha, b / 2.0
        tails = np.ones(N)
    else:
        if not 0.0 <= q <= 1.0:
            raise HypothesisFailedError("q must lie in [0, 1]", hypothesis="q")
        report = validate_A6(s, a=8.0 * b, horizon=horizon)
        c_alpha, limit = report.minimal_c_alpha, b / 4.0
        if c_alpha > 0.0 and alpha_0 > 1.0 / (2.0 * c_alpha):
            raise HypothesisFailedError("α_0 must not exceed (2c_α)⁻¹", hypothesis="alpha_0")
        tails = _tail_sums(s, 1, N)
    if c_alpha > limit:
        raise HypothesisFailedError(
            f"c_α = {c_alpha:.4g} exceeds {limit:.4g}", hypothesis="c_alpha"
        )

    alphas = s.first(N)
    weights = tails**q
    running = 0.0
    worst_ratio, worst_index = 0.0, 1
    total, bound = 0.0, 0.0
    for n in range(1, N + 1):
        alpha = alphas[n - 1]
        running = running * (1.0 - b * alpha) + alpha**p * weights[n - 1]
        bound = (2.0 / b) * alpha ** (p - 1.0) * weights[n - 1]
        ratio = running / bound if bound > 0.0 else math.inf
        if ratio > worst_ratio:
            worst_ratio, worst_index = ratio, n
        total = running
    logger.debug(f"Weighted sum part {part}: worst ratio {worst_ratio:.4g} at n={worst_index}")
    return SumBoundCheck(
        sum_value=total,
        bound=bound,
        holds=worst_ratio <= 1.0 + 1e-12,
        worst_ratio=worst_ratio,
        worst_index=worst_index,
    )
