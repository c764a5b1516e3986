"""Unit tests for step-size schedules and the weighted-sum bounds."""

import math

import numpy as np
import pytest

from lsalab.common import (
    HypothesisFailedError,
    NotNonIncreasingError,
    NotSquareSummableError,
    RangeViolationError,
    StepTooLargeError,
)
from lsalab.schedules import (
    ScheduleKind,
    StepSchedule,
    tail_sum_sq,
    validate_A5,
    validate_A6,
    weighted_sum_bounds,
    weighted_sum_identity,
)


def test_constant_schedule(constant_schedule):
    """Test constant steps and partial sums."""
    assert constant_schedule.kind is ScheduleKind.CONSTANT
    assert constant_schedule.step(7) == 0.02
    sums = constant_schedule.partial_sums(5)
    assert sums.shape == (6,)
    assert sums[0] == 0.0
    assert sums[-1] == pytest.approx(0.1)


def test_polynomial_schedule():
    """Test C/(k + n0)^t values and the start index."""
    s = StepSchedule.polynomial(C=2.0, n0=3.0, t=0.5)
    assert s.step(1) == pytest.approx(1.0)
    assert s.step(6) == pytest.approx(2.0 / 3.0)
    assert s.start == 0
    assert StepSchedule.polynomial(C=1.0, n0=0.0, t=1.0).start == 1


def test_polynomial_schedule_requires_parameters():
    """Test family validation."""
    with pytest.raises(ValueError):
        StepSchedule(kind=ScheduleKind.POLYNOMIAL, C=1.0)
    with pytest.raises(ValueError):
        StepSchedule(kind=ScheduleKind.CONSTANT)


def test_explicit_schedule_zero_after_end():
    """Test explicit steps with trailing zeros."""
    s = StepSchedule.explicit([0.5, 0.25, 0.125])
    assert s.first(5).tolist() == [0.5, 0.25, 0.125, 0.0, 0.0]
    with pytest.raises(RangeViolationError):
        s.step(0)


def test_explicit_schedule_must_not_increase():
    """Test that an increasing list is rejected with its index."""
    with pytest.raises(NotNonIncreasingError) as excinfo:
        StepSchedule.explicit([0.5, 0.25, 0.3])
    assert excinfo.value.index == 2


def test_tail_sum_explicit():
    """Test the exact tail of an explicit schedule."""
    s = StepSchedule.explicit([0.5, 0.25])
    assert tail_sum_sq(s, 1).value == pytest.approx(0.3125)
    assert tail_sum_sq(s, 2).value == pytest.approx(0.0625)
    assert tail_sum_sq(s, 5).value == 0.0


def test_tail_sum_polynomial_matches_zeta():
    """Test Σ_{ℓ≥1} 1/ℓ² = π²/6."""
    s = StepSchedule.polynomial(C=1.0, n0=0.0, t=1.0)
    tail = tail_sum_sq(s, 1)
    assert tail.value == pytest.approx(math.pi**2 / 6.0, rel=1e-12)
    assert tail.truncation_bound < 1e-15


def test_tail_sum_not_square_summable():
    """Test divergent schedules."""
    with pytest.raises(NotSquareSummableError):
        tail_sum_sq(StepSchedule.constant(0.1), 1)
    with pytest.raises(NotSquareSummableError):
        tail_sum_sq(StepSchedule.polynomial(C=1.0, n0=1.0, t=0.5), 1)


def test_validate_A5_polynomial():
    """Test the minimal c_α of 1/(k + 10): max (k+11)/(k+10) = 1.1."""
    s = StepSchedule.polynomial(C=1.0, n0=10.0, t=1.0)
    report = validate_A5(s, a=32.0, horizon=100)
    assert report.minimal_c_alpha == pytest.approx(1.1)
    assert report.threshold == pytest.approx(2.0)
    assert report.passes
    assert not validate_A5(s, a=16.0, horizon=100).passes


def test_validate_A5_constant(constant_schedule):
    """Test that constant steps need c_α = 0."""
    report = validate_A5(constant_schedule, a=1.0, horizon=50)
    assert report.minimal_c_alpha == 0.0
    assert report.passes


def test_validate_A6_constant_not_applicable(constant_schedule):
    """Test that A6 is reported as not applicable for constant steps."""
    report = validate_A6(constant_schedule, a=1.0, horizon=50)
    assert not report.applicable
    assert not report.passes


def test_validate_A6_rejects_slow_decay():
    """Test t ≤ 1/2."""
    with pytest.raises(NotSquareSummableError):
        validate_A6(StepSchedule.polynomial(C=1.0, n0=1.0, t=0.5), a=1.0, horizon=50)


def test_validate_A6_polynomial():
    """Test the tail-sum ratio for a slowly decaying schedule."""
    s = StepSchedule.polynomial(C=2.0, n0=4000.0, t=0.75)
    report = validate_A6(s, a=2.0, horizon=2000)
    assert report.ratio_bound is not None
    assert report.minimal_c_alpha >= 1.5 * report.ratio_bound
    assert report.passes


def test_weighted_sum_identity_random_schedules(rng):
    """Test the summation identity on random non-increasing schedules."""
    for _ in range(50):
        a = float(rng.uniform(0.1, 5.0))
        steps = np.sort(rng.uniform(0.0, 0.9 / a, size=200))[::-1]
        s = StepSchedule.explicit(steps.tolist(), first_index=0)
        check = weighted_sum_identity(s, a, 199)
        assert check.gap <= 1e-12 * max(1.0, abs(check.rhs))


def test_weighted_sum_identity_constant_steps():
    """Test 0.1(0.81 + 0.9 + 1) = 1 − 0.9³ and the gap against the l = 1 product."""
    check = weighted_sum_identity(StepSchedule.constant(0.1), 1.0, 2)

    assert check.lhs == pytest.approx(0.271, abs=1e-12)
    assert check.gap <= 1e-12
    assert check.printed_gap == pytest.approx(0.081, abs=1e-12)


def test_weighted_sum_identity_step_too_large():
    """Test α_0 ≥ 1/a."""
    s = StepSchedule.constant(0.5)
    with pytest.raises(StepTooLargeError):
        weighted_sum_identity(s, 2.0, 10)


def test_weighted_sum_identity_needs_alpha_zero():
    """Test schedules starting at α_1."""
    with pytest.raises(HypothesisFailedError):
        weighted_sum_identity(StepSchedule.explicit([0.1, 0.05]), 1.0, 1)


def test_weighted_sum_bounds_constant():
    """Test the first bound for constant steps."""
    check = weighted_sum_bounds(StepSchedule.constant(0.1), b=1.0, p=2.0, N=1000)
    assert check.holds
    assert check.sum_value <= check.bound
    assert check.worst_ratio <= 1.0


def test_weighted_sum_bounds_polynomial_both_parts():
    """Test both bounds for a schedule meeting their hypotheses."""
    s = StepSchedule.polynomial(C=2.0, n0=4000.0, t=0.75)
    first = weighted_sum_bounds(s, b=0.25, p=2.0, N=10_000, part=1)
    second = weighted_sum_bounds(s, b=0.25, p=2.0, N=10_000, q=0.5, part=2)
    assert first.holds
    assert second.holds


def test_weighted_sum_bounds_hypotheses():
    """Test rejected orders and oversized first steps."""
    with pytest.raises(HypothesisFailedError):
        weighted_sum_bounds(StepSchedule.constant(0.1), b=1.0, p=3.0, N=10)
    with pytest.raises(HypothesisFailedError):
        weighted_sum_bounds(StepSchedule.constant(0.6), b=1.0, p=2.0, N=10)
