"""Unit tests for the scalar counterexample on the forward recurrence chain."""

import numpy as np
import pytest

from lsalab.chains import DiscreteTail, PowerLawTail
from lsalab.common import EpsilonTooLargeError, RangeViolationError
from lsalab.stability import cap_consistency, counterexample_exact


@pytest.fixture
def cubic_tail():
    """P(Y = k) ∝ k⁻³."""
    return PowerLawTail(3.0)


def test_counterexample_grows(cubic_tail):
    """Test u_n/u_0 ≥ 10 within 200 steps although the mean matrix is positive."""
    result = counterexample_exact(cubic_tail, 10_000, 0.36, 0.5, 1.0, 200)

    assert result.pi_one == pytest.approx(0.730763, abs=1e-6)
    assert result.pi_one - 0.36 * (1.0 - result.pi_one) > 0.0
    index = result.first_growth_index(10.0)
    assert index is not None
    assert index <= 200
    assert result.max_growth >= 10.0
    assert len(result.u) == 201


def test_counterexample_lower_bound_holds(cubic_tail):
    """Test u_n ≥ θ₀(1 + αε)ⁿP(Y > n + 1) − slack."""
    result = counterexample_exact(cubic_tail, 10_000, 0.36, 0.5, 2.0, 120)

    u = np.asarray(result.u)
    lower = np.asarray(result.lower_bound)
    slack = np.asarray(result.slack)
    assert np.all(u >= lower - slack - 1e-12 * np.maximum(u, 1.0))
    assert result.u[0] == 2.0
    assert result.slack[0] == 0.0


def test_counterexample_two_point_tail():
    """Test u_1 and u_2 against hand enumeration."""
    result = counterexample_exact(DiscreteTail([0.5, 0.5]), 2, 0.1, 0.5, 1.0, 2)

    assert result.pi_one == pytest.approx(2.0 / 3.0)
    assert result.truncation_mass == 0.0
    assert result.u[1] == pytest.approx(0.5 * 0.5 + 0.5 * 1.05)
    assert result.u[2] == pytest.approx(0.5 * 0.5 * 0.775 + 0.5 * 1.05 * 0.5)


def test_counterexample_degenerate_parameters(cubic_tail):
    """Test α = 0 and ε = 0."""
    frozen = counterexample_exact(cubic_tail, 1000, 0.2, 0.0, 1.5, 50)
    assert np.allclose(frozen.u, 1.5, rtol=1e-12)

    damped = counterexample_exact(cubic_tail, 1000, 0.0, 0.5, 1.0, 50)
    assert np.all(np.diff(damped.u) <= 1e-15)


def test_counterexample_rejects_large_epsilon(cubic_tail):
    """Test ε < π(1)."""
    with pytest.raises(EpsilonTooLargeError):
        counterexample_exact(cubic_tail, 1000, 0.8, 0.5, 1.0, 10)


def test_counterexample_validates_ranges(cubic_tail):
    """Test α ∈ [0, 1), θ₀ > 0 and n_max ≥ 0."""
    with pytest.raises(RangeViolationError):
        counterexample_exact(cubic_tail, 1000, 0.3, 1.0, 1.0, 10)
    with pytest.raises(RangeViolationError):
        counterexample_exact(cubic_tail, 1000, 0.3, 0.5, 0.0, 10)
    with pytest.raises(RangeViolationError):
        cap_consistency(cubic_tail, 1000, 0.3, 0.5, 1.0, -1)


def test_cap_consistency(cubic_tail):
    """Test that doubling the cap moves u_n by less than the truncation bound."""
    check = cap_consistency(cubic_tail, 2000, 0.36, 0.5, 1.0, 100)

    assert check.holds
    assert check.max_gap >= 0.0
    assert 0 <= check.worst_index <= 100
