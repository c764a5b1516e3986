"""Unit tests for drift certificates, minorization and ergodicity constants."""

import math

import numpy as np
import pytest

from lsalab.chains import (
    DriftCertificate,
    ar1_drift_certificate,
    check_drift,
    check_iterated_drift,
    drift_lambda,
    drift_rhs,
    ergodicity_constants,
    gaussian_ar_chain,
    log_v_moment,
    minorization_constants,
)
from lsalab.common import ExpectationMethod, HypothesisFailedError, MethodUnavailableError


@pytest.fixture
def ar1_chain():
    """X' = 0.5X + ξ, ξ ~ N(0, 1)."""
    return gaussian_ar_chain(0.5, 1.0)


@pytest.fixture
def ar1_cert():
    """V = exp(1 + |x|) with c = 0.25 outside W ≤ 6.1."""
    return ar1_drift_certificate(0.5, 1.0, c=0.25, R0=6.1)


def test_uniform_certificate_small_set(uniform_cert):
    """Test the one-step minorization of a positive kernel."""
    entry = uniform_cert.small_set.lookup(10.0)

    assert entry.m == 1
    assert entry.eps == pytest.approx(0.75)
    assert uniform_cert.b == pytest.approx(math.e)
    assert uniform_cert.superlevel_empty


def test_uniform_certificate_ergodicity(uniform_cert):
    """Test ρ = 1/4 and B_V = 4/3 for the doubly stochastic kernel."""
    ergodicity = uniform_cert.ergodicity

    assert ergodicity.rho == pytest.approx(0.25)
    assert ergodicity.B_V == pytest.approx(4.0 / 3.0, rel=1e-6)


def test_minorization_constants(three_state_chain):
    """Test column minima and the normalized minorizing measure."""
    result = minorization_constants(three_state_chain, [0, 1, 2], m=1)

    assert result.eps == pytest.approx(0.75)
    assert np.allclose(result.nu, 1.0 / 3.0)


def test_uniform_drift_holds(three_state_chain, uniform_cert):
    """Test PV = e ≤ b on the whole small set."""
    report = check_drift(three_state_chain, uniform_cert, np.arange(3))

    assert report.holds
    assert report.worst_ratio == pytest.approx(1.0)
    assert all(point.rhs == pytest.approx(math.e) for point in report.points)


def test_iterated_drift(three_state_chain, uniform_cert):
    """Test PⁿV ≤ λⁿV + b/(1 − λ)."""
    for n in (1, 5, 20):
        report = check_iterated_drift(three_state_chain, uniform_cert, n)
        assert report.holds
        assert report.lam == pytest.approx(math.exp(-1.0))


def test_ar1_certificate_exact(ar1_chain, ar1_cert):
    """Test the closed-form drift check on a grid of states."""
    grid = np.linspace(-20.0, 20.0, 81)[:, None]
    report = check_drift(ar1_chain, ar1_cert, grid)

    assert report.holds
    assert report.worst_ratio <= 1.0
    assert len(report.points) == 81


def test_ar1_quadrature_matches_closed_form(ar1_chain, ar1_cert):
    """Test quadrature PV against the closed form."""
    states = np.array([[0.0], [3.0], [-12.0]])
    exact = check_drift(ar1_chain, ar1_cert, states, ExpectationMethod.EXACT)
    quadrature = check_drift(ar1_chain, ar1_cert, states, ExpectationMethod.QUADRATURE)

    for left, right in zip(exact.points, quadrature.points, strict=True):
        assert right.pv == pytest.approx(left.pv, rel=1e-7)


def test_ar1_montecarlo(ar1_chain, ar1_cert):
    """Test Monte Carlo PV estimates and their intervals."""
    states = np.array([[0.0], [10.0]])
    exact = check_drift(ar1_chain, ar1_cert, states)
    estimate = check_drift(ar1_chain, ar1_cert, states, ExpectationMethod.MONTECARLO, samples=20_000, seed=3)

    assert estimate.holds
    for left, right in zip(exact.points, estimate.points, strict=True):
        assert right.pv == pytest.approx(left.pv, rel=0.05)
        assert right.ci_low < right.pv < right.ci_high


def test_montecarlo_needs_samples(ar1_chain, ar1_cert):
    """Test the minimum Monte Carlo sample size."""
    with pytest.raises(HypothesisFailedError):
        check_drift(ar1_chain, ar1_cert, np.zeros((1, 1)), ExpectationMethod.MONTECARLO, samples=100)


def test_drift_violation_reported(ar1_chain):
    """Test that an over-optimistic rate is flagged."""
    cert = ar1_drift_certificate(0.5, 1.0, c=0.9, R0=2.0)
    report = check_drift(ar1_chain, cert, np.array([[15.0]]))

    assert not report.holds
    assert report.points[0].violated


def test_exact_method_unavailable(ar1_chain, three_state_chain, uniform_cert):
    """Test methods without a kernel or quadrature rule."""

    def W(x):
        return 1.0 + np.abs(np.asarray(x, dtype=float)[:, 0])

    cert = DriftCertificate(W=W, c=1.0, b=10.0, delta=1.0, R0=5.0)
    with pytest.raises(MethodUnavailableError):
        check_drift(ar1_chain, cert, np.zeros((1, 1)))
    with pytest.raises(MethodUnavailableError):
        check_drift(three_state_chain, uniform_cert, np.arange(3), ExpectationMethod.QUADRATURE)


def test_drift_lambda_and_rhs(ar1_cert):
    """Test λ from the infimum of W above R0 and the piecewise bound."""
    assert drift_lambda(ar1_cert) == pytest.approx(math.exp(-0.25 * 6.1))

    rhs = drift_rhs(ar1_cert, np.array([2.0, 10.0]))
    assert rhs[0] == pytest.approx(ar1_cert.b)
    assert rhs[1] == pytest.approx(math.exp(0.75 * 10.0))


def test_log_v_moment(uniform_cert):
    """Test log E_π[V^p] for W ≡ 1."""
    value = log_v_moment(uniform_cert, np.arange(3), np.full(3, 1.0 / 3.0), 2.0)
    assert value == pytest.approx(2.0)


def test_ergodicity_constants_bound(three_state_chain, uniform_cert):
    """Test ‖Pⁿ(z, ·) − π‖_V ≤ B_V ρⁿ V(z) directly."""
    constants = ergodicity_constants(three_state_chain, uniform_cert, horizon=30)
    P = three_state_chain.exact_kernel
    pi = np.full(3, 1.0 / 3.0)
    for n in range(1, 10):
        deviation = np.abs(np.linalg.matrix_power(P, n) - pi).sum(axis=1) * math.e
        assert np.all(deviation <= constants.B_V * constants.rho**n * math.e * (1.0 + 1e-9))
