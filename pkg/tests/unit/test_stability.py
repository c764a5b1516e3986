"""Unit tests for product and LSA moment estimators, envelopes and decay fits."""

import math

import numpy as np
import pytest

from lsalab.chains import gaussian_ar_chain
from lsalab.common import (
    Abscissa,
    DegenerateWindowError,
    HypothesisFailedError,
    MethodUnavailableError,
    RangeViolationError,
    StepAboveCapError,
)
from lsalab.constants import ConstantsInputs, ConstantsReport, DriftScalars, MatrixScalars
from lsalab.linalg import solve_lyapunov
from lsalab.lsa import build_model
from lsalab.schedules import StepSchedule
from lsalab.stability import (
    MOMENT_COLUMNS,
    MomentComponent,
    MomentPoint,
    MomentSeries,
    enumerate_gamma_moment,
    estimate_gamma_moment,
    estimate_gamma_moments,
    estimate_lsa_moment,
    fit_decay,
    h0_envelope,
    lsa_envelope,
    theory_envelope,
)


@pytest.fixture
def report_inputs(uniform_cert):
    """Inputs with a = 0.5, p = 2 and K = 64."""
    A = np.array([[0.5]])
    return ConstantsInputs(
        drift=DriftScalars.from_certificate(uniform_cert, np.arange(3)),
        matrix=MatrixScalars.from_lyapunov(A, solve_lyapunov(A)),
        beta=0.5,
        epsilon=0.5,
        C_A=4.0,
        C_bK=1.0 / math.e,
        K=64,
        p=2.0,
        theta_star_norm=0.5,
        norm_b=0.25,
    )


@pytest.fixture
def report(report_inputs):
    """Hand-filled report with round constants."""
    return ConstantsReport(
        inputs=report_inputs,
        values={
            "CstP": 2.0,
            "log_alphaInfP": math.log(0.1),
            "Cst2P": 3.0,
            "log_alphaInf2P": math.log(0.05),
            "ConstJ0": 1.0,
            "ConstH0": 0.5,
            "Cf": 1.5,
            "Cd": 2.5,
        },
    )


def _series(values, sum_alpha):
    points = [
        MomentPoint(n=n, sum_alpha=s, estimate=v, ci_low=v, ci_high=v)
        for n, (v, s) in enumerate(zip(values, sum_alpha, strict=True))
    ]
    return MomentSeries(p=2.0, points=points, replicas=100, seed=0)


def test_gamma_moment_deterministic_product(three_state_chain):
    """Test that a state-independent Ā gives (1 − αA)ⁿ with a zero-width interval."""

    def Abar(states):
        return np.full((np.shape(states)[0], 1, 1), 0.5)

    series = estimate_gamma_moment(
        three_state_chain, Abar, StepSchedule.constant(0.02), 0, 2.0, [0, 10, 100], replicas=200, seed=1, batches=10
    )

    for point in series.points:
        assert point.estimate == pytest.approx(0.99**point.n, rel=1e-10)
        assert point.ci_high - point.ci_low == pytest.approx(0.0, abs=1e-12)
    assert series.points[-1].sum_alpha == pytest.approx(2.0)


def test_enumerate_gamma_moment_one_step(three_state_chain, scalar_maps):
    """Test E_0|1 − αĀ(Z₁)|² over the first kernel row."""
    Abar, _ = scalar_maps
    schedule = StepSchedule.constant(0.1)

    assert enumerate_gamma_moment(three_state_chain, Abar, schedule, 0, 2.0, 0) == pytest.approx(1.0)
    value = enumerate_gamma_moment(three_state_chain, Abar, schedule, 0, 2.0, 1)
    assert value == pytest.approx(0.5 * 0.8**2 + 0.25 * 1.1**2 + 0.25 * 0.95**2)


def test_gamma_moment_matches_enumeration(three_state_chain, scalar_maps):
    """Test the Monte Carlo estimate against exact path enumeration."""
    Abar, _ = scalar_maps
    schedule = StepSchedule.constant(0.1)
    exact = enumerate_gamma_moment(three_state_chain, Abar, schedule, 0, 2.0, 6)

    series = estimate_gamma_moment(three_state_chain, Abar, schedule, 0, 2.0, [6], replicas=20_000, seed=2)

    assert series.points[0].estimate ** 2 == pytest.approx(exact, rel=0.03)


def test_enumeration_needs_kernel():
    """Test that continuous chains cannot be enumerated."""

    def Abar(states):
        return np.ones((np.shape(states)[0], 1, 1))

    with pytest.raises(MethodUnavailableError):
        enumerate_gamma_moment(gaussian_ar_chain(0.5, 1.0), Abar, StepSchedule.constant(0.1), 0.0, 2.0, 3)


def test_gamma_moments_monotone_in_order(three_state_chain, scalar_maps, constant_schedule):
    """Test ‖·‖_{L2} ≤ ‖·‖_{L4} on shared paths."""
    Abar, _ = scalar_maps
    low, high = estimate_gamma_moments(
        three_state_chain, Abar, constant_schedule, 0, [2.0, 4.0], [0, 50, 200], replicas=1000, seed=3, batches=10
    )

    assert low.p == 2.0
    assert high.p == 4.0
    for a, b in zip(low.points, high.points, strict=True):
        assert a.estimate <= b.estimate * (1.0 + 1e-12)


def test_gamma_moments_independent_of_workers(three_state_chain, scalar_maps, constant_schedule):
    """Test that the thread count does not change the result."""
    Abar, _ = scalar_maps
    serial = estimate_gamma_moment(
        three_state_chain, Abar, constant_schedule, 0, 2.0, [20, 40], replicas=400, seed=4, batches=8, workers=1
    )
    pooled = estimate_gamma_moment(
        three_state_chain, Abar, constant_schedule, 0, 2.0, [20, 40], replicas=400, seed=4, batches=8, workers=4
    )

    assert serial.estimates() == pooled.estimates()


def test_estimators_validate_arguments(three_state_chain, scalar_maps, constant_schedule):
    """Test the replica floor and p ≥ 1."""
    Abar, _ = scalar_maps
    with pytest.raises(RangeViolationError):
        estimate_gamma_moment(three_state_chain, Abar, constant_schedule, 0, 2.0, [10], replicas=50, seed=0)
    with pytest.raises(RangeViolationError):
        estimate_gamma_moment(three_state_chain, Abar, constant_schedule, 0, 0.5, [10], replicas=200, seed=0)


def test_lsa_moments_components(three_state_chain, scalar_maps, constant_schedule):
    """Test component series, the start point and the Minkowski bound."""
    Abar, bbar = scalar_maps
    model = build_model(three_state_chain, Abar, bbar)
    result = estimate_lsa_moment(
        model, constant_schedule, np.array([1.0]), 0, [2.0], [0, 20, 60], replicas=500, seed=6, batches=10
    )

    assert set(result) == {
        MomentComponent.THETA_TILDE,
        MomentComponent.J0,
        MomentComponent.H0,
        MomentComponent.J1,
        MomentComponent.H1,
    }
    tilde = result[MomentComponent.THETA_TILDE][0]
    J0 = result[MomentComponent.J0][0]
    H0 = result[MomentComponent.H0][0]
    J1 = result[MomentComponent.J1][0]
    H1 = result[MomentComponent.H1][0]
    assert tilde.points[0].estimate == pytest.approx(1.0 / 6.0)
    assert J0.points[0].estimate == 0.0

    for h0, j1, h1 in zip(H0.points, J1.points, H1.points, strict=True):
        assert h0.estimate <= j1.estimate + h1.estimate + 1e-9
    rows = tilde.csv_rows("lsa")
    assert len(rows) == 3
    assert len(rows[0]) == len(MOMENT_COLUMNS)


def test_lsa_moments_random_start(three_state_chain, scalar_maps, constant_schedule):
    """Test a sampled θ₀."""
    Abar, bbar = scalar_maps
    model = build_model(three_state_chain, Abar, bbar)

    def theta0(rng, size):
        return rng.normal(size=(size, 1))

    result = estimate_lsa_moment(model, constant_schedule, theta0, 0, [2.0], [0, 10], replicas=400, seed=9)

    start = result[MomentComponent.THETA_TILDE][0].points[0]
    assert start.estimate > 0.0
    assert start.ci_low <= start.estimate <= start.ci_high


def test_theory_envelope(report, constant_schedule):
    """Test C_st e^{−(a/4)Σα} V^{1/(2p)} at both suffixes."""
    curve = theory_envelope(report, constant_schedule, 4.0, 2.0, [0, 100])

    assert curve.n == [0, 100]
    assert curve.values[0] == pytest.approx(2.0 * math.sqrt(2.0))
    assert curve.values[1] == pytest.approx(2.0 * math.exp(-0.125 * 2.0) * math.sqrt(2.0))

    doubled = theory_envelope(report, constant_schedule, 4.0, 4.0, [0])
    assert doubled.values[0] == pytest.approx(3.0 * 4.0**0.125)


def test_theory_envelope_checks(report, constant_schedule):
    """Test the step cap, the order and missing constants."""
    large = StepSchedule.constant(0.2)
    with pytest.raises(StepAboveCapError):
        theory_envelope(report, large, 1.0, 2.0, [10])
    assert len(theory_envelope(report, large, 1.0, 2.0, [10], enforce_cap=False).values) == 1

    with pytest.raises(RangeViolationError):
        theory_envelope(report, constant_schedule, 1.0, 3.0, [10])

    sparse = report.model_copy(update={"values": {"lam": 0.5}})
    with pytest.raises(HypothesisFailedError):
        theory_envelope(sparse, constant_schedule, 1.0, 2.0, [10])


def test_lsa_envelope(report, constant_schedule):
    """Test transient plus fluctuation terms with p and K from the report."""
    V = 2.0
    curve = lsa_envelope(report, constant_schedule, V, [0, 50], M0=3.0)

    for n, value in zip(curve.n, curve.values, strict=True):
        transient = 3.0 * 3.0 * math.exp(-0.125 * 0.02 * n) * V**0.125
        fluctuation = 1.5 * math.sqrt(0.02) * V ** (2.0 / 64.0 + 0.125)
        assert value == pytest.approx(transient + fluctuation)


def test_h0_envelope_constant(report, constant_schedule):
    """Test C_f α√log(1/α) for constant steps."""
    curve = h0_envelope(report, constant_schedule, 1.0, [10, 20])

    expected = 1.5 * 0.02 * math.sqrt(math.log(50.0))
    assert curve.values == pytest.approx([expected, expected])


def test_h0_envelope_decreasing(report, polynomial_schedule):
    """Test that the decreasing envelope shrinks along the grid."""
    curve = h0_envelope(report, polynomial_schedule, 1.0, [10, 100, 1000])

    assert all(value > 0.0 for value in curve.values)
    assert curve.values[0] > curve.values[-1]


def test_h0_envelope_needs_small_steps(report):
    """Test step sizes in (0, 1)."""
    with pytest.raises(RangeViolationError):
        h0_envelope(report, StepSchedule.polynomial(C=2.0, n0=0.0, t=0.5), 1.0, [1, 4])


def test_fit_decay_exact_line():
    """Test slope recovery on an exponential profile."""
    sums = [0.5 * n for n in range(8)]
    series = _series([math.exp(1.0 - 0.3 * s) for s in sums], sums)

    fit = fit_decay(series)

    assert fit.slope == pytest.approx(-0.3)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.points_used == 8
    assert fit.excluded == []


def test_fit_decay_excludes_points():
    """Test exclusion of zero estimates, n = 0 on log n, and the window."""
    sums = [0.5 * n for n in range(8)]
    values = [math.exp(-0.3 * s) for s in sums]
    values[3] = 0.0
    series = _series(values, sums)

    fit = fit_decay(series, Abscissa.LOG_N, window=(0, 7))

    assert fit.excluded == [0, 3]
    assert fit.points_used == 6
    assert fit.abscissa is Abscissa.LOG_N


def test_fit_decay_degenerate_window():
    """Test that fewer than four usable points raise."""
    sums = [0.5 * n for n in range(8)]
    series = _series([math.exp(-s) for s in sums], sums)

    with pytest.raises(DegenerateWindowError):
        fit_decay(series, window=(5, 7))
