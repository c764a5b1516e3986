"""Unit tests for TD(λ) as LSA on the window chain."""

import numpy as np
import pytest

from lsalab.chains import uniform_certificate
from lsalab.common import (
    BoundViolatedError,
    DimMismatchError,
    HypothesisFailedError,
    NotPositiveDefiniteError,
    WindowLengthMismatchError,
)
from lsalab.constants import DriftScalars, td_constants
from lsalab.lsa import run_lsa
from lsalab.schedules import StepSchedule
from lsalab.td import (
    FeatureMap,
    TdConfig,
    build_td_model,
    eligibility,
    feature_covariance,
    finite_mrp,
    load_finite_mrp,
    mrp_value_function,
    positivity_factor,
    td_drift_certificate,
    td_matrix_exact,
    td_update_loop,
    verify_hurwitz_td,
)


@pytest.fixture
def coin_mrp():
    """Two states with P = 1/2 everywhere, ψ = (1, 2), γ = 0.9."""
    return finite_mrp([[0.5, 0.5], [0.5, 0.5]], [1.0, 0.0], [[1.0], [2.0]], 0.9)


@pytest.fixture
def planar_mrp(three_state_kernel):
    """Three states with two-dimensional features."""
    return finite_mrp(three_state_kernel, [1.0, -0.5, 0.25], [[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]], 0.8)


def test_eligibility_trace():
    """Test φ_τ = Σ (λγ)^s ψ(x_{τ−1−s}) for identity features."""
    features = FeatureMap(psi=lambda x: np.asarray(x, dtype=float).reshape(-1, 1), dim=1)
    cfg = TdConfig(lambda_trace=0.625, tau=3)

    assert eligibility([1, 2, 4], features, cfg, gamma=0.8)[0] == pytest.approx(5.25)
    with pytest.raises(WindowLengthMismatchError):
        eligibility([1, 2], features, cfg, gamma=0.8)


def test_td_matrix_two_states(coin_mrp):
    """Test A = 0.475 and the bound 0.25 for τ = 1, λ = 0."""
    mrp, features = coin_mrp
    cfg = TdConfig(lambda_trace=0.0, tau=1)

    A, b = td_matrix_exact(mrp, features, cfg)
    Sigma = feature_covariance(mrp, features)
    report = verify_hurwitz_td(A, Sigma, mrp.gamma, cfg)

    assert A[0, 0] == pytest.approx(0.475)
    assert b[0] == pytest.approx(0.5)
    assert Sigma[0, 0] == pytest.approx(2.5)
    assert report.positivity_factor == pytest.approx(0.1)
    assert report.bound == pytest.approx(0.25)
    assert report.margin == pytest.approx(0.225)
    assert report.spectral_abscissa == pytest.approx(-0.475)


def test_window_model_matches_exact_matrix(planar_mrp):
    """Test exact averaging over windows against the base-kernel power series."""
    mrp, features = planar_mrp
    for cfg in (TdConfig(lambda_trace=0.0, tau=1), TdConfig(lambda_trace=0.5, tau=3)):
        model = build_td_model(mrp, features, cfg)
        A, b = td_matrix_exact(mrp, features, cfg)

        assert np.allclose(model.A, A, atol=1e-12)
        assert np.allclose(model.b, b, atol=1e-12)


def test_positivity_factor():
    """Test ((1−γ)/(1−λγ))(1 − (λγ)^τ)."""
    cfg = TdConfig(lambda_trace=0.5, tau=4)
    assert positivity_factor(0.8, cfg) == pytest.approx(0.2 / 0.6 * (1.0 - 0.4**4))
    assert positivity_factor(0.9, TdConfig()) == pytest.approx(0.1)


def test_verify_hurwitz_rejects():
    """Test indefinite covariances and violated bounds."""
    cfg = TdConfig()
    with pytest.raises(NotPositiveDefiniteError):
        verify_hurwitz_td(np.eye(2), np.diag([1.0, 0.0]), 0.9, cfg)
    with pytest.raises(NotPositiveDefiniteError):
        verify_hurwitz_td(np.eye(2), np.array([[1.0, 0.5], [0.0, 1.0]]), 0.9, cfg)
    with pytest.raises(BoundViolatedError):
        verify_hurwitz_td(np.array([[0.05]]), np.array([[1.0]]), 0.9, cfg)
    with pytest.raises(DimMismatchError):
        verify_hurwitz_td(np.eye(2), np.eye(3), 0.9, cfg)


def test_td_update_loop_matches_run_lsa(planar_mrp):
    """Test the hand-written TD loop against the generic LSA engine."""
    mrp, features = planar_mrp
    cfg = TdConfig(lambda_trace=0.5, tau=2)
    model = build_td_model(mrp, features, cfg)
    schedule = StepSchedule.constant(0.05)
    z0 = np.array([0, 1, 2])

    loop = td_update_loop(mrp, features, cfg, schedule, np.zeros(2), z0, 200, seed=13)
    engine = run_lsa(model, schedule, np.zeros(2), z0, 200, seed=13)

    assert loop.shape == (201, 2)
    assert np.allclose(loop, engine, rtol=1e-12, atol=1e-14)


def test_value_function(coin_mrp):
    """Test V* = (I − γQ)⁻¹R."""
    mrp, _ = coin_mrp
    value = mrp_value_function(mrp)

    assert value[0] - value[1] == pytest.approx(1.0)
    assert value.mean() == pytest.approx(0.5 / 0.1)


def test_finite_mrp_validates_tables():
    """Test that reward and feature tables must match the kernel."""
    with pytest.raises(DimMismatchError):
        finite_mrp([[0.5, 0.5], [0.5, 0.5]], [1.0], [[1.0], [2.0]], 0.9)


def test_load_finite_mrp(tmp_path):
    """Test loading the kernel and features from CSV with inline rewards."""
    kernel = tmp_path / "kernel.csv"
    kernel.write_text("0.5,0.5\n0.5,0.5\n", encoding="utf-8")
    psi = tmp_path / "features.csv"
    psi.write_text("1.0\n2.0\n", encoding="utf-8")

    mrp, features = load_finite_mrp(kernel, [1.0, 0.0], psi, 0.9)

    assert features.dim == 1
    assert features.C_psi == pytest.approx(2.0)
    A, _ = td_matrix_exact(mrp, features, TdConfig())
    assert A[0, 0] == pytest.approx(0.475)

    with pytest.raises(DimMismatchError):
        load_finite_mrp(kernel, [1.0, 0.0, 2.0], psi, 0.9)


def test_window_drift_certificate(three_state_chain):
    """Test the window certificate built from the TD drift constants."""
    base = uniform_certificate(three_state_chain, c=0.5, R0=1.0)
    constants = td_constants(
        DriftScalars.from_certificate(base, np.arange(3)),
        tau=1, gamma=0.9, lambda_trace=0.0, C_psi=1.0, C_RK=1.0, beta=1.0, K=4,
    )

    cert = td_drift_certificate(base, 1, constants)

    assert cert.c == constants.cP
    assert cert.b == constants.bP
    assert cert.R0 == constants.RP
    windows = np.array([[0, 1], [2, 2]])
    assert np.allclose(cert.W(windows), constants.c0 + 1.0)
    entry = cert.small_set.entries[0]
    assert entry.m == 2
    assert entry.eps == pytest.approx(0.75**2)


def test_window_certificate_needs_one_small_sets(three_state_chain):
    """Test that base small sets with m > 1 are rejected."""
    base = uniform_certificate(three_state_chain, c=0.5, R0=1.0)
    multi = base.model_copy(
        update={"small_set": base.small_set.model_copy(
            update={"entries": [entry.model_copy(update={"m": 2}) for entry in base.small_set.entries]}
        )}
    )
    constants = td_constants(
        DriftScalars.from_certificate(base, np.arange(3)),
        tau=1, gamma=0.9, lambda_trace=0.0, C_psi=1.0, C_RK=1.0, beta=1.0, K=4,
    )

    with pytest.raises(HypothesisFailedError):
        td_drift_certificate(multi, 1, constants)
