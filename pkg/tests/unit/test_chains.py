"""Unit tests for Markov chain simulators and stationary laws."""

import math

import numpy as np
import pytest
from scipy.special import zeta

from lsalab.chains import (
    CallableTail,
    DiscreteTail,
    DistributionKind,
    PowerLawTail,
    StateKind,
    TailLaw,
    ar_stationary_covariance,
    finite_chain,
    forward_recurrence_chain,
    gaussian_ar_chain,
    kernel_period,
    load_kernel_csv,
    stationary_exact,
    stationary_forward_recurrence,
    stationary_sample,
    truncated_tail,
    window_chain,
)
from lsalab.common import (
    BadTailError,
    IllConditionedError,
    NotStochasticError,
    PeriodicError,
    RangeViolationError,
    ReducibleError,
    UnstableError,
)


def test_finite_chain_rejects_bad_kernel():
    """Test stochastic-matrix validation."""
    with pytest.raises(NotStochasticError):
        finite_chain([[0.5, 0.6], [0.5, 0.5]])
    with pytest.raises(NotStochasticError):
        finite_chain([[1.5, -0.5], [0.5, 0.5]])
    with pytest.raises(NotStochasticError):
        finite_chain(np.ones((2, 3)) / 3.0)


def test_finite_chain_transition_frequencies(three_state_chain, rng):
    """Test that one batched step samples the kernel row."""
    states = three_state_chain.initial(0, 200_000)
    nexts = three_state_chain.step(states, rng)
    frequencies = np.bincount(nexts, minlength=3) / nexts.size

    assert np.allclose(frequencies, [0.5, 0.25, 0.25], atol=0.01)


def test_simulate_shape_and_support(three_state_chain, rng):
    """Test path shape and state values."""
    path = three_state_chain.simulate(2, 50, rng)

    assert path.shape == (51,)
    assert path[0] == 2
    assert set(np.unique(path)) <= {0, 1, 2}
    assert three_state_chain.kind is StateKind.FINITE
    assert three_state_chain.num_states == 3


def test_load_kernel_csv(tmp_path):
    """Test loading a kernel file."""
    path = tmp_path / "kernel.csv"
    path.write_text("# two states\n0.9,0.1\n0.2,0.8\n", encoding="utf-8")

    model = load_kernel_csv(path)

    assert np.allclose(model.exact_kernel, [[0.9, 0.1], [0.2, 0.8]])
    assert "kernel.csv" in model.description


def test_stationary_exact_two_states():
    """Test π = (2/3, 1/3)."""
    pi = stationary_exact(finite_chain([[0.9, 0.1], [0.2, 0.8]]))

    assert pi.kind is DistributionKind.EXACT
    assert np.allclose(pi.weights, [2.0 / 3.0, 1.0 / 3.0])
    assert pi.residual < 1e-12


def test_stationary_exact_uniform(three_state_chain):
    """Test that a doubly stochastic kernel has a uniform law."""
    pi = stationary_exact(three_state_chain)
    assert np.allclose(pi.weights, np.full(3, 1.0 / 3.0))
    assert pi.expect(np.array([3.0, 0.0, 0.0])) == pytest.approx(1.0)


def test_periodic_and_reducible_kernels():
    """Test kernel structure checks."""
    flip = finite_chain([[0.0, 1.0], [1.0, 0.0]])
    assert kernel_period(flip.exact_kernel) == 2
    with pytest.raises(PeriodicError):
        stationary_exact(flip)
    with pytest.raises(ReducibleError):
        stationary_exact(finite_chain(np.eye(2)))


def test_stationary_exact_rejects_large_residual(mocker):
    """Test that an inaccurate solve raises with its residual."""
    chain = finite_chain([[0.9, 0.1], [0.2, 0.8]])
    mocker.patch("lsalab.chains.stationary.np.linalg.solve", return_value=np.array([0.9, 0.1]))

    with pytest.raises(IllConditionedError) as e:
        stationary_exact(chain)
    assert e.value.details["residual"] == pytest.approx(0.14)


def test_power_law_stationary_mass_at_one():
    """Test π(1) = ζ(3)/ζ(2) ≈ 0.73076 for P(Y = k) ∝ k⁻³."""
    tail = PowerLawTail(3.0)
    pi = stationary_forward_recurrence(tail, 10_000)

    assert pi.weights[0] == pytest.approx(0.730763, abs=1e-6)
    assert pi.weights[0] == pytest.approx(zeta(3.0) / zeta(2.0))
    assert pi.truncation_error < 1e-3
    assert tail.mean() == pytest.approx(zeta(2.0) / zeta(3.0))


def test_power_law_rejects_heavy_tail():
    """Test that an infinite mean is rejected."""
    with pytest.raises(BadTailError):
        PowerLawTail(2.0)


def test_discrete_tail_survival():
    """Test the survival function of a finite law."""
    tail = DiscreteTail([0.5, 0.3, 0.2])
    assert np.allclose(tail.survival(np.arange(1, 6)), [1.0, 0.5, 0.2, 0.0, 0.0])
    assert tail.mean() == pytest.approx(1.7)
    with pytest.raises(BadTailError):
        DiscreteTail([0.5, 0.3])


def test_tail_law_is_abstract():
    """Test that the base law cannot be instantiated and subclasses must define both methods."""
    with pytest.raises(TypeError):
        TailLaw()

    class SurvivalOnly(TailLaw):
        def survival(self, k):
            return np.ones_like(k, dtype=float)

    with pytest.raises(TypeError):
        SurvivalOnly()

    tail = CallableTail(lambda k: np.where(k <= 1, 1.0, 0.0), mean=1.0)
    assert isinstance(tail, TailLaw)
    assert tail.mean() == 1.0


def test_truncated_tail_renormalizes():
    """Test truncation mass and the renormalized pmf."""
    survival, pmf, mass = truncated_tail(DiscreteTail([0.5, 0.3, 0.2]), 2)

    assert mass == pytest.approx(0.2)
    assert np.allclose(pmf, [0.625, 0.375])
    assert survival[0] == 1.0


def test_forward_recurrence_series_matches_kernel():
    """Test the series law against the exact kernel for a finite tail."""
    tail = DiscreteTail([0.5, 0.3, 0.2])
    model = forward_recurrence_chain(tail, 3)

    series = stationary_forward_recurrence(tail, 3)
    exact = stationary_exact(model)

    assert np.allclose(series.weights, np.array([1.0, 0.5, 0.2]) / 1.7)
    assert np.allclose(exact.weights, series.weights)
    assert np.array_equal(exact.states, [1, 2, 3])


def test_forward_recurrence_counts_down(rng):
    """Test deterministic decrements above one and fresh draws at one."""
    model = forward_recurrence_chain(DiscreteTail([0.5, 0.3, 0.2]), 3)
    states = np.array([3, 2, 1, 1, 1, 1])
    nexts = model.step(states, rng)

    assert nexts[0] == 2
    assert nexts[1] == 1
    assert np.all((nexts[2:] >= 1) & (nexts[2:] <= 3))
    assert model.kind is StateKind.INTEGER


def test_forward_recurrence_without_dense_kernel():
    """Test that large supports skip the dense kernel."""
    model = forward_recurrence_chain(PowerLawTail(3.0), 10_000)
    assert not model.has_kernel
    assert model.truncation_mass > 0.0


def test_gaussian_ar_stationary_variance(rng):
    """Test Σ = 1/(1 − ρ²) for the scalar chain."""
    model = gaussian_ar_chain(0.5, 1.0)
    assert ar_stationary_covariance(0.5, 1.0)[0, 0] == pytest.approx(4.0 / 3.0)

    states = model.initial(0.0, 100_000)
    for _ in range(40):
        states = model.step(states, rng)

    assert states.shape == (100_000, 1)
    assert np.var(states) == pytest.approx(4.0 / 3.0, rel=0.03)


def test_gaussian_ar_quadrature_moments():
    """Test E[X'|x] and E[X'²|x] by quadrature."""
    model = gaussian_ar_chain(0.5, 1.0)

    def identity(x):
        return x

    def square(x):
        return x**2

    assert model.integrate(np.array([2.0]), identity) == pytest.approx(1.0, rel=1e-8)
    assert model.integrate(np.array([2.0]), square) == pytest.approx(2.0, rel=1e-8)


def test_gaussian_ar_rejects_unstable():
    """Test spectral radius validation."""
    with pytest.raises(UnstableError):
        gaussian_ar_chain(1.0, 1.0)


def test_window_chain_kernel_and_shift(rng):
    """Test admissible windows, their kernel and the shift structure."""
    base = finite_chain([[0.5, 0.5], [0.5, 0.5]])
    windows = window_chain(base, 1)

    assert windows.state_shape == (2,)
    assert windows.num_states == 4
    assert np.allclose(windows.exact_kernel.sum(axis=1), 1.0)
    assert np.allclose(stationary_exact(windows).weights, 0.25)

    path = windows.simulate(np.array([0, 1]), 30, rng)
    assert np.array_equal(path[1:, 0], path[:-1, 1])


def test_window_chain_skips_impossible_windows():
    """Test that zero-probability windows are excluded."""
    base = finite_chain([[0.0, 1.0], [0.5, 0.5]])
    windows = window_chain(base, 1)

    support = {tuple(row) for row in windows.enumerate_states().tolist()}
    assert support == {(0, 1), (1, 0), (1, 1)}
    with pytest.raises(RangeViolationError):
        windows.index_of(np.array([[0, 0]]))


def test_window_chain_needs_positive_length(three_state_chain):
    """Test τ ≥ 1."""
    with pytest.raises(RangeViolationError):
        window_chain(three_state_chain, 0)


def test_stationary_sample(three_state_chain, rng):
    """Test long-run occupation frequencies."""
    sample = stationary_sample(three_state_chain, 0, samples=30_000, burn_in=100, rng=rng)

    assert sample.kind is DistributionKind.SAMPLE
    frequencies = np.bincount(sample.states, minlength=3) / 30_000
    assert np.allclose(frequencies, 1.0 / 3.0, atol=0.02)
    assert math.isclose(float(sample.weights.sum()), 1.0)
