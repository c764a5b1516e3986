"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from lsalab.chains import finite_chain, uniform_certificate
from lsalab.schedules import StepSchedule


@pytest.fixture
def three_state_kernel():
    """Doubly stochastic kernel with uniform stationary law."""
    return np.array(
        [
            [0.50, 0.25, 0.25],
            [0.25, 0.50, 0.25],
            [0.25, 0.25, 0.50],
        ]
    )


@pytest.fixture
def three_state_chain(three_state_kernel):
    """Uniformly ergodic chain on {0, 1, 2}."""
    return finite_chain(three_state_kernel)


@pytest.fixture
def scalar_tables():
    """Per-state scalar Ā with Hurwitz mean 0.5 and a matching b̄."""
    return np.array([2.0, -1.0, 0.5]), np.array([1.0, 0.5, -0.25])


@pytest.fixture
def scalar_maps(scalar_tables):
    """Batched Ā and b̄ lookups over the three-state chain."""
    A_values, b_values = scalar_tables

    def Abar(states):
        return A_values[np.asarray(states).astype(np.int64)][:, None, None]

    def bbar(states):
        return b_values[np.asarray(states).astype(np.int64)][:, None]

    return Abar, bbar


@pytest.fixture
def hurwitz_matrix():
    """2×2 matrix whose negative is Hurwitz and which is not symmetric."""
    return np.array([[1.0, 0.5], [-0.3, 2.0]])


@pytest.fixture
def constant_schedule():
    """α_k = 0.02."""
    return StepSchedule.constant(0.02)


@pytest.fixture
def polynomial_schedule():
    """α_k = 1/(k + 10)^0.75 starting at k = 1."""
    return StepSchedule.polynomial(C=1.0, n0=10.0, t=0.75)


@pytest.fixture
def uniform_cert(three_state_chain):
    """W ≡ 1 certificate with ergodicity constants."""
    return uniform_certificate(three_state_chain, c=1.0, R0=1.0)


@pytest.fixture
def rng():
    """Seeded generator for test data."""
    return np.random.default_rng(12345)
