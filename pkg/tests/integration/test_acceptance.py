"""Desk-scale acceptance experiments run through the config layer."""

import json
from pathlib import Path

import numpy as np
import pytest

from lsalab.config import load_config
from lsalab.experiments import run_experiment
from lsalab.td import TdConfig, feature_covariance, finite_mrp, td_matrix_exact, verify_hurwitz_td

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"

pytestmark = pytest.mark.integration


def _run(name, tmp_path, *overrides):
    config = load_config(CONFIG_DIR / name, [f"output={json.dumps(str(tmp_path))}", *overrides])
    return run_experiment(config)


@pytest.mark.slow
def test_stability_decay_and_envelope(tmp_path):
    """Test the Γ moment decay rate, the enumeration pre-check and the envelope."""
    result = _run("finite_collapse.toml", tmp_path, 'experiment="stability"', "stability.envelope=true")

    assert float(result.summary["slope[gamma p=2]"]) <= -0.5 / 8.0
    assert float(result.summary["r2[gamma p=2]"]) >= 0.95
    assert "enumeration check" in result.summary
    assert "envelope" in result.summary
    assert (tmp_path / "moments.csv").exists()


def test_constants_collapse(tmp_path):
    """Test dual evaluation and stationary moments at the finite-chain collapse."""
    result = _run("finite_collapse.toml", tmp_path)

    assert float(result.summary["max dual gap"]) <= 1e-12
    assert result.summary["stationary moments"] == "within their drift bounds"
    assert (tmp_path / "constants.txt").read_text(encoding="utf-8").startswith("# config_hash=")


def test_counterexample_growth(tmp_path):
    """Test growth by a factor 10 within 200 steps on the k⁻³ tail."""
    result = _run("counterexample.toml", tmp_path)

    assert result.summary["first n with u_n/u_0 >= 10"] != "none"
    assert float(result.summary["pi(1)"]) == pytest.approx(0.73076, abs=1e-5)


@pytest.mark.slow
def test_td_rates(tmp_path):
    """Test the √α rate of θ̃ and J0 and the α rate of H0."""
    result = _run("td.toml", tmp_path)

    for component in ("thetaTilde", "J0"):
        assert -0.65 <= float(result.summary[f"slope[{component} p=2]"]) <= -0.35
    assert float(result.summary["slope[H0 p=2]"]) <= -0.8
    assert float(result.summary["H0/J0 at n=16384"]) <= 0.2
    assert result.summary["adapter check"].startswith("identical")


@pytest.mark.slow
def test_decomposition_identities(tmp_path):
    """Test recursions against closed forms on many trajectories."""
    result = _run(
        "finite_collapse.toml", tmp_path,
        'experiment="lsa"', "lsa.trajectories=100", "lsa.n=512", "n_grid=[]",
    )

    assert float(result.summary["max identity gap"]) <= 1e-8
    assert len(list(tmp_path.glob("trajectory_*.csv"))) == 100


@pytest.mark.slow
def test_drift_certificates(tmp_path):
    """Test the AR(1) certificate on its grid and the window certificates."""
    result = _run("drift_ar1.toml", tmp_path)

    assert float(result.summary["worst PV/rhs [drift.csv]"]) <= 1.0
    for tau in (1, 2):
        assert (tmp_path / f"drift_window_tau{tau}.csv").exists()


def test_schedule_conditions_and_sums(tmp_path):
    """Test the step-size conditions and weighted-sum bounds for C/(k + n0)^t."""
    result = _run("schedules.toml", tmp_path)

    assert result.summary["A5 c_alpha"] == "True"
    assert result.summary["weighted sum part 1"] != "False"


def test_td_hurwitz_bound_random_mrps():
    """Test the quadratic-form lower bound on random finite MRPs."""
    rng = np.random.default_rng(2024)
    for _ in range(10):
        S = int(rng.integers(3, 7))
        d = int(rng.integers(1, S + 1))
        P = rng.random((S, S)) + 0.05
        P /= P.sum(axis=1, keepdims=True)
        features = rng.normal(size=(S, d))
        gamma = float(rng.uniform(0.5, 0.99))
        cfg = TdConfig(lambda_trace=float(rng.uniform(0.0, 0.9)), tau=int(rng.integers(1, 5)))

        mrp, psi = finite_mrp(P, rng.normal(size=S), features, gamma)
        A, _ = td_matrix_exact(mrp, psi, cfg)
        report = verify_hurwitz_td(A, feature_covariance(mrp, psi), gamma, cfg)

        assert report.margin >= -1e-10
