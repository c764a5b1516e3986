"""Unit tests for TOML experiment configs and dotted overrides."""

from pathlib import Path

import numpy as np
import pytest

from lsalab.common import ConfigError, config_hash
from lsalab.config import (
    Ar1ModelSpec,
    CertificateSpec,
    CounterexampleSpec,
    ExperimentKind,
    FiniteModelSpec,
    apply_overrides,
    load_config,
    parse_literal,
    validate_config,
)

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"


@pytest.fixture
def counterexample_data():
    """Minimal counterexample config mapping."""
    return {"experiment": "counterexample", "counterexample": {"K": 100, "n_max": 10}}


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_configs_validate(path):
    """Test that every shipped config loads."""
    config = load_config(path)
    assert isinstance(config.experiment, ExperimentKind)


def test_parse_literal():
    """Test TOML literals with a string fallback."""
    assert parse_literal("0.5") == 0.5
    assert parse_literal("[1, 2]") == [1, 2]
    assert parse_literal('"ar1"') == "ar1"
    assert parse_literal("ar1") == "ar1"
    assert parse_literal("true") is True


def test_apply_overrides_creates_tables():
    """Test dotted paths into new and existing tables."""
    data = {"schedule": {"kind": "constant", "alpha": 0.1}}
    apply_overrides(data, ["schedule.alpha=0.01", "model.kind=ar1", "seed = 3"])

    assert data["schedule"]["alpha"] == 0.01
    assert data["model"] == {"kind": "ar1"}
    assert data["seed"] == 3


def test_apply_overrides_rejects_malformed():
    """Test missing '=' and descent into a leaf."""
    with pytest.raises(ConfigError):
        apply_overrides({}, ["seed"])
    with pytest.raises(ConfigError) as e:
        apply_overrides({"seed": 1}, ["seed.value=2"])
    assert e.value.details["key"] == "seed.value"


def test_validate_config_defaults(counterexample_data):
    """Test defaults of the counterexample table."""
    config = validate_config(counterexample_data)

    assert config.experiment is ExperimentKind.COUNTEREXAMPLE
    assert config.counterexample.epsilon == 0.36
    assert config.counterexample.tail().mean() > 1.0
    assert config.batches == 50


def test_validate_config_missing_section():
    """Test that required tables are named."""
    with pytest.raises(ConfigError) as e:
        validate_config({"experiment": "counterexample"})
    assert e.value.details["key"] == "counterexample"


def test_validate_config_names_bad_key():
    """Test the dotted key in validation errors."""
    with pytest.raises(ConfigError) as e:
        validate_config({"experiment": "schedule-check", "schedule": {"kind": "constant", "alpha": -1.0}})
    assert e.value.details["key"] == "schedule.alpha"

    with pytest.raises(ConfigError) as e:
        validate_config({"experiment": "stability", "model": {"kind": "finite", "kernel": [[1.0]]}})
    assert e.value.details["key"] == "model.Abar"
    assert "Missing" in e.value.message

    with pytest.raises(ConfigError):
        validate_config({"experiment": "counterexample", "counterexample": {}, "extra": 1})


def test_validate_config_builds_tables():
    """Test that inconsistent schedule, kernel and tail tables fail validation."""
    with pytest.raises(ConfigError) as e:
        validate_config(
            {
                "experiment": "schedule-check",
                "schedule": {"kind": "polynomial", "t": 1.0},
                "schedule_check": {"a": 1.0},
            }
        )
    assert e.value.details["key"] == "schedule"

    with pytest.raises(ConfigError) as e:
        validate_config(
            {
                "experiment": "stability",
                "model": {"kind": "finite", "kernel": [[0.5, 0.4], [0.5, 0.5]], "Abar": [1.0, 1.0]},
                "schedule": {"kind": "constant", "alpha": 0.1},
                "n_grid": [10],
            }
        )
    assert e.value.details["key"] == "model"

    with pytest.raises(ConfigError) as e:
        validate_config({"experiment": "counterexample", "counterexample": {"weights": [0.5, 0.4], "K": 2}})
    assert e.value.details["key"] == "counterexample"

    with pytest.raises(ConfigError) as e:
        validate_config(
            {
                "experiment": "td",
                "td": {"kernel": [[1.0]], "reward": [1.0, 0.0], "features": [[1.0]], "gamma": 0.9},
                "schedule": {"kind": "constant", "alpha": 0.1},
                "n_grid": [10],
            }
        )
    assert e.value.details["key"] == "td"


def test_config_hash_ignores_output_and_workers(counterexample_data, tmp_path):
    """Test that the hash covers content only."""
    first = validate_config({**counterexample_data, "output": str(tmp_path / "a"), "workers": 1})
    second = validate_config({**counterexample_data, "output": str(tmp_path / "b"), "workers": 8})
    third = validate_config({**counterexample_data, "seed": 1})

    assert config_hash(first.payload()) == config_hash(second.payload())
    assert config_hash(first.payload()) != config_hash(third.payload())


def test_finite_model_tables(three_state_kernel):
    """Test per-state tables and the zero b̄ default."""
    spec = FiniteModelSpec(kernel=three_state_kernel.tolist(), Abar=[2.0, -1.0, 0.5])
    parts = spec.build()
    A, b = spec.tables()

    assert parts.dim == 1
    assert A.shape == (3, 1, 1)
    assert np.allclose(A[:, 0, 0], [2.0, -1.0, 0.5])
    assert np.allclose(b, 0.0)


def test_finite_model_rejects_inconsistent_tables(three_state_kernel):
    """Test kernel sources and table shapes."""
    with pytest.raises(ConfigError):
        FiniteModelSpec(Abar=[1.0]).build()
    with pytest.raises(ConfigError):
        FiniteModelSpec(kernel=three_state_kernel.tolist(), Abar=[1.0, 2.0]).build()
    with pytest.raises(ConfigError):
        FiniteModelSpec(kernel=three_state_kernel.tolist(), Abar=[1.0, 2.0, 3.0], bbar=[[1.0, 2.0]] * 3).build()


def test_ar1_model_affine_maps():
    """Test Ā(x) = A0 + xA1 and b̄(x) = b0 + xb1."""
    parts = Ar1ModelSpec(rho=0.5, noise_cov=1.0, A0=1.0, A1=0.5, b0=2.0, b1=-1.0).build()
    states = np.array([[0.0], [2.0]])

    assert np.allclose(parts.Abar(states)[:, 0, 0], [1.0, 2.0])
    assert np.allclose(parts.bbar(states)[:, 0], [2.0, 0.0])


def test_tail_spec_needs_one_law():
    """Test exponent and weights are exclusive, with weights replacing the default exponent."""
    spec = CounterexampleSpec(weights=[0.5, 0.5], K=2)
    assert spec.exponent is None
    assert spec.tail().mean() == pytest.approx(1.5)

    with pytest.raises(ValueError):
        CounterexampleSpec(exponent=3.0, weights=[0.5, 0.5])


def test_certificate_kind_must_match_model(three_state_kernel):
    """Test that an AR(1) certificate needs an AR(1) model."""
    model = FiniteModelSpec(kernel=three_state_kernel.tolist(), Abar=[2.0, -1.0, 0.5])
    parts = model.build()

    with pytest.raises(ConfigError):
        CertificateSpec(kind="ar1").build(model, parts.chain)
    assert CertificateSpec().build(model, parts.chain).superlevel_empty


def test_load_config_errors(tmp_path):
    """Test unreadable and malformed files."""
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")

    broken = tmp_path / "broken.toml"
    broken.write_text("experiment = \n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(broken)


def test_load_config_applies_overrides(tmp_path):
    """Test overrides before validation."""
    path = tmp_path / "run.toml"
    path.write_text('experiment = "counterexample"\n[counterexample]\nK = 100\n', encoding="utf-8")

    config = load_config(path, ["counterexample.alpha=0.25", "seed=11"])

    assert config.counterexample.alpha == 0.25
    assert config.seed == 11
