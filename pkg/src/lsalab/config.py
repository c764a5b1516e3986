"""Experiment configuration: TOML files validated by pydantic, with dotted overrides.

A config names the experiment and carries the tables it needs:

```toml
experiment = "stability"
seed = 7
replicas = 10000
p = [2.0]
n_grid = [100, 200, 400, 800]

[model]
kind = "finite"
kernel = [[0.5, 0.5, 0.0], [0.25, 0.5, 0.25], [0.0, 0.5, 0.5]]
Abar = [2.0, -1.0, 0.5]

[schedule]
kind = "constant"
alpha = 0.02
```

Leaves can be overridden from the command line with ``--set model.kind=ar1``;
values are parsed as TOML literals and fall back to plain strings.
"""

import logging
import math
import os
import tomllib
from collections.abc import Callable
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Literal, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .chains.drift import ar1_drift_certificate, uniform_certificate
from .chains.markov import (
    DiscreteTail,
    MarkovModel,
    PowerLawTail,
    TailLaw,
    finite_chain,
    forward_recurrence_chain,
    gaussian_ar_chain,
)
from .chains.models import DriftCertificate
from .common.exceptions import (
    BadTailError,
    ConfigError,
    DimMismatchError,
    NotNonIncreasingError,
    NotPositiveDefiniteError,
    NotStochasticError,
    RangeViolationError,
    UnstableError,
)
from .common.models import Abscissa, AveragingConfig, ExpectationMethod
from .common.utils import read_matrix_csv
from .lsa.models import MatrixField, VectorField
from .schedules.models import ScheduleKind, StepSchedule
from .stability.models import MomentComponent
from .td.td import finite_mrp

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = "results"

# Raised by table builders on values that type-check but are inconsistent
TABLE_ERRORS = (
    BadTailError,
    DimMismatchError,
    NotNonIncreasingError,
    NotPositiveDefiniteError,
    NotStochasticError,
    RangeViolationError,
    UnstableError,
)


class ExperimentKind(str, Enum):
    """Experiments runnable from a config."""

    STABILITY = "stability"
    LSA = "lsa"
    TD = "td"
    COUNTEREXAMPLE = "counterexample"
    CONSTANTS = "constants"
    DRIFT_CHECK = "drift-check"
    SCHEDULE_CHECK = "schedule-check"


REQUIRED_SECTIONS: dict[ExperimentKind, tuple[str, ...]] = {
    ExperimentKind.STABILITY: ("model", "schedule", "n_grid"),
    ExperimentKind.LSA: ("model", "schedule", "lsa"),
    ExperimentKind.TD: ("td", "schedule", "n_grid"),
    ExperimentKind.COUNTEREXAMPLE: ("counterexample",),
    ExperimentKind.CONSTANTS: ("model", "certificate", "constants"),
    ExperimentKind.DRIFT_CHECK: ("model", "certificate", "drift"),
    ExperimentKind.SCHEDULE_CHECK: ("schedule", "schedule_check"),
}


class StrictModel(BaseModel):
    """Config table rejecting unknown keys."""

    model_config = ConfigDict(extra="forbid")


class ModelParts(NamedTuple):
    """Chain and the Ā, b̄ maps built from a model table."""

    chain: MarkovModel
    Abar: MatrixField
    bbar: VectorField
    dim: int


def _matrix(value: float | list[list[float]], *, dim: int = 1) -> np.ndarray:
    """Scalars become multiples of the identity."""
    array = np.asarray(value, dtype=float)
    if array.ndim == 0:
        return float(array) * np.eye(dim)
    return np.atleast_2d(array)


def _vector(value: float | list[float], dim: int) -> np.ndarray:
    array = np.asarray(value, dtype=float)
    if array.ndim == 0:
        return np.full(dim, float(array))
    return array.reshape(dim)


def _load_kernel(kernel: list[list[float]] | None, kernel_csv: Path | None, key: str) -> np.ndarray:
    if (kernel is None) == (kernel_csv is None):
        raise ConfigError(f"Exactly one of '{key}.kernel' and '{key}.kernel_csv' is required", key=f"{key}.kernel")
    if kernel_csv is not None:
        try:
            return read_matrix_csv(kernel_csv)
        except (OSError, ValueError) as e:
            raise ConfigError(f"Cannot read '{key}.kernel_csv': {e}", key=f"{key}.kernel_csv") from e
    return np.asarray(kernel, dtype=float)


def _state_table(values: list[Any], S: int, key: str, *, vector: bool) -> np.ndarray:
    """Per-state table as (S, d, d) for matrices or (S, d) for vectors."""
    table = np.asarray(values, dtype=float)
    if table.shape[0:1] != (S,):
        raise ConfigError(f"'{key}' needs one entry per state ({S})", key=key)
    if vector:
        return table.reshape(S, -1)
    if table.ndim == 1:
        return table[:, None, None]
    if table.ndim != 3 or table.shape[1] != table.shape[2]:
        raise ConfigError(f"'{key}' entries must be square matrices", key=key)
    return table


class FiniteModelSpec(StrictModel):
    """Finite chain with per-state Ā and b̄ tables."""

    kind: Literal["finite"] = "finite"
    kernel: list[list[float]] | None = None
    kernel_csv: Path | None = None
    Abar: list[Any] = Field(..., min_length=1, description="Per-state scalars or d×d matrices")
    bbar: list[Any] | None = Field(None, description="Per-state scalars or d-vectors (zeros if absent)")

    def build(self) -> ModelParts:
        """Chain and table lookups."""
        chain = finite_chain(_load_kernel(self.kernel, self.kernel_csv, "model"))
        S = chain.num_states
        A_table = _state_table(self.Abar, S, "model.Abar", vector=False)
        dim = A_table.shape[1]
        if self.bbar is None:
            b_table = np.zeros((S, dim))
        else:
            b_table = _state_table(self.bbar, S, "model.bbar", vector=True)
            if b_table.shape[1] != dim:
                raise ConfigError(f"'model.bbar' must have dimension {dim}", key="model.bbar")

        def Abar(states: np.ndarray) -> np.ndarray:
            return A_table[chain.index_of(states)]

        def bbar(states: np.ndarray) -> np.ndarray:
            return b_table[chain.index_of(states)]

        return ModelParts(chain, Abar, bbar, dim)

    def tables(self) -> tuple[np.ndarray, np.ndarray]:
        """Raw (Ā, b̄) tables over the enumerated states."""
        parts = self.build()
        states = parts.chain.enumerate_states()
        return parts.Abar(states), parts.bbar(states)


class Ar1ModelSpec(StrictModel):
    """Scalar Gaussian AR(1) chain with Ā(x) = A0 + xA1 and b̄(x) = b0 + xb1."""

    kind: Literal["ar1"] = "ar1"
    rho: float = Field(..., gt=-1.0, lt=1.0)
    noise_cov: float = Field(..., gt=0.0)
    A0: float | list[list[float]]
    A1: float | list[list[float]] = 0.0
    b0: float | list[float] = 0.0
    b1: float | list[float] = 0.0

    def build(self) -> ModelParts:
        """AR chain and affine maps."""
        A0 = _matrix(self.A0)
        dim = A0.shape[0]
        A1 = _matrix(self.A1, dim=dim)
        if A1.shape != A0.shape:
            raise ConfigError("'model.A1' must match the shape of 'model.A0'", key="model.A1")
        b0, b1 = _vector(self.b0, dim), _vector(self.b1, dim)

        def Abar(states: np.ndarray) -> np.ndarray:
            x = np.asarray(states, dtype=float).reshape(np.shape(states)[0], -1)[:, 0]
            return A0[None, :, :] + x[:, None, None] * A1[None, :, :]

        def bbar(states: np.ndarray) -> np.ndarray:
            x = np.asarray(states, dtype=float).reshape(np.shape(states)[0], -1)[:, 0]
            return b0[None, :] + x[:, None] * b1[None, :]

        return ModelParts(gaussian_ar_chain(self.rho, self.noise_cov), Abar, bbar, dim)


class TailSpec(StrictModel):
    """Return-time law: power law P(Y = k) ∝ k^{−s} or explicit weights."""

    exponent: float | None = Field(None, gt=2.0)
    weights: list[float] | None = None

    @model_validator(mode="after")
    def _one_law(self) -> "TailSpec":
        if (self.exponent is None) == (self.weights is None):
            raise ValueError("give exactly one of 'exponent' and 'weights'")
        return self

    def tail(self) -> TailLaw:
        """The tail law."""
        if self.weights is not None:
            return DiscreteTail(self.weights)
        return PowerLawTail(float(self.exponent))


class ForwardRecurrenceModelSpec(TailSpec):
    """Forward recurrence chain with Ā(1) = A_one and Ā(z > 1) = A_other."""

    kind: Literal["forward_recurrence"] = "forward_recurrence"
    K: int = Field(default=10_000, ge=1)
    A_one: float = 1.0
    A_other: float = -0.36
    b: float = 0.0

    def build(self) -> ModelParts:
        """Truncated chain and two-level scalar maps."""
        chain = forward_recurrence_chain(self.tail(), self.K)

        def Abar(states: np.ndarray) -> np.ndarray:
            z = np.asarray(states).reshape(-1)
            return np.where(z == 1, self.A_one, self.A_other)[:, None, None]

        def bbar(states: np.ndarray) -> np.ndarray:
            return np.full((np.shape(states)[0], 1), self.b)

        return ModelParts(chain, Abar, bbar, 1)


ModelSpec = Annotated[
    FiniteModelSpec | Ar1ModelSpec | ForwardRecurrenceModelSpec,
    Field(discriminator="kind"),
]


class ScheduleSpec(StrictModel):
    """Step-size schedule table."""

    kind: ScheduleKind
    alpha: float | None = Field(None, gt=0.0)
    C: float | None = Field(None, gt=0.0)
    n0: float = Field(default=0.0, ge=0.0)
    t: float | None = Field(None, gt=0.0, le=1.0)
    values: list[float] = Field(default_factory=list)
    first_index: int = Field(default=1, ge=0, le=1)

    def build(self) -> StepSchedule:
        """Validated StepSchedule."""
        return StepSchedule(**self.model_dump())


class CertificateKind(str, Enum):
    """Certificate families buildable from a config."""

    UNIFORM = "uniform"
    AR1 = "ar1"


class CertificateSpec(StrictModel):
    """Drift certificate table."""

    kind: CertificateKind = CertificateKind.UNIFORM
    c: float = Field(default=1.0, gt=0.0)
    R0: float = Field(default=1.0, ge=0.0)
    scale: float = Field(default=1.0, gt=0.0, description="s in V = exp(s(1 + |x|)) for AR(1)")
    horizon: int = Field(default=200, ge=1, description="Scan length for the ergodicity constants")

    def build(self, model: "FiniteModelSpec | Ar1ModelSpec | ForwardRecurrenceModelSpec", chain: MarkovModel) -> DriftCertificate:
        """Certificate for the configured chain."""
        if self.kind is CertificateKind.AR1:
            if not isinstance(model, Ar1ModelSpec):
                raise ConfigError("An ar1 certificate needs an ar1 model", key="certificate.kind")
            return ar1_drift_certificate(model.rho, math.sqrt(model.noise_cov), self.c, self.R0, self.scale)
        if not chain.has_kernel:
            raise ConfigError("A uniform certificate needs a finite kernel", key="certificate.kind")
        return uniform_certificate(chain, self.c, self.R0, horizon=self.horizon)


class TdInputsSpec(StrictModel):
    """Window-chain inputs of the TD constants."""

    tau: int = Field(default=1, ge=1)
    gamma: float = Field(default=0.9, gt=0.0, lt=1.0)
    lambda_trace: float = Field(default=0.0, ge=0.0, lt=1.0)
    C_psi: float = Field(default=1.0, gt=0.0)
    C_RK: float = Field(default=1.0, ge=0.0)


class ConstantsSpec(StrictModel):
    """Primitives for the constants report; C_A and C_bK default to table maxima."""

    beta: float = Field(default=1.0, gt=0.0)
    epsilon: float = Field(default=0.5, gt=0.0, lt=1.0)
    K: int = Field(default=4, ge=1)
    p: float = Field(default=2.0, ge=2.0)
    C_A: float | None = Field(None, ge=0.0)
    C_bK: float | None = Field(None, ge=0.0)
    c_alpha: float = Field(default=0.0, ge=0.0)
    m_cst: int = Field(default=0, ge=0)
    gammas: list[float] = Field(default_factory=lambda: [0.5, 1.0], description="Orders for π(W^γ) checks")
    td: TdInputsSpec | None = None


class CounterexampleSpec(TailSpec):
    """Scalar counterexample on the forward recurrence chain."""

    exponent: float | None = Field(default=3.0, gt=2.0)
    K: int = Field(default=10_000, ge=1)
    epsilon: float = Field(default=0.36, ge=0.0)
    alpha: float = Field(default=0.5, ge=0.0, lt=1.0)
    theta0: float = Field(default=1.0, gt=0.0)
    n_max: int = Field(default=200, ge=0)
    check_caps: bool = True

    @model_validator(mode="before")
    @classmethod
    def _weights_replace_exponent(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("weights") is not None and "exponent" not in data:
            data = {**data, "exponent": None}
        return data


class GridSpec(StrictModel):
    """Evenly spaced scalar test states."""

    low: float
    high: float
    points: int = Field(default=400, ge=1)

    def states(self) -> np.ndarray:
        """(points, 1) batch."""
        return np.linspace(self.low, self.high, self.points)[:, None]


class WindowDriftSpec(TdInputsSpec):
    """Window-chain certificates checked at sampled windows."""

    taus: list[int] = Field(default_factory=lambda: [1, 2])
    beta: float = Field(default=1.0, gt=0.0)
    K: int = Field(default=4, ge=1)
    samples: int = Field(default=200, ge=1, description="Sampled windows per τ")


class DriftSpec(StrictModel):
    """Drift-check table."""

    method: ExpectationMethod = ExpectationMethod.EXACT
    states: list[float] | None = None
    grid: GridSpec | None = None
    samples: int = Field(default=10_000, ge=10_000, description="Monte Carlo draws per state")
    iterated: list[int] = Field(default_factory=list, description="n for PⁿV checks on finite chains")
    window: WindowDriftSpec | None = None


class TdSpec(StrictModel):
    """Finite MRP, features and trace parameters."""

    kernel: list[list[float]] | None = None
    kernel_csv: Path | None = None
    reward: list[float] = Field(..., min_length=1)
    features: list[list[float]] = Field(..., min_length=1, description="S×d feature table")
    gamma: float = Field(..., gt=0.0, lt=1.0)
    lambda_trace: float = Field(default=0.0, ge=0.0, lt=1.0)
    tau: int = Field(default=1, ge=1)
    theta0: list[float] | None = None
    adapter_steps: int = Field(default=256, ge=1, description="Horizon of the hand-loop comparison")
    components: list[MomentComponent] = Field(
        default_factory=lambda: [MomentComponent.THETA_TILDE, MomentComponent.J0, MomentComponent.H0]
    )

    def kernel_matrix(self) -> np.ndarray:
        """Transition matrix from the inline table or CSV."""
        return _load_kernel(self.kernel, self.kernel_csv, "td")


class LsaSpec(StrictModel):
    """Trajectory dumps, closed-form checks and moment components."""

    theta0: list[float] | None = None
    trajectories: int = Field(default=1, ge=0)
    n: int = Field(default=512, ge=1)
    oracle: bool = True
    components: list[MomentComponent] = Field(
        default_factory=lambda: [MomentComponent.THETA_TILDE, MomentComponent.J0, MomentComponent.H0]
    )

    @field_validator("components")
    @classmethod
    def _no_gamma(cls, value: list[MomentComponent]) -> list[MomentComponent]:
        if MomentComponent.GAMMA in value:
            raise ValueError("gamma moments belong to the stability experiment")
        return value


class StabilitySpec(StrictModel):
    """Pre-validation and envelope options of the stability experiment."""

    enumerate_n: list[int] = Field(default_factory=list, description="Horizons checked against exact enumeration")
    envelope: bool = False
    V_z0: float | None = Field(None, gt=0.0, description="V(z0) for the envelope (from the certificate if absent)")


class FitSpec(StrictModel):
    """Decay fit abscissa and window."""

    abscissa: Abscissa = Abscissa.SUM_ALPHA
    window: tuple[int, int] | None = None


class ScheduleCheckSpec(StrictModel):
    """Step-size condition and weighted-sum checks."""

    a: float = Field(..., gt=0.0, description="Contraction rate")
    horizon: int = Field(default=10_000, ge=2)
    identity_N: int = Field(default=1000, ge=0)
    b: float | None = Field(None, gt=0.0, description="Rate of the weighted-sum bounds (a/8 if absent)")
    p: float = Field(default=2.0, gt=1.0, le=2.0)
    q: float = Field(default=0.5, ge=0.0, le=1.0)
    N: int = Field(default=10_000, ge=1)
    parts: list[int] = Field(default_factory=lambda: [1, 2])


def _default_output() -> Path:
    return Path(os.getenv("LSALAB_OUTPUT_DIR", DEFAULT_OUTPUT_DIR))


class ExperimentConfig(StrictModel):
    """Full experiment description."""

    experiment: ExperimentKind
    seed: int = Field(default=0, ge=0, lt=2**64)
    replicas: int = Field(default=10_000, ge=1)
    batches: int = Field(default=50, ge=2, le=10_000)
    workers: int | None = Field(None, ge=1)
    confidence: float = Field(default=0.99, gt=0.5, lt=1.0)
    p: list[float] = Field(default_factory=lambda: [2.0], min_length=1)
    n_grid: list[int] = Field(default_factory=list)
    output: Path = Field(default_factory=_default_output)
    z0: float | list[float] | None = None

    model: ModelSpec | None = None
    schedule: ScheduleSpec | None = None
    certificate: CertificateSpec | None = None
    constants: ConstantsSpec | None = None
    counterexample: CounterexampleSpec | None = None
    drift: DriftSpec | None = None
    td: TdSpec | None = None
    lsa: LsaSpec | None = None
    stability: StabilitySpec = Field(default_factory=StabilitySpec)
    fit: FitSpec = Field(default_factory=FitSpec)
    averaging: AveragingConfig | None = None
    schedule_check: ScheduleCheckSpec | None = None

    @field_validator("n_grid")
    @classmethod
    def _non_negative(cls, value: list[int]) -> list[int]:
        if any(n < 0 for n in value):
            raise ValueError("grid points must be non-negative")
        return value

    def payload(self) -> dict[str, Any]:
        """Canonical content for the config hash; output location and pool size excluded."""
        return self.model_dump(mode="json", exclude={"output", "workers"})


def parse_literal(text: str) -> Any:
    """Value of a TOML literal, or the text itself when it is not one."""
    try:
        return tomllib.loads(f"value = {text}")["value"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(data: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Set dotted-path leaves from ``key.sub=value`` strings, creating tables as needed.

    Raises:
        ConfigError: If an override is malformed or descends into a non-table
    """
    for item in overrides:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"Override '{item}' is not of the form key=value", key=key or None)
        parts = key.split(".")
        node = data
        for depth, part in enumerate(parts[:-1]):
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"'{'.'.join(parts[: depth + 1])}' is not a table", key=key)
            node = child
        node[parts[-1]] = parse_literal(raw.strip())
        logger.debug(f"Override {key} = {node[parts[-1]]!r}")
    return data


def _error_key(error: dict[str, Any]) -> str:
    # Discriminated unions add the tag to the location
    loc = [str(part) for part in error["loc"] if part not in ("finite", "ar1", "forward_recurrence")]
    return ".".join(loc)


def validate_config(data: dict[str, Any]) -> ExperimentConfig:
    """Validate a raw mapping and check the tables required by the experiment.

    Raises:
        ConfigError: Naming the first offending or missing key
    """
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        key = _error_key(error)
        if error["type"] == "missing":
            raise ConfigError(f"Missing required key '{key}'", key=key) from e
        raise ConfigError(f"Invalid value for '{key}': {error['msg']}", key=key) from e

    for section in REQUIRED_SECTIONS[config.experiment]:
        value = getattr(config, section)
        if value is None or (isinstance(value, list) and not value):
            raise ConfigError(
                f"Missing required key '{section}' for experiment '{config.experiment.value}'",
                key=section,
            )
    _check_tables(config)
    return config


def _check_tables(config: ExperimentConfig) -> None:
    """Build every configured table once so that inconsistent values fail as config errors."""
    builders: list[tuple[str, Callable[[], object]]] = []
    if config.model is not None:
        builders.append(("model", config.model.build))
    if config.schedule is not None:
        builders.append(("schedule", config.schedule.build))
    if config.counterexample is not None:
        builders.append(("counterexample", config.counterexample.tail))
    if config.td is not None:
        td = config.td
        builders.append(("td", lambda: finite_mrp(td.kernel_matrix(), td.reward, td.features, td.gamma)))

    for key, build in builders:
        try:
            build()
        except ValidationError as e:
            raise ConfigError(f"Invalid '{key}' table: {e.errors()[0]['msg']}", key=key) from e
        except TABLE_ERRORS as e:
            raise ConfigError(f"Invalid '{key}' table: {e.message}", key=key) from e


def load_config(path: str | Path, overrides: list[str] | None = None) -> ExperimentConfig:
    """Read a TOML config, apply overrides and validate.

    Args:
        path: TOML file
        overrides: ``key.sub=value`` strings applied before validation

    Returns:
        Validated config

    Raises:
        ConfigError: If the file cannot be read or parsed, or does not validate

    Example:
        ```python
        config = load_config("configs/finite_collapse.toml", ["seed=11", "schedule.alpha=0.01"])
        ```
    """
    path = Path(path)
    try:
        with path.open("rb") as handle:
            data = tomllib.load(handle)
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Cannot parse config {path}: {e}") from e

    config = validate_config(apply_overrides(data, overrides or []))
    logger.info(f"Loaded {config.experiment.value} config from {path}")
    return config
