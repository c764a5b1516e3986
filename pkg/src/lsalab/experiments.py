"""Experiment runners, one per experiment kind, registered by decorator.

Each runner reads a validated ExperimentConfig, runs the library operations and
writes its CSV or text outputs under ``config.output``. Every file carries the
config hash, the master seed and the package version.
"""

import logging
import math
from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, Field

from . import __version__
from .chains.drift import check_drift, check_iterated_drift
from .chains.markov import MarkovModel, window_chain
from .chains.models import DriftCertificate, DriftReport, StateKind
from .common.exceptions import (
    BoundViolatedError,
    ConfigError,
    DecompositionMismatchError,
    DegenerateWindowError,
    HypothesisFailedError,
    InvariantViolationError,
    LemmaViolationError,
    NotSquareSummableError,
    OutputError,
)
from .common.models import ExpectationMethod
from .common.rng import stream
from .common.utils import config_hash, write_csv
from .config import ExperimentConfig, ExperimentKind, FiniteModelSpec, ModelParts
from .constants.calculator import build_report, stationary_moment_check, td_constants
from .constants.models import ConstantsInputs, ConstantsReport, DriftScalars, MatrixScalars, TdInputs
from .linalg.matrices import solve_lyapunov
from .lsa.engine import (
    IDENTITY_TOL,
    build_model,
    decompose,
    error_closed_form,
    identity_gap,
    j1_direct_sum,
    run_lsa,
    sample_path,
)
from .lsa.models import LsaModel
from .schedules.models import StepSchedule
from .schedules.schedule import validate_A5, validate_A6, weighted_sum_bounds, weighted_sum_identity
from .stability.counterexample import cap_consistency, counterexample_exact
from .stability.models import MOMENT_COLUMNS, BoundCurve, MomentComponent, MomentSeries
from .stability.moments import (
    enumerate_gamma_moment,
    estimate_gamma_moments,
    estimate_lsa_moment,
    fit_decay,
    h0_envelope,
    lsa_envelope,
    theory_envelope,
)
from .td.models import TdConfig
from .td.td import (
    build_td_model,
    feature_covariance,
    finite_mrp,
    td_drift_certificate,
    td_matrix_exact,
    td_update_loop,
    verify_hurwitz_td,
)

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ["step", "thetaTilde_norm", "thetaTr_norm", "J0_norm", "H0_norm", "J1_norm", "H1_norm"]
DRIFT_COLUMNS = ["state", "W", "pv", "ci_low", "ci_high", "rhs", "violated"]
CHECK_COLUMNS = ["check", "value", "threshold", "passes"]
COUNTEREXAMPLE_COLUMNS = ["n", "u", "growth", "lower_bound", "slack"]

ORACLE_MAX_STEPS = 512
ENUMERATION_SE = 4.0
# Stream id for auxiliary draws (start windows, sampled test windows); batch streams use small ids
AUX_STREAM = 2**32
WINDOW_SAMPLE_OFFSET = 1000

Runner = Callable[["ExperimentContext"], None]
RUNNERS: dict[ExperimentKind, Runner] = {}


def runner(kind: ExperimentKind) -> Callable[[Runner], Runner]:
    """Register the runner of an experiment kind.

    Example:
        ```python
        @runner(ExperimentKind.CONSTANTS)
        def run_constants(ctx: ExperimentContext) -> None:
            ...
        ```
    """

    def decorator(func: Runner) -> Runner:
        RUNNERS[kind] = func
        return func

    return decorator


class ExperimentResult(BaseModel):
    """Files written by a run and a flat summary for the console."""

    experiment: ExperimentKind
    config_hash: str
    seed: int
    files: list[Path] = Field(default_factory=list)
    summary: dict[str, str] = Field(default_factory=dict)


class ExperimentContext:
    """Config plus the bookkeeping shared by every runner."""

    def __init__(self, config: ExperimentConfig) -> None:
        self.config = config
        self.digest = config_hash(config.payload())
        self.result = ExperimentResult(experiment=config.experiment, config_hash=self.digest, seed=config.seed)

    def write(self, name: str, header: list[str], rows: list[list[Any]]) -> Path:
        """Write a CSV under the output directory."""
        path = write_csv(
            self.config.output / name,
            header,
            rows,
            digest=self.digest,
            seed=self.config.seed,
            version=__version__,
        )
        self.result.files.append(path)
        return path

    def write_text(self, name: str, lines: list[str]) -> Path:
        """Write a text report with the same provenance line as the CSVs."""
        path = self.config.output / name
        header = f"# config_hash={self.digest} seed={self.config.seed} version={__version__}"
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text("\n".join([header, *lines]) + "\n", encoding="utf-8")
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e}", path=str(path)) from e
        logger.info(f"Wrote {path}")
        self.result.files.append(path)
        return path

    def note(self, key: str, value: Any) -> None:
        """Add a summary entry."""
        if isinstance(value, float):
            value = f"{value:.6g}"
        self.result.summary[key] = str(value)

    def require(self, section: str) -> Any:
        """A config table needed by this runner."""
        value = getattr(self.config, section)
        if value is None:
            raise ConfigError(f"Experiment '{self.config.experiment.value}' needs '{section}'", key=section)
        return value


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the experiment named by the config.

    Raises:
        InvariantViolationError: If a checked identity or bound fails
        ConfigError: If a needed table is missing or inconsistent
        OutputError: If an output file cannot be written
    """
    ctx = ExperimentContext(config)
    logger.info(f"Running {config.experiment.value} (seed {config.seed}, config {ctx.digest[:12]})")
    RUNNERS[config.experiment](ctx)
    logger.info(f"Finished {config.experiment.value}: {len(ctx.result.files)} file(s)")
    return ctx.result


# Shared helpers


def _start_state(config: ExperimentConfig, chain: MarkovModel) -> np.ndarray | int | float:
    if config.z0 is not None:
        return np.asarray(config.z0) if isinstance(config.z0, list) else config.z0
    if chain.kind is StateKind.INTEGER:
        return 1
    if chain.has_kernel:
        return int(chain.enumerate_states()[0])
    return 0.0


def _theta0(values: list[float] | None, dim: int) -> np.ndarray:
    if values is None:
        return np.zeros(dim)
    theta0 = np.asarray(values, dtype=float)
    if theta0.shape != (dim,):
        raise ConfigError(f"theta0 must have {dim} entries", key="theta0")
    return theta0


def _fits(ctx: ExperimentContext, series: list[MomentSeries]) -> None:
    fit = ctx.config.fit
    for item in series:
        label = f"{item.component.value} p={item.p:g}"
        try:
            result = fit_decay(item, fit.abscissa, fit.window)
        except DegenerateWindowError as e:
            logger.warning(f"No decay fit for {label}: {e.message}")
            ctx.note(f"slope[{label}]", "n/a")
            continue
        ctx.note(f"slope[{label}]", result.slope)
        ctx.note(f"r2[{label}]", result.r_squared)


def _moment_rows(ctx: ExperimentContext, series: list[MomentSeries]) -> list[list[Any]]:
    return [row for item in series for row in item.csv_rows(ctx.config.experiment.value)]


def _growth_constants(model: FiniteModelSpec, cert: DriftCertificate, beta: float, K: int) -> tuple[float, float]:
    """C_A = max |Ā_ij(z)|/W(z)^β and C_{b,K} = max |b̄_ℓ(z)|/V(z)^{1/K} over a finite chain."""
    A_table, b_table = model.tables()
    states = model.build().chain.enumerate_states()
    W = np.asarray(cert.W(states), dtype=float)
    C_A = float(np.max(np.abs(A_table).reshape(W.size, -1).max(axis=1) / W**beta))
    C_bK = float(np.max(np.abs(b_table).max(axis=1) / np.exp(W / K)))
    return C_A, C_bK


def _constants_report(ctx: ExperimentContext, parts: ModelParts, cert: DriftCertificate) -> ConstantsReport:
    config = ctx.config
    spec = ctx.require("constants")
    chain = parts.chain
    model = build_model(chain, parts.Abar, parts.bbar, config.averaging, z0=_start_state(config, chain), seed=config.seed)
    solution = solve_lyapunov(model.A)

    C_A, C_bK = spec.C_A, spec.C_bK
    if C_A is None or C_bK is None:
        if not isinstance(config.model, FiniteModelSpec):
            key = "constants.C_A" if C_A is None else "constants.C_bK"
            raise ConfigError(f"'{key}' is required for non-finite models", key=key)
        derived = _growth_constants(config.model, cert, spec.beta, spec.K)
        C_A = derived[0] if C_A is None else C_A
        C_bK = derived[1] if C_bK is None else C_bK

    inputs = ConstantsInputs(
        drift=DriftScalars.from_certificate(cert, chain.enumerate_states() if chain.has_kernel else None),
        matrix=MatrixScalars.from_lyapunov(model.A, solution),
        beta=spec.beta,
        epsilon=spec.epsilon,
        C_A=C_A,
        C_bK=C_bK,
        K=spec.K,
        p=spec.p,
        theta_star_norm=float(np.linalg.norm(model.theta_star)),
        norm_b=float(np.linalg.norm(model.b)),
        c_alpha=spec.c_alpha,
        m_cst=spec.m_cst,
        td=TdInputs(**spec.td.model_dump()) if spec.td is not None else None,
    )
    report = build_report(inputs)
    for warning in report.warnings:
        logger.warning(warning)
    return report


def _bounded(series: MomentSeries, curve: BoundCurve) -> MomentSeries:
    """Attach envelope values to a series.

    Raises:
        BoundViolatedError: If an estimate exceeds its envelope
    """
    limits = dict(zip(curve.n, curve.values, strict=True))
    points = []
    for point in series.points:
        limit = limits[point.n]
        if point.estimate > limit:
            raise BoundViolatedError(
                f"{series.component.value} estimate {point.estimate:.6g} exceeds {curve.name} = {limit:.6g} at n={point.n}",
                margin=point.estimate - limit,
            )
        points.append(point.model_copy(update={"bound": limit}))
    return series.model_copy(update={"points": points})


def _drift_rows(report: DriftReport) -> list[list[Any]]:
    return [
        [" ".join(f"{x:g}" for x in point.state), point.W, point.pv, point.ci_low, point.ci_high, point.rhs, point.violated]
        for point in report.points
    ]


# Runners


@runner(ExperimentKind.STABILITY)
def run_stability(ctx: ExperimentContext) -> None:
    """E^{1/p}‖Γ_{1:n}‖^p over the grid, decay fits and the optional theory envelope."""
    config = ctx.config
    parts = config.model.build()
    schedule = config.schedule.build()
    z0 = _start_state(config, parts.chain)
    mc = {"batches": config.batches, "workers": config.workers, "confidence": config.confidence}

    if config.stability.enumerate_n:
        checks = estimate_gamma_moments(
            parts.chain, parts.Abar, schedule, z0, config.p, config.stability.enumerate_n,
            config.replicas, config.seed, **mc,
        )
        for item in checks:
            for point in item.points:
                exact = enumerate_gamma_moment(parts.chain, parts.Abar, schedule, z0, item.p, point.n) ** (1.0 / item.p)
                tolerance = ENUMERATION_SE * max(point.std_error, 1e-12)
                if abs(point.estimate - exact) > tolerance:
                    raise BoundViolatedError(
                        f"Estimate {point.estimate:.6g} at n={point.n} is more than "
                        f"{ENUMERATION_SE:g} s.e. from the exact value {exact:.6g}",
                        margin=abs(point.estimate - exact) - tolerance,
                    )
        ctx.note("enumeration check", f"passed at n = {config.stability.enumerate_n}")

    series = estimate_gamma_moments(
        parts.chain, parts.Abar, schedule, z0, config.p, config.n_grid, config.replicas, config.seed, **mc
    )

    if config.stability.envelope:
        cert = ctx.require("certificate").build(config.model, parts.chain)
        report = _constants_report(ctx, parts, cert)
        V_z0 = config.stability.V_z0 or float(cert.V(parts.chain.initial(z0, 1))[0])
        series = [
            _bounded(item, theory_envelope(report, schedule, V_z0, item.p, config.n_grid, enforce_cap=False))
            for item in series
        ]
        ctx.note("envelope", "estimates below the envelope at every grid point")

    ctx.write("moments.csv", MOMENT_COLUMNS, _moment_rows(ctx, series))
    _fits(ctx, series)


@runner(ExperimentKind.LSA)
def run_lsa_experiment(ctx: ExperimentContext) -> None:
    """Decomposition dumps, closed-form oracles and moments of the error terms."""
    config = ctx.config
    spec = config.lsa
    parts = config.model.build()
    schedule = config.schedule.build()
    z0 = _start_state(config, parts.chain)
    model = build_model(parts.chain, parts.Abar, parts.bbar, config.averaging, z0=z0, seed=config.seed)
    theta0 = _theta0(spec.theta0, model.dim)

    worst = 0.0
    for replica in range(spec.trajectories):
        decomposition = decompose(model, schedule, theta0, z0, spec.n, config.seed, replica=replica)
        ctx.write(f"trajectory_{replica}.csv", TRAJECTORY_COLUMNS, decomposition.norm_rows())
        worst = max(worst, decomposition.fluctuation_gap, decomposition.second_order_gap)
        if spec.oracle and spec.n <= ORACLE_MAX_STEPS:
            path = sample_path(model, z0, spec.n, config.seed, replica=replica)
            closed = error_closed_form(model, path, schedule, theta0)
            direct = j1_direct_sum(model, path, schedule)
            floor = np.full(1, float(np.linalg.norm(model.theta_star)))
            gaps = (
                identity_gap(decomposition.theta_tilde[-1:], [closed], floor),
                identity_gap(decomposition.J1[-1:], [direct], np.zeros(1)),
            )
            if max(gaps) > IDENTITY_TOL:
                raise DecompositionMismatchError(
                    "Recursion disagrees with its closed form",
                    {"theta_gap": gaps[0], "j1_gap": gaps[1], "replica": replica},
                )
            worst = max(worst, *gaps)
    ctx.note("max identity gap", worst)

    if config.n_grid:
        moments = estimate_lsa_moment(
            model, schedule, theta0, z0, config.p, config.n_grid, config.replicas, config.seed,
            batches=config.batches, workers=config.workers, confidence=config.confidence,
        )
        if config.constants is not None and config.certificate is not None:
            moments = _lsa_envelopes(ctx, parts, model, schedule, theta0, z0, moments)
        series = [item for component in spec.components for item in moments[component]]
        ctx.write("moments.csv", MOMENT_COLUMNS, _moment_rows(ctx, series))
        _fits(ctx, series)


def _lsa_envelopes(
    ctx: ExperimentContext,
    parts: ModelParts,
    model: LsaModel,
    schedule: StepSchedule,
    theta0: np.ndarray,
    z0: np.ndarray | int | float,
    moments: dict[MomentComponent, list[MomentSeries]],
) -> dict[MomentComponent, list[MomentSeries]]:
    """Bound θ̃ and H0 series of the report's order p by their envelopes."""
    config = ctx.config
    cert = config.certificate.build(config.model, parts.chain)
    report = _constants_report(ctx, parts, cert)
    V_z0 = config.stability.V_z0 or float(cert.V(parts.chain.initial(z0, 1))[0])
    M0 = float(np.linalg.norm(theta0 - model.theta_star))
    curves = {
        MomentComponent.THETA_TILDE: lsa_envelope(report, schedule, V_z0, config.n_grid, M0=M0),
        MomentComponent.H0: h0_envelope(report, schedule, V_z0, config.n_grid),
    }
    bounded = dict(moments)
    for component, curve in curves.items():
        bounded[component] = [
            _bounded(item, curve) if item.p == report.inputs.p else item for item in moments[component]
        ]
    ctx.note("lsa envelopes", f"checked at p={report.inputs.p:g}")
    return bounded


@runner(ExperimentKind.TD)
def run_td(ctx: ExperimentContext) -> None:
    """TD(λ) on a finite MRP: Hurwitz check, adapter check and error moments."""
    config = ctx.config
    spec = config.td
    schedule = config.schedule.build()
    mrp, features = finite_mrp(spec.kernel_matrix(), spec.reward, spec.features, spec.gamma)
    cfg = TdConfig(lambda_trace=spec.lambda_trace, tau=spec.tau)

    A, _ = td_matrix_exact(mrp, features, cfg)
    hurwitz = verify_hurwitz_td(A, feature_covariance(mrp, features), spec.gamma, cfg)
    ctx.note("hurwitz margin", hurwitz.margin)

    if config.z0 is not None:
        window = np.asarray(config.z0)
    else:
        window = mrp.chain.simulate(0, spec.tau, stream(config.seed, AUX_STREAM))
    model = build_td_model(mrp, features, cfg, config.averaging, z0=window, seed=config.seed)
    theta0 = _theta0(spec.theta0, features.dim)

    direct = td_update_loop(mrp, features, cfg, schedule, theta0, window, spec.adapter_steps, config.seed)
    reduced = run_lsa(model, schedule, theta0, window, spec.adapter_steps, config.seed)
    if not np.array_equal(direct, reduced):
        raise InvariantViolationError(
            "TD loop and its LSA reduction disagree",
            {"max_gap": float(np.max(np.abs(direct - reduced)))},
        )
    ctx.note("adapter check", f"identical over {spec.adapter_steps} steps")

    moments = estimate_lsa_moment(
        model, schedule, theta0, window, config.p, config.n_grid, config.replicas, config.seed,
        batches=config.batches, workers=config.workers, confidence=config.confidence,
    )
    series = [item for component in spec.components for item in moments[component]]
    ctx.write("moments.csv", MOMENT_COLUMNS, _moment_rows(ctx, series))
    _fits(ctx, series)

    if MomentComponent.J0 in moments and MomentComponent.H0 in moments:
        J0, H0 = moments[MomentComponent.J0][0].points[-1], moments[MomentComponent.H0][0].points[-1]
        if J0.estimate > 0.0:
            ctx.note(f"H0/J0 at n={J0.n}", H0.estimate / J0.estimate)


@runner(ExperimentKind.COUNTEREXAMPLE)
def run_counterexample(ctx: ExperimentContext) -> None:
    """Exact products of the scalar counterexample and the cap comparison."""
    spec = ctx.config.counterexample
    tail = spec.tail()
    result = counterexample_exact(tail, spec.K, spec.epsilon, spec.alpha, spec.theta0, spec.n_max)
    rows = [
        [n, u, u / spec.theta0, lower, slack]
        for n, (u, lower, slack) in enumerate(zip(result.u, result.lower_bound, result.slack, strict=True))
    ]
    ctx.write("counterexample.csv", COUNTEREXAMPLE_COLUMNS, rows)
    ctx.note("pi(1)", result.pi_one)
    ctx.note("max u_n/u_0", result.max_growth)
    first = result.first_growth_index(10.0)
    ctx.note("first n with u_n/u_0 >= 10", "none" if first is None else first)
    if spec.check_caps:
        caps = cap_consistency(tail, spec.K, spec.epsilon, spec.alpha, spec.theta0, spec.n_max)
        ctx.note(f"cap gap K={spec.K} vs {2 * spec.K}", caps.max_gap)


@runner(ExperimentKind.CONSTANTS)
def run_constants(ctx: ExperimentContext) -> None:
    """Constants report as key=value lines plus JSON, with stationary moment checks."""
    config = ctx.config
    parts = config.model.build()
    cert = config.certificate.build(config.model, parts.chain)
    report = _constants_report(ctx, parts, cert)

    if parts.chain.has_kernel:
        moments = stationary_moment_check(parts.chain, cert, config.constants.gammas)
        for entry in moments.entries:
            if not entry.holds:
                raise BoundViolatedError(
                    f"{entry.name} = {entry.value:.6g} exceeds {entry.bound:.6g}",
                    margin=entry.value - entry.bound,
                )
        ctx.note("stationary moments", "within their drift bounds")

    ctx.write_text("constants.txt", [*report.key_values(), "", report.model_dump_json(indent=2)])
    finite = sum(1 for value in report.values.values() if math.isfinite(value))
    ctx.note("finite constants", f"{finite}/{len(report.values)}")
    ctx.note("max dual gap", report.max_dual_gap)
    ctx.note("warnings", len(report.warnings))


def _test_states(ctx: ExperimentContext, chain: MarkovModel) -> np.ndarray:
    spec = ctx.config.drift
    if spec.grid is not None:
        return spec.grid.states()
    if spec.states is not None:
        states = np.asarray(spec.states)
        return states.reshape(states.shape[0], *chain.state_shape)
    if chain.has_kernel:
        return chain.enumerate_states()
    raise ConfigError("Give 'drift.grid' or 'drift.states' for a chain without a kernel", key="drift.states")


def _check_drift_report(ctx: ExperimentContext, name: str, report: DriftReport) -> None:
    ctx.write(name, DRIFT_COLUMNS, _drift_rows(report))
    ctx.note(f"worst PV/rhs [{name}]", report.worst_ratio)
    if not report.holds:
        raise BoundViolatedError(
            f"Drift inequality violated at {report.violations} state(s) in {name}",
            margin=report.worst_ratio - 1.0,
        )


@runner(ExperimentKind.DRIFT_CHECK)
def run_drift_check(ctx: ExperimentContext) -> None:
    """Drift certificate on test states, iterated drift and window certificates."""
    config = ctx.config
    spec = config.drift
    parts = config.model.build()
    chain = parts.chain
    cert = config.certificate.build(config.model, chain)
    mc = {"samples": spec.samples, "seed": config.seed, "confidence": config.confidence}

    report = check_drift(chain, cert, _test_states(ctx, chain), spec.method, **mc)
    _check_drift_report(ctx, "drift.csv", report)

    for n in spec.iterated:
        iterated = check_iterated_drift(chain, cert, n)
        ctx.note(f"iterated n={n} worst ratio", iterated.worst_ratio)
        if not iterated.holds:
            raise BoundViolatedError(f"Iterated drift fails at n={n}", margin=iterated.worst_ratio - 1.0)

    if spec.window is not None:
        window = spec.window
        method = ExpectationMethod.EXACT if chain.has_kernel else ExpectationMethod.QUADRATURE
        z0 = _start_state(config, chain)
        for tau in window.taus:
            constants = td_constants(
                DriftScalars.from_certificate(cert, chain.enumerate_states() if chain.has_kernel else None),
                tau=tau, gamma=window.gamma, lambda_trace=window.lambda_trace,
                C_psi=window.C_psi, C_RK=window.C_RK, beta=window.beta, K=window.K,
            )
            windows_chain = window_chain(chain, tau)
            start = chain.simulate(z0, tau, stream(config.seed, AUX_STREAM + tau))
            rng = stream(config.seed, AUX_STREAM + WINDOW_SAMPLE_OFFSET + tau)
            sampled = windows_chain.simulate(start, window.samples, rng)[1:]
            windows_cert = td_drift_certificate(cert, tau, constants)
            _check_drift_report(
                ctx, f"drift_window_tau{tau}.csv", check_drift(windows_chain, windows_cert, sampled, method, **mc)
            )


@runner(ExperimentKind.SCHEDULE_CHECK)
def run_schedule_check(ctx: ExperimentContext) -> None:
    """Step-size conditions, the summation identity and the weighted-sum bounds."""
    config = ctx.config
    spec = config.schedule_check
    schedule = config.schedule.build()
    rows: list[list[Any]] = []

    a5 = validate_A5(schedule, spec.a, spec.horizon)
    rows.append(["A5 c_alpha", a5.minimal_c_alpha, a5.threshold, a5.passes])
    try:
        a6 = validate_A6(schedule, spec.a, spec.horizon)
        rows.append(["A6 c_alpha", a6.minimal_c_alpha, a6.threshold, a6.passes if a6.applicable else "n/a"])
    except NotSquareSummableError as e:
        logger.warning(f"A6 not checked: {e.message}")
        rows.append(["A6 c_alpha", "", spec.a / 32.0, "n/a"])

    if schedule.start == 0:
        identity = weighted_sum_identity(schedule, spec.a, spec.identity_N)
        tolerance = 1e-12 * max(1.0, abs(identity.rhs))
        rows.append(["summation identity gap", identity.gap, tolerance, identity.gap <= tolerance])
        rows.append(["gap with product from l=1", identity.printed_gap, tolerance, identity.printed_gap <= tolerance])
        if identity.gap > tolerance:
            raise LemmaViolationError("Summation identity failed", {"gap": identity.gap})

        rate = spec.b if spec.b is not None else spec.a / 8.0
        for part in spec.parts:
            try:
                bound = weighted_sum_bounds(schedule, rate, spec.p, spec.N, q=spec.q, part=part)
            except HypothesisFailedError as e:
                logger.warning(f"Weighted-sum bound part {part} skipped: {e.message}")
                rows.append([f"weighted sum part {part}", "", 1.0, "hypotheses not met"])
                continue
            rows.append([f"weighted sum part {part}", bound.worst_ratio, 1.0, bound.holds])
            if not bound.holds:
                raise LemmaViolationError(
                    f"Weighted-sum bound part {part} fails at n={bound.worst_index}",
                    {"worst_ratio": bound.worst_ratio},
                )
    else:
        logger.info("Schedule starts at α_1; summation checks need α_0 and are skipped")

    ctx.write("schedule_check.csv", CHECK_COLUMNS, rows)
    for row in rows:
        ctx.note(str(row[0]), row[3])
