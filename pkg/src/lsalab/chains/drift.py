"""Drift-condition certification: PV checks, minorization and ergodicity constants."""

import logging
import math

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from ..common.exceptions import (
    HypothesisFailedError,
    MethodUnavailableError,
    RangeViolationError,
)
from ..common.models import ExpectationMethod
from ..common.rng import stream
from ..common.utils import normal_quantile
from .markov import MarkovModel
from .models import (
    DriftCertificate,
    DriftPoint,
    DriftReport,
    ErgodicityConstants,
    IteratedDriftReport,
    MinorizationResult,
    SmallSetEntry,
    SmallSetSpec,
    StateKind,
)
from .stationary import stationary_exact

logger = logging.getLogger(__name__)

MIN_MONTECARLO_SAMPLES = 10_000
DRIFT_TOL = 1e-12
RHO_SLACK = 1e-12
RHO_FLOOR = 1e-12


def drift_lambda(cert: DriftCertificate, support: np.ndarray | None = None) -> float:
    """λ = exp(−c · inf_{W>R0} W^δ), with λ = e^{−c} when {W > R0} is empty.

    Args:
        cert: Drift certificate
        support: Enumerated states; when given the infimum is taken over them

    Returns:
        λ in (0, 1)
    """
    if support is not None:
        values = cert.W(support)
        above = values[values > cert.R0]
        if above.size == 0:
            return math.exp(-cert.c)
        return math.exp(-cert.c * float(above.min()) ** cert.delta)
    if cert.superlevel_empty:
        return math.exp(-cert.c)
    w_inf = cert.w_inf if cert.w_inf is not None else max(cert.R0, 1.0)
    return math.exp(-cert.c * w_inf**cert.delta)


def drift_rhs(cert: DriftCertificate, W: np.ndarray) -> np.ndarray:
    """exp(−cW^δ)V·1{W > R0} + b·1{W ≤ R0}."""
    W = np.asarray(W, dtype=float)
    return np.where(W > cert.R0, np.exp(W - cert.c * W**cert.delta), cert.b)


def _exact_pv(model: MarkovModel, cert: DriftCertificate, states: np.ndarray) -> np.ndarray:
    if cert.pv_closed_form is not None:
        return np.asarray(cert.pv_closed_form(states), dtype=float)
    if not model.has_kernel:
        raise MethodUnavailableError(
            "Exact PV needs a kernel or a closed form", method=ExpectationMethod.EXACT.value
        )
    P = model.exact_kernel
    values = cert.V(model.enumerate_states())
    return P[model.index_of(states)] @ values


def _quadrature_pv(model: MarkovModel, cert: DriftCertificate, states: np.ndarray) -> np.ndarray:
    if model.integrate is None:
        raise MethodUnavailableError(
            f"No quadrature rule for {model.description}",
            method=ExpectationMethod.QUADRATURE.value,
        )
    return np.asarray([model.integrate(state, cert.V) for state in states])


def check_drift(
    model: MarkovModel,
    cert: DriftCertificate,
    test_states: np.ndarray,
    method: ExpectationMethod = ExpectationMethod.EXACT,
    *,
    samples: int = MIN_MONTECARLO_SAMPLES,
    seed: int = 0,
    confidence: float = 0.99,
) -> DriftReport:
    """Check PV ≤ exp(−cW^δ)V on {W > R0} and PV ≤ b on {W ≤ R0} at test states.

    Monte Carlo estimates draw ``samples`` one-step transitions per state
    (stream ``(seed, i)`` for the i-th state); a violation is reported only when
    the whole confidence interval lies above the bound.

    Args:
        model: Markov chain
        cert: Certificate under test
        test_states: Non-empty batch of states
        method: exact | quadrature | montecarlo
        samples: Monte Carlo draws per state (≥ 10⁴)
        seed: Master seed for Monte Carlo
        confidence: Two-sided CI level for Monte Carlo

    Returns:
        Per-state evaluations and the number of violations

    Raises:
        MethodUnavailableError: If the chosen method is not available for the model
        HypothesisFailedError: If W < 1 at a test state or samples < 10⁴

    Example:
        ```python
        cert = ar1_drift_certificate(0.5, 1.0, c=0.25, R0=6.1)
        report = check_drift(gaussian_ar_chain(0.5, 1.0), cert, np.linspace(-20, 20, 81)[:, None])
        report.holds  # True
        ```
    """
    states = np.asarray(test_states)
    if states.shape[0] == 0:
        raise RangeViolationError("At least one test state is required", parameter="states")
    if model.kind is StateKind.REAL and states.ndim == 1:
        states = states[:, None]

    W = np.asarray(cert.W(states), dtype=float)
    if np.any(W < 1.0 - 1e-12):
        raise HypothesisFailedError("W must be at least 1 on every test state", hypothesis="V >= e")
    rhs = drift_rhs(cert, W)

    if method is ExpectationMethod.EXACT:
        pv = _exact_pv(model, cert, states)
        low, high = pv, pv
    elif method is ExpectationMethod.QUADRATURE:
        pv = _quadrature_pv(model, cert, states)
        low, high = pv, pv
    else:
        if samples < MIN_MONTECARLO_SAMPLES:
            raise HypothesisFailedError(
                f"Monte Carlo drift checks need at least {MIN_MONTECARLO_SAMPLES} samples",
                hypothesis="samples",
            )
        quantile = normal_quantile(confidence)
        pv, low, high = np.empty(len(states)), np.empty(len(states)), np.empty(len(states))
        for i, state in enumerate(states):
            rng = stream(seed, i)
            draws = cert.V(model.step(model.initial(state, samples), rng))
            half = quantile * float(np.std(draws, ddof=1)) / math.sqrt(samples)
            pv[i] = float(np.mean(draws))
            low[i], high[i] = pv[i] - half, pv[i] + half

    violated = low > rhs * (1.0 + DRIFT_TOL)
    points = [
        DriftPoint(
            state=np.atleast_1d(np.asarray(state, dtype=float)).reshape(-1).tolist(),
            W=float(W[i]),
            pv=float(pv[i]),
            ci_low=float(low[i]),
            ci_high=float(high[i]),
            rhs=float(rhs[i]),
            violated=bool(violated[i]),
        )
        for i, state in enumerate(states)
    ]
    violations = int(violated.sum())
    if violations:
        logger.warning(f"Drift violated at {violations}/{len(points)} states ({cert.description or model.description})")
    else:
        logger.info(f"Drift holds at {len(points)} states ({method.value})")
    return DriftReport(method=method, points=points, violations=violations)


def minorization_constants(model: MarkovModel, C: np.ndarray | list, m: int = 1) -> MinorizationResult:
    """Largest ε with P^m(z, ·) ≥ ε ν(·) for every z ∈ C.

    ε is the total mass of the column minima of P^m over the rows in C; ν is
    that profile normalized (zero when ε = 0).
    """
    C = np.asarray(C)
    if C.shape[0] == 0:
        raise RangeViolationError("The small set C must be non-empty", parameter="C")
    if m < 1:
        raise RangeViolationError("m must be at least 1", parameter="m")
    Pm = np.linalg.matrix_power(model.exact_kernel, m)
    minima = Pm[model.index_of(C)].min(axis=0)
    eps = float(min(1.0, minima.sum()))
    nu = minima / minima.sum() if eps > 0.0 else np.zeros_like(minima)
    return MinorizationResult(eps=eps, nu=nu, m=m)


def ergodicity_constants(
    model: MarkovModel,
    cert: DriftCertificate,
    horizon: int = 200,
) -> ErgodicityConstants:
    """(B_V, ρ) of ‖Pⁿ(z, ·) − π‖_V ≤ B_V ρⁿ V(z) for a finite chain.

    ρ is the second-largest eigenvalue modulus plus 1e−12. B_V scans n ≤ horizon
    and stops once ρⁿ < 1e−12; Pⁿ − 1π is propagated with the eigenvalue-one
    component projected out after every step.

    Raises:
        ReducibleError: If the chain is reducible
        PeriodicError: If the chain is periodic
    """
    pi = stationary_exact(model).weights
    P = model.exact_kernel
    moduli = np.sort(np.abs(np.linalg.eigvals(P)))[::-1]
    slem = float(moduli[1]) if moduli.size > 1 else 0.0
    rho = min(max(slem + RHO_SLACK, RHO_FLOOR), 1.0 - 1e-15)

    V = cert.V(model.enumerate_states())
    ones = np.ones(P.shape[0])
    deviation = P - np.outer(ones, pi)
    B_V = 0.0
    last = 1
    for n in range(1, horizon + 1):
        if n > 1 and rho**n < RHO_FLOOR:
            break
        ratios = (np.abs(deviation) @ V) / (rho**n * V)
        B_V = max(B_V, float(ratios.max()))
        last = n
        deviation = P @ deviation
        deviation -= np.outer(ones, pi @ deviation)
    logger.debug(f"Ergodicity constants: rho={rho:.6g}, B_V={B_V:.6g} (scanned n ≤ {last})")
    return ErgodicityConstants(B_V=B_V, rho=rho, horizon=last)


def certify_ergodicity(model: MarkovModel, cert: DriftCertificate, horizon: int = 200) -> DriftCertificate:
    """Copy of ``cert`` with its ergodicity constants filled in."""
    return cert.model_copy(update={"ergodicity": ergodicity_constants(model, cert, horizon)})


def uniform_certificate(
    model: MarkovModel,
    c: float = 1.0,
    R0: float = 1.0,
    *,
    horizon: int | None = 200,
) -> DriftCertificate:
    """Certificate V ≡ e, W ≡ 1, b = e for a uniformly ergodic finite chain.

    With R0 ≥ 1 the whole space is the small set; m is the first power with a
    positive minorization constant (searched up to (S−1)² + 1).

    Raises:
        HypothesisFailedError: If no power of P admits a common minorization
    """
    states = model.enumerate_states()
    S = states.shape[0]
    eps, m = 0.0, 0
    for m in range(1, (S - 1) ** 2 + 2):
        eps = minorization_constants(model, states, m).eps
        if eps > 0.0:
            break
    if eps <= 0.0:
        raise HypothesisFailedError("No power of P has a common minorization", hypothesis="small set")

    def unit(z: np.ndarray) -> np.ndarray:
        return np.ones(np.shape(z)[0])

    cert = DriftCertificate(
        W=unit,
        c=c,
        b=math.e,
        delta=1.0,
        R0=R0,
        small_set=SmallSetSpec(entries=[SmallSetEntry(radius=None, m=m, eps=eps)]),
        superlevel_empty=R0 >= 1.0,
        pv_closed_form=lambda z: np.full(np.shape(z)[0], math.e),
        description=f"uniform certificate for {model.description}",
    )
    if horizon is not None:
        cert = certify_ergodicity(model, cert, horizon)
    return cert


def ar1_log_pv(x: np.ndarray, rho: float, sigma: float, scale: float = 1.0) -> np.ndarray:
    """log E[exp(s(1 + |ρx + ξ|))], ξ ~ N(0, σ²), in closed form."""
    m = rho * np.asarray(x, dtype=float)
    s = scale
    half_var = 0.5 * s**2 * sigma**2
    right = s * m + half_var + norm.logcdf(m / sigma + s * sigma)
    left = -s * m + half_var + norm.logcdf(-m / sigma + s * sigma)
    return s + np.logaddexp(right, left)


def _ar1_small_sets(rho: float, sigma: float, scale: float, R0: float) -> SmallSetSpec:
    """{|x| ≤ r} is 1-small with ε = 2Φ(−|ρ|r/σ)."""
    radii = [max(R0, 1.0) * 2.0**k for k in range(8)]
    entries = []
    for radius in radii:
        r = max(radius / scale - 1.0, 0.0)
        log_eps = math.log(2.0) + float(norm.logcdf(-abs(rho) * r / sigma))
        if log_eps > -690.0:
            entries.append(SmallSetEntry(radius=radius, m=1, eps=min(1.0, math.exp(log_eps))))
    return SmallSetSpec(entries=entries)


def ar1_drift_certificate(
    rho: float,
    sigma: float,
    c: float,
    R0: float,
    scale: float = 1.0,
) -> DriftCertificate:
    """Analytic certificate for X' = ρX + ξ with V = exp(s(1 + |x|)), δ = 1.

    b is PV at the edge of the sublevel set {W ≤ R0} (PV increases in |x|).

    Args:
        rho: AR coefficient, |ρ| < 1
        sigma: Noise standard deviation
        c: Drift rate
        R0: Sublevel radius
        scale: s in V = exp(s(1 + |x|))
    """
    if not abs(rho) < 1.0:
        raise HypothesisFailedError("|rho| must be below 1", hypothesis="stability")
    edge = max(R0 / scale - 1.0, 0.0)
    b = float(np.exp(ar1_log_pv(np.asarray([edge]), rho, sigma, scale))[0])

    def W(x: np.ndarray) -> np.ndarray:
        values = np.asarray(x, dtype=float)
        return scale * (1.0 + np.abs(values.reshape(values.shape[0], -1)[:, 0]))

    def pv(x: np.ndarray) -> np.ndarray:
        values = np.asarray(x, dtype=float)
        return np.exp(ar1_log_pv(values.reshape(values.shape[0], -1)[:, 0], rho, sigma, scale))

    logger.debug(f"AR(1) certificate: rho={rho}, sigma={sigma}, c={c}, R0={R0}, b={b:.6g}")
    return DriftCertificate(
        W=W,
        c=c,
        b=b,
        delta=1.0,
        R0=R0,
        small_set=_ar1_small_sets(rho, sigma, scale, R0),
        w_inf=max(R0, scale, 1.0),
        superlevel_empty=False,
        pv_closed_form=pv,
        description=f"AR(1) certificate, V = exp({scale:g}(1+|x|))",
    )


def check_iterated_drift(model: MarkovModel, cert: DriftCertificate, n: int) -> IteratedDriftReport:
    """Check PⁿV ≤ λⁿV + b/(1−λ) on every state of a finite chain."""
    if n < 1:
        raise RangeViolationError("n must be at least 1", parameter="n")
    states = model.enumerate_states()
    V = cert.V(states)
    lam = drift_lambda(cert, states)
    PnV = np.linalg.matrix_power(model.exact_kernel, n) @ V
    bound = lam**n * V + cert.b / (1.0 - lam)
    worst = float(np.max(PnV / bound))
    return IteratedDriftReport(n=n, lam=lam, worst_ratio=worst, holds=worst <= 1.0 + DRIFT_TOL)


def log_v_moment(cert: DriftCertificate, states: np.ndarray, weights: np.ndarray, power: float) -> float:
    """log Σ_z w(z) V(z)^power without overflow."""
    return float(logsumexp(power * np.asarray(cert.W(states), dtype=float), b=weights))
