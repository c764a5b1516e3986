"""Evaluators for every explicit constant of the stability and LSA error bounds.

Quantities that overflow double precision for moderate p (b_γ at large γ,
C_ros, D_ros) are carried as logarithms and exponentiated only at the end.
"""

import logging
import math
from collections.abc import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ..chains.drift import drift_lambda
from ..chains.markov import MarkovModel
from ..chains.models import DriftCertificate, SmallSetEntry
from ..chains.stationary import stationary_exact
from ..common.exceptions import (
    DualEvaluationMismatchError,
    HypothesisFailedError,
    MissingSmallSetError,
    NoFeasibleBetaError,
    RangeViolationError,
)
from ..common.utils import relative_gap
from .models import (
    ConstantsInputs,
    ConstantsReport,
    DriftScalars,
    ErgodicScalars,
    LsaConstants,
    MatrixScalars,
    MomentBoundEntry,
    PolyDrift,
    RosenthalConstants,
    RosenthalConstantsV,
    StabilityConstants,
    StationaryMomentReport,
    TdConstants,
)

logger = logging.getLogger(__name__)

DUAL_TOLERANCE = 1e-12
BETA_GRID = 10_001
LOG_2 = math.log(2.0)

SUBSTITUTION_NOTES = {
    "psi_eps": "ψ uses ε_R⁻¹ (the printed factor ε_R is read as its inverse)",
    "phi_radius": "φ uses the radius R0 ∨ log[2^τ̃ b/(1−λ^{1/τ̃})^τ̃] (printed log R0)",
    "dros": "LSA expansion constants use D_ros(p) for the Rosenthal constant with f = V^{1/K}",
    "alpha1_h0": "Const_H⁽⁰⁾ uses α⁽¹⁾_{∞,p} as printed",
    "alpha2_hd": "Const_H^(d) references an undefined α⁽²⁾_{∞,p}; α⁽¹⁾_{∞,p} substituted",
}


def _as_scalars(cert: DriftCertificate | DriftScalars) -> DriftScalars:
    if isinstance(cert, DriftScalars):
        return cert
    return DriftScalars.from_certificate(cert)


def _log(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def _small_set(scalars: DriftScalars, log_radius: float) -> SmallSetEntry:
    radius = max(1.0, _exp(log_radius))
    if scalars.small_set is None:
        raise MissingSmallSetError(radius=radius)
    return scalars.small_set.lookup(radius)


def sup_term(c: float, delta: float) -> float:
    """sup_{r>0}(cr^δ − r): attained at r* = (cδ)^{1/(1−δ)} for δ < 1."""
    if delta < 1.0:
        r_star = (c * delta) ** (1.0 / (1.0 - delta))
        return c * r_star**delta - r_star
    return 0.0 if c <= 1.0 else math.inf


def ergodic_scalars(cert: DriftCertificate | DriftScalars) -> ErgodicScalars:
    """λ, b̃ = log b + sup(cr^δ − r) and b′ = log(b/(1−λ)) + sup(cr^δ − r).

    At δ = 1 and c > 1 the supremum is infinite; the result is flagged rather
    than raised.

    Example:
        ```python
        scalars = DriftScalars(c=1.0, b=math.e, delta=0.5, R0=1.0, lam=math.exp(-1))
        ergodic_scalars(scalars).b_tilde  # 1.25
        ```
    """
    s = _as_scalars(cert)
    term = sup_term(s.c, s.delta)
    infinite = math.isinf(term)
    if infinite:
        logger.warning(f"sup(cr^δ − r) is infinite for δ={s.delta}, c={s.c}; b̃ and b′ flagged")
    return ErgodicScalars(
        lam=s.lam,
        sup_term=term,
        b_tilde=math.log(s.b) + term,
        b_prime=math.log(s.b / (1.0 - s.lam)) + term,
        infinite=infinite,
    )


def level_radius(c: float, delta: float) -> float:
    """Smallest R with cR^{δ−1}/2 ≤ 1/2 (0 at δ = 1 when c ≤ 1, inf when c > 1)."""
    if delta < 1.0:
        return c ** (1.0 / (delta - 1.0))
    return 0.0 if c <= 1.0 else math.inf


def poly_drift_constants(cert: DriftCertificate | DriftScalars, gamma: float) -> PolyDrift:
    """(c_γ, b_γ, R_γ) of the polynomial drift condition for W^{γ+1−δ}.

    Raises:
        RangeViolationError: If gamma ≤ 0
    """
    if gamma <= 0.0:
        raise RangeViolationError("gamma must be positive", parameter="gamma")
    s = _as_scalars(cert)
    power = gamma + 1.0 - s.delta
    if gamma <= s.delta:
        R = s.R0
        c_gamma = min(1.0, power * s.c)
        base = max(math.log(s.b), 0.0)
        if s.b < 1.0:
            logger.warning(f"log b = {math.log(s.b):.6g} < 0 clamped to 0 in b_{gamma:g}")
    else:
        R = max(s.R0, (2.0 * power / s.c) ** (1.0 / s.delta), level_radius(s.c, s.delta))
        if math.isinf(R):
            raise HypothesisFailedError("R_γ is infinite (δ = 1 with c > 1)", hypothesis="c <= 1")
        shift = math.exp(gamma - s.delta)
        base = max(math.log(s.b + shift), R + shift)
        c_gamma = min(1.0, power * (1.0 - s.c * R ** (s.delta - 1.0) / 2.0) ** (gamma - s.delta) * (s.c / 2.0))
    log_b = power * math.log(base) if base > 0.0 else -math.inf
    return PolyDrift(gamma=gamma, c_gamma=c_gamma, b_gamma=_exp(log_b), R_gamma=R, log_b_gamma=log_b)


def log_psi(cert: DriftCertificate | DriftScalars, gamma_tilde: float, gamma: float) -> float:
    """log ψ(γ̃) for the W^γ Rosenthal bound.

    ψ(γ̃) = 8ε_R̃⁻¹{(b_γ̃/c_γ̃)m_R̃ + R̃^{γ+1−δ}} + 2[b_{γ̃+1−δ}/c_{γ̃+1−δ} + 1]
    with R̃ = (2b_γ̃/c_γ̃)^{1/γ̃} ∨ R_γ̃.

    Raises:
        MissingSmallSetError: If no small set covers R̃
    """
    s = _as_scalars(cert)
    first = poly_drift_constants(s, gamma_tilde)
    second = poly_drift_constants(s, gamma_tilde + 1.0 - s.delta)
    ratio = first.log_b_gamma - math.log(first.c_gamma)
    log_radius = max((LOG_2 + ratio) / gamma_tilde, _log(first.R_gamma))
    entry = _small_set(s, log_radius)

    inner = np.logaddexp(ratio + math.log(entry.m), (gamma + 1.0 - s.delta) * log_radius)
    tail = np.logaddexp(second.log_b_gamma - math.log(second.c_gamma), 0.0)
    return float(np.logaddexp(math.log(8.0) - math.log(entry.eps) + inner, LOG_2 + tail))


def rosenthal_general(C_f: float, C_W: float, pi_Wp: float, p: float) -> float:
    """6^p C_f^p {C_W + π(𝒲^p)}(p^p + 2)."""
    return 6.0**p * C_f**p * (C_W + pi_Wp) * (p**p + 2.0)


def _log_p_term(p: float) -> float:
    """log(p^p + 2)."""
    return float(np.logaddexp(p * math.log(p), LOG_2))


def rosenthal_constants(cert: DriftCertificate | DriftScalars, p: float, gamma: float) -> RosenthalConstants:
    """C_f = ψ(γ), C_W = ψ(p(γ+1−δ)) and C_ros for f = W^γ.

    Raises:
        RangeViolationError: If p < 2
        MissingSmallSetError: If a required small set is missing
    """
    if p < 2.0:
        raise RangeViolationError(f"Rosenthal constants need p ≥ 2, got {p}", parameter="p")
    s = _as_scalars(cert)
    lifted = p * (gamma + 1.0 - s.delta)
    base = poly_drift_constants(s, gamma)
    top = poly_drift_constants(s, lifted)
    log_cf = log_psi(s, gamma, gamma)
    log_cw = log_psi(s, lifted, gamma)

    log_c = math.log(base.c_gamma) + math.log(top.c_gamma)
    log_bracket = float(np.logaddexp(log_cw, top.log_b_gamma - p * math.log(base.c_gamma) - math.log(top.c_gamma)))
    log_ros = p * math.log(6.0) + p * log_cf + log_bracket + _log_p_term(p) - log_c
    return RosenthalConstants(
        p=p,
        gamma=gamma,
        C_f=_exp(log_cf),
        C_W=_exp(log_cw),
        C_ros=_exp(log_ros),
        log_C_ros=log_ros,
    )


def log_phi(cert: DriftCertificate | DriftScalars, tau: float) -> float:
    """log φ(τ̃) for the V^{1/τ̃} Rosenthal bound.

    φ(τ̃) = 8ε_R⁻¹{q m_R + 2q} + 2[b/(1−λ) + 1], q = b^{1/τ̃}/(1−λ^{1/τ̃}),
    at the radius R = R0 ∨ log[2^τ̃ b/(1−λ^{1/τ̃})^τ̃].
    """
    s = _as_scalars(cert)
    log_gap = math.log1p(-(s.lam ** (1.0 / tau)))
    log_q = math.log(s.b) / tau - log_gap
    radius = max(s.R0, tau * LOG_2 + math.log(s.b) - tau * log_gap)
    entry = _small_set(s, _log(radius))
    inner = log_q + float(np.logaddexp(math.log(entry.m), LOG_2))
    tail = math.log(s.b / (1.0 - s.lam) + 1.0)
    return float(np.logaddexp(math.log(8.0) - math.log(entry.eps) + inner, LOG_2 + tail))


def rosenthal_constants_V(cert: DriftCertificate | DriftScalars, p: float) -> RosenthalConstantsV:
    """C_f = φ(p), C_W = φ(1) and D_ros for f = V^{1/p}.

    Raises:
        RangeViolationError: If p < 1
        MissingSmallSetError: If a required small set is missing
    """
    if p < 1.0:
        raise RangeViolationError(f"D_ros needs p ≥ 1, got {p}", parameter="p")
    s = _as_scalars(cert)
    log_cf = log_phi(s, p)
    log_cw = log_phi(s, 1.0)
    log_bracket = float(np.logaddexp(log_cw, math.log(s.b / (1.0 - s.lam))))
    log_dros = (
        p * math.log(6.0)
        + p * log_cf
        + log_bracket
        + _log_p_term(p)
        - math.log1p(-s.lam)
        - math.log1p(-(s.lam ** (1.0 / p)))
    )
    return RosenthalConstantsV(p=p, C_f_V=_exp(log_cf), C_W_V=_exp(log_cw), D_ros=_exp(log_dros), log_D_ros=log_dros)


def stability_constants(
    matrix: MatrixScalars,
    cert: DriftCertificate | DriftScalars,
    *,
    C_A: float,
    beta: float,
    p: float,
    epsilon: float = 0.5,
    m: int = 0,
) -> StabilityConstants:
    """C⁽⁰⁾, C⁽¹⁾, C_p⁽²⁾, r_A, h, α_{∞,p} and C_{st,p} of the product bound.

    α_{∞,p} is the minimum of its seven terms, evaluated in log space (2^h
    overflows for realistic h); ``alpha_inf`` may underflow to 0 while
    ``log_alpha_inf`` stays exact.

    Raises:
        HypothesisFailedError: If β violates 0 < β < min(2δ−1, δ/(1+ε)) or b̃ is infinite
        MissingSmallSetError: If a required small set is missing
    """
    s = _as_scalars(cert)
    if not 0.0 < epsilon < 1.0:
        raise HypothesisFailedError("epsilon must lie in (0, 1)", hypothesis="epsilon")
    beta_cap = min(2.0 * s.delta - 1.0, s.delta / (1.0 + epsilon))
    if not 0.0 < beta < beta_cap:
        raise HypothesisFailedError(f"beta must lie in (0, {beta_cap:.6g})", hypothesis="beta")
    scalars = ergodic_scalars(s)
    if scalars.infinite:
        raise HypothesisFailedError("b̃ is infinite (δ = 1 with c > 1)", hypothesis="b_tilde")

    root_kappa = math.sqrt(matrix.kappa_q)
    d, a = matrix.d, matrix.a
    C0 = 0.5 * root_kappa * matrix.norm_a**2 * math.exp(matrix.norm_a + a)
    C1 = (root_kappa * d * math.exp(a) * C_A) ** (1.0 + epsilon) / (1.0 + epsilon)
    r_A = (1.0 - s.delta) / (2.0 * s.delta - 1.0 - beta)
    p_tilde = max(p, r_A / 4.0)
    ros = rosenthal_constants(s, 4.0 * p_tilde, beta)
    C2p = root_kappa * math.exp(a) * d * C_A * math.exp((math.log(4.0) + ros.log_C_ros) / (4.0 * p_tilde))

    h_real = (12.0 * C2p * (scalars.b_tilde - math.log1p(-s.lam)) / a) ** 2
    if not math.isfinite(h_real):
        raise HypothesisFailedError("Block length h overflows double precision", hypothesis="h")
    h = max(1, math.ceil(h_real))
    log_h = math.log(h)
    terms = [
        -math.log(a),
        -log_h,
        -math.log(2.0 * matrix.norm_a_q**2 * matrix.norm_q),
        math.log(a) - math.log(12.0 * C0) - log_h,
        (math.log(a) - math.log(12.0 * C1) - h * LOG_2) / epsilon if C1 > 0.0 else math.inf,
        (math.log(min(s.c, 0.5)) - math.log(2.0 * p * C1) - h * LOG_2) / (1.0 + epsilon)
        if C1 > 0.0
        else math.inf,
        math.log(min(s.c, 1.0)) - math.log(4.0 * p * C2p) - 0.5 * log_h if C2p > 0.0 else math.inf,
    ]
    log_alpha = min(terms)
    alpha_h = math.exp(log_alpha + log_h)
    C_st = root_kappa * math.exp(1.25 * a * alpha_h) * (
        s.lam ** (m / (2.0 * p)) + (s.b / (1.0 - s.lam)) ** (1.0 / (2.0 * p))
    )
    if log_alpha < -745.0:
        logger.warning(f"α_∞,{p:g} underflows double precision (log α = {log_alpha:.6g})")
    return StabilityConstants(
        p=p,
        C0=C0,
        C1=C1,
        C2p=C2p,
        r_A=r_A,
        p_tilde=p_tilde,
        h=h,
        alpha_inf=math.exp(log_alpha),
        log_alpha_inf=log_alpha,
        log_alpha_terms=terms,
        C_st=C_st,
    )


def moment_scale_constants(
    *,
    d: int,
    C_A: float,
    C_bK: float,
    beta: float,
    K: int,
    norm_a: float,
    norm_b: float,
    theta_star_norm: float,
    lam: float,
    b: float,
) -> dict[str, float]:
    """Const_ε̄, C̄_A, C̄_b and C̄_ε̄ of the noise moment bounds."""
    growth = (beta * K / math.e) ** beta
    drift_factor = (1.0 + b / (1.0 - lam)) ** (1.0 / K)
    CbarA = norm_a + d * C_A * growth * drift_factor
    Cbarb = norm_b + d * C_bK * drift_factor
    return {
        "C_eps": math.sqrt(d) * C_bK + 2.0 * d * growth * C_A * theta_star_norm,
        "CbarA": CbarA,
        "Cbarb": Cbarb,
        "CbarEps": CbarA * theta_star_norm + Cbarb,
    }


def check_expansion_range(p: float, K: int, order: int) -> None:
    """Raise RangeViolationError unless (p, K) admit the error expansion of this order."""
    if order == 1:
        if K < 8 or not 2.0 <= p <= K / 4.0:
            raise RangeViolationError(f"First-order constants need K ≥ 8 and 2 ≤ p ≤ K/4 (p={p}, K={K})", parameter="p")
    elif order == 2:
        if K < 32 or not 2.0 <= p <= K / 16.0:
            raise RangeViolationError(f"Second-order constants need K ≥ 32 and 2 ≤ p ≤ K/16 (p={p}, K={K})", parameter="p")
    else:
        raise RangeViolationError("order must be 1 or 2", parameter="order")


def lsa_constants(
    stability_2p: StabilityConstants,
    cert: DriftCertificate | DriftScalars,
    matrix: MatrixScalars,
    *,
    C_A: float,
    C_bK: float,
    K: int,
    beta: float,
    theta_star_norm: float,
    norm_b: float,
    c_alpha: float,
    p: float,
    order: int = 2,
) -> LsaConstants:
    """Constant chain of the LSA error expansion bounds.

    ``order=1`` evaluates the first-order constants only (K ≥ 8, 2 ≤ p ≤ K/4);
    ``order=2`` adds the second-order chain (K ≥ 32, 2 ≤ p ≤ K/16).

    Raises:
        RangeViolationError: If p or K is outside the admissible range
        HypothesisFailedError: If (B_V, ρ) are missing
    """
    check_expansion_range(p, K, order)
    s = _as_scalars(cert)
    if s.rho is None or s.B_V is None:
        raise HypothesisFailedError("Ergodicity constants (B_V, ρ) are required", hypothesis="ergodicity")

    d, a, kappa, norm_a = matrix.d, matrix.a, matrix.kappa_q, matrix.norm_a
    alpha0 = min(stability_2p.alpha_inf, s.rho, math.exp(-1.0))
    alpha1 = min(alpha0, 1.0 / (2.0 * c_alpha)) if c_alpha > 0.0 else alpha0
    scale = moment_scale_constants(
        d=d, C_A=C_A, C_bK=C_bK, beta=beta, K=K, norm_a=norm_a, norm_b=norm_b,
        theta_star_norm=theta_star_norm, lam=s.lam, b=s.b,
    )
    dros_p = rosenthal_constants_V(s, p)
    dros_4p = rosenthal_constants_V(s, 4.0 * p)
    j_factor = d * kappa * scale["C_eps"] * (2.0 + 4.0 * (c_alpha + 2.0 * norm_a) / a + 2.0 / math.sqrt(a))
    root_dros_p = math.exp(dros_p.log_D_ros / p)
    J0 = j_factor * root_dros_p
    J0_4p = j_factor * math.exp(dros_4p.log_D_ros / (4.0 * p))
    H0 = 16.0 * math.sqrt(1.0 + alpha1 * c_alpha) * stability_2p.C_st * J0_4p * scale["CbarA"] / a
    constants = LsaConstants(
        p=p,
        K=K,
        alpha_inf0=alpha0,
        alpha_inf1=alpha1,
        C_eps=scale["C_eps"],
        CbarA=scale["CbarA"],
        Cbarb=scale["Cbarb"],
        CbarEps=scale["CbarEps"],
        ConstJ0=J0,
        ConstJ0_4p=J0_4p,
        ConstH0=H0,
    )
    if order == 1:
        return constants

    root_kappa = math.sqrt(kappa)
    S = 24.0 * kappa * d * root_dros_p * (C_A + norm_a) * norm_a
    B = d**1.5 * (
        2.0 * s.B_V * scale["C_eps"] / math.sqrt(1.0 - s.rho) + 2.0 * scale["CbarEps"] * 18.0 * math.sqrt(2.0) * p
    )
    c1 = 8.0 * scale["CbarEps"] * S * root_kappa / a**2
    c2 = 4.0 * B * S * root_kappa / a
    c3 = 8.0 * root_kappa * S * scale["CbarEps"] * s.B_V ** (1.0 / (4.0 * p)) / a
    c4 = 2.0 * c1 + 2.0 * math.sqrt(math.e) * c2 / a + math.sqrt(2.0 * math.pi) * math.e * c3 / a**1.5
    c5 = (3.0 * c1 + 2.0 * c2 / math.sqrt(a) + 4.0 * c3 / a) * (math.sqrt(c_alpha) + 1.0)
    log_inv_rho = -math.log(s.rho)
    J1f = 2.0 * math.sqrt(p) * c4 / math.sqrt(log_inv_rho)
    J1d = 2.0 * math.sqrt(p) * c5 / log_inv_rho
    Hf = 8.0 * J1f * scale["CbarA"] * stability_2p.C_st / a
    Hd = 16.0 * J1d * scale["CbarA"] * stability_2p.C_st * (1.0 + c_alpha * alpha1) / a
    return constants.model_copy(
        update={
            "ConstS": S,
            "ConstB": B,
            "Const1": c1,
            "Const2": c2,
            "Const3": c3,
            "Const4": c4,
            "Const5": c5,
            "ConstJ1f": J1f,
            "ConstJ1d": J1d,
            "ConstH1f": Hf,
            "ConstH1d": Hd,
            "Cf": Hf + J1f,
            "Cd": Hd + J1d,
        }
    )


def _beta_condition(beta: float, tau: int, c: float, delta: float) -> float:
    return (1.0 - tau * beta) * (tau * beta * c) ** delta - beta


def solve_beta0(tau: int, c: float, delta: float) -> float:
    """inf{β ∈ (1/(2τ), 1/τ): (1−τβ)(τβc)^δ ≤ β} by grid scan then brentq.

    Raises:
        NoFeasibleBetaError: If the condition never holds on the interval
    """
    lo, hi = 1.0 / (2.0 * tau), 1.0 / tau
    if _beta_condition(lo, tau, c, delta) <= 0.0:
        return lo
    grid = np.linspace(lo, hi, BETA_GRID)[1:-1]
    values = np.array([_beta_condition(beta, tau, c, delta) for beta in grid])
    feasible = np.nonzero(values <= 0.0)[0]
    if feasible.size == 0:
        raise NoFeasibleBetaError(f"(1−τβ)(τβc)^δ ≤ β never holds on ({lo:.6g}, {hi:.6g})")
    i = int(feasible[0])
    left = lo if i == 0 else float(grid[i - 1])
    right = float(grid[i])
    if values[i] == 0.0:
        return right
    return float(brentq(_beta_condition, left, right, args=(tau, c, delta), xtol=1e-15, rtol=4.5e-16))


def _threshold_radius(slope: float, delta: float, log_b: float) -> float:
    """inf{r > 0: r − slope·r^δ − log b > 0}."""
    if log_b < 0.0:
        return 0.0
    if delta == 1.0:
        if slope >= 1.0:
            raise HypothesisFailedError("r − c r − log b never becomes positive for c ≥ 1", hypothesis="c < 1")
        return log_b / (1.0 - slope)

    def gap(r: float) -> float:
        return r - slope * r**delta - log_b

    start = (slope * delta) ** (1.0 / (1.0 - delta))
    end = max(2.0 * start, 1.0)
    while gap(end) <= 0.0:
        end *= 2.0
    return float(brentq(gap, start, end, xtol=1e-14, rtol=4.5e-16))


def _sup_on_interval(f: Callable[[float], float], upper: float) -> float:
    """sup_{0<r<upper} f(r): endpoint limits plus a bounded search."""
    candidates = [f(0.0), f(upper)]
    if upper > 0.0:
        found = minimize_scalar(lambda r: -f(r), bounds=(0.0, upper), method="bounded", options={"xatol": 1e-12})
        candidates.append(-float(found.fun))
    return max(candidates)


def td_constants(
    cert: DriftCertificate | DriftScalars,
    *,
    tau: int,
    gamma: float,
    lambda_trace: float,
    C_psi: float,
    C_RK: float,
    beta: float,
    K: int,
) -> TdConstants:
    """Drift constants of the TD window chain and the TD bounds on Ā and b̄.

    Raises:
        NoFeasibleBetaError: If β₀ does not exist
        HypothesisFailedError: If R1 does not exist (δ = 1 with c ≥ 1)
    """
    if tau < 1:
        raise RangeViolationError("tau must be at least 1", parameter="tau")
    if not 0.0 < gamma < 1.0 or not 0.0 <= lambda_trace < 1.0:
        raise HypothesisFailedError("Need γ ∈ (0, 1) and λ ∈ [0, 1)", hypothesis="discount")
    s = _as_scalars(cert)
    beta0 = solve_beta0(tau, s.c, s.delta)
    c_tilde = (1.0 - tau * beta0) * s.c
    c0 = beta0 * s.c
    R1 = _threshold_radius(c_tilde + tau * c0, s.delta, math.log(s.b))
    R2 = (2.0 * LOG_2 / c_tilde) ** (1.0 / s.delta)
    RP = max(R1, R2)

    def objective(r: float) -> float:
        return math.exp(-c_tilde * r**s.delta + r) + s.b * math.exp(beta0 * s.c * r**s.delta)

    discount = 1.0 - lambda_trace * gamma
    return TdConstants(
        beta0=beta0,
        c_tilde=c_tilde,
        c0=c0,
        cP=c_tilde / 2.0,
        R1=R1,
        R2=R2,
        RP=RP,
        bP=_sup_on_interval(objective, RP),
        CbarA_td=(1.0 + gamma) * C_psi**2 / discount,
        CbarbK_td=C_RK * C_psi * (beta * K / math.e) ** (beta / 2.0) / discount,
    )


def stationary_moment_check(
    model: MarkovModel,
    cert: DriftCertificate,
    gammas: list[float],
) -> StationaryMomentReport:
    """Check π(V) ≤ b/(1−λ) and π(W^γ) ≤ b_γ/c_γ exactly on a finite chain."""
    pi = stationary_exact(model)
    states = pi.states
    scalars = DriftScalars.from_certificate(cert, states)
    W = np.asarray(cert.W(states), dtype=float)
    value = float(pi.expect(np.exp(W)))
    bound = cert.b / (1.0 - scalars.lam)
    entries = [MomentBoundEntry(name="pi(V)", value=value, bound=bound, holds=value <= bound * (1.0 + 1e-12))]
    for gamma in gammas:
        poly = poly_drift_constants(scalars, gamma)
        moment = float(pi.expect(W**gamma))
        limit = poly.b_gamma / poly.c_gamma
        entries.append(
            MomentBoundEntry(
                name=f"pi(W^{gamma:g})",
                value=moment,
                bound=limit,
                holds=moment <= limit * (1.0 + 1e-12),
            )
        )
    return StationaryMomentReport(lam=drift_lambda(cert, states), entries=entries)


def evaluate_constants(inputs: ConstantsInputs) -> tuple[dict[str, float], list[str]]:
    """Run every calculator in dependency order.

    Returns:
        Flat name → value map and the warnings raised on the way
    """
    s, matrix, p = inputs.drift, inputs.matrix, inputs.p
    values: dict[str, float] = {}
    warnings = [SUBSTITUTION_NOTES["psi_eps"], SUBSTITUTION_NOTES["phi_radius"]]

    ergodic = ergodic_scalars(s)
    values.update(lam=ergodic.lam, supTerm=ergodic.sup_term, bTilde=ergodic.b_tilde, bPrime=ergodic.b_prime)
    if ergodic.infinite:
        warnings.append("b̃ and b′ are infinite (δ = 1 with c > 1); remaining constants skipped")
        return values, warnings

    poly = poly_drift_constants(s, inputs.beta)
    values.update(c_gamma=poly.c_gamma, log_b_gamma=poly.log_b_gamma, R_gamma=poly.R_gamma)

    ros = rosenthal_constants(s, p, inputs.beta)
    values.update(C_f=ros.C_f, C_W=ros.C_W, log_C_ros=ros.log_C_ros)
    ros_v = rosenthal_constants_V(s, p)
    values.update(C_f_V=ros_v.C_f_V, C_W_V=ros_v.C_W_V, log_D_ros=ros_v.log_D_ros)

    stability = {}
    for order, suffix in ((p, "P"), (2.0 * p, "2P")):
        result = stability_constants(
            matrix, s, C_A=inputs.C_A, beta=inputs.beta, p=order, epsilon=inputs.epsilon, m=inputs.m_cst
        )
        stability[suffix] = result
        values.update(
            {
                "C0": result.C0,
                "C1": result.C1,
                f"C2_{suffix}": result.C2p,
                "r_A": result.r_A,
                f"h_{suffix}": float(result.h),
                f"log_alphaInf{suffix}": result.log_alpha_inf,
                f"Cst{suffix}": result.C_st,
            }
        )
        if result.log_alpha_inf < -745.0:
            warnings.append(f"α_∞ at p={order:g} underflows double precision; use log_alphaInf{suffix}")

    expansion = None
    if s.rho is None or s.B_V is None:
        warnings.append("LSA constants skipped: ergodicity constants (B_V, ρ) missing")
    else:
        for candidate in (2, 1):
            try:
                check_expansion_range(p, inputs.K, candidate)
            except RangeViolationError:
                continue
            expansion = candidate
            break
        if expansion is None:
            warnings.append(f"LSA constants skipped: p={p:g}, K={inputs.K} outside both expansion ranges")
    if expansion is not None:
        warnings.extend([SUBSTITUTION_NOTES["dros"], SUBSTITUTION_NOTES["alpha1_h0"]])
        if expansion == 2:
            warnings.append(SUBSTITUTION_NOTES["alpha2_hd"])
        chain = lsa_constants(
            stability["2P"], s, matrix, C_A=inputs.C_A, C_bK=inputs.C_bK, K=inputs.K, beta=inputs.beta,
            theta_star_norm=inputs.theta_star_norm, norm_b=inputs.norm_b, c_alpha=inputs.c_alpha, p=p,
            order=expansion,
        )
        values.update(
            {
                name: value
                for name, value in chain.model_dump(exclude={"p", "K"}).items()
                if value is not None
            }
        )

    if inputs.td is not None:
        td = td_constants(
            s, tau=inputs.td.tau, gamma=inputs.td.gamma, lambda_trace=inputs.td.lambda_trace,
            C_psi=inputs.td.C_psi, C_RK=inputs.td.C_RK, beta=inputs.beta, K=inputs.K,
        )
        values.update(td.model_dump())
    return values, warnings


def build_report(inputs: ConstantsInputs, *, tolerance: float = DUAL_TOLERANCE) -> ConstantsReport:
    """Evaluate every constant and cross-check it against the reference evaluator.

    Raises:
        DualEvaluationMismatchError: If any value disagrees beyond ``tolerance``
    """
    from .reference import reference_values

    values, warnings = evaluate_constants(inputs)
    reference = reference_values(inputs)
    worst = 0.0
    for name, value in values.items():
        if name not in reference:
            raise DualEvaluationMismatchError(name=name, gap=math.inf)
        gap = relative_gap(value, reference[name])
        if gap > tolerance:
            raise DualEvaluationMismatchError(name=name, gap=gap)
        worst = max(worst, gap)
    logger.info(f"Constants report: {len(values)} values, max dual gap {worst:.2e}")
    return ConstantsReport(inputs=inputs, values=values, warnings=warnings, max_dual_gap=worst)
