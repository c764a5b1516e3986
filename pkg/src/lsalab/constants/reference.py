"""Second, independent evaluation of every reported constant.

Formulas are written out from their printed form without calling the primary
calculator; root finding and maximization use bisection, golden-section
search and a uniform grid instead of scipy. build_report compares the two
evaluations key by key.
"""

import logging
import math

from ..common.exceptions import HypothesisFailedError, MissingSmallSetError, NoFeasibleBetaError
from .models import ConstantsInputs, DriftScalars, MatrixScalars

logger = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SEARCH_ITERATIONS = 200
MAX_GRID = 4001


def _logsum(*logs: float) -> float:
    top = max(logs)
    if top == -math.inf:
        return -math.inf
    if top == math.inf:
        return math.inf
    return top + math.log(math.fsum(math.exp(value - top) for value in logs))


def _bisect(f, lo: float, hi: float) -> float:
    """Root of f on [lo, hi] with f(lo) > 0 ≥ f(hi)."""
    for _ in range(SEARCH_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def _golden_max(f, lo: float, hi: float) -> float:
    for _ in range(SEARCH_ITERATIONS):
        x1 = hi - GOLDEN * (hi - lo)
        x2 = lo + GOLDEN * (hi - lo)
        if x1 >= x2:
            break
        if f(x1) < f(x2):
            lo = x1
        else:
            hi = x2
    return f(0.5 * (lo + hi))


class ReferenceEvaluator:
    """Constants of one ConstantsInputs evaluated from the printed formulas."""

    def __init__(self, inputs: ConstantsInputs) -> None:
        self.inputs = inputs
        self.s: DriftScalars = inputs.drift
        self.m: MatrixScalars = inputs.matrix

    # Drift consequences

    def sup_term(self) -> float:
        c, delta = self.s.c, self.s.delta
        if delta == 1.0:
            return 0.0 if c <= 1.0 else math.inf
        r_star = math.exp(math.log(c * delta) / (1.0 - delta))
        return r_star * (1.0 - delta) / delta

    def poly(self, gamma: float) -> tuple[float, float, float]:
        """(c_γ, log b_γ, R_γ)."""
        c, b, delta, R0 = self.s.c, self.s.b, self.s.delta, self.s.R0
        g = gamma + 1.0 - delta
        if gamma <= delta:
            log_b = math.log(b)
            return min(1.0, g * c), (g * math.log(log_b) if log_b > 0.0 else -math.inf), R0
        if delta < 1.0:
            third = math.exp(math.log(c) / (delta - 1.0))
        else:
            third = 0.0 if c <= 1.0 else math.inf
        R = max(R0, math.exp(math.log(2.0 * g / c) / delta), third)
        e_shift = math.exp(gamma - delta)
        arg = max(math.log(b + e_shift), R + e_shift)
        half_rate = 1.0 - 0.5 * c * math.pow(R, delta - 1.0)
        c_gamma = min(1.0, math.exp(math.log(g) + (gamma - delta) * math.log(half_rate) + math.log(0.5 * c)))
        return c_gamma, g * math.log(arg), R

    def _entry(self, radius: float):
        if self.s.small_set is None:
            raise MissingSmallSetError(radius=radius)
        return self.s.small_set.lookup(max(radius, 1.0))

    def log_psi(self, gamma_tilde: float, gamma: float) -> float:
        delta = self.s.delta
        c1, log_b1, R1 = self.poly(gamma_tilde)
        c2, log_b2, _ = self.poly(gamma_tilde + 1.0 - delta)
        log_ratio = log_b1 - math.log(c1)
        log_R = max((math.log(2.0) + log_ratio) / gamma_tilde, math.log(R1) if R1 > 0.0 else -math.inf)
        entry = self._entry(math.exp(log_R) if log_R < 709.0 else math.inf)
        first = math.log(8.0 / entry.eps) + _logsum(log_ratio + math.log(entry.m), (gamma + 1.0 - delta) * log_R)
        second = math.log(2.0) + _logsum(log_b2 - math.log(c2), 0.0)
        return _logsum(first, second)

    def log_phi(self, tau: float) -> float:
        b, lam = self.s.b, self.s.lam
        one_minus = 1.0 - math.exp(math.log(lam) / tau)
        radius = max(self.s.R0, math.log(2.0**tau * b / one_minus**tau) if tau < 1000 else math.inf)
        entry = self._entry(radius)
        log_q = math.log(b) / tau - math.log(one_minus)
        first = math.log(8.0 / entry.eps) + _logsum(log_q + math.log(entry.m), math.log(2.0) + log_q)
        return _logsum(first, math.log(2.0) + math.log(b / (1.0 - lam) + 1.0))

    @staticmethod
    def _log_pp2(p: float) -> float:
        return _logsum(p * math.log(p), math.log(2.0))

    def log_c_ros(self, p: float, gamma: float) -> tuple[float, float, float]:
        """(log C_f, log C_W, log C_ros)."""
        q = p * (gamma + 1.0 - self.s.delta)
        c_g, _, _ = self.poly(gamma)
        c_q, log_b_q, _ = self.poly(q)
        log_cf = self.log_psi(gamma, gamma)
        log_cw = self.log_psi(q, gamma)
        bracket = _logsum(log_cw, log_b_q - p * math.log(c_g) - math.log(c_q))
        total = math.fsum(
            [p * math.log(6.0), p * log_cf, bracket, self._log_pp2(p), -math.log(c_g * c_q)]
        )
        return log_cf, log_cw, total

    def log_d_ros(self, p: float) -> tuple[float, float, float]:
        """(log C_f, log C_W, log D_ros) for f = V^{1/p}."""
        b, lam = self.s.b, self.s.lam
        log_cf = self.log_phi(p)
        log_cw = self.log_phi(1.0)
        bracket = _logsum(log_cw, math.log(b / (1.0 - lam)))
        denominator = math.log((1.0 - lam) * (1.0 - math.exp(math.log(lam) / p)))
        total = math.fsum([p * math.log(6.0), p * log_cf, bracket, self._log_pp2(p), -denominator])
        return log_cf, log_cw, total

    # Products

    def stability(self, p: float) -> dict[str, float]:
        s, mx, inputs = self.s, self.m, self.inputs
        eps, beta = inputs.epsilon, inputs.beta
        if not 0.0 < beta < min(2.0 * s.delta - 1.0, s.delta / (1.0 + eps)):
            raise HypothesisFailedError("beta outside its admissible range", hypothesis="beta")
        sk = math.sqrt(mx.kappa_q)
        C0 = sk * mx.norm_a**2 * math.exp(mx.norm_a + mx.a) / 2.0
        C1 = math.exp((1.0 + eps) * math.log(sk * mx.d * math.exp(mx.a) * inputs.C_A)) / (1.0 + eps) if inputs.C_A > 0.0 else 0.0
        r_A = 0.0 if s.delta == 1.0 else (1.0 - s.delta) / (2.0 * s.delta - 1.0 - beta)
        p4 = 4.0 * max(p, r_A / 4.0)
        _, _, log_ros = self.log_c_ros(p4, beta)
        C2p = sk * math.exp(mx.a) * mx.d * inputs.C_A * math.exp((math.log(4.0) + log_ros) / p4)
        b_tilde = math.log(s.b) + self.sup_term()
        h_real = (12.0 * C2p * (b_tilde - math.log(1.0 - s.lam)) / mx.a) ** 2
        if not math.isfinite(h_real):
            raise HypothesisFailedError("h overflows", hypothesis="h")
        h = max(1, math.ceil(h_real))
        log2 = math.log(2.0)
        candidates = [
            math.log(1.0 / mx.a),
            math.log(1.0 / h),
            -math.log(2.0) - 2.0 * math.log(mx.norm_a_q) - math.log(mx.norm_q),
            math.log(mx.a / (12.0 * h * C0)),
        ]
        if C1 > 0.0:
            candidates.append((math.log(mx.a / (12.0 * C1)) - h * log2) / eps)
            candidates.append((math.log(min(s.c, 0.5) / (2.0 * p * C1)) - h * log2) / (1.0 + eps))
        if C2p > 0.0:
            candidates.append(math.log(min(s.c, 1.0) / (4.0 * p * C2p)) - math.log(h) / 2.0)
        log_alpha = min(candidates)
        alpha_h = math.exp(log_alpha) * h if log_alpha > -700.0 else math.exp(log_alpha + math.log(h))
        C_st = sk * math.exp(5.0 * mx.a * alpha_h / 4.0) * (
            math.exp(inputs.m_cst * math.log(s.lam) / (2.0 * p)) + math.exp(math.log(s.b / (1.0 - s.lam)) / (2.0 * p))
        )
        return {"C0": C0, "C1": C1, "C2p": C2p, "r_A": r_A, "h": float(h), "log_alpha": log_alpha, "C_st": C_st}

    # LSA chain

    def lsa(self, C_st_2p: float, alpha_2p: float, order: int) -> dict[str, float]:
        s, mx, inp = self.s, self.m, self.inputs
        p, K, d, a, kappa, nA = inp.p, inp.K, mx.d, mx.a, mx.kappa_q, mx.norm_a
        ca, rho, B_V = inp.c_alpha, s.rho, s.B_V
        a0 = min(alpha_2p, rho, 1.0 / math.e)
        a1 = a0 if ca == 0.0 else min(a0, 1.0 / (2.0 * ca))
        growth = math.pow(inp.beta * K / math.e, inp.beta)
        root_k = math.pow(1.0 + s.b / (1.0 - s.lam), 1.0 / K)
        C_eps = math.sqrt(d) * inp.C_bK + 2.0 * d * growth * inp.C_A * inp.theta_star_norm
        CbarA = nA + d * inp.C_A * growth * root_k
        Cbarb = inp.norm_b + d * inp.C_bK * root_k
        CbarEps = CbarA * inp.theta_star_norm + Cbarb
        shape = 2.0 + 4.0 * (ca + 2.0 * nA) / a + 2.0 / math.sqrt(a)
        dros_root = math.exp(self.log_d_ros(p)[2] / p)
        J0 = d * kappa * C_eps * shape * dros_root
        J0_4p = d * kappa * C_eps * shape * math.exp(self.log_d_ros(4.0 * p)[2] / (4.0 * p))
        out = {
            "alpha_inf0": a0,
            "alpha_inf1": a1,
            "C_eps": C_eps,
            "CbarA": CbarA,
            "Cbarb": Cbarb,
            "CbarEps": CbarEps,
            "ConstJ0": J0,
            "ConstJ0_4p": J0_4p,
            "ConstH0": 16.0 * math.sqrt(1.0 + a1 * ca) * C_st_2p * J0_4p * CbarA / a,
        }
        if order == 1:
            return out
        sk = math.sqrt(kappa)
        S = 24.0 * kappa * d * dros_root * (inp.C_A + nA) * nA
        B = math.pow(d, 1.5) * (2.0 * B_V * C_eps / math.sqrt(1.0 - rho) + 36.0 * math.sqrt(2.0) * p * CbarEps)
        k1 = 8.0 * CbarEps * S * sk / (a * a)
        k2 = 4.0 * B * S * sk / a
        k3 = 8.0 * sk * S * CbarEps * math.pow(B_V, 1.0 / (4.0 * p)) / a
        k4 = 2.0 * k1 + 2.0 * math.exp(0.5) * k2 / a + math.sqrt(2.0 * math.pi) * math.e * k3 / math.pow(a, 1.5)
        k5 = (math.sqrt(ca) + 1.0) * (3.0 * k1 + 2.0 * k2 / math.sqrt(a) + 4.0 * k3 / a)
        L = math.log(1.0 / rho)
        J1f = 2.0 * math.sqrt(p) * k4 / math.sqrt(L)
        J1d = 2.0 * math.sqrt(p) * k5 / L
        Hf = 8.0 * J1f * CbarA * C_st_2p / a
        Hd = 16.0 * J1d * CbarA * C_st_2p * (1.0 + ca * a1) / a
        out.update(
            ConstS=S, ConstB=B, Const1=k1, Const2=k2, Const3=k3, Const4=k4, Const5=k5,
            ConstJ1f=J1f, ConstJ1d=J1d, ConstH1f=Hf, ConstH1d=Hd, Cf=Hf + J1f, Cd=Hd + J1d,
        )
        return out

    # TD window chain

    def td(self) -> dict[str, float]:
        s, inp, td = self.s, self.inputs, self.inputs.td
        tau, c, delta = td.tau, s.c, s.delta

        def condition(beta: float) -> float:
            return (1.0 - tau * beta) * math.pow(tau * beta * c, delta) - beta

        lo, hi = 0.5 / tau, 1.0 / tau
        if condition(lo) <= 0.0:
            beta0 = lo
        else:
            step = (hi - lo) / 4096
            left, beta0 = lo, None
            for k in range(1, 4096):
                right = lo + k * step
                if condition(right) <= 0.0:
                    beta0 = right if condition(right) == 0.0 else _bisect(condition, left, right)
                    break
                left = right
            if beta0 is None:
                raise NoFeasibleBetaError("no feasible beta0")
        c_tilde = c * (1.0 - tau * beta0)
        c0 = c * beta0
        log_b = math.log(s.b)
        if log_b < 0.0:
            R1 = 0.0
        elif delta == 1.0:
            if c >= 1.0:
                raise HypothesisFailedError("R1 undefined", hypothesis="c < 1")
            R1 = log_b / (1.0 - c)
        else:
            def gap(r: float) -> float:
                return c * math.pow(r, delta) + log_b - r

            start = math.pow(c * delta, 1.0 / (1.0 - delta))
            end = max(2.0 * start, 1.0)
            while gap(end) >= 0.0:
                end *= 2.0
            R1 = _bisect(gap, start, end)
        R2 = math.pow(2.0 * math.log(2.0) / c_tilde, 1.0 / delta)
        RP = max(R1, R2)

        def objective(r: float) -> float:
            rd = math.pow(r, delta)
            return math.exp(r - c_tilde * rd) + s.b * math.exp(c0 * rd)

        grid = [RP * k / (MAX_GRID - 1) for k in range(MAX_GRID)]
        values = [objective(r) for r in grid]
        best = max(range(MAX_GRID), key=values.__getitem__)
        bP = max(values[0], values[-1])
        if 0 < best < MAX_GRID - 1:
            bP = max(bP, _golden_max(objective, grid[best - 1], grid[best + 1]))
        shrink = 1.0 - td.lambda_trace * td.gamma
        return {
            "beta0": beta0,
            "c_tilde": c_tilde,
            "c0": c0,
            "cP": 0.5 * c_tilde,
            "R1": R1,
            "R2": R2,
            "RP": RP,
            "bP": bP,
            "CbarA_td": td.C_psi * td.C_psi * (1.0 + td.gamma) / shrink,
            "CbarbK_td": td.C_RK * td.C_psi * math.pow(inp.beta * inp.K / math.e, inp.beta / 2.0) / shrink,
        }


def _expansion_order(p: float, K: int) -> int | None:
    if K >= 32 and 2.0 <= p <= K / 16.0:
        return 2
    if K >= 8 and 2.0 <= p <= K / 4.0:
        return 1
    return None


def reference_values(inputs: ConstantsInputs) -> dict[str, float]:
    """Every key reported by the primary calculator, evaluated independently."""
    ref = ReferenceEvaluator(inputs)
    s, p = inputs.drift, inputs.p
    sup = ref.sup_term()
    values: dict[str, float] = {
        "lam": s.lam,
        "supTerm": sup,
        "bTilde": math.log(s.b) + sup,
        "bPrime": math.log(s.b) - math.log(1.0 - s.lam) + sup,
    }
    if math.isinf(sup):
        return values
    c_g, log_b_g, R_g = ref.poly(inputs.beta)
    values.update(c_gamma=c_g, log_b_gamma=log_b_g, R_gamma=R_g)

    log_cf, log_cw, log_ros = ref.log_c_ros(p, inputs.beta)
    values.update(C_f=_clip_exp(log_cf), C_W=_clip_exp(log_cw), log_C_ros=log_ros)
    log_cf_v, log_cw_v, log_dros = ref.log_d_ros(p)
    values.update(C_f_V=_clip_exp(log_cf_v), C_W_V=_clip_exp(log_cw_v), log_D_ros=log_dros)
    stab = {}
    for order, suffix in ((p, "P"), (2.0 * p, "2P")):
        stab[suffix] = ref.stability(order)
        values.update(
            {
                "C0": stab[suffix]["C0"],
                "C1": stab[suffix]["C1"],
                f"C2_{suffix}": stab[suffix]["C2p"],
                "r_A": stab[suffix]["r_A"],
                f"h_{suffix}": stab[suffix]["h"],
                f"log_alphaInf{suffix}": stab[suffix]["log_alpha"],
                f"Cst{suffix}": stab[suffix]["C_st"],
            }
        )

    expansion = _expansion_order(p, inputs.K) if s.rho is not None and s.B_V is not None else None
    if expansion is not None:
        values.update(ref.lsa(stab["2P"]["C_st"], math.exp(stab["2P"]["log_alpha"]), expansion))
    if inputs.td is not None:
        values.update(ref.td())
    logger.debug(f"Reference evaluation produced {len(values)} values")
    return values


def _clip_exp(value: float) -> float:
    return math.exp(value) if value < 709.0 else math.inf
