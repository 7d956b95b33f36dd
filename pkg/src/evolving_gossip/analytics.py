"""Closed forms and leading-order spreading-time predictors.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Literal, Sequence

from .graphs import ModelParams
from .protocols import ProtocolKind


@dataclass(frozen=True)
class HomogeneousRoundStats:
    """Success probability ``p_k`` and covariance bound ``c_k`` for a round starting with ``k`` informed."""

    n: int
    k: int
    p_k: float
    c_k: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p_k <= 1.0:
            raise ValueError(f"p_k={self.p_k} outside [0, 1]")
        if self.c_k < 0:
            raise ValueError(f"c_k={self.c_k} must be >= 0")
        if not 0 < self.k < self.n:
            raise ValueError(f"k={self.k} must lie in (0, n={self.n})")

    @property
    def mu(self) -> float:
        return self.k / self.n

    @property
    def u(self) -> int:
        return self.n - self.k


@dataclass(frozen=True)
class PredictorResult:
    protocol: str
    n: int
    a: float
    variant: str
    growth_rate: float
    shrink_rate: float
    growth_term: float
    shrink_term: float
    total_leading: float
    note: str = "leading terms only; the additive O(1) constant is not included"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ConditionParams:
    """Phase fractions and the three slack constants of the growth/shrinking conditions.

    ``a_cond``, ``b_cond`` and ``c_cond`` are the condition constants, renamed
    so they don't collide with the edge parameter ``a``.
    """

    f: float = 0.5
    g: float = 0.5
    a_cond: float = 1.0
    b_cond: float = 1.0
    c_cond: float = 10.0

    def __post_init__(self):
        if not (0 < self.f < 1 and 0 < self.g < 1):
            raise ValueError("f and g must lie in (0, 1)")
        if min(self.a_cond, self.b_cond, self.c_cond) < 0:
            raise ValueError("condition constants must be nonnegative")


@dataclass
class ConditionReport:
    passed: bool
    side: str
    phase: str
    rate: float
    checked: int
    violation_k: int | None = None
    reason: str | None = None
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def isolation_probability_exact(n: int, p: float) -> float:
    """Probability that a fixed node of G(n, p) has no neighbor: (1-p)^(n-1)."""
    if n < 2 or not 0.0 <= p <= 1.0:
        raise ValueError(f"need n >= 2 and p in [0, 1], got n={n}, p={p}")
    return (1.0 - p) ** (n - 1)


def isolation_probability_limit(a: float) -> float:
    return math.exp(-a)


def binomial_reciprocal_sum(M: int, q: float) -> float:
    """Closed form of E[1/(1+X)] for X ~ Bin(M-1, q), i.e. (1-(1-q)^M)/(Mq).

    At q = 0 the continuous extension 1 is returned.
    """
    if M < 1 or not 0.0 <= q <= 1.0:
        raise ValueError(f"need M >= 1 and q in [0, 1], got M={M}, q={q}")
    if q == 0.0:
        return 1.0
    if q == 1.0:
        return 1.0 / M
    # expm1/log1p keep full precision when M*q is small
    return -math.expm1(M * math.log1p(-q)) / (M * q)


def binomial_reciprocal_sum_direct(M: int, q: float) -> float:
    """Term-by-term evaluation of sum_i C(M-1, i) q^i (1-q)^(M-1-i) / (i+1)."""
    if M < 1 or not 0.0 <= q <= 1.0:
        raise ValueError(f"need M >= 1 and q in [0, 1], got M={M}, q={q}")
    terms = [math.comb(M - 1, i) * q**i * (1.0 - q) ** (M - 1 - i) / (i + 1) for i in range(M)]
    return math.fsum(terms)


def pull_success_probability_exact(params: ModelParams, k: int) -> float:
    """Exact Pull p_k: a non-isolated node asks a uniform one of the other n-1 nodes."""
    n = params.n
    if k == 0:
        return 0.0
    if not 1 <= k <= n - 1:
        raise ValueError(f"k={k} outside [1, n-1]")
    return (1.0 - isolation_probability_exact(n, params.p)) * k / (n - 1)


def pull_covariance_bound(params: ModelParams, k: int) -> float:
    """Upper bound p_k^2 * p/(1-p) on the Pull pair covariance.

    Conditioning one node on success can only make the pair edge less likely,
    and dropping that edge raises the other node's success by at most 1/(1-p).
    """
    if params.p >= 1.0:
        return 0.0
    pk = pull_success_probability_exact(params, k)
    return pk * pk * params.p / (1.0 - params.p)


def pull_given_single_informed_neighbor(params: ModelParams, mu: float) -> float:
    """P[pull succeeds | exactly one informed neighbor] with k = mu*n informed nodes."""
    n, a = params.n, params.a
    if not 0.0 < mu < 1.0:
        raise ValueError(f"mu={mu} must lie in (0, 1)")
    M = (1.0 - mu) * n
    if abs(M - round(M)) > 1e-9:
        raise ValueError(f"mu*n must be an integer, got mu*n={mu * n}")
    M = int(round(M))
    return -math.expm1(M * math.log1p(-a / n)) / (a * (1.0 - mu)) if a < n else 1.0 / (a * (1.0 - mu))


def conditional_pull_given_push_limit(a: float) -> float:
    """Small-mu limit of P[pull succeeds | pushed]: (1 - e^-a)/a."""
    if not a > 0:
        raise ValueError(f"a={a} must be positive")
    if a < 1e-8:
        return 1.0 - a / 2.0
    return -math.expm1(-a) / a


@dataclass(frozen=True)
class PushBoundConstants:
    """Slack constants for the Push success bracket.

    ``c0`` fills the O(1) in the lower bound, ``c1`` the O(1/n) in the upper
    one; ``c1=None`` means a^2 + a.
    """

    c0: float = 2.0
    c1: float | None = None

    def upper_slack(self, a: float) -> float:
        return a * a + a if self.c1 is None else self.c1


def push_success_probability_bounds(params: ModelParams, k: int,
                                    constants: PushBoundConstants = PushBoundConstants()) -> tuple[float, float]:
    """(lower, upper) bracket for the probability an uninformed node is pushed."""
    n, a = params.n, params.a
    if not 1 <= k <= n - 1:
        raise ValueError(f"k={k} outside [1, n-1]")
    mu = k / n
    s = -math.expm1(-a)
    lower = mu * s * (1.0 - (k + constants.c0) / (2.0 * n) * s)
    upper = mu * (s + constants.upper_slack(a) / n)
    return lower, upper


def rates(kind: ProtocolKind, a: float, n: int | None = None) -> tuple[float, float]:
    """Growth and shrink rates (gamma, rho).

    With ``n=None`` the asymptotic constants are returned. With ``n`` given the
    finite-n versions are used: exact isolation probability in place of e^-a,
    and the exact single-informed-neighbor pull probability for Push&Pull.
    These differ from the asymptotic ones by O(1/n).
    """
    kind = ProtocolKind.parse(kind)
    if not a > 0:
        raise ValueError(f"a={a} must be positive")
    if n is None:
        s = -math.expm1(-a)
        iso = math.exp(-a)
        cond = conditional_pull_given_push_limit(a)
        gamma_pull = s
        push_shrink = s
    else:
        params = ModelParams(n, a)
        iso = isolation_probability_exact(n, params.p)
        s = 1.0 - iso
        gamma_pull = s * n / (n - 1)
        cond = binomial_reciprocal_sum(n - 1, params.p)
        # probability a fixed node is hit by none of n-1 informed pushers
        push_shrink = -(n - 1) * math.log1p(-s / (n - 1))
    pull_shrink = -math.log(iso) if iso > 0 else math.inf
    if kind is ProtocolKind.PUSH:
        return gamma_pull, push_shrink
    if kind is ProtocolKind.PULL:
        return gamma_pull, pull_shrink
    # push and pull both succeed w.p. gamma_pull*mu; they overlap with conditional probability cond
    return 2.0 * gamma_pull - gamma_pull * cond, pull_shrink


def predict_expected_time(kind: ProtocolKind, params: ModelParams,
                          variant: Literal["asymptotic", "finite"] = "asymptotic") -> PredictorResult:
    """log_{1+gamma}(n) + ln(n)/rho, without the unknown additive constant."""
    kind = ProtocolKind.parse(kind)
    if params.n < 3:
        raise ValueError("predictor needs n >= 3")
    gamma, rho = rates(kind, params.a, None if variant == "asymptotic" else params.n)
    ln_n = math.log(params.n)
    growth = ln_n / math.log1p(gamma)
    shrink = ln_n / rho
    return PredictorResult(kind.value, params.n, params.a, variant, gamma, rho, growth, shrink, growth + shrink)


def check_growth_conditions(stats: Sequence[HomogeneousRoundStats], gamma: float, cond: ConditionParams,
                            side: Literal["upper", "lower"] = "upper") -> ConditionReport:
    """Pointwise check of the exponential growth conditions for every k < f*n.

    upper: p_k >= gamma*mu*(1 - a_cond*mu - b_cond/ln n); lower: p_k <= gamma*mu*(1 + a_cond*mu + b_cond/ln n).
    Both sides require c_k <= c_cond*k/n^2.
    """
    report = ConditionReport(True, side, "growth", gamma, 0)
    if side == "upper" and cond.a_cond * cond.f >= 1:
        report.warnings.append("a_cond*f >= 1; upper growth conditions are not well-posed")
    relevant = [st for st in stats if st.k < cond.f * st.n]
    if not relevant:
        report.warnings.append("no stats with k < f*n; passing vacuously")
        warnings.warn(report.warnings[-1])
        return report
    for st in relevant:
        report.checked += 1
        mu, ln_n = st.mu, math.log(st.n)
        if side == "upper":
            bound = gamma * mu * (1 - cond.a_cond * mu - cond.b_cond / ln_n)
            ok = st.p_k >= bound
            rel = ">="
        else:
            bound = gamma * mu * (1 + cond.a_cond * mu + cond.b_cond / ln_n)
            ok = st.p_k <= bound
            rel = "<="
        if not ok:
            return _fail(report, st.k, f"p_k={st.p_k:.6g} not {rel} {bound:.6g}")
        cov_bound = cond.c_cond * st.k / st.n**2
        if st.c_k > cov_bound:
            return _fail(report, st.k, f"c_k={st.c_k:.6g} exceeds {cov_bound:.6g}")
    return report


def check_shrink_conditions(stats: Sequence[HomogeneousRoundStats], rho: float, cond: ConditionParams,
                            side: Literal["upper", "lower"] = "upper") -> ConditionReport:
    """Pointwise check of the exponential shrinking conditions for every u = n-k <= g*n.

    upper: 1-p_k <= e^-rho + a_cond*u/n; lower: 1-p_k >= e^-rho - a_cond*u/n. Both require c_k <= c_cond/u.
    """
    report = ConditionReport(True, side, "shrink", rho, 0)
    if side == "upper" and math.exp(-rho) + cond.a_cond * cond.g >= 1:
        report.warnings.append("e^-rho + a_cond*g >= 1; upper shrinking conditions are not well-posed")
    relevant = [st for st in stats if st.u <= cond.g * st.n]
    if not relevant:
        report.warnings.append("no stats with n-k <= g*n; passing vacuously")
        warnings.warn(report.warnings[-1])
        return report
    base = math.exp(-rho)
    for st in relevant:
        report.checked += 1
        miss = 1.0 - st.p_k
        slack = cond.a_cond * st.u / st.n
        if side == "upper" and miss > base + slack:
            return _fail(report, st.k, f"1-p_k={miss:.6g} exceeds {base + slack:.6g}")
        if side == "lower" and miss < base - slack:
            return _fail(report, st.k, f"1-p_k={miss:.6g} below {base - slack:.6g}")
        if st.c_k > cond.c_cond / st.u:
            return _fail(report, st.k, f"c_k={st.c_k:.6g} exceeds {cond.c_cond / st.u:.6g}")
    return report


def _fail(report, k, reason):
    report.passed = False
    report.violation_k = k
    report.reason = reason
    return report


def pull_round_stats(params: ModelParams, ks: Sequence[int] | None = None) -> list[HomogeneousRoundStats]:
    """Exact Pull p_k with the covariance bound, for every k (or the given ones)."""
    ks = range(1, params.n) if ks is None else ks
    return [HomogeneousRoundStats(params.n, k, pull_success_probability_exact(params, k),
                                  pull_covariance_bound(params, k)) for k in ks]
