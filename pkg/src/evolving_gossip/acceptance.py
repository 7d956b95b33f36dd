"""The acceptance suite: eleven numbered checks, each with a fixed tolerance.

``run_all`` is what ``evolving-gossip verify`` executes and what
``tests/test_acceptance.py`` asserts on. ``quick=True`` divides the Monte
Carlo budgets by ten but keeps every tolerance.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import analytics, harness, oracle
from .graphs import ModelParams, SeedSpec
from .protocols import ProtocolKind

KINDS = (ProtocolKind.PUSH, ProtocolKind.PULL, ProtocolKind.PUSHPULL)
GAMMA_PUSHPULL_A1 = 0.864665
COND_LIMIT_A1 = 0.632121


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float = 0.0
    details: dict = field(default_factory=dict)
    payload: str | None = field(default=None, repr=False)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title} ({self.seconds:.1f}s)"

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("payload")
        return d


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, SeedSpec):
        return asdict(obj)
    return obj


def _payload(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


def criterion_1(quick: bool = False) -> CriterionResult:
    qs = (1e-4, 1e-3, 0.01, 0.1, 0.3, 0.5, 0.9)
    worst = 0.0
    for M in range(1, 201):
        for q in qs:
            closed = analytics.binomial_reciprocal_sum(M, q)
            direct = analytics.binomial_reciprocal_sum_direct(M, q)
            worst = max(worst, abs(direct - closed) / max(1.0, closed))
    return CriterionResult(1, "binomial reciprocal sum closed form vs direct sum (rel 1e-12)",
                           worst <= 1e-12, details={"max_rel_error": worst})


def criterion_2(quick: bool = False) -> CriterionResult:
    params = ModelParams(2, 1.0)
    values = {k.value: oracle.exact_expected_time(params, k) for k in KINDS}
    ok = all(abs(v - 2.0) <= 1e-9 for v in values.values())
    return CriterionResult(2, "oracle E[T] = 2 for n=2, a=1, all protocols", ok, details=values)


def _grid():
    for n in (3, 4, 5):
        for a in (0.5, 1.0, 2.0):
            params = ModelParams(n, a)
            for k in range(1, n):
                yield params, k


def criterion_3(quick: bool = False) -> CriterionResult:
    worst = 0.0
    for params, k in _grid():
        exact = oracle.exact_pk(params, k, ProtocolKind.PULL)
        worst = max(worst, abs(exact - analytics.pull_success_probability_exact(params, k)))
    return CriterionResult(3, "oracle Pull p_k equals closed form (1e-10)", worst <= 1e-10,
                           details={"max_abs_error": worst})


def criterion_4(quick: bool = False) -> CriterionResult:
    failures = []
    for params, k in _grid():
        exact = oracle.exact_pk(params, k, ProtocolKind.PUSH)
        lo, hi = analytics.push_success_probability_bounds(params, k)
        if not lo <= exact <= hi:
            failures.append({"n": params.n, "a": params.a, "k": k, "lower": lo, "exact": exact, "upper": hi})
    return CriterionResult(4, "oracle Push p_k inside bracket (C0=2, C1=a^2+a)", not failures,
                           details={"failures": failures})


def criterion_5(quick: bool = False, workers: int = 1) -> CriterionResult:
    params = ModelParams(5, 1.0)
    trials = 10_000 if quick else 100_000
    samples = 10_000 if quick else 100_000
    k = 2
    seed = SeedSpec(20_240_501)
    details, reports, ok = {}, {}, True
    for j, kind in enumerate(KINDS):
        est, tail = harness.estimate_spreading_time(params, kind, trials, seed.offset(j * 10**7), workers)
        pk = harness.estimate_pk(params, kind, k, samples, SeedSpec(seed.master_seed, 1_000 + j), workers)
        cov = harness.estimate_pair_covariance(params, kind, k, samples, SeedSpec(seed.master_seed, 2_000 + j),
                                               workers)
        exact_t = oracle.exact_expected_time(params, kind)
        exact_pk = oracle.exact_pk(params, k, kind)
        exact_cov = oracle.exact_pair_covariance(params, k, kind)
        checks = {"time": est.within(exact_t, 4.0), "pk": pk.within(exact_pk, 4.0), "cov": cov.within(exact_cov, 4.0)}
        ok &= all(checks.values())
        details[kind.value] = {
            "mean_T": est.point, "se_T": est.std_error, "exact_T": exact_t,
            "pk": pk.point, "se_pk": pk.std_error, "exact_pk": exact_pk,
            "cov": cov.point, "se_cov": cov.std_error, "exact_cov": exact_cov, "checks": checks}
        reports[kind.value] = [est.to_dict(), tail.to_dict(), pk.to_dict(), cov.to_dict()]
    return CriterionResult(5, "Monte Carlo vs oracle at n=5, a=1 (4 sigma)", ok, details=details,
                           payload=_payload(reports))


def criterion_6(quick: bool = False, workers: int = 1) -> CriterionResult:
    grid = (2**10, 2**12, 2**14)
    trials = 200 if quick else 2000
    seed = SeedSpec(20_240_502)
    details, ok = {}, True
    push_report = None
    for j, kind in enumerate(KINDS):
        rep = harness.fit_leading_constant(kind, 1.0, grid, trials, seed.offset(j * 10**7), workers)
        if kind is ProtocolKind.PUSH:
            push_report = rep
        details[kind.value] = {"gaps": rep.gaps, "spread": rep.spread, "mean_T": rep.mean_T,
                               "predicted": rep.predicted}
        ok &= rep.spread <= 1.5
    control = harness.gaps_against(push_report, ProtocolKind.PULL)
    details["negative_control_push_vs_pull_predictor"] = {"gaps": control.gaps, "growth": control.growth}
    ok &= control.growth >= 2.0
    return CriterionResult(6, "bounded O(1) gap (spread <= 1.5) and negative control (growth >= 2)", ok,
                           details=details)


def criterion_7(quick: bool = False, workers: int = 1) -> CriterionResult:
    params = ModelParams(10_000, 1.0)
    k = 100
    samples = 200 if quick else 2000
    need = 10**4 if quick else 10**5
    est = harness.estimate_conditional_pull_given_push(params, k, samples, SeedSpec(20_240_503), workers)
    events = est.extra["events"]
    ok = events >= need and abs(est.point - COND_LIMIT_A1) <= 0.02 + 3 * est.std_error
    return CriterionResult(7, "P[pull | push] near (1-e^-1)/1 at n=1e4, k=100", ok,
                           details={"estimate": est.point, "clustered_se": est.std_error, "events": events,
                                    "naive_se": est.extra["naive_std_error"]},
                           payload=_payload(est.to_dict()))


def criterion_8(quick: bool = False, workers: int = 1) -> CriterionResult:
    params = ModelParams(1000, 1.0)
    samples = 10**4 if quick else 10**5
    est = harness.estimate_pk(params, ProtocolKind.PUSHPULL, 1, samples, SeedSpec(20_240_504), workers)
    scaled = params.n * est.point
    gamma = analytics.rates(ProtocolKind.PUSHPULL, 1.0)[0]
    ok = abs(scaled - GAMMA_PUSHPULL_A1) <= 0.02 and abs(gamma - GAMMA_PUSHPULL_A1) < 1e-6
    return CriterionResult(8, "n * p_1 near gamma(1) = 0.864665 for Push&Pull", ok,
                           details={"n_p1": scaled, "se": params.n * est.std_error, "gamma": gamma})


def criterion_9(quick: bool = False, workers: int = 1) -> CriterionResult:
    params = ModelParams(2**12, 1.0)
    trials = 1000 if quick else 10_000
    details, ok = {}, True
    for j, kind in enumerate(KINDS):
        _, tail = harness.estimate_spreading_time(params, kind, trials, SeedSpec(20_240_505, j * 10**7), workers)
        mono = all(np.diff(tail.upper_freq) <= 0) and all(np.diff(tail.lower_freq) <= 0)
        good = mono and tail.fitted_decay_rate > 0 and tail.r_squared >= 0.9
        ok &= bool(good)
        details[kind.value] = {"decay_rate": tail.fitted_decay_rate, "r_squared": tail.r_squared,
                               "fit_points": tail.fit_points, "monotone": mono, "mean_T": tail.mean_T}
    return CriterionResult(9, "tail frequencies monotone, decay rate > 0, R^2 >= 0.9", ok, details=details)


def criterion_10(quick: bool = False) -> CriterionResult:
    details, ok = {}, True
    for a in (0.5, 1.0, 2.0):
        scaled = [n * abs(analytics.isolation_probability_exact(n, a / n) - math.exp(-a))
                  for n in (10**2, 10**3, 10**4, 10**5)]
        diffs = np.diff(scaled)
        monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
        # first-order term: e^-a (a - a^2/2) / n, so n*gap stays below a(1+a)
        bounded = max(scaled) <= a * (1 + a)
        ok &= monotone and bounded
        details[str(a)] = {"n_times_gap": scaled, "monotone": monotone, "bounded": bounded}
    return CriterionResult(10, "n * |isolation - e^-a| monotone and bounded", ok, details=details)


def criterion_11(quick: bool = False, reference: dict[int, str] | None = None) -> CriterionResult:
    """Repeat criteria 5 and 7 with two workers; outputs must match byte for byte."""
    reference = dict(reference or {})
    for number, fn in ((5, criterion_5), (7, criterion_7)):
        if number not in reference:
            reference[number] = fn(quick, workers=1).payload
    same = {}
    for number, fn in ((5, criterion_5), (7, criterion_7)):
        same[str(number)] = fn(quick, workers=2).payload == reference[number]
    return CriterionResult(11, "criteria 5 and 7 byte-identical for workers=1 and workers=2", all(same.values()),
                           details=same)


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_criterion(number: int, quick: bool = False, **kwargs) -> CriterionResult:
    start = time.perf_counter()
    result = CRITERIA[number](quick, **kwargs)
    result.seconds = time.perf_counter() - start
    return result


def run_all(quick: bool = False, only=None, echo: Callable[[str], None] | None = print) -> list[CriterionResult]:
    numbers = sorted(CRITERIA) if only is None else sorted(only)
    results: dict[int, CriterionResult] = {}
    for number in numbers:
        if number == 11:
            ref = {m: results[m].payload for m in (5, 7) if m in results}
            res = run_criterion(11, quick, reference=ref)
        else:
            res = run_criterion(number, quick)
        results[number] = res
        if echo:
            echo(res.line())
    return [results[n] for n in numbers]
