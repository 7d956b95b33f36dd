"""Monte Carlo estimators over full spreads and single rounds.

Work is split into fixed-size chunks keyed by seed, then merged in chunk
order, so every report depends only on its inputs and the seed, never on the
number of worker processes.

Seeding: trial ``i`` of a spreading-time experiment runs with
``seed.offset(i)``, so any single trace can be replayed with
:func:`protocols.run_to_completion`. Single-round chunk ``c`` draws from
``seed.generator(c)``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import _kernels
from .analytics import predict_expected_time
from .graphs import ModelParams, SeedSpec
from .protocols import (ProtocolKind, RoundLimitExceeded, SpreadTrace, default_max_rounds,
                        run_to_completion)

TRIAL_CHUNK = 500
SAMPLE_CHUNK = 20_000
MIN_TAIL_HITS = 30
Z95 = 1.959963984540054


class InsufficientConditioningEvents(RuntimeError):
    pass


@dataclass(frozen=True)
class EstimateReport:
    point: float
    std_error: float
    ci95: tuple[float, float]
    samples: int
    seed: SeedSpec
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_point(cls, point, se, samples, seed, **extra):
        point, se = float(point), float(se)
        return cls(point, se, (point - Z95 * se, point + Z95 * se), int(samples), seed, extra)

    def within(self, target: float, sigmas: float = 4.0, slack: float = 0.0) -> bool:
        return abs(self.point - target) <= sigmas * self.std_error + slack

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ci95"] = list(self.ci95)
        return d


@dataclass(frozen=True)
class TailTable:
    """Empirical P[T >= mean + r], P[T <= mean - r] and the two-sided P[|T - mean| >= r]."""

    mean_T: float
    r: tuple[int, ...]
    upper_freq: tuple[float, ...]
    lower_freq: tuple[float, ...]
    two_sided_freq: tuple[float, ...]
    two_sided_hits: tuple[int, ...]
    fitted_decay_rate: float
    r_squared: float
    fit_points: int

    @classmethod
    def from_times(cls, times: np.ndarray, min_hits: int = MIN_TAIL_HITS) -> "TailTable":
        times = np.asarray(times, dtype=float)
        mean = float(times.mean())
        dev = np.abs(times - mean)
        rs, up, lo, two, hits = [], [], [], [], []
        r = 1
        while True:
            h = int(np.count_nonzero(dev >= r))
            if h == 0:
                break
            rs.append(r)
            up.append(float(np.mean(times >= mean + r)))
            lo.append(float(np.mean(times <= mean - r)))
            two.append(h / len(times))
            hits.append(h)
            r += 1
        keep = [i for i, h in enumerate(hits) if h >= min_hits]
        rate = r2 = float("nan")
        if len(keep) >= 2:
            x = np.array([rs[i] for i in keep], dtype=float)
            y = np.log([two[i] for i in keep])
            slope, intercept = np.polyfit(x, y, 1)
            resid = y - (slope * x + intercept)
            ss_tot = float(np.sum((y - y.mean()) ** 2))
            r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
            rate = -float(slope)
        return cls(mean, tuple(rs), tuple(up), tuple(lo), tuple(two), tuple(hits), rate, r2, len(keep))

    def rows(self):
        return list(zip(self.r, self.upper_freq, self.lower_freq, self.two_sided_freq, self.two_sided_hits))

    def to_dict(self) -> dict:
        return asdict(self)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "upper_freq", "lower_freq", "two_sided_freq", "two_sided_hits"])
            w.writerows(self.rows())


@dataclass(frozen=True)
class GapReport:
    """Mean spreading time minus a leading-term predictor, across a grid of n."""

    protocol: str
    predictor: str
    a: float
    n_grid: tuple[int, ...]
    mean_T: tuple[float, ...]
    std_error: tuple[float, ...]
    predicted: tuple[float, ...]
    gaps: tuple[float, ...]
    trials: int
    seed: SeedSpec

    @property
    def spread(self) -> float:
        return max(self.gaps) - min(self.gaps)

    @property
    def growth(self) -> float:
        """Gap at the largest n minus gap at the smallest."""
        return self.gaps[-1] - self.gaps[0]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spread"] = self.spread
        d["growth"] = self.growth
        return d

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "mean_T", "std_error", "predicted", "gap"])
            w.writerows(zip(self.n_grid, self.mean_T, self.std_error, self.predicted, self.gaps))


def _pmap(func, arg_list, workers):
    if workers > 1 and len(arg_list) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(func, *zip(*arg_list)))
    return [func(*args) for args in arg_list]


def _time_chunk(n, a, kind_value, master, first_stream, count, max_rounds):
    params = ModelParams(n, a)
    code = ProtocolKind(kind_value).code
    out = np.empty(count, dtype=np.int64)
    for i in range(count):
        seed = SeedSpec(master, first_stream + i)
        counts, finished = _kernels.run_spread(n, params.p, code, max_rounds, seed.generator())
        if not finished:
            raise RoundLimitExceeded(seed, max_rounds, int(counts[-1]), n)
        out[i] = counts.shape[0] - 1
    return out


def spreading_times(params: ModelParams, kind: ProtocolKind, trials: int, seed: SeedSpec,
                    workers: int = 1, max_rounds: int | None = None) -> np.ndarray:
    """T(1, n) for ``trials`` independent runs; trial i uses ``seed.offset(i)``."""
    kind = ProtocolKind.parse(kind)
    max_rounds = default_max_rounds(params) if max_rounds is None else max_rounds
    args = [(params.n, params.a, kind.value, seed.master_seed, seed.stream_id + s, min(TRIAL_CHUNK, trials - s),
             max_rounds) for s in range(0, trials, TRIAL_CHUNK)]
    return np.concatenate(_pmap(_time_chunk, args, workers)) if args else np.empty(0, dtype=np.int64)


def _trace_chunk(n, a, kind_value, master, first_stream, count, max_rounds):
    params = ModelParams(n, a)
    return [run_to_completion(params, kind_value, SeedSpec(master, first_stream + i), max_rounds)
            for i in range(count)]


def simulate_traces(params: ModelParams, kind: ProtocolKind, trials: int, seed: SeedSpec,
                    workers: int = 1, max_rounds: int | None = None) -> list[SpreadTrace]:
    """Full traces; trial i is exactly ``run_to_completion(params, kind, seed.offset(i))``."""
    kind = ProtocolKind.parse(kind)
    args = [(params.n, params.a, kind.value, seed.master_seed, seed.stream_id + s, min(TRIAL_CHUNK, trials - s),
             max_rounds) for s in range(0, trials, TRIAL_CHUNK)]
    return [t for part in _pmap(_trace_chunk, args, workers) for t in part]


def estimate_spreading_time(params: ModelParams, kind: ProtocolKind, trials: int, seed: SeedSpec,
                            workers: int = 1, max_rounds: int | None = None) -> tuple[EstimateReport, TailTable]:
    if trials < 100:
        raise ValueError("need at least 100 trials")
    times = spreading_times(params, kind, trials, seed, workers, max_rounds)
    se = times.std(ddof=1) / math.sqrt(trials)
    report = EstimateReport.from_point(times.mean(), se, trials, seed, std_dev=float(times.std(ddof=1)))
    return report, TailTable.from_times(times)


def _round_chunk(n, a, kind_value, k, count, master, stream, chunk):
    params = ModelParams(n, a)
    rng = SeedSpec(master, stream).generator(chunk)
    probe2 = k + 1 if k + 1 < n else -1
    return _kernels.single_rounds(n, params.p, k, ProtocolKind(kind_value).code, count, k, probe2, rng)


@dataclass(frozen=True)
class RoundSamples:
    """Per-round tallies from independent single rounds starting at {0..k-1}."""

    newly: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    pushed: np.ndarray
    both: np.ndarray


def single_round_samples(params: ModelParams, kind: ProtocolKind, k: int, samples: int, seed: SeedSpec,
                         workers: int = 1) -> RoundSamples:
    kind = ProtocolKind.parse(kind)
    if not 1 <= k < params.n:
        raise ValueError(f"k={k} outside [1, n-1]")
    if samples < 1:
        raise ValueError("samples must be positive")
    args = [(params.n, params.a, kind.value, k, min(SAMPLE_CHUNK, samples - s), seed.master_seed, seed.stream_id, c)
            for c, s in enumerate(range(0, samples, SAMPLE_CHUNK))]
    parts = _pmap(_round_chunk, args, workers)
    return RoundSamples(*(np.concatenate(arrs) for arrs in zip(*parts)))


def _ratio_report(num: np.ndarray, den: np.ndarray, seed: SeedSpec, **extra) -> EstimateReport:
    """Ratio of totals with a cluster-robust (by round) standard error."""
    num = num.astype(float)
    den = den.astype(float)
    total = den.sum()
    if total == 0:
        return EstimateReport.from_point(float("nan"), float("nan"), len(den), seed, events=0, **extra)
    ratio = num.sum() / total
    s = len(den)
    resid = num - ratio * den
    clustered = math.sqrt(s / (s - 1) * np.sum(resid**2)) / total if s > 1 else float("nan")
    naive = math.sqrt(ratio * (1 - ratio) / total)
    return EstimateReport.from_point(ratio, clustered, s, seed, events=int(total), naive_std_error=naive, **extra)


def estimate_pk(params: ModelParams, kind: ProtocolKind, k: int, samples: int, seed: SeedSpec,
                workers: int = 1) -> EstimateReport:
    """Mean fraction of the n-k uninformed nodes informed in one round.

    The standard error is over per-round fractions; ``extra['naive_std_error']``
    pools nodes as if independent.
    """
    data = single_round_samples(params, kind, k, samples, seed, workers)
    u = params.n - k
    frac = data.newly / u
    point = frac.mean()
    se = frac.std(ddof=1) / math.sqrt(samples) if samples > 1 else float("nan")
    naive = math.sqrt(point * (1 - point) / (samples * u))
    return EstimateReport.from_point(point, se, samples, seed, naive_std_error=naive, k=k)


def estimate_pair_covariance(params: ModelParams, kind: ProtocolKind, k: int, samples: int, seed: SeedSpec,
                             workers: int = 1) -> EstimateReport:
    """Covariance of the success indicators of uninformed nodes k and k+1."""
    if not 1 <= k <= params.n - 2:
        raise ValueError(f"k={k} outside [1, n-2]")
    data = single_round_samples(params, kind, k, samples, seed, workers)
    x1 = data.x1.astype(float)
    x2 = data.x2.astype(float)
    z = (x1 - x1.mean()) * (x2 - x2.mean())
    cov = z.sum() / (samples - 1)
    se = z.std(ddof=1) / math.sqrt(samples)
    return EstimateReport.from_point(cov, se, samples, seed, k=k)


def estimate_conditional_pull_given_push(params: ModelParams, k: int, samples: int, seed: SeedSpec,
                                         workers: int = 1, min_events: int = 1000) -> EstimateReport:
    """Fraction of pushed uninformed nodes that also pulled from an informed node (Push&Pull)."""
    data = single_round_samples(params, ProtocolKind.PUSHPULL, k, samples, seed, workers)
    events = int(data.pushed.sum())
    if events < min_events:
        raise InsufficientConditioningEvents(
            f"only {events} pushed events in {samples} rounds (need {min_events}); raise k or samples")
    return _ratio_report(data.both, data.pushed, seed, k=k)


def estimate_push_pull_overlap(params: ModelParams, k: int, samples: int, seed: SeedSpec, workers: int = 1,
                               relative_to: Literal["newly", "pushed"] = "newly") -> EstimateReport:
    """Share of nodes informed by a push and a pull in the same round.

    ``relative_to='newly'`` divides by all newly informed nodes,
    ``'pushed'`` by the pushed ones.
    """
    data = single_round_samples(params, ProtocolKind.PUSHPULL, k, samples, seed, workers)
    den = data.newly if relative_to == "newly" else data.pushed
    return _ratio_report(data.both, den, seed, k=k, relative_to=relative_to)


def fit_leading_constant(kind: ProtocolKind, a: float, n_grid: Sequence[int], trials: int, seed: SeedSpec,
                         workers: int = 1, predictor: ProtocolKind | None = None) -> GapReport:
    """Mean T(n) minus the leading-term prediction, over ``n_grid``.

    ``predictor`` picks which protocol's formula to subtract (default: the
    simulated one); a mismatched predictor serves as a negative control.
    """
    kind = ProtocolKind.parse(kind)
    predictor = kind if predictor is None else ProtocolKind.parse(predictor)
    n_grid = tuple(int(n) for n in n_grid)
    if len(n_grid) < 3 or list(n_grid) != sorted(n_grid) or n_grid[-1] < 4 * n_grid[0]:
        raise ValueError("n_grid must be sorted, with >= 3 points spanning >= 2 octaves")
    means, ses, preds = [], [], []
    for j, n in enumerate(n_grid):
        params = ModelParams(n, a)
        times = spreading_times(params, kind, trials, seed.offset(j * trials), workers)
        means.append(float(times.mean()))
        ses.append(float(times.std(ddof=1) / math.sqrt(trials)))
        preds.append(predict_expected_time(predictor, params).total_leading)
    gaps = tuple(m - p for m, p in zip(means, preds))
    return GapReport(kind.value, predictor.value, float(a), n_grid, tuple(means), tuple(ses), tuple(preds), gaps,
                     trials, seed)


def gaps_against(report: GapReport, predictor: ProtocolKind) -> GapReport:
    """Re-evaluate the same simulated means against another predictor."""
    predictor = ProtocolKind.parse(predictor)
    preds = tuple(predict_expected_time(predictor, ModelParams(n, report.a)).total_leading for n in report.n_grid)
    gaps = tuple(m - p for m, p in zip(report.mean_T, preds))
    return GapReport(report.protocol, predictor.value, report.a, report.n_grid, report.mean_T, report.std_error,
                     preds, gaps, report.trials, report.seed)
