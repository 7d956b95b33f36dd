"""Exact informed-count chain for tiny n by exhaustive enumeration.

Every labeled graph on n nodes is visited with its G(n, p) weight. Given the
graph, uninformed nodes pull independently; informed nodes push independently,
so push outcomes are folded with a dynamic program over the set of pushed
uninformed nodes (a bitmask) rather than by listing every choice vector. Given
the graph and the pushed set, the per-node success indicators are independent
and their count is a Poisson-binomial convolution.
"""

from __future__ import annotations

import functools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graphs import ModelParams
from .protocols import ProtocolKind

GRAPH_CHUNK = 256
HARD_MAX_N = 6


class OracleTooLarge(ValueError):
    pass


class NonProgressing(ArithmeticError):
    pass


@dataclass(frozen=True)
class OracleLimits:
    max_n: int = 5

    def __post_init__(self):
        if not 2 <= self.max_n <= HARD_MAX_N:
            raise ValueError(f"max_n must lie in [2, {HARD_MAX_N}], got {self.max_n}")

    def check(self, n: int) -> None:
        if n > self.max_n:
            raise OracleTooLarge(f"n={n} exceeds oracle limit max_n={self.max_n}")


DEFAULT_LIMITS = OracleLimits()


@dataclass(frozen=True)
class RoundLaw:
    """Exact one-round law from a fixed informed set."""

    row: np.ndarray          # row[j] = P(j nodes informed after the round), j = 0..n
    p_first: float           # success probability of the first uninformed node
    p_second: float          # ... of the second uninformed node (nan if only one)
    p_joint: float           # both succeed (nan if only one uninformed node)

    @property
    def covariance(self) -> float:
        return self.p_joint - self.p_first * self.p_second


@dataclass(frozen=True)
class TransitionMatrix:
    n: int
    p: float
    kind: ProtocolKind
    matrix: np.ndarray       # matrix[k-1, k'-1] = P(k -> k')

    def row(self, k: int) -> dict[int, float]:
        return {kp: float(self.matrix[k - 1, kp - 1]) for kp in range(k, self.n + 1)}

    def to_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "protocol": self.kind.value, "matrix": self.matrix.tolist()}


@functools.lru_cache(maxsize=None)
def _graph_structures(n: int):
    """(edge count, neighbor bitmasks, degrees) for every labeled graph, by graph index."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    out = []
    for gidx in range(1 << len(pairs)):
        nbr = [0] * n
        m = 0
        for e, (i, j) in enumerate(pairs):
            if gidx >> e & 1:
                nbr[i] |= 1 << j
                nbr[j] |= 1 << i
                m += 1
        out.append((m, tuple(nbr), tuple(bin(b).count("1") for b in nbr)))
    return tuple(out), len(pairs)


def _poisson_binomial(probs) -> list[float]:
    dist = [1.0]
    for q in probs:
        nxt = [0.0] * (len(dist) + 1)
        for j, w in enumerate(dist):
            nxt[j] += w * (1.0 - q)
            nxt[j + 1] += w * q
        dist = nxt
    return dist


def _chunk_law(n, p, kind_value, informed, start, stop):
    kind = ProtocolKind(kind_value)
    graphs, num_pairs = _graph_structures(n)
    s_mask = 0
    for x in informed:
        s_mask |= 1 << x
    uninformed = [v for v in range(n) if not s_mask >> v & 1]
    k = len(informed)
    row = np.zeros(n + 1)
    p1 = p2 = pj = 0.0
    for gidx in range(start, stop):
        m, nbr, deg = graphs[gidx]
        weight = p**m * (1.0 - p) ** (num_pairs - m)
        if weight == 0.0:
            continue
        if kind is ProtocolKind.PUSH:
            pull = [0.0] * len(uninformed)
        else:
            pull = [bin(nbr[y] & s_mask).count("1") / deg[y] if deg[y] else 0.0 for y in uninformed]
        masks = {0: 1.0}
        if kind is not ProtocolKind.PULL:
            for x in informed:
                if not deg[x]:
                    continue
                share = 1.0 / deg[x]
                targets = [1 << y for y in range(n) if nbr[x] >> y & 1]
                nxt: dict[int, float] = {}
                for mask, w in masks.items():
                    for t in targets:
                        key = mask | (t & ~s_mask)
                        nxt[key] = nxt.get(key, 0.0) + w * share
                masks = nxt
        for mask, w in masks.items():
            q = [1.0 if mask >> y & 1 else pull[i] for i, y in enumerate(uninformed)]
            for j, pb in enumerate(_poisson_binomial(q)):
                row[k + j] += weight * w * pb
            p1 += weight * w * q[0]
            if len(q) > 1:
                p2 += weight * w * q[1]
                pj += weight * w * q[0] * q[1]
    return row, p1, p2, pj


@functools.lru_cache(maxsize=4096)
def _round_law(n, p, kind_value, informed, workers):
    graphs, _ = _graph_structures(n)
    bounds = [(s, min(s + GRAPH_CHUNK, len(graphs))) for s in range(0, len(graphs), GRAPH_CHUNK)]
    args = [(n, p, kind_value, informed, s, e) for s, e in bounds]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_chunk_law, *zip(*args)))
    else:
        parts = [_chunk_law(*a) for a in args]
    # ordered reduction: identical floating-point result for any worker count
    row = np.zeros(n + 1)
    p1 = p2 = pj = 0.0
    for r, a1, a2, aj in parts:
        row += r
        p1 += a1
        p2 += a2
        pj += aj
    single = n - len(informed) < 2
    return RoundLaw(row, p1, float("nan") if single else p2, float("nan") if single else pj)


def round_law(params: ModelParams, kind: ProtocolKind, informed=None, *, k: int | None = None,
              limits: OracleLimits = DEFAULT_LIMITS, workers: int = 1) -> RoundLaw:
    """Exact one-round law from ``informed`` (default: the canonical set {0..k-1})."""
    kind = ProtocolKind.parse(kind)
    limits.check(params.n)
    if informed is None:
        informed = range(k)
    informed = tuple(sorted(set(int(x) for x in informed)))
    if not informed or len(informed) > params.n or informed[-1] >= params.n or informed[0] < 0:
        raise ValueError(f"invalid informed set {informed} for n={params.n}")
    return _round_law(params.n, params.p, kind.value, informed, workers)


def exact_transition_row(params: ModelParams, k: int, kind: ProtocolKind,
                         limits: OracleLimits = DEFAULT_LIMITS) -> dict[int, float]:
    if not 1 <= k <= params.n:
        raise ValueError(f"k={k} outside [1, n]")
    limits.check(params.n)
    if k == params.n:
        return {params.n: 1.0}
    row = round_law(params, kind, k=k, limits=limits).row
    return {kp: float(row[kp]) for kp in range(k, params.n + 1)}


def transition_matrix(params: ModelParams, kind: ProtocolKind,
                      limits: OracleLimits = DEFAULT_LIMITS) -> TransitionMatrix:
    kind = ProtocolKind.parse(kind)
    n = params.n
    mat = np.zeros((n, n))
    for k in range(1, n + 1):
        for kp, w in exact_transition_row(params, k, kind, limits).items():
            mat[k - 1, kp - 1] = w
    return TransitionMatrix(n, params.p, kind, mat)


def expected_times(tm: TransitionMatrix) -> np.ndarray:
    """E[rounds to reach n | start at k] for k = 1..n, by back-substitution."""
    n = tm.n
    E = np.zeros(n + 1)
    for k in range(n - 1, 0, -1):
        stay = tm.matrix[k - 1, k - 1]
        if stay >= 1.0:
            raise NonProgressing(f"state k={k} never progresses (p={tm.p})")
        onward = sum(tm.matrix[k - 1, kp - 1] * E[kp] for kp in range(k + 1, n + 1))
        E[k] = (1.0 + onward) / (1.0 - stay)
    return E[1:]


def exact_expected_time(params: ModelParams, kind: ProtocolKind,
                        limits: OracleLimits = DEFAULT_LIMITS) -> float:
    return float(expected_times(transition_matrix(params, kind, limits))[0])


def exact_time_survival(params: ModelParams, kind: ProtocolKind, t_max: int,
                        limits: OracleLimits = DEFAULT_LIMITS) -> np.ndarray:
    """P[T > t] for t = 0..t_max."""
    mat = transition_matrix(params, kind, limits).matrix
    dist = np.zeros(params.n)
    dist[0] = 1.0
    out = []
    for _ in range(t_max + 1):
        out.append(1.0 - dist[-1])
        dist = dist @ mat
    return np.array(out)


def exact_pk(params: ModelParams, k: int, kind: ProtocolKind,
             limits: OracleLimits = DEFAULT_LIMITS) -> float:
    if not 1 <= k <= params.n - 1:
        raise ValueError(f"k={k} outside [1, n-1]")
    return round_law(params, kind, k=k, limits=limits).p_first


def exact_pair_covariance(params: ModelParams, k: int, kind: ProtocolKind,
                          limits: OracleLimits = DEFAULT_LIMITS) -> float:
    if not 1 <= k <= params.n - 2:
        raise ValueError(f"k={k} outside [1, n-2]")
    return round_law(params, kind, k=k, limits=limits).covariance


def oracle_report(params: ModelParams, kind: ProtocolKind, limits: OracleLimits = DEFAULT_LIMITS) -> dict:
    """Everything the oracle knows about one (n, a, kind), JSON-ready."""
    kind = ProtocolKind.parse(kind)
    tm = transition_matrix(params, kind, limits)
    n = params.n
    return {
        "n": n, "a": params.a, "p": params.p, "protocol": kind.value,
        "transition_matrix": tm.matrix.tolist(),
        "expected_time": float(expected_times(tm)[0]),
        "expected_time_from_k": expected_times(tm).tolist(),
        "p_k": {str(k): exact_pk(params, k, kind, limits) for k in range(1, n)},
        "pair_covariance": {str(k): exact_pair_covariance(params, k, kind, limits) for k in range(1, n - 1)},
    }


def write_oracle_json(path, reports: list[dict]) -> None:
    keyed = {f"n={r['n']},a={r['a']},{r['protocol']}": r for r in reports}
    with open(path, "w") as fh:
        json.dump(keyed, fh, indent=2, sort_keys=True)
