"""Synchronous Push, Pull and Push&Pull rounds on freshly sampled graphs.

All three protocols evaluate informedness against the round-start informed
set; updates apply at the end of the round. Isolated nodes make no choice.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import _kernels
from .graphs import ModelParams, RoundGraph, SeedSpec, sample_round_graph


class ProtocolKind(enum.Enum):
    PUSH = "push"
    PULL = "pull"
    PUSHPULL = "pushpull"

    @property
    def code(self) -> int:
        return _CODES[self]

    @classmethod
    def parse(cls, value) -> "ProtocolKind":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("&", "").replace("_", "").replace("-", "")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown protocol {value!r}; expected push, pull or pushpull") from None


_CODES = {ProtocolKind.PUSH: _kernels.PUSH, ProtocolKind.PULL: _kernels.PULL,
          ProtocolKind.PUSHPULL: _kernels.PUSHPULL}


class RoundLimitExceeded(RuntimeError):
    def __init__(self, seed: SeedSpec, max_rounds: int, count: int, n: int):
        super().__init__(f"{count}/{n} nodes informed after {max_rounds} rounds (seed {seed})")
        self.seed = seed
        self.max_rounds = max_rounds
        self.count = count


@dataclass
class SpreadState:
    informed: np.ndarray
    round: int = 0

    @classmethod
    def initial(cls, n: int, informed_nodes: Iterable[int] = (0,)) -> "SpreadState":
        informed = np.zeros(n, dtype=bool)
        informed[list(informed_nodes)] = True
        return cls(informed)

    @property
    def n(self) -> int:
        return self.informed.shape[0]

    @property
    def count(self) -> int:
        return int(self.informed.sum())


@dataclass(frozen=True, eq=False)
class RoundOutcome:
    """Per-node flags of one round. ``choices[v]`` is v's contact, -1 if none."""

    newly_informed: np.ndarray
    pushed: np.ndarray
    pulled: np.ndarray
    choices: np.ndarray


@dataclass(frozen=True)
class SpreadTrace:
    protocol: ProtocolKind
    params: ModelParams
    seed: SeedSpec
    counts: tuple[int, ...] = field(repr=False)

    @property
    def T(self) -> int:
        return len(self.counts) - 1

    def to_record(self, compress: bool = False) -> dict:
        counts = run_length_encode(self.counts) if compress else list(self.counts)
        return {"protocol": self.protocol.value, "n": self.params.n, "a": self.params.a,
                "master_seed": self.seed.master_seed, "stream_id": self.seed.stream_id,
                "T": self.T, "counts": counts}

    @classmethod
    def from_record(cls, rec: dict) -> "SpreadTrace":
        counts = rec["counts"]
        if counts and isinstance(counts[0], (list, tuple)):
            counts = run_length_decode(counts)
        trace = cls(ProtocolKind.parse(rec["protocol"]), ModelParams(rec["n"], rec["a"]),
                    SeedSpec(rec["master_seed"], rec["stream_id"]), tuple(int(c) for c in counts))
        if trace.T != rec["T"]:
            raise ValueError(f"record T={rec['T']} disagrees with {len(counts)} counts")
        return trace


def run_length_encode(values) -> list[list[int]]:
    out: list[list[int]] = []
    for v in values:
        if out and out[-1][0] == v:
            out[-1][1] += 1
        else:
            out.append([int(v), 1])
    return out


def run_length_decode(pairs) -> list[int]:
    return [int(v) for v, rep in pairs for _ in range(int(rep))]


def write_traces_jsonl(path, traces: Iterable[SpreadTrace], compress: bool = False) -> None:
    with open(path, "w") as fh:
        for trace in traces:
            fh.write(json.dumps(trace.to_record(compress), separators=(",", ":")) + "\n")


def read_traces_jsonl(path) -> Iterator[SpreadTrace]:
    with open(Path(path)) as fh:
        for line in fh:
            if line.strip():
                yield SpreadTrace.from_record(json.loads(line))


def run_round(state: SpreadState, kind: ProtocolKind, g: RoundGraph,
              rng: np.random.Generator) -> tuple[SpreadState, RoundOutcome]:
    """One synchronous round; returns the new state and the per-node event flags."""
    kind = ProtocolKind.parse(kind)
    if g.n != state.n:
        raise ValueError(f"graph has {g.n} nodes, state has {state.n}")
    if state.count == state.n:
        raise ValueError("all nodes already informed; nothing to do")
    informed = state.informed
    choices = _kernels.draw_choices(g.indptr, g.indices, _kernels.active_mask(kind.code, informed), rng)
    return _finish_round(state, kind, choices)


def replay_round(state: SpreadState, kind: ProtocolKind, choices: np.ndarray) -> tuple[SpreadState, RoundOutcome]:
    """Apply a fixed choice vector; choices of nodes inactive under ``kind`` are ignored."""
    kind = ProtocolKind.parse(kind)
    choices = np.where(_kernels.active_mask(kind.code, state.informed), choices, -1)
    return _finish_round(state, kind, choices)


def _finish_round(state, kind, choices):
    pushed, pulled = _kernels.apply_choices(kind.code, state.informed, choices)
    newly = np.flatnonzero(pushed | pulled)
    informed = state.informed.copy()
    informed[newly] = True
    return (SpreadState(informed, state.round + 1),
            RoundOutcome(newly, pushed, pulled, choices))


def default_max_rounds(params: ModelParams) -> int:
    n = params.n
    return int(10**4 * (math.log2(n) + math.log(n) / params.a + 10))


def run_to_completion(params: ModelParams, kind: ProtocolKind, seed: SeedSpec,
                      max_rounds: int | None = None) -> SpreadTrace:
    """Run from node 0 until every node is informed.

    Consumes the generator exactly like alternating ``sample_round_graph`` and
    ``run_round`` would.
    """
    kind = ProtocolKind.parse(kind)
    if max_rounds is None:
        max_rounds = default_max_rounds(params)
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    counts, finished = _kernels.run_spread(params.n, params.p, kind.code, max_rounds, seed.generator())
    if not finished:
        raise RoundLimitExceeded(seed, max_rounds, int(counts[-1]), params.n)
    return SpreadTrace(kind, params, seed, tuple(counts.tolist()))


def run_stepwise(params: ModelParams, kind: ProtocolKind, seed: SeedSpec,
                 max_rounds: int | None = None) -> SpreadTrace:
    """Same as :func:`run_to_completion` but through the per-round Python API."""
    kind = ProtocolKind.parse(kind)
    max_rounds = default_max_rounds(params) if max_rounds is None else max_rounds
    rng = seed.generator()
    state = SpreadState.initial(params.n)
    counts = [1]
    while state.count < params.n:
        if state.round >= max_rounds:
            raise RoundLimitExceeded(seed, max_rounds, state.count, params.n)
        g = sample_round_graph(params, rng)
        state, _ = run_round(state, kind, g, rng)
        counts.append(state.count)
    return SpreadTrace(kind, params, seed, tuple(counts))


def phase_time(trace: SpreadTrace, k: int, m: int) -> int:
    """Rounds from first reaching >= k informed to first reaching >= m informed."""
    n = trace.params.n
    if not 1 <= k <= m <= n:
        raise ValueError(f"need 1 <= k <= m <= n, got k={k}, m={m}, n={n}")
    counts = np.asarray(trace.counts)
    s = int(np.argmax(counts >= k))
    t = int(np.argmax(counts >= m))
    return t - s
