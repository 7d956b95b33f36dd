"""Per-round Erdős–Rényi graphs G(n, a/n) and uniform neighbor selection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class ModelParams:
    """Node count ``n`` and expected-degree parameter ``a``; edge probability ``p = a/n``."""

    n: int
    a: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a!r}")
        if self.a > self.n:
            raise ValueError(f"a={self.a} exceeds n={self.n}; p = a/n must be <= 1")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "a", float(self.a))

    @property
    def p(self) -> float:
        return self.a / self.n

    @classmethod
    def from_p(cls, n: int, p: float) -> "ModelParams":
        return cls(n, p * n)


@dataclass(frozen=True)
class SeedSpec:
    """A master seed plus a stream id (usually the trial index).

    The generator is ``PCG64(SeedSequence(master_seed, spawn_key=(stream_id,)))``,
    numpy's documented way to derive independent child streams.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            value = getattr(self, name)
            if int(value) != value or not 0 <= value < 2**64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def generator(self, *extra_key: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id, *extra_key))
        return np.random.Generator(np.random.PCG64(seq))

    def offset(self, k: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.stream_id + k)


@dataclass(frozen=True, eq=False)
class RoundGraph:
    """Undirected simple graph in CSR form; ``indices[indptr[v]:indptr[v+1]]`` is sorted."""

    n: int
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def num_edges(self) -> int:
        return int(self.indptr[-1]) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(v).tolist() for v in range(self.n)]

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with u < v, lexicographically sorted."""
        src = np.repeat(np.arange(self.n), self.degrees)
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    @classmethod
    def from_edges(cls, n: int, edges) -> "RoundGraph":
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        if np.any(lo == hi):
            raise ValueError("self-loops are not allowed")
        order = np.lexsort((lo, hi))
        lo, hi = lo[order], hi[order]
        if len(lo) > 1 and np.any((lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])):
            raise ValueError("duplicate edges")
        indptr, indices = _kernels.build_csr(n, lo, hi)
        return cls(n, indptr, indices)


def sample_round_graph(params: ModelParams, rng: np.random.Generator) -> RoundGraph:
    """Draw one G(n, p) sample; expected work O(n + p n^2)."""
    indptr, indices = _kernels.sample_csr(params.n, params.p, rng)
    return RoundGraph(params.n, indptr, indices)


def choose_uniform_neighbor(g: RoundGraph, v: int, rng: np.random.Generator) -> int | None:
    """Uniform neighbor of ``v``, or ``None`` if ``v`` is isolated (no draw is made then)."""
    if not 0 <= v < g.n:
        raise IndexError(f"node {v} out of range for n={g.n}")
    w = _kernels.pick_neighbor(g.indptr, g.indices, v, rng)
    return None if w < 0 else int(w)
