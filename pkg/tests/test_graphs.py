import math

import numpy as np
import pytest
from scipy import stats

from evolving_gossip.graphs import (ModelParams, RoundGraph, SeedSpec, choose_uniform_neighbor,
                                    sample_round_graph)


def test_model_params_validation():
    assert ModelParams(10, 2).p == pytest.approx(0.2)
    assert ModelParams.from_p(20, 0.1).a == pytest.approx(2.0)
    for n, a in [(1, 1.0), (2.5, 1.0), (10, 0.0), (10, -1.0), (10, 11.0)]:
        with pytest.raises(ValueError):
            ModelParams(n, a)


def test_seed_spec_rejects_out_of_range():
    with pytest.raises(ValueError):
        SeedSpec(-1)
    with pytest.raises(ValueError):
        SeedSpec(0, 2**64)
    assert SeedSpec(5, 3).offset(4) == SeedSpec(5, 7)


def test_same_seed_same_graph():
    params = ModelParams(300, 3.0)
    g1 = sample_round_graph(params, SeedSpec(11).generator())
    g2 = sample_round_graph(params, SeedSpec(11).generator())
    g3 = sample_round_graph(params, SeedSpec(11, 1).generator())
    assert np.array_equal(g1.indices, g2.indices) and np.array_equal(g1.indptr, g2.indptr)
    assert not np.array_equal(g1.indices, g3.indices)


def test_p_one_gives_complete_graph():
    g = sample_round_graph(ModelParams(7, 7.0), SeedSpec(0).generator())
    assert g.num_edges == 21
    assert all(g.neighbors(v).tolist() == [w for w in range(7) if w != v] for v in range(7))


def test_tiny_p_is_mostly_empty():
    rng = SeedSpec(1).generator()
    params = ModelParams.from_p(50, 1e-9)
    assert sum(sample_round_graph(params, rng).num_edges for _ in range(20)) == 0


def test_graph_is_simple_and_symmetric():
    g = sample_round_graph(ModelParams(500, 4.0), SeedSpec(2).generator())
    adj = g.adjacency()
    for v, nbrs in enumerate(adj):
        assert v not in nbrs
        assert nbrs == sorted(set(nbrs))
        for w in nbrs:
            assert v in adj[w]
    e = g.edges()
    assert np.all(e[:, 0] < e[:, 1])
    assert len(e) == g.num_edges


def test_from_edges_round_trip():
    g = sample_round_graph(ModelParams(40, 3.0), SeedSpec(3).generator())
    h = RoundGraph.from_edges(40, g.edges()[::-1])
    assert np.array_equal(g.indptr, h.indptr) and np.array_equal(g.indices, h.indices)
    with pytest.raises(ValueError):
        RoundGraph.from_edges(3, [(0, 0)])
    with pytest.raises(ValueError):
        RoundGraph.from_edges(3, [(0, 1), (1, 0)])


def test_edge_count_mean():
    n, a, reps = 200, 2.0, 2000
    params = ModelParams(n, a)
    rng = SeedSpec(4).generator()
    m = np.array([sample_round_graph(params, rng).num_edges for _ in range(reps)])
    pairs = n * (n - 1) / 2
    mean, var = pairs * params.p, pairs * params.p * (1 - params.p)
    assert abs(m.mean() - mean) <= 3 * math.sqrt(var / reps)


def test_degree_distribution_chi_square():
    n, a = 100, 3.0
    params = ModelParams(n, a)
    rng = SeedSpec(5).generator()
    # node 17's degree across independent graphs is Binomial(n-1, p)
    deg = np.array([sample_round_graph(params, rng).degrees[17] for _ in range(4000)])
    top = 8
    observed = np.bincount(np.minimum(deg, top), minlength=top + 1)
    pmf = stats.binom.pmf(np.arange(top), n - 1, params.p)
    expected = len(deg) * np.append(pmf, 1 - pmf.sum())
    assert stats.chisquare(observed, expected).pvalue > 1e-3


def test_isolation_frequency():
    n, a = 400, 1.0
    params = ModelParams(n, a)
    rng = SeedSpec(6).generator()
    iso = np.array([(sample_round_graph(params, rng).degrees == 0).mean() for _ in range(500)])
    target = (1 - params.p) ** (n - 1)
    # per-graph fractions are weakly dependent; a generous 4 sigma band
    assert abs(iso.mean() - target) <= 4 * iso.std(ddof=1) / math.sqrt(len(iso))


def test_choose_neighbor_uniform():
    g = RoundGraph.from_edges(6, [(0, 1), (0, 2), (0, 3), (0, 5)])
    rng = SeedSpec(7).generator()
    picks = [choose_uniform_neighbor(g, 0, rng) for _ in range(8000)]
    counts = np.array([picks.count(w) for w in (1, 2, 3, 5)])
    assert sum(counts) == 8000
    assert stats.chisquare(counts).pvalue > 1e-3


def test_choose_neighbor_isolated_and_bounds():
    g = RoundGraph.from_edges(4, [(0, 1)])
    rng = SeedSpec(8).generator()
    state = rng.bit_generator.state
    assert choose_uniform_neighbor(g, 3, rng) is None
    assert rng.bit_generator.state == state
    assert choose_uniform_neighbor(g, 1, rng) == 0
    with pytest.raises(IndexError):
        choose_uniform_neighbor(g, 4, rng)
