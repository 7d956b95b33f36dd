import numpy as np
import pytest

from evolving_gossip import analytics, harness, oracle
from evolving_gossip.graphs import ModelParams, SeedSpec
from evolving_gossip.protocols import ProtocolKind, RoundLimitExceeded, run_to_completion


def test_trial_i_replays_with_offset_seed():
    params, seed = ModelParams(80, 1.0), SeedSpec(42, 10)
    times = harness.spreading_times(params, ProtocolKind.PULL, 7, seed)
    for i in (0, 3, 6):
        assert times[i] == run_to_completion(params, ProtocolKind.PULL, seed.offset(i)).T
    traces = harness.simulate_traces(params, ProtocolKind.PULL, 7, seed)
    assert [t.T for t in traces] == times.tolist()


def test_worker_count_does_not_change_output():
    params, seed = ModelParams(64, 1.0), SeedSpec(5)
    one = harness.spreading_times(params, ProtocolKind.PUSH, 1200, seed, workers=1)
    two = harness.spreading_times(params, ProtocolKind.PUSH, 1200, seed, workers=2)
    assert np.array_equal(one, two)
    r1 = harness.estimate_pk(params, ProtocolKind.PUSHPULL, 5, 45_000, seed, workers=1)
    r2 = harness.estimate_pk(params, ProtocolKind.PUSHPULL, 5, 45_000, seed, workers=2)
    assert r1 == r2


def test_round_limit_propagates():
    with pytest.raises(RoundLimitExceeded):
        harness.spreading_times(ModelParams(300, 1.0), ProtocolKind.PUSH, 3, SeedSpec(0), max_rounds=2)


@pytest.mark.parametrize("kind", list(ProtocolKind))
def test_small_n_estimates_match_oracle(kind):
    params, seed = ModelParams(4, 1.0), SeedSpec(77)
    est, _ = harness.estimate_spreading_time(params, kind, 4000, seed)
    assert est.within(oracle.exact_expected_time(params, kind), 4.0)
    pk = harness.estimate_pk(params, kind, 1, 20_000, seed)
    assert pk.within(oracle.exact_pk(params, 1, kind), 4.0)
    cov = harness.estimate_pair_covariance(params, kind, 1, 20_000, seed)
    assert cov.within(oracle.exact_pair_covariance(params, 1, kind), 4.0)


def test_estimate_needs_enough_trials():
    with pytest.raises(ValueError):
        harness.estimate_spreading_time(ModelParams(10, 1.0), ProtocolKind.PULL, 50, SeedSpec(0))


def test_conditioning_guard():
    with pytest.raises(harness.InsufficientConditioningEvents):
        harness.estimate_conditional_pull_given_push(ModelParams(500, 1.0), 1, 10, SeedSpec(0))


def test_overlap_definitions():
    params, seed = ModelParams(400, 1.0), SeedSpec(3)
    newly = harness.estimate_push_pull_overlap(params, 10, 2000, seed)
    pushed = harness.estimate_push_pull_overlap(params, 10, 2000, seed, relative_to="pushed")
    cond = harness.estimate_conditional_pull_given_push(params, 10, 2000, seed)
    assert pushed.point == cond.point
    assert 0 < newly.point < pushed.point < 1


def test_tail_table_hand_example():
    times = np.array([3] * 40 + [5] * 40 + [4] * 20)
    tab = harness.TailTable.from_times(times, min_hits=1)
    assert tab.mean_T == 4.0
    assert tab.r == (1,)
    assert tab.upper_freq == (0.4,) and tab.lower_freq == (0.4,)
    assert tab.two_sided_freq == (0.8,) and tab.two_sided_hits == (80,)
    assert np.isnan(tab.fitted_decay_rate)


def test_tail_table_recovers_geometric_decay():
    # |T - mean| geometric with ratio 1/2 on each side: the log tail has slope -ln 2
    rng = np.random.default_rng(0)
    d = rng.geometric(0.5, 200_000) - 1
    times = 100 + d * rng.choice([-1, 1], d.size)
    tab = harness.TailTable.from_times(times)
    assert tab.fitted_decay_rate == pytest.approx(np.log(2), rel=0.05)
    assert tab.r_squared > 0.99


def test_tail_csv(tmp_path):
    tab = harness.TailTable.from_times(np.arange(100) % 7)
    tab.write_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "r,upper_freq,lower_freq,two_sided_freq,two_sided_hits"
    assert len(lines) == len(tab.r) + 1


def test_gap_report_and_negative_control():
    rep = harness.fit_leading_constant(ProtocolKind.PULL, 1.0, (128, 256, 512), 150, SeedSpec(9))
    assert rep.gaps == pytest.approx(tuple(m - p for m, p in zip(rep.mean_T, rep.predicted)))
    other = harness.gaps_against(rep, ProtocolKind.PUSH)
    assert other.mean_T == rep.mean_T and other.predictor == "push"
    for n, pred in zip(rep.n_grid, other.predicted):
        assert pred == pytest.approx(analytics.predict_expected_time(ProtocolKind.PUSH, ModelParams(n, 1.0))
                                     .total_leading)
    with pytest.raises(ValueError):
        harness.fit_leading_constant(ProtocolKind.PULL, 1.0, (128, 256), 150, SeedSpec(9))
    with pytest.raises(ValueError):
        harness.fit_leading_constant(ProtocolKind.PULL, 1.0, (128, 200, 256), 150, SeedSpec(9))


def test_report_ci():
    r = harness.EstimateReport.from_point(1.0, 0.1, 10, SeedSpec(0))
    assert r.ci95 == pytest.approx((1 - 0.196, 1 + 0.196), abs=1e-3)
    assert r.within(1.35, 4.0) and not r.within(1.45, 4.0)
    assert r.within(1.45, 4.0, slack=0.1)
