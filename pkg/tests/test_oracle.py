import numpy as np
import pytest

from evolving_gossip import oracle
from evolving_gossip.graphs import ModelParams
from evolving_gossip.protocols import ProtocolKind

KINDS = list(ProtocolKind)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("n,a", [(3, 1.0), (4, 0.5), (5, 2.0)])
def test_transition_rows_are_distributions(kind, n, a):
    tm = oracle.transition_matrix(ModelParams(n, a), kind)
    assert np.allclose(tm.matrix.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(tm.matrix >= 0)
    assert np.allclose(np.tril(tm.matrix, -1), 0.0)
    assert tm.matrix[-1, -1] == 1.0


@pytest.mark.parametrize("kind", KINDS)
def test_row_mean_matches_pk(kind):
    # by exchangeability E[K' - k] = (n - k) p_k
    params = ModelParams(5, 1.0)
    for k in range(1, 5):
        row = oracle.exact_transition_row(params, k, kind)
        mean_gain = sum((kp - k) * w for kp, w in row.items())
        assert mean_gain == pytest.approx((5 - k) * oracle.exact_pk(params, k, kind), abs=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_relabelling_invariance(kind):
    params = ModelParams(5, 1.5)
    base = oracle.round_law(params, kind, k=2)
    for informed in [(0, 4), (2, 3), (1, 4)]:
        other = oracle.round_law(params, kind, informed)
        assert np.allclose(other.row, base.row, atol=1e-13)
        assert other.p_first == pytest.approx(base.p_first, abs=1e-13)


def test_hand_values_complete_graph():
    # n=3, p=1, informed {0,1}: node 2 is missed by Push only if 0 picks 1 and 1 picks 0
    params = ModelParams(3, 3.0)
    assert oracle.exact_pk(params, 2, ProtocolKind.PUSH) == pytest.approx(0.75)
    assert oracle.exact_pk(params, 2, ProtocolKind.PULL) == pytest.approx(1.0)
    assert oracle.exact_pk(params, 1, ProtocolKind.PULL) == pytest.approx(0.5)


@pytest.mark.parametrize("kind", KINDS)
def test_n2_expected_time(kind):
    assert oracle.exact_expected_time(ModelParams(2, 1.0), kind) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_survival_sums_to_mean(kind):
    params = ModelParams(4, 1.0)
    surv = oracle.exact_time_survival(params, kind, 400)
    assert surv[0] == 1.0
    assert np.all(np.diff(surv) <= 1e-15)
    assert surv.sum() == pytest.approx(oracle.exact_expected_time(params, kind), rel=1e-10)


def test_pushpull_beats_both():
    params = ModelParams(5, 1.0)
    t = {k: oracle.exact_expected_time(params, k) for k in KINDS}
    assert t[ProtocolKind.PUSHPULL] < min(t[ProtocolKind.PUSH], t[ProtocolKind.PULL])


def test_pair_covariance_signs():
    params = ModelParams(5, 1.0)
    for k in range(1, 4):
        assert oracle.exact_pair_covariance(params, k, ProtocolKind.PULL) >= 0
        assert oracle.exact_pair_covariance(params, k, ProtocolKind.PUSH) <= 0
    with pytest.raises(ValueError):
        oracle.exact_pair_covariance(params, 4, ProtocolKind.PULL)


def test_size_limits():
    with pytest.raises(oracle.OracleTooLarge):
        oracle.exact_pk(ModelParams(6, 1.0), 1, ProtocolKind.PULL)
    with pytest.raises(ValueError):
        oracle.OracleLimits(7)
    row = oracle.exact_transition_row(ModelParams(6, 1.0), 1, ProtocolKind.PULL, oracle.OracleLimits(6))
    assert sum(row.values()) == pytest.approx(1.0)


def test_workers_do_not_change_result():
    params = ModelParams(5, 1.0)
    a = oracle.round_law(params, ProtocolKind.PUSHPULL, k=2, workers=1)
    b = oracle.round_law(params, ProtocolKind.PUSHPULL, k=2, workers=2)
    assert np.array_equal(a.row, b.row) and a.p_joint == b.p_joint


def test_report_json(tmp_path):
    import json
    rep = oracle.oracle_report(ModelParams(3, 1.0), ProtocolKind.PULL)
    oracle.write_oracle_json(tmp_path / "o.json", [rep])
    back = json.loads((tmp_path / "o.json").read_text())
    assert back["n=3,a=1.0,pull"]["expected_time"] == pytest.approx(rep["expected_time"])
