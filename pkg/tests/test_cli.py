import json

import pytest

from evolving_gossip.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_writes_traces_and_summary(tmp_path, capsys):
    prefix = tmp_path / "run"
    code, out, _ = run(capsys, "simulate", "--protocol", "pull", "--n", "50", "--a", "1", "--trials", "120",
                       "--seed", "3", "--out", str(prefix), "--workers", "1")
    assert code == 0
    lines = (tmp_path / "run.jsonl").read_text().splitlines()
    assert len(lines) == 120
    rec = json.loads(lines[0])
    assert rec["config"]["seed"] == 3 and rec["counts"][-1] == 50
    summary = json.loads((tmp_path / "run.summary.json").read_text())
    assert summary == json.loads(out)
    assert "workers" not in summary["config"] and "out" not in summary["config"]


def test_output_independent_of_workers(tmp_path, capsys):
    args = ["estimate", "--protocol", "pushpull", "--n", "300", "--a", "1", "--k", "20",
            "--samples", "25000", "--estimator", "overlap", "--seed", "8"]
    _, one, _ = run(capsys, *args, "--workers", "1")
    _, two, _ = run(capsys, *args, "--workers", "2")
    assert one == two


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# comment\nprotocol = push\nn = 40\na = 2.0\ntrials = 100\n")
    code, out, _ = run(capsys, "predict", "--config", str(cfg), "--a", "1.5")
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["a"] == 1.5 and doc["config"]["n"] == 40
    assert doc["asymptotic"]["protocol"] == "push"


@pytest.mark.parametrize("argv,needle", [
    (["simulate", "--protocol", "push", "--a", "1"], "--n"),
    (["simulate", "--protocol", "push", "--n", "1", "--a", "1"], "n must be"),
    (["simulate", "--protocol", "push", "--n", "10", "--a", "x"], "--a"),
    (["oracle", "--protocol", "push", "--n", "6", "--a", "1"], "oracle limit"),
    (["estimate", "--protocol", "push", "--n", "10", "--a", "1", "--estimator", "pk"], "--k"),
    (["estimate", "--protocol", "push", "--a", "1", "--estimator", "gap"], "--n-grid"),
])
def test_config_errors_exit_2(capsys, argv, needle):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert needle in err


def test_unknown_protocol_exit_2(capsys):
    assert run(capsys, "simulate", "--protocol", "flood", "--n", "5", "--a", "1")[0] == 2


def test_round_limit_exit_3(capsys):
    code, _, err = run(capsys, "simulate", "--protocol", "push", "--n", "200", "--a", "1", "--trials", "2",
                       "--max-rounds", "2")
    assert code == 3 and "round limit" in err


def test_oracle_command(capsys):
    code, out, _ = run(capsys, "oracle", "--protocol", "pull", "--n", "2", "--a", "1")
    assert code == 0
    assert json.loads(out)["oracle"]["expected_time"] == pytest.approx(2.0)


def test_gap_csv(tmp_path, capsys):
    prefix = tmp_path / "g"
    code, _, _ = run(capsys, "estimate", "--protocol", "pull", "--a", "1", "--n-grid", "64,128,256",
                     "--trials", "100", "--estimator", "gap", "--format", "csv", "--out", str(prefix))
    assert code == 0
    lines = (tmp_path / "g.gaps.csv").read_text().splitlines()
    assert lines[0].startswith("# config:")
    assert lines[1] == "n,mean_T,std_error,predicted,gap"
    assert len(lines) == 5
