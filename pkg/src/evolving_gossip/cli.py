"""Batch command line: simulate, predict, oracle, estimate, verify.

Exit codes: 0 ok, 1 verification failure, 2 configuration error, 3 round limit hit.
Settings come from flags, then ``--config`` (key=value lines), then defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import acceptance, analytics, harness, oracle
from .graphs import ModelParams, SeedSpec
from .protocols import ProtocolKind, RoundLimitExceeded

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_LIMIT = 0, 1, 2, 3
ESTIMATORS = ("time", "pk", "covariance", "conditional", "overlap", "gap")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    protocol: str | None = None
    n: int | None = None
    n_grid: tuple[int, ...] | None = None
    a: float | None = None
    k: int | None = None
    trials: int = 1000
    samples: int = 10_000
    seed: int = 0
    stream: int = 0
    estimator: str = "time"
    max_rounds: int | None = None
    max_oracle_n: int = 5
    format: str = "jsonl"
    out: str | None = None
    workers: int = 1
    quick: bool = False
    compress: bool = False

    def resolved(self) -> dict:
        """Settings that determine results (output path and worker count excluded)."""
        d = asdict(self)
        for key in ("out", "workers"):
            d.pop(key)
        return d

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.n, self.a)

    @property
    def kind(self) -> ProtocolKind:
        return ProtocolKind.parse(self.protocol)

    @property
    def seed_spec(self) -> SeedSpec:
        return SeedSpec(self.seed, self.stream)


_REQUIRED = {
    "simulate": ("protocol", "n", "a"),
    "predict": ("protocol", "n", "a"),
    "oracle": ("protocol", "n", "a"),
    "estimate": ("protocol", "a"),
    "verify": (),
}


def read_config_file(path) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _coerce(name: str, value):
    if value is None:
        return None
    try:
        if name in ("n", "k", "trials", "samples", "seed", "stream", "max_rounds", "max_oracle_n", "workers"):
            return int(value)
        if name == "a":
            return float(value)
        if name == "n_grid":
            if isinstance(value, str):
                value = value.replace(",", " ").split()
            return tuple(int(v) for v in value)
        if name in ("quick", "compress"):
            return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
    except ValueError:
        raise ConfigError(f"--{name.replace('_', '-')}: cannot parse {value!r}") from None
    return value


def build_config(ns: argparse.Namespace) -> ExperimentConfig:
    file_values = read_config_file(ns.config) if getattr(ns, "config", None) else {}
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(file_values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    values = {}
    for f in fields(ExperimentConfig):
        if f.name == "command":
            continue
        flag = getattr(ns, f.name, None)
        if flag is not None and flag is not False:
            values[f.name] = _coerce(f.name, flag)
        elif f.name in file_values:
            values[f.name] = _coerce(f.name, file_values[f.name])
    cfg = ExperimentConfig(ns.command, **values)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    for name in _REQUIRED[cfg.command]:
        if getattr(cfg, name) is None:
            raise ConfigError(f"missing required setting --{name}")
    if cfg.command == "estimate":
        if cfg.estimator not in ESTIMATORS:
            raise ConfigError(f"--estimator must be one of {', '.join(ESTIMATORS)}")
        if cfg.estimator == "gap" and cfg.n_grid is None:
            raise ConfigError("--n-grid is required for the gap estimator")
        if cfg.estimator != "gap" and cfg.n is None:
            raise ConfigError("missing required setting --n")
        if cfg.estimator in ("pk", "covariance", "conditional", "overlap") and cfg.k is None:
            raise ConfigError("missing required setting --k")
    try:
        if cfg.protocol is not None:
            cfg.kind
        if cfg.n is not None and cfg.a is not None:
            cfg.params
        SeedSpec(cfg.seed, cfg.stream)
        oracle.OracleLimits(cfg.max_oracle_n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.format not in ("jsonl", "csv"):
        raise ConfigError("--format must be jsonl or csv")
    if cfg.trials < 1 or cfg.samples < 1 or cfg.workers < 1:
        raise ConfigError("--trials, --samples and --workers must be positive")
    if cfg.k is not None and cfg.n is not None and not 1 <= cfg.k < cfg.n:
        raise ConfigError(f"--k must lie in [1, n-1], got {cfg.k}")


def _emit(cfg: ExperimentConfig, name: str, payload: dict) -> None:
    doc = {"config": cfg.resolved(), **payload}
    text = json.dumps(doc, indent=2, sort_keys=True, default=_default)
    print(text)
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(f"{cfg.out}.{name}.json").write_text(text + "\n")


def _default(obj):
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if hasattr(obj, "item"):
        return obj.item()
    return str(obj)


def _write_csv_with_header(cfg, path, writer) -> None:
    writer(path)
    body = Path(path).read_text()
    Path(path).write_text(f"# config: {json.dumps(cfg.resolved(), sort_keys=True)}\n" + body)


def cmd_simulate(cfg: ExperimentConfig) -> int:
    traces = harness.simulate_traces(cfg.params, cfg.kind, cfg.trials, cfg.seed_spec, cfg.workers, cfg.max_rounds)
    times = [t.T for t in traces]
    resolved = cfg.resolved()
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        with open(f"{cfg.out}.jsonl", "w") as fh:
            for trace in traces:
                rec = trace.to_record(cfg.compress)
                rec["config"] = resolved
                fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
    arr = np.asarray(times, dtype=float)
    se = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else float("nan")
    summary = harness.EstimateReport.from_point(arr.mean(), se, len(arr), cfg.seed_spec)
    tail = harness.TailTable.from_times(arr)
    if cfg.out and cfg.format == "csv":
        _write_csv_with_header(cfg, f"{cfg.out}.tail.csv", tail.write_csv)
    pred = analytics.predict_expected_time(cfg.kind, cfg.params) if cfg.n >= 3 else None
    _emit(cfg, "summary", {"mean_T": summary, "tail": tail, "predictor": pred,
                           "replay": {"master_seed": cfg.seed, "first_stream_id": cfg.stream}})
    return EXIT_OK


def cmd_predict(cfg: ExperimentConfig) -> int:
    _emit(cfg, "predict", {
        "asymptotic": analytics.predict_expected_time(cfg.kind, cfg.params),
        "finite": analytics.predict_expected_time(cfg.kind, cfg.params, "finite"),
    })
    return EXIT_OK


def cmd_oracle(cfg: ExperimentConfig) -> int:
    limits = oracle.OracleLimits(cfg.max_oracle_n)
    try:
        report = oracle.oracle_report(cfg.params, cfg.kind, limits)
    except oracle.OracleTooLarge as exc:
        raise ConfigError(str(exc)) from None
    _emit(cfg, "oracle", {"oracle": report})
    return EXIT_OK


def cmd_estimate(cfg: ExperimentConfig) -> int:
    seed, w = cfg.seed_spec, cfg.workers
    est = cfg.estimator
    if est == "gap":
        rep = harness.fit_leading_constant(cfg.kind, cfg.a, cfg.n_grid, cfg.trials, seed, w)
        if cfg.out and cfg.format == "csv":
            _write_csv_with_header(cfg, f"{cfg.out}.gaps.csv", rep.write_csv)
        _emit(cfg, "estimate", {"gap": rep})
        return EXIT_OK
    params = cfg.params
    if est == "time":
        rep, tail = harness.estimate_spreading_time(params, cfg.kind, cfg.trials, seed, w, cfg.max_rounds)
        if cfg.out and cfg.format == "csv":
            _write_csv_with_header(cfg, f"{cfg.out}.tail.csv", tail.write_csv)
        _emit(cfg, "estimate", {"estimate": rep, "tail": tail})
        return EXIT_OK
    if est == "pk":
        rep = harness.estimate_pk(params, cfg.kind, cfg.k, cfg.samples, seed, w)
    elif est == "covariance":
        rep = harness.estimate_pair_covariance(params, cfg.kind, cfg.k, cfg.samples, seed, w)
    elif est == "conditional":
        rep = harness.estimate_conditional_pull_given_push(params, cfg.k, cfg.samples, seed, w)
    else:
        rep = harness.estimate_push_pull_overlap(params, cfg.k, cfg.samples, seed, w)
    _emit(cfg, "estimate", {"estimate": rep})
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig) -> int:
    results = acceptance.run_all(quick=cfg.quick)
    failed = [r for r in results if not r.passed]
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(f"{cfg.out}.verify.json").write_text(json.dumps(
            {"config": cfg.resolved(), "results": [r.to_dict() for r in results]},
            indent=2, sort_keys=True, default=_default) + "\n")
    if failed:
        print("failed criteria: " + ", ".join(str(r.number) for r in failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "predict": cmd_predict, "oracle": cmd_oracle,
            "estimate": cmd_estimate, "verify": cmd_verify}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file (flags take precedence)")
    common.add_argument("--protocol", choices=[k.value for k in ProtocolKind])
    common.add_argument("--n", type=str)
    common.add_argument("--n-grid", dest="n_grid", type=str, help="comma-separated n values (gap estimator)")
    common.add_argument("--a", type=str)
    common.add_argument("--k", type=str)
    common.add_argument("--trials", type=str)
    common.add_argument("--samples", type=str)
    common.add_argument("--seed", type=str)
    common.add_argument("--stream", type=str, help="first stream id (default 0)")
    common.add_argument("--estimator", choices=ESTIMATORS)
    common.add_argument("--max-rounds", dest="max_rounds", type=str)
    common.add_argument("--max-oracle-n", dest="max_oracle_n", type=str)
    common.add_argument("--workers", type=str, help="worker processes (default: all cores)")
    common.add_argument("--out", help="output path prefix")
    common.add_argument("--format", choices=("jsonl", "csv"))
    common.add_argument("--compress", action="store_true", help="run-length encode trace counts")
    common.add_argument("--quick", action="store_true", help="verify at one tenth of the Monte Carlo budget")

    parser = argparse.ArgumentParser(prog="evolving-gossip", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if ns.workers is None:
        ns.workers = str(os.cpu_count() or 1)
    try:
        cfg = build_config(ns)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RoundLimitExceeded as exc:
        print(f"round limit exceeded: {exc}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
