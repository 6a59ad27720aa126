"""Command-line entry point: ``fakenews <command> [--config PATH] [--preset NAME] ...``.

Configs are YAML or JSON mappings. Values merge in the order preset, config file,
command-line flags. Every output file starts with a comment line holding the tool
version and a hash of the effective configuration.

Config schema (all sections optional)::

    seed: 0
    payoffs:     {B, C, b_t, b_f, receiver_prefers: truth|falsehood}
    optimizer:   {sigma, delta_max, mutation: local|global, burn_in_events, measure_events}
    transmitter_optimizer: {sigma, mutation}          # coopt only
    sim:         {epsilon, rounds, burn_in}
    transmitter: [alpha, beta, gamma, theta]          # or a map with those keys
    receiver:    {a0, a1, p0, p_ct, p_cf, p_nt, p_nf, memory_len}
    group_size:  N                                    # stationary: N copies of receiver
    input:       path                                 # classify / meta
    trust:       path                                 # meta, optional
    n_samples, assume, delta, percentile, share_threshold       # sweep
    assume: [..], horizon, replicates, a0, receiver_events      # coopt
    groups: [..], replicates, a0                                # micro
    n_transmitters: [..], replicates                            # compete
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import numpy as np
import yaml

from fakenews import __version__
from fakenews.dynamics import (
    AssumptionKind,
    OptimizerConfig,
    co_optimize,
    competition_run,
    microtargeting_run,
    optimize_receiver,
)
from fakenews.errors import ArgumentError, DataError
from fakenews.game import PayoffConfig, ReceiverStrategy, TransmitterStrategy, require_viable
from fakenews.output import config_hash, write_csv, write_json
from fakenews.parallel import derive_seed
from fakenews.stationary import SimConfig, exact_stationary_group, exact_stationary_single, simulate_group
from fakenews.stats import ingest_csv, meta_report, read_trust_csv
from fakenews.strategies import classification_row
from fakenews.sweep import RECORD_FIELDS, run_sweep, summarize_sweep, threshold_sensitivity

log = logging.getLogger("fakenews")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3

COMMANDS = ("stationary", "classify", "optimize", "sweep", "coopt", "micro", "compete", "meta")

_FAKE = [1.0, 0.1, -0.9, -0.1]
_MAINSTREAM = [0.9, 0.0, 0.1, 0.9]
_BASE_OPT = {"sigma": 1.0, "delta_max": 0.05, "mutation": "local",
              "burn_in_events": 10_000, "measure_events": 10_000}
_BASE_PAY = {"B": 2.0, "C": 1.0}

# Named presets hold the baseline settings of each experiment.
PRESETS: dict[str, dict] = {
    "sweep-baseline": {
        "command": "sweep", "payoffs": _BASE_PAY, "optimizer": _BASE_OPT,
        "sim": {"epsilon": 1e-3}, "n_samples": 10_000, "delta": 0.05,
        "percentile": 90, "share_threshold": 0.5, "assume": "none",
    },
    "coopt-baseline": {
        "command": "coopt", "payoffs": {**_BASE_PAY, "b_t": 1.0, "b_f": 1.0},
        "optimizer": _BASE_OPT, "transmitter_optimizer": {"sigma": 100.0, "mutation": "global"},
        "sim": {"epsilon": 1e-3}, "assume": ["prefers_fake", "prefers_true", "none"],
        "horizon": 200, "replicates": 10_000, "a0": 0.0, "receiver_events": 50,
    },
    "coopt-attentive": {
        "command": "coopt", "payoffs": {**_BASE_PAY, "b_t": 1.0, "b_f": 1.0},
        "optimizer": {**_BASE_OPT, "sigma": 10.0}, "transmitter_optimizer": {"sigma": 100.0, "mutation": "global"},
        "sim": {"epsilon": 1e-3}, "assume": ["prefers_fake"],
        "horizon": 200, "replicates": 10_000, "a0": 0.9, "receiver_events": 50,
    },
    "compete-baseline": {
        "command": "compete", "payoffs": _BASE_PAY, "optimizer": _BASE_OPT,
        "sim": {"epsilon": 1e-3}, "fake": _FAKE, "mainstream": _MAINSTREAM,
        "n_transmitters": [1, 2, 4, 8, 16, 32], "replicates": 100,
    },
    "micro-baseline": {
        "command": "micro", "payoffs": _BASE_PAY, "optimizer": _BASE_OPT,
        "sim": {"epsilon": 1e-3}, "transmitter": _FAKE,
        "groups": [1, 2, 4, 8, 16, 32], "replicates": 100, "a0": 0.0,
    },
    "optimize-baseline": {
        "command": "optimize", "payoffs": _BASE_PAY, "optimizer": _BASE_OPT,
        "sim": {"epsilon": 1e-3}, "transmitter": _FAKE, "replicates": 100,
    },
    "meta-baseline": {"command": "meta"},
}


class ConfigError(ArgumentError):
    """A configuration file or value is malformed."""


@dataclass
class ExperimentConfig:
    """Effective parameters of one command run.

    ``workers`` and ``out`` do not affect results, so they are excluded from the hash.
    """

    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    workers: int = 1
    out: str = "."

    def to_dict(self) -> dict:
        return {"command": self.command, "seed": self.seed, "workers": self.workers,
                "out": self.out, "params": copy.deepcopy(self.params)}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ExperimentConfig":
        return cls(command=d["command"], params=copy.deepcopy(dict(d.get("params", {}))),
                   seed=int(d.get("seed", 0)), workers=int(d.get("workers", 1)),
                   out=str(d.get("out", ".")))

    @property
    def hash(self) -> str:
        return config_hash({"command": self.command, "seed": self.seed, "params": self.params})


# ---------------------------------------------------------------------------
# config parsing


def load_config_file(path: Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: cannot parse config: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def _merge(base: dict, over: Mapping) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _section(params: Mapping, name: str, cls, **fixed):
    raw = params.get(name) or {}
    if not isinstance(raw, Mapping):
        raise ConfigError(f"section {name!r} must be a mapping")
    try:
        return cls(**{**raw, **fixed})
    except TypeError as exc:
        raise ConfigError(f"section {name!r}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"section {name!r}: {exc}") from exc


def payoffs(params: Mapping) -> PayoffConfig:
    return _section(params, "payoffs", PayoffConfig)


def optimizer(params: Mapping, seed: int = 0, name: str = "optimizer",
              default: Optional[Mapping] = None) -> OptimizerConfig:
    p = {name: _merge(dict(default or {}), params.get(name) or {})}
    return _section(p, name, OptimizerConfig, seed=seed)


def sim(params: Mapping, seed: int = 0) -> SimConfig:
    return _section(params, "sim", SimConfig, seed=seed)


def transmitter(value: Any, name: str = "transmitter") -> TransmitterStrategy:
    if value is None:
        raise ConfigError(f"missing {name!r} strategy")
    try:
        if isinstance(value, Mapping):
            r = TransmitterStrategy(*(float(value[k]) for k in ("alpha", "beta", "gamma", "theta")))
        else:
            r = TransmitterStrategy.from_sequence([float(v) for v in value])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: expected [alpha, beta, gamma, theta], got {value!r}") from exc
    require_viable(r)
    return r


def receiver(value: Any) -> ReceiverStrategy:
    if value is None:
        return ReceiverStrategy()
    if not isinstance(value, Mapping):
        raise ConfigError("receiver must be a mapping of named probabilities")
    try:
        return ReceiverStrategy(**value)
    except TypeError as exc:
        raise ConfigError(f"receiver: {exc}") from exc


def _as_list(value: Any) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _int(params: Mapping, key: str, default: int) -> int:
    value = params.get(key, default)
    if isinstance(value, bool) or int(value) != value:
        raise ConfigError(f"{key}={value!r} must be an integer")
    return int(value)


# ---------------------------------------------------------------------------
# commands


def cmd_stationary(cfg: ExperimentConfig) -> list[Path]:
    p = cfg.params
    r = transmitter(p.get("transmitter"))
    q = receiver(p.get("receiver"))
    sc = sim(p, cfg.seed)
    pc = payoffs(p)
    attends = pc.preferred_type
    out = Path(cfg.out)
    n = p.get("group_size")
    if n is None:
        d = exact_stationary_single(r, q, sc, attends)
        return [write_json(out / "stationary.json", {"distribution": d.to_record()}, cfg.hash)]
    n = _int(p, "group_size", 1)
    if n < 1:
        raise ConfigError("group_size must be >= 1")
    receivers = [q] * n
    if q.a1 == 0:
        d = exact_stationary_group(r, receivers, sc, attends)
        method = "exact"
    else:
        d = simulate_group(r, receivers, n, sc, attends)
        method = "monte_carlo"
    rows = [{"k": k, "type": t, "mass": m} for k, t, m in d.group_rows()]
    return [
        write_json(out / "stationary.json", {"distribution": d.to_record(), "group_size": n,
                                             "method": method}, cfg.hash),
        write_csv(out / "stationary_group.csv", rows, ("k", "type", "mass"), cfg.hash),
    ]


CLASSIFY_FIELDS = ("alpha", "beta", "gamma", "theta", "coercion", "extortion", "delta_extortion",
                   "kappa", "lambda", "chi")


def read_strategies_csv(path: Path) -> list[TransmitterStrategy]:
    """Strategies from a CSV with columns alpha, beta, gamma, theta; bad rows are skipped."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"strategies file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    if not lines:
        return []
    reader = csv.DictReader(lines)
    need = ("alpha", "beta", "gamma", "theta")
    if not set(need) <= set(reader.fieldnames or []):
        raise DataError(f"{path}: header needs columns {', '.join(need)}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        try:
            r = TransmitterStrategy(*(float(row[k]) for k in need))
            require_viable(r)
        except (TypeError, ValueError) as exc:
            log.warning("%s line %d skipped: %s", path, lineno, exc)
            continue
        out.append(r)
    return out


def cmd_classify(cfg: ExperimentConfig) -> list[Path]:
    p = cfg.params
    if not p.get("input"):
        raise ConfigError("classify needs an input strategies file (--input or 'input:')")
    delta = float(p.get("delta", 0.05))
    rows = [classification_row(r, delta) for r in read_strategies_csv(Path(p["input"]))]
    return [write_csv(Path(cfg.out) / "classification.csv", rows, CLASSIFY_FIELDS, cfg.hash)]


OPT_FIELDS = ("replicate", "seed", "v_tc", "v_tn", "v_fc", "v_fn", "v_t", "v_f", "engagement_true",
              "engagement_fake", "acceptance_rate", "receiver_payoff", "transmitter_payoff")


def cmd_optimize(cfg: ExperimentConfig) -> list[Path]:
    p = cfg.params
    r = transmitter(p.get("transmitter"))
    q0 = receiver(p.get("receiver"))
    pc, oc, sc = payoffs(p), optimizer(p, cfg.seed), sim(p, cfg.seed)
    n = _int(p, "replicates", 1)
    if n < 1:
        raise ConfigError("replicates must be >= 1")
    rows = []
    for i in range(n):
        seed = derive_seed(cfg.seed, i)
        res = optimize_receiver(r, q0, pc, oc, sc, rng=np.random.default_rng(seed))
        row = {"replicate": i, "seed": seed, "acceptance_rate": res.acceptance_rate}
        row.update(res.to_record())
        rows.append(row)
    et = np.array([row["engagement_true"] for row in rows], dtype=float)
    ef = np.array([row["engagement_fake"] for row in rows], dtype=float)
    diff = et - ef
    diff = diff[np.isfinite(diff)]
    summary = {
        "transmitter": list(r.as_tuple()),
        "replicates": n,
        "mean_engagement_true": float(np.nanmean(et)) if np.isfinite(et).any() else None,
        "mean_engagement_fake": float(np.nanmean(ef)) if np.isfinite(ef).any() else None,
        "mean_engagement_difference": float(diff.mean()) if diff.size else None,
    }
    out = Path(cfg.out)
    return [write_csv(out / "optimize.csv", rows, OPT_FIELDS, cfg.hash),
            write_json(out / "optimize_summary.json", summary, cfg.hash)]


def cmd_sweep(cfg: ExperimentConfig) -> list[Path]:
    p = cfg.params
    pc, oc, sc = payoffs(p), optimizer(p, cfg.seed), sim(p, cfg.seed)
    n = _int(p, "n_samples", 10_000)
    delta = float(p.get("delta", 0.05))
    pct = float(p.get("percentile", 90))
    thr = float(p.get("share_threshold", 0.5))
    method = p.get("percentile_method", "nearest")
    records = run_sweep(n, pc, oc, sc, cfg.seed, cfg.workers, receiver(p.get("receiver")),
                        AssumptionKind(p.get("assume", "none")), delta)
    summary = summarize_sweep(records, pct, thr, delta, method)
    sens = [row for kind in ("misinformation", "mainstream")
            for row in threshold_sensitivity(records, kind, percentile_p=pct)]
    out = Path(cfg.out)
    return [
        write_csv(out / "sweep_records.csv", (r.to_row() for r in records), RECORD_FIELDS, cfg.hash),
        write_json(out / "sweep_summary.json", summary, cfg.hash),
        write_csv(out / "sweep_thresholds.csv", sens,
                  ("kind", "share_threshold", "n", "engagement_difference", "consumption_difference"),
                  cfg.hash),
    ]


COOPT_FIELDS = ("assume", "step", "v_tc", "v_tn", "v_fc", "v_fn", "v_t", "v_f",
                "engagement_true", "engagement_fake", "engagement_difference")


def cmd_coopt(cfg: ExperimentConfig) -> list[Path]:
    p = cfg.params
    pc, sc = payoffs(p), sim(p, cfg.seed)
    oc_r = optimizer(p, cfg.seed)
    oc_t = optimizer(p, cfg.seed, "transmitter_optimizer", {"sigma": 100.0, "mutation": "global"})
    rows, summary = [], {}
    for kind in _as_list(p.get("assume", "none")):
        res = co_optimize(
            AssumptionKind(kind), pc, oc_r, oc_t,
            horizon=_int(p, "horizon", 200), replicates=_int(p, "replicates", 100), cfg=sc,
            a0=float(p.get("a0", 0.0)), a1=float(p.get("a1", 0.0)), seed=cfg.seed,
            receiver_events=_int(p, "receiver_events", 50), workers=cfg.workers,
        )
        rows.extend(res.to_rows())
        summary[res.assume.value] = {"long_run_difference": res.long_run_difference,
                                     "long_run_stderr": res.long_run_stderr,
                                     "replicates": res.replicates}
    out = Path(cfg.out)
    return [write_csv(out / "coopt.csv", rows, COOPT_FIELDS, cfg.hash),
            write_json(out / "coopt_summary.json", summary, cfg.hash)]


def _summary_fields(label: str) -> tuple[str, ...]:
    keys = ("v_tc", "v_fc", "v_t", "v_f", "engagement_true", "engagement_fake", "engagement_difference")
    return (label, "replicates") + tuple(k + s for k in keys for s in ("", "_se"))


def cmd_micro(cfg: ExperimentConfig) -> list[Path]:
    p = cfg.params
    r = transmitter(p.get("transmitter"))
    pc, oc, sc = payoffs(p), optimizer(p, cfg.seed), sim(p, cfg.seed)
    rows = []
    for G in _as_list(p.get("groups", [1, 32])):
        res = microtargeting_run(r, int(G), pc, oc, sc, float(p.get("a0", 0.0)),
                                 _int(p, "replicates", 20), cfg.seed, cfg.workers)
        row = res.to_record()
        row["G"] = int(G)
        rows.append(row)
    return [write_csv(Path(cfg.out) / "micro.csv", rows, ("G",) + _summary_fields("M"), cfg.hash)]


def cmd_compete(cfg: ExperimentConfig) -> list[Path]:
    p = cfg.params
    fake = None if p.get("fake", _FAKE) is None else transmitter(p.get("fake", _FAKE), "fake")
    main = transmitter(p.get("mainstream", _MAINSTREAM), "mainstream")
    pc, oc, sc = payoffs(p), optimizer(p, cfg.seed), sim(p, cfg.seed)
    rows = [
        competition_run(fake, main, int(n), pc, oc, sc, receiver(p.get("receiver")),
                        _int(p, "replicates", 20), cfg.seed, cfg.workers).to_record()
        for n in _as_list(p.get("n_transmitters", [1, 2, 8, 32]))
    ]
    return [write_csv(Path(cfg.out) / "compete.csv", rows, _summary_fields("n_transmitters"), cfg.hash)]


SITE_FIELDS = ("site_id", "site_class", "transform", "slope", "intercept", "slope_stderr", "t_stat",
               "p_one_tailed", "p_two_tailed", "n", "r2", "direction")


def cmd_meta(cfg: ExperimentConfig) -> list[Path]:
    p = cfg.params
    if not p.get("input"):
        raise ConfigError("meta needs an input data file (--input or 'input:')")
    records = ingest_csv(Path(p["input"]))
    if not records:
        raise DataError(f"{p['input']}: no usable rows")
    trust = read_trust_csv(Path(p["trust"])) if p.get("trust") else None
    report = meta_report(records, trust, p.get("zero_engagement", "exclude"))
    points = [
        {"site_id": r.site_id, "site_class": r.site_class.value, "accuracy_mean": r.accuracy_mean,
         "engagement": r.engagement,
         "log10_engagement": math.log10(r.engagement) if r.engagement > 0 else math.nan}
        for r in records
    ]
    out = Path(cfg.out)
    return [
        write_csv(out / "meta_sites.csv", report.pop("sites"), SITE_FIELDS, cfg.hash),
        write_json(out / "meta_report.json", report, cfg.hash),
        write_csv(out / "meta_points.csv", points,
                  ("site_id", "site_class", "accuracy_mean", "engagement", "log10_engagement"), cfg.hash),
    ]


HANDLERS = {
    "stationary": cmd_stationary,
    "classify": cmd_classify,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "coopt": cmd_coopt,
    "micro": cmd_micro,
    "compete": cmd_compete,
    "meta": cmd_meta,
}


# ---------------------------------------------------------------------------
# entry point


COMMAND_HELP = {
    "stationary": "stationary marginals for one strategy pair or a receiver group",
    "classify": "coercion and extortion labels for strategies read from CSV",
    "optimize": "receiver optimization replicates against one transmitter",
    "sweep": "random strategy sweep with successful-strategy filters",
    "coopt": "receiver and transmitter co-optimization",
    "micro": "microtargeting across receiver group counts",
    "compete": "one misinformation site among mainstream sites",
    "meta": "per-site regressions and meta-analysis of headline data",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fakenews", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fakenews {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=COMMAND_HELP[name])
        sp.add_argument("--config", type=Path, help="YAML or JSON config file")
        sp.add_argument("--preset", choices=sorted(k for k, v in PRESETS.items() if v["command"] == name),
                        help="start from a named preset")
        sp.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        sp.add_argument("--workers", type=int, default=1, help="worker processes")
        sp.add_argument("--out", type=Path, default=Path("."), help="output directory")
        if name in ("classify", "meta"):
            sp.add_argument("--input", type=Path, help="input CSV")
        if name == "meta":
            sp.add_argument("--trust", type=Path, help="optional site trust CSV")
        sp.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    params: dict = {}
    if args.preset:
        params = copy.deepcopy(PRESETS[args.preset])
    if args.config:
        params = _merge(params, load_config_file(args.config))
    declared = params.pop("command", args.command)
    if declared != args.command:
        raise ConfigError(f"config is for command {declared!r}, not {args.command!r}")
    seed = params.pop("seed", 0) if args.seed is None else args.seed
    params.pop("seed", None)
    for key in ("input", "trust"):
        if getattr(args, key, None) is not None:
            params[key] = str(getattr(args, key))
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed={seed!r} must be an unsigned 64-bit integer")
    if args.workers < 1:
        raise ConfigError("workers must be >= 1")
    return ExperimentConfig(args.command, params, seed, args.workers, str(args.out))


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        paths = HANDLERS[cfg.command](cfg)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ArgumentError, ValueError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
