"""Random-strategy sweeps: sample transmitters, optimize a receiver against each,
then pick out the strategies that succeed at promoting true or false stories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from fakenews import _kernels
from fakenews.dynamics import (
    AssumptionKind,
    OptimizerConfig,
    _rates,
    optimize_many,
)
from fakenews.errors import ArgumentError
from fakenews.game import (
    PayoffConfig,
    ReceiverStrategy,
    StationaryDistribution,
    TransmitterStrategy,
    receiver_payoff,
    transmitter_payoff,
)
from fakenews.parallel import derive_seed, pmap
from fakenews.stationary import SimConfig
from fakenews.stats import binomial_sf
from fakenews.strategies import StrategyClass, classify, is_delta_extortioner

KINDS = ("misinformation", "mainstream")


def sample_viable_strategy(rng: np.random.Generator,
                           assume: AssumptionKind = AssumptionKind.NONE) -> TransmitterStrategy:
    """Uniform ``alpha, beta``; then ``gamma, theta`` uniform on their viable intervals.

    ``assume`` restricts the slopes to the fake- or true-coercive sign region.
    """
    out = np.empty(4)
    _kernels.draw_transmitter(AssumptionKind(assume).kernel_code, rng, out)
    return TransmitterStrategy(*map(float, out))


@dataclass(frozen=True)
class SweepRecord:
    index: int
    seed: int
    strategy: TransmitterStrategy
    v_tc: float
    v_fc: float
    v_t: float
    v_f: float
    engagement_true: float
    engagement_fake: float
    classification: StrategyClass
    receiver_payoff: float
    transmitter_payoff: float

    @property
    def engagement_difference(self) -> float:
        return self.engagement_true - self.engagement_fake

    @property
    def consumption_difference(self) -> float:
        return self.v_tc - self.v_fc

    def to_row(self) -> dict:
        r = self.strategy
        return {
            "index": self.index,
            "seed": self.seed,
            "alpha": r.alpha,
            "beta": r.beta,
            "gamma": r.gamma,
            "theta": r.theta,
            "v_tc": self.v_tc,
            "v_fc": self.v_fc,
            "v_t": self.v_t,
            "v_f": self.v_f,
            "engagement_true": self.engagement_true,
            "engagement_fake": self.engagement_fake,
            "engagement_difference": self.engagement_difference,
            "consumption_difference": self.consumption_difference,
            "coercion": self.classification.coercion.value,
            "extortion": self.classification.extortion.value,
            "delta_extortion": self.classification.delta_extortion.value,
            "receiver_payoff": self.receiver_payoff,
            "transmitter_payoff": self.transmitter_payoff,
        }


RECORD_FIELDS = (
    "index", "seed", "alpha", "beta", "gamma", "theta", "v_tc", "v_fc", "v_t", "v_f",
    "engagement_true", "engagement_fake", "engagement_difference", "consumption_difference",
    "coercion", "extortion", "delta_extortion", "receiver_payoff", "transmitter_payoff",
)


def strategy_seed(master_seed: int, index: int) -> int:
    return derive_seed(master_seed, 2 * index)


def optimizer_seed(master_seed: int, index: int) -> int:
    return derive_seed(master_seed, 2 * index + 1)


def _sweep_chunk(task) -> list[SweepRecord]:
    indices, master_seed, assume, q0, pc, oc, cfg, delta = task
    strategies = [sample_viable_strategy(np.random.default_rng(strategy_seed(master_seed, i)), assume)
                  for i in indices]
    seeds = [optimizer_seed(master_seed, i) for i in indices]
    rs = np.array([r.as_tuple() for r in strategies])
    means = optimize_many(rs, q0, pc, oc, cfg, seeds)
    out = []
    for i, seed, r, v in zip(indices, seeds, strategies, means):
        v = np.clip(v, 0.0, None)
        v = v / v.sum()
        d = StationaryDistribution(*map(float, v))
        rates = _rates(v)
        out.append(SweepRecord(
            index=i,
            seed=seed,
            strategy=r,
            v_tc=rates["v_tc"],
            v_fc=rates["v_fc"],
            v_t=rates["v_t"],
            v_f=rates["v_f"],
            engagement_true=rates["engagement_true"],
            engagement_fake=rates["engagement_fake"],
            classification=classify(r, delta),
            receiver_payoff=receiver_payoff(d, pc),
            transmitter_payoff=transmitter_payoff(d, pc),
        ))
    return out


def run_sweep(
    n_samples: int,
    pc: PayoffConfig = PayoffConfig(),
    oc: OptimizerConfig = OptimizerConfig(),
    cfg: SimConfig = SimConfig(),
    master_seed: int = 0,
    workers: int = 1,
    q0: Optional[ReceiverStrategy] = None,
    assume: AssumptionKind = AssumptionKind.NONE,
    delta: float = 0.05,
    chunk: int = 100,
) -> list[SweepRecord]:
    """Draw ``n_samples`` strategies and optimize a fresh receiver against each.

    Sample ``i`` draws its strategy from ``strategy_seed(master_seed, i)`` and runs
    ``optimize_receiver`` seeded with ``optimizer_seed(master_seed, i)``, so records
    do not depend on ``workers`` or ``chunk``.
    """
    if n_samples < 1:
        raise ArgumentError("n_samples must be >= 1")
    q0 = ReceiverStrategy() if q0 is None else q0
    assume = AssumptionKind(assume)
    tasks = [(range(s, min(s + chunk, n_samples)), master_seed, assume, q0, pc, oc, cfg, delta)
             for s in range(0, n_samples, chunk)]
    return [rec for part in pmap(_sweep_chunk, tasks, workers) for rec in part]


def percentile(values: Iterable[float], p: float, method: str = "nearest") -> float:
    """Nearest-rank percentile: the ``ceil(p/100 * n)``-th smallest value (NaN ignored).

    ``method="linear"`` interpolates between order statistics instead.
    """
    if not 0 <= p <= 100:
        raise ArgumentError(f"percentile p={p} must lie in [0, 100]")
    x = np.sort(np.asarray([v for v in values if not math.isnan(v)], dtype=np.float64))
    if x.size == 0:
        raise ArgumentError("percentile of an empty sample")
    if method == "nearest":
        rank = max(1, math.ceil(p / 100 * x.size))
        return float(x[rank - 1])
    if method == "linear":
        return float(np.percentile(x, p))
    raise ArgumentError(f"unknown percentile method {method!r}")


def _kind_fields(kind: str) -> tuple[str, str]:
    if kind == "misinformation":
        return "engagement_fake", "v_f"
    if kind == "mainstream":
        return "engagement_true", "v_t"
    raise ArgumentError(f"kind must be one of {KINDS}, got {kind!r}")


def successful_filter(
    records: Sequence[SweepRecord],
    kind: str,
    percentile_p: float = 90,
    share_threshold: float = 0.5,
    method: str = "nearest",
) -> list[SweepRecord]:
    """Records in the top engagement percentile for the kind's story type and with a
    majority share of that type. Undefined engagement rates never pass."""
    if not records:
        raise ArgumentError("no records to filter")
    eng_key, share_key = _kind_fields(kind)
    cutoff = percentile((getattr(r, eng_key) for r in records), percentile_p, method)
    return [
        r for r in records
        if getattr(r, eng_key) >= cutoff and getattr(r, share_key) > share_threshold
    ]


def _mean(values: Sequence[float]) -> float:
    x = np.array([v for v in values if not math.isnan(v)])
    return float(x.mean()) if x.size else math.nan


def threshold_sensitivity(
    records: Sequence[SweepRecord],
    kind: str,
    share_thresholds: Sequence[float] = tuple(np.round(np.arange(0.1, 1.0, 0.1), 10)),
    percentile_p: float = 90,
) -> list[dict]:
    """Subset means of engagement and consumption differences as the share threshold varies."""
    rows = []
    for thr in share_thresholds:
        sub = successful_filter(records, kind, percentile_p, thr)
        rows.append({
            "kind": kind,
            "share_threshold": float(thr),
            "n": len(sub),
            "engagement_difference": _mean([r.engagement_difference for r in sub]),
            "consumption_difference": _mean([r.consumption_difference for r in sub]),
        })
    return rows


def extortion_prevalence(
    successful: Sequence[SweepRecord],
    null_records: Sequence[SweepRecord],
    kind: str,
    delta: float = 0.05,
) -> dict:
    """Share of Delta-extortioners among successful strategies against the full sample.

    The p-value is the exact one-sided binomial tail ``P(X >= observed)`` with the
    null share as success probability.
    """
    if not successful or not null_records:
        raise ArgumentError("both record sets must be nonempty")
    _kind_fields(kind)
    ext = "fake" if kind == "misinformation" else "mainstream"
    k = sum(is_delta_extortioner(r.strategy, ext, delta) for r in successful)
    k_null = sum(is_delta_extortioner(r.strategy, ext, delta) for r in null_records)
    p0 = k_null / len(null_records)
    return {
        "kind": kind,
        "delta": delta,
        "n_successful": len(successful),
        "n_null": len(null_records),
        "observed_fraction": k / len(successful),
        "null_fraction": p0,
        "p_value": binomial_sf(k, len(successful), p0),
    }


def summarize_sweep(
    records: Sequence[SweepRecord],
    percentile_p: float = 90,
    share_threshold: float = 0.5,
    delta: float = 0.05,
    method: str = "nearest",
) -> dict:
    """Filter definitions, thresholds, subset means and enrichment for each kind."""
    summary = {"n_samples": len(records), "percentile_p": percentile_p,
               "share_threshold": share_threshold, "percentile_method": method, "kinds": {}}
    for kind in KINDS:
        eng_key, _ = _kind_fields(kind)
        sub = successful_filter(records, kind, percentile_p, share_threshold, method)
        entry = {
            "engagement_cutoff": percentile((getattr(r, eng_key) for r in records), percentile_p, method),
            "n_successful": len(sub),
            "mean_engagement_difference": _mean([r.engagement_difference for r in sub]),
            "mean_consumption_difference": _mean([r.consumption_difference for r in sub]),
            "mean_engagement_true": _mean([r.engagement_true for r in sub]),
            "mean_engagement_fake": _mean([r.engagement_fake for r in sub]),
        }
        if sub:
            entry["extortion"] = extortion_prevalence(sub, records, kind, delta)
        summary["kinds"][kind] = entry
    return summary
