"""Strategy-update processes for receivers and transmitters.

Receivers improve their behaviour ``(p0, p_ct, p_cf, p_nt, p_nf)`` by noisy
hill climbing: a perturbed candidate replaces the current strategy with the Fermi
probability of the payoff gain. The attention parameters ``a0`` and ``a1`` are
exogenous and never mutate. Payoffs are stationary payoffs of the current
strategy pair, solved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from fakenews import _kernels
from fakenews.errors import ArgumentError
from fakenews.game import (
    PayoffConfig,
    Preference,
    ReceiverStrategy,
    StationaryDistribution,
    TransmitterStrategy,
    receiver_payoff,
    require_viable,
    transmitter_payoff,
)
from fakenews.parallel import chunked, derive_seed, pmap
from fakenews.stationary import SimConfig, exact_stationary_single

# engagement rates are undefined when the story type is this rare
RATE_FLOOR = 1e-6

FAKE_SITE = TransmitterStrategy(1.0, 0.1, -0.9, -0.1)
MAINSTREAM_SITE = TransmitterStrategy(0.9, 0.0, 0.1, 0.9)
ALWAYS_TRUE = TransmitterStrategy(1.0, 1.0, 0.0, 0.0)


def engagement_rate(consumed: float, share: float) -> float:
    """``consumed / share``, or NaN when the share is below ``RATE_FLOOR``."""
    return consumed / share if share > RATE_FLOOR else math.nan


def fermi(w_current: float, w_candidate: float, sigma: float) -> float:
    """Probability of adopting the candidate, ``1 / (1 + exp(sigma * (w_cur - w_cand)))``."""
    if sigma < 0:
        raise ArgumentError(f"sigma={sigma} must be >= 0")
    x = sigma * (w_current - w_candidate)
    if x > 0:
        e = math.exp(-x)
        return e / (1 + e)
    return 1 / (1 + math.exp(x))


class Mutation(str, Enum):
    LOCAL = "local"
    GLOBAL = "global"


def mutate_local(q: ReceiverStrategy, delta_max: float, rng: np.random.Generator) -> ReceiverStrategy:
    """Shift each behaviour entry by its own ``U[-delta_max, delta_max]`` draw, clamped to [0, 1].

    Draws in the same order as the optimizer kernels.
    """
    if not 0 <= delta_max <= 1:
        raise ArgumentError(f"delta_max={delta_max} must lie in [0, 1]")
    vals = [min(1.0, max(0.0, x + rng.uniform(-delta_max, delta_max))) for x in q.behavior]
    return q.with_behavior(vals)


def mutate_global(q: ReceiverStrategy, rng: np.random.Generator) -> ReceiverStrategy:
    return q.with_behavior([rng.random() for _ in range(5)])


@dataclass(frozen=True)
class OptimizerConfig:
    sigma: float = 1.0
    delta_max: float = 0.05
    mutation: Mutation = Mutation.LOCAL
    burn_in_events: int = 10_000
    measure_events: int = 10_000
    seed: int = 0
    record_every: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mutation", Mutation(self.mutation))
        if not (self.sigma >= 0) or not math.isfinite(self.sigma):
            raise ArgumentError(f"sigma={self.sigma} must be a finite number >= 0")
        if not 0 <= self.delta_max <= 1:
            raise ArgumentError(f"delta_max={self.delta_max} must lie in [0, 1]")
        for name in ("burn_in_events", "measure_events", "record_every"):
            if getattr(self, name) < 0:
                raise ArgumentError(f"{name} must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ArgumentError(f"seed={self.seed} is not an unsigned 64-bit integer")

    @property
    def events(self) -> int:
        return self.burn_in_events + self.measure_events

    @property
    def kernel_delta(self) -> float:
        # negative step size tells the kernels to redraw entries uniformly
        return -1.0 if self.mutation is Mutation.GLOBAL else float(self.delta_max)

    def n_records(self, events: Optional[int] = None) -> int:
        events = self.events if events is None else events
        return events // self.record_every if self.record_every else 0


class AssumptionKind(str, Enum):
    PREFERS_FAKE = "prefers_fake"
    PREFERS_TRUE = "prefers_true"
    NONE = "none"

    @property
    def kernel_code(self) -> int:
        return {
            AssumptionKind.NONE: _kernels.ASSUME_NONE,
            AssumptionKind.PREFERS_FAKE: _kernels.ASSUME_FAKE,
            AssumptionKind.PREFERS_TRUE: _kernels.ASSUME_TRUE,
        }[self]


def draw_transmitter(assume: AssumptionKind, rng: np.random.Generator) -> TransmitterStrategy:
    """Uniform draw from the assumption region (fake-coercive, true-coercive or all viable)."""
    out = np.empty(4)
    _kernels.draw_transmitter(AssumptionKind(assume).kernel_code, rng, out)
    return TransmitterStrategy(*map(float, out))


@dataclass(frozen=True)
class SocialLearningConfig:
    population_size: int
    mu: Optional[float] = None
    sigma: float = 1.0
    rounds: int = 10_000
    burn_in: Optional[int] = None

    def __post_init__(self):
        if self.population_size < 2:
            raise ArgumentError(f"population_size={self.population_size} must be >= 2")
        if self.mu is not None and not 0 <= self.mu <= 1:
            raise ArgumentError(f"mu={self.mu} must lie in [0, 1]")
        if self.sigma < 0:
            raise ArgumentError(f"sigma={self.sigma} must be >= 0")
        if self.rounds < 1:
            raise ArgumentError("rounds must be >= 1")
        if self.burn_in is not None and not 0 <= self.burn_in < self.rounds:
            raise ArgumentError("burn_in must lie in [0, rounds)")

    @property
    def effective_mu(self) -> float:
        return 1.0 / self.population_size if self.mu is None else self.mu

    @property
    def effective_burn_in(self) -> int:
        return self.rounds // 10 if self.burn_in is None else self.burn_in


def _attend(pc: PayoffConfig) -> int:
    return 0 if pc.receiver_prefers is Preference.TRUTH else 1


def _prefers_truth(pc: PayoffConfig) -> bool:
    return pc.receiver_prefers is Preference.TRUTH


def _rates(v: np.ndarray) -> dict:
    """Summary quantities from marginals ``(v_tc, v_tn, v_fc, v_fn)``."""
    v_tc, v_tn, v_fc, v_fn = (float(x) for x in v)
    v_t, v_f = v_tc + v_tn, v_fc + v_fn
    return {
        "v_tc": v_tc,
        "v_tn": v_tn,
        "v_fc": v_fc,
        "v_fn": v_fn,
        "v_t": v_t,
        "v_f": v_f,
        "engagement_true": engagement_rate(v_tc, v_t),
        "engagement_fake": engagement_rate(v_fc, v_f),
    }


def _as_distribution(v: np.ndarray) -> StationaryDistribution:
    v = np.clip(np.asarray(v, dtype=np.float64), 0.0, None)
    return StationaryDistribution(*map(float, v / v.sum()))


# ---------------------------------------------------------------------------
# single receiver


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of one optimization run; ``mean`` averages marginals over the measured events."""

    mean: StationaryDistribution
    accepted: int
    events: int
    final_receiver: ReceiverStrategy
    trace: np.ndarray = field(repr=False)
    receiver_payoff: float = 0.0
    transmitter_payoff: float = 0.0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.events if self.events else math.nan

    @property
    def engagement_true(self) -> float:
        return engagement_rate(self.mean.v_tc, self.mean.v_t)

    @property
    def engagement_fake(self) -> float:
        return engagement_rate(self.mean.v_fc, self.mean.v_f)

    def to_record(self) -> dict:
        rec = _rates(np.array([self.mean.v_tc, self.mean.v_tn, self.mean.v_fc, self.mean.v_fn]))
        rec.update(
            accepted=self.accepted,
            events=self.events,
            receiver_payoff=self.receiver_payoff,
            transmitter_payoff=self.transmitter_payoff,
        )
        return rec


def _run_optimizer(rs: np.ndarray, weights: np.ndarray, rec: np.ndarray, memory_len: int,
                   pc: PayoffConfig, oc: OptimizerConfig, epsilon: float,
                   rng: np.random.Generator):
    """Dispatch to the optimizer kernels. ``rec`` is updated in place to the final strategy.

    Returns ``(mean (T, 4), accepted, trace (n, T, 4))``.
    """
    T = rs.shape[0]
    n_rec = oc.n_records()
    mean = np.zeros((T, 4))
    args = (_attend(pc), pc.B, pc.C, _prefers_truth(pc), oc.sigma, oc.kernel_delta, epsilon,
            oc.burn_in_events, oc.measure_events, oc.record_every, rng)
    if T == 1 and memory_len == 1:
        trace = np.zeros((n_rec, 4))
        accepted = _kernels.optimize_single_kernel(rs[0], rec, *args, mean[0], trace)
        return mean, accepted, trace.reshape(n_rec, 1, 4)
    trace = np.zeros((n_rec, T, 4))
    accepted = _kernels.optimize_kernel(
        rs, weights, rec, args[0], memory_len, *args[1:], mean, trace
    )
    return mean, accepted, trace


def _final_marginals(rs, rec, memory_len, pc, epsilon) -> np.ndarray:
    out = np.empty((rs.shape[0], 4))
    q = ReceiverStrategy.from_array(rec, memory_len=memory_len)
    for t, r in enumerate(rs):
        d = exact_stationary_single(TransmitterStrategy(*r), q, SimConfig(epsilon=epsilon),
                                    attends_to=pc.preferred_type)
        out[t] = (d.v_tc, d.v_tn, d.v_fc, d.v_fn)
    return out


def optimize_receiver(
    r: TransmitterStrategy,
    q0: Optional[ReceiverStrategy] = None,
    pc: PayoffConfig = PayoffConfig(),
    oc: OptimizerConfig = OptimizerConfig(),
    cfg: SimConfig = SimConfig(),
    rng: Optional[np.random.Generator] = None,
) -> OptimizationResult:
    """Myopic local optimization of one receiver against a fixed transmitter.

    Starts from ``q0`` (default: never engage). Each event proposes a mutant and
    adopts it with the Fermi probability of the payoff difference; marginals are
    averaged over the ``measure_events`` that follow ``burn_in_events``. Randomness
    comes from ``rng`` or, if omitted, from ``oc.seed``.
    """
    require_viable(r)
    q0 = ReceiverStrategy() if q0 is None else q0
    rng = np.random.default_rng(oc.seed) if rng is None else rng
    rs = r.to_array().reshape(1, 4)
    rec = q0.to_array()
    mean, accepted, trace = _run_optimizer(rs, np.ones(1), rec, q0.memory_len, pc, oc,
                                           cfg.epsilon, rng)
    if oc.measure_events == 0:
        mean = _final_marginals(rs, rec, q0.memory_len, pc, cfg.epsilon)
    dist = _as_distribution(mean[0])
    return OptimizationResult(
        mean=dist,
        accepted=int(accepted),
        events=oc.events,
        final_receiver=ReceiverStrategy.from_array(rec, memory_len=q0.memory_len),
        trace=trace[:, 0, :],
        receiver_payoff=receiver_payoff(dist, pc),
        transmitter_payoff=transmitter_payoff(dist, pc),
    )


def optimize_many(rs: np.ndarray, q0: ReceiverStrategy, pc: PayoffConfig, oc: OptimizerConfig,
                  cfg: SimConfig, seeds: Sequence[int]) -> np.ndarray:
    """Optimize one fresh receiver per strategy row; returns mean marginals (n, 4).

    Row ``i`` uses ``default_rng(seeds[i])``, exactly as ``optimize_receiver`` would.
    """
    out = np.empty((len(rs), 4))
    for i, (r, seed) in enumerate(zip(rs, seeds)):
        rec = q0.to_array()
        mean, _, _ = _run_optimizer(np.asarray(r, dtype=np.float64).reshape(1, 4), np.ones(1), rec,
                                    q0.memory_len, pc, oc, cfg.epsilon, np.random.default_rng(seed))
        if oc.measure_events == 0:
            mean = _final_marginals(np.asarray(r).reshape(1, 4), rec, q0.memory_len, pc, cfg.epsilon)
        out[i] = mean[0]
    return out


# ---------------------------------------------------------------------------
# co-optimization


@dataclass(frozen=True)
class CoOptResult:
    """Replicate-pooled co-optimization trajectory.

    ``marginals[k]`` averages ``(v_tc, v_tn, v_fc, v_fn)`` over replicates after
    ``steps[k]`` alternation steps; ``difference`` is the percent engagement gap
    ``100 * (E_true - E_fake) / mean(E_true, E_fake)`` of the pooled rates.
    """

    assume: AssumptionKind
    steps: np.ndarray
    marginals: np.ndarray
    difference: np.ndarray
    long_run_difference: float
    replicate_long_run: np.ndarray = field(repr=False)
    replicates: int = 0

    @property
    def long_run_stderr(self) -> float:
        x = self.replicate_long_run[np.isfinite(self.replicate_long_run)]
        return float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan

    def to_rows(self) -> list[dict]:
        rows = []
        for k, step in enumerate(self.steps):
            row = {"assume": self.assume.value, "step": int(step)}
            row.update(_rates(self.marginals[k]))
            row["engagement_difference"] = float(self.difference[k])
            rows.append(row)
        return rows


def percent_difference(v: np.ndarray) -> float:
    """``100 * (E_t - E_f) / ((E_t + E_f) / 2)`` from marginals ``(v_tc, v_tn, v_fc, v_fn)``."""
    e_t = engagement_rate(v[0], v[0] + v[1])
    e_f = engagement_rate(v[2], v[2] + v[3])
    mean = (e_t + e_f) / 2
    if not math.isfinite(mean) or mean <= 0:
        return math.nan
    return 100.0 * (e_t - e_f) / mean


def _coopt_chunk(task) -> np.ndarray:
    (indices, seed, assume, rec0, memory_len, pc, oc_r, oc_t, eps, horizon, record_every,
     receiver_events, receiver_first) = task
    n_rec = horizon // record_every
    out = np.empty((len(indices), n_rec, 4))
    for j, i in enumerate(indices):
        rng = np.random.default_rng(derive_seed(seed, i))
        r = ALWAYS_TRUE.to_array()
        rec = rec0.copy()
        _kernels.coopt_kernel(
            r, rec, _attend(pc), memory_len, pc.B, pc.C, _prefers_truth(pc), pc.b_t, pc.b_f,
            oc_r.sigma, oc_t.sigma, oc_r.kernel_delta, eps, assume.kernel_code, horizon,
            receiver_events, receiver_first, record_every, rng, out[j],
        )
    return out


def co_optimize(
    assume: AssumptionKind,
    pc: PayoffConfig = PayoffConfig(),
    oc_receiver: OptimizerConfig = OptimizerConfig(),
    oc_transmitter: OptimizerConfig = OptimizerConfig(sigma=100.0, mutation=Mutation.GLOBAL),
    horizon: int = 200,
    replicates: int = 100,
    cfg: SimConfig = SimConfig(),
    a0: float = 0.0,
    a1: float = 0.0,
    memory_len: int = 1,
    seed: int = 0,
    record_every: Optional[int] = None,
    long_run_fraction: float = 0.5,
    receiver_events: int = 50,
    receiver_first: bool = True,
    workers: int = 1,
) -> CoOptResult:
    """Receiver and transmitter co-optimize in rounds.

    Each round holds ``receiver_events`` receiver updates followed by one
    transmitter update (``receiver_events=1`` is strict alternation). Play starts
    from an always-true transmitter and a never-engaging receiver. The transmitter
    proposes fresh draws from its assumption region and scores total consumption
    ``b_t v_tc + b_f v_fc``. The long-run difference pools the last
    ``long_run_fraction`` of the recorded trajectory over all replicates.
    """
    assume = AssumptionKind(assume)
    if replicates < 1:
        raise ArgumentError("replicates must be >= 1")
    if horizon < 1:
        raise ArgumentError("horizon must be >= 1")
    if receiver_events < 1:
        raise ArgumentError("receiver_events must be >= 1")
    if not 0 < long_run_fraction <= 1:
        raise ArgumentError("long_run_fraction must lie in (0, 1]")
    record_every = max(1, horizon // 100) if record_every is None else record_every
    if not 1 <= record_every <= horizon:
        raise ArgumentError("record_every must lie in [1, horizon]")
    rec0 = ReceiverStrategy.never_engage(a0=a0, a1=a1, memory_len=memory_len).to_array()
    tasks = [
        (idx, seed, assume, rec0, memory_len, pc, oc_receiver, oc_transmitter, cfg.epsilon,
         horizon, record_every, receiver_events, receiver_first)
        for idx in chunked(range(replicates), 64)
    ]
    traces = np.concatenate(pmap(_coopt_chunk, tasks, workers))  # (R, n_rec, 4)
    n_rec = traces.shape[1]
    steps = record_every * np.arange(1, n_rec + 1)
    marginals = traces.mean(axis=0)
    difference = np.array([percent_difference(v) for v in marginals])
    tail = slice(n_rec - max(1, int(round(long_run_fraction * n_rec))), n_rec)
    long_run = percent_difference(traces[:, tail].sum(axis=(0, 1)))
    per_rep = np.array([percent_difference(t) for t in traces[:, tail].sum(axis=1)])
    return CoOptResult(assume, steps, marginals, difference, long_run, per_rep, replicates)


# ---------------------------------------------------------------------------
# groups of receivers


def _require_memoryless(a1: float, what: str) -> None:
    if a1 != 0:
        raise ArgumentError(f"{what} supports memoryless receivers only (a1 = 0)")


@dataclass(frozen=True)
class SocialResult:
    population_size: int
    mean: np.ndarray  # group-average (v_tc, v_tn, v_fc, v_fn)
    changes: int
    imitation_events: int
    mean_adoption_prob: float
    final_receivers: np.ndarray = field(repr=False)

    def to_record(self) -> dict:
        rec = {"population_size": self.population_size}
        rec.update(_rates(self.mean))
        rec.update(changes=self.changes, mean_adoption_prob=self.mean_adoption_prob)
        return rec


def social_learning_run(
    r: TransmitterStrategy,
    slc: SocialLearningConfig,
    pc: PayoffConfig = PayoffConfig(),
    cfg: SimConfig = SimConfig(),
    initial: Optional[Sequence[ReceiverStrategy]] = None,
    rng: Optional[np.random.Generator] = None,
) -> SocialResult:
    """Pairwise imitation with uniform-resample mutation in a group of receivers.

    Each round a random focal receiver either mutates (probability ``mu``) or copies
    a random other receiver with the Fermi probability of their payoff gap.
    Payoffs are exact long-run payoffs for memoryless receivers.
    """
    require_viable(r)
    N = slc.population_size
    if initial is None:
        initial = [ReceiverStrategy()] * N
    if len(initial) != N:
        raise ArgumentError(f"need {N} initial receivers, got {len(initial)}")
    for q in initial:
        _require_memoryless(q.a1, "social learning")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    recs = np.array([q.to_array() for q in initial])
    mean = np.zeros(4)
    stats = np.zeros(3)
    burn = slc.effective_burn_in
    _kernels.social_kernel(
        r.to_array(), recs, _attend(pc), cfg.epsilon, pc.B, pc.C, _prefers_truth(pc), slc.sigma,
        slc.effective_mu, burn, slc.rounds - burn, rng, mean, stats,
    )
    n_imit = int(stats[1])
    return SocialResult(
        population_size=N,
        mean=mean,
        changes=int(stats[0]),
        imitation_events=n_imit,
        mean_adoption_prob=stats[2] / n_imit if n_imit else math.nan,
        final_receivers=recs,
    )


@dataclass(frozen=True)
class ReplicateSummary:
    """Replicate-level engagement and consumption for one experimental setting."""

    label: str
    value: float
    marginals: np.ndarray = field(repr=False)  # (R, 4) per-replicate mean marginals

    @property
    def pooled(self) -> dict:
        return _rates(self.marginals.mean(axis=0))

    def replicate_values(self, key: str) -> np.ndarray:
        return np.array([_rates(v)[key] for v in self.marginals])

    def replicate_difference(self) -> np.ndarray:
        """Per-replicate ``engagement_true - engagement_fake``."""
        return self.replicate_values("engagement_true") - self.replicate_values("engagement_fake")

    def mean_se(self, key: str) -> tuple[float, float]:
        if key == "engagement_difference":
            x = self.replicate_difference()
        else:
            x = self.replicate_values(key)
        x = x[np.isfinite(x)]
        if x.size == 0:
            return math.nan, math.nan
        se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan
        return float(x.mean()), se

    def to_record(self) -> dict:
        rec = {self.label: self.value, "replicates": len(self.marginals)}
        for key in ("v_tc", "v_fc", "v_t", "v_f", "engagement_true", "engagement_fake",
                    "engagement_difference"):
            m, se = self.mean_se(key)
            rec[key] = m
            rec[key + "_se"] = se
        return rec


def _micro_replicate(task) -> np.ndarray:
    r, G, a0, pc, oc, eps, seed = task
    rng = np.random.default_rng(seed)
    recs = np.tile(ReceiverStrategy.never_engage(a0=a0).to_array(), (G, 1))
    mean = np.zeros((G, 4))
    _kernels.micro_kernel(r, recs, _attend(pc), eps, pc.B, pc.C, _prefers_truth(pc), oc.sigma,
                          oc.kernel_delta, oc.burn_in_events, oc.measure_events, rng, mean)
    return mean


def microtargeting_run(
    r: TransmitterStrategy,
    G: int,
    pc: PayoffConfig = PayoffConfig(),
    oc: OptimizerConfig = OptimizerConfig(),
    cfg: SimConfig = SimConfig(),
    a0: float = 0.0,
    replicates: int = 1,
    seed: int = 0,
    workers: int = 1,
) -> ReplicateSummary:
    """``G`` independently optimizing receiver groups served by one transmitter.

    The transmitter responds to the engaged fraction across all groups, so each
    group's influence is ``M = 1/G``. Per-replicate marginals average the groups.
    Replicate ``i`` draws from ``derive_seed(seed, i)``; with ``G = 1`` it repeats
    ``optimize_receiver`` under that seed.
    """
    require_viable(r)
    if G < 1:
        raise ArgumentError(f"G={G} must be >= 1")
    if replicates < 1:
        raise ArgumentError("replicates must be >= 1")
    tasks = [(r.to_array(), G, a0, pc, oc, cfg.epsilon, derive_seed(seed, i))
             for i in range(replicates)]
    per_group = pmap(_micro_replicate, tasks, workers, chunksize=8)
    marg = np.array([m.mean(axis=0) for m in per_group])
    return ReplicateSummary("M", 1.0 / G, marg)


def _compete_replicate(task) -> np.ndarray:
    rs, weights, rec0, memory_len, pc, oc, eps, seed = task
    rec = rec0.copy()
    mean, _, _ = _run_optimizer(rs, weights, rec, memory_len, pc, oc, eps,
                                np.random.default_rng(seed))
    if oc.measure_events == 0:
        mean = _final_marginals(rs, rec, memory_len, pc, eps)
    return mean[0]


def competition_run(
    fake: Optional[TransmitterStrategy] = FAKE_SITE,
    mainstream: TransmitterStrategy = MAINSTREAM_SITE,
    n_transmitters: int = 2,
    pc: PayoffConfig = PayoffConfig(),
    oc: OptimizerConfig = OptimizerConfig(),
    cfg: SimConfig = SimConfig(),
    q0: Optional[ReceiverStrategy] = None,
    replicates: int = 1,
    seed: int = 0,
    workers: int = 1,
) -> ReplicateSummary:
    """One receiver facing a misinformation site among ``n - 1`` mainstream sites.

    The receiver applies one behavioural strategy to every source, each with its
    own game state, and scores the unweighted mean payoff. The mainstream sites are
    identical, so they enter as one source with weight ``(n-1)/n``. The summary
    reports marginals of the misinformation source; with ``fake=None`` there is no
    such source and all its rates are zero.
    """
    if n_transmitters < 1:
        raise ArgumentError("n_transmitters must be >= 1")
    if replicates < 1:
        raise ArgumentError("replicates must be >= 1")
    if fake is None:
        return ReplicateSummary("n_transmitters", n_transmitters, np.zeros((replicates, 4)))
    require_viable(fake)
    require_viable(mainstream)
    q0 = ReceiverStrategy() if q0 is None else q0
    n = n_transmitters
    if n == 1:
        rs, weights = fake.to_array().reshape(1, 4), np.ones(1)
    else:
        rs = np.vstack([fake.to_array(), mainstream.to_array()])
        weights = np.array([1.0 / n, (n - 1.0) / n])
    tasks = [(rs, weights, q0.to_array(), q0.memory_len, pc, oc, cfg.epsilon, derive_seed(seed, i))
             for i in range(replicates)]
    marg = np.array(pmap(_compete_replicate, tasks, workers, chunksize=8))
    return ReplicateSummary("n_transmitters", n, marg)


# ---------------------------------------------------------------------------
# memory and attention


def memory_label(history: Sequence[str], m: int) -> str:
    """``"f"`` if any of the last ``m`` stories was false, else ``"t"`` (empty history: ``"t"``)."""
    if m < 1:
        raise ArgumentError(f"memory length m={m} must be >= 1")
    for s in history:
        if s not in ("t", "f"):
            raise ArgumentError(f"unknown story type {s!r}")
    return "f" if "f" in list(history)[-m:] else "t"


def _replicate_task(task) -> np.ndarray:
    rs, q0, pc, oc, cfg, seeds = task
    return optimize_many(rs, q0, pc, oc, cfg, seeds)


def replicate_optimize(rs: np.ndarray, q0: ReceiverStrategy, pc: PayoffConfig, oc: OptimizerConfig,
                       cfg: SimConfig, seed: int, workers: int = 1, chunk: int = 50) -> np.ndarray:
    """Optimize a fresh receiver against each strategy row; row ``i`` uses ``derive_seed(seed, i)``."""
    rs = np.atleast_2d(np.asarray(rs, dtype=np.float64))
    seeds = [derive_seed(seed, i) for i in range(len(rs))]
    tasks = [(rs[i : i + chunk], q0, pc, oc, cfg, seeds[i : i + chunk])
             for i in range(0, len(rs), chunk)]
    return np.concatenate(pmap(_replicate_task, tasks, workers))


def memory_sweep(
    r: TransmitterStrategy = FAKE_SITE,
    memory_lengths: Sequence[int] = tuple(range(1, 11)),
    pc: PayoffConfig = PayoffConfig(),
    oc: OptimizerConfig = OptimizerConfig(),
    cfg: SimConfig = SimConfig(),
    a0: float = 0.0,
    a1: float = 1.0,
    replicates: int = 20,
    seed: int = 0,
    workers: int = 1,
) -> list[ReplicateSummary]:
    """Optimization against a fixed strategy for each receiver memory length.

    Memory only matters through the ``p_ij`` rule, so receivers default to ``a1 = 1``.
    """
    require_viable(r)
    rs = np.tile(r.to_array(), (replicates, 1))
    out = []
    for m in memory_lengths:
        q0 = ReceiverStrategy.never_engage(a0=a0, a1=a1, memory_len=m)
        marg = replicate_optimize(rs, q0, pc, oc, cfg, seed, workers)
        out.append(ReplicateSummary("memory_len", m, marg))
    return out


ATTENTION_AXES = ("a0", "a1", "sigma")


def attention_sweep(
    strategies: np.ndarray,
    axis: str,
    values: Sequence[float],
    pc: PayoffConfig = PayoffConfig(),
    oc: OptimizerConfig = OptimizerConfig(),
    cfg: SimConfig = SimConfig(),
    a0: float = 0.0,
    a1: float = 0.0,
    seed: int = 0,
    workers: int = 1,
) -> list[ReplicateSummary]:
    """Mean outcomes against a fixed set of strategies as one attention parameter varies.

    Every value reuses the same per-strategy seeds (common random numbers), so
    differences between values reflect the parameter rather than sampling noise.
    """
    if axis not in ATTENTION_AXES:
        raise ArgumentError(f"axis must be one of {ATTENTION_AXES}")
    out = []
    for value in values:
        q_a0, q_a1, o = a0, a1, oc
        if axis == "a0":
            q_a0 = value
        elif axis == "a1":
            q_a1 = value
        else:
            o = replace(oc, sigma=value)
        q0 = ReceiverStrategy.never_engage(a0=q_a0, a1=q_a1)
        marg = replicate_optimize(strategies, q0, pc, o, cfg, seed, workers)
        out.append(ReplicateSummary(axis, value, marg))
    return out
