"""Exact and Monte Carlo stationary distributions of the repeated game.

Both actors suffer execution errors: each realized binary action (story type,
engage or not) is inverted independently with probability ``epsilon``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from fakenews import _kernels
from fakenews.errors import ArgumentError
from fakenews.game import (
    ReceiverStrategy,
    StationaryDistribution,
    TransmitterStrategy,
    require_viable,
)

log = logging.getLogger(__name__)

# state labels of the memory-1 chain, in kernel index order
SINGLE_STATES = (("c", "f"), ("c", "t"), ("n", "f"), ("n", "t"))


@dataclass(frozen=True)
class SimConfig:
    epsilon: float = 1e-3
    rounds: int = 10_000
    seed: int = 0
    burn_in: Optional[int] = None

    def __post_init__(self):
        if not 0 <= self.epsilon < 0.5:
            raise ArgumentError(f"epsilon={self.epsilon} must lie in [0, 0.5)")
        if self.rounds < 1:
            raise ArgumentError(f"rounds={self.rounds} must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ArgumentError(f"seed={self.seed} is not an unsigned 64-bit integer")
        if self.burn_in is not None and not 0 <= self.burn_in < self.rounds:
            raise ArgumentError(f"burn_in={self.burn_in} must lie in [0, rounds)")

    @property
    def effective_burn_in(self) -> int:
        return self.rounds // 10 if self.burn_in is None else self.burn_in


@dataclass(frozen=True)
class EngagementPMF:
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.min() < 0 or abs(probs.sum() - 1.0) > 1e-12:
            raise ArgumentError("engagement pmf must be nonnegative and sum to 1")
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, k):
        return self.probs[k]


def poisson_binomial(engage_probs: Sequence[float]) -> EngagementPMF:
    """Distribution of the number of engaged receivers, by O(N^2) convolution."""
    ps = np.asarray(engage_probs, dtype=np.float64)
    if ps.ndim != 1 or ps.size == 0:
        raise ArgumentError("need at least one engagement probability")
    if np.any((ps < 0) | (ps > 1)) or np.any(np.isnan(ps)):
        raise ArgumentError("engagement probabilities must lie in [0, 1]")
    pmf = np.zeros(ps.size + 1)
    pmf[0] = 1.0
    for n, p in enumerate(ps, start=1):
        pmf[1 : n + 1] = pmf[1 : n + 1] * (1 - p) + pmf[:n] * p
        pmf[0] *= 1 - p
    # clear rounding drift so the pmf normalizes to machine precision
    return EngagementPMF(pmf / pmf.sum())


def effective_strategy(r: TransmitterStrategy, epsilon: float) -> TransmitterStrategy:
    """The error-free strategy with the same true-story probabilities as ``r`` under errors."""
    if not 0 <= epsilon <= 0.5:
        raise ArgumentError(f"epsilon={epsilon} must lie in [0, 0.5]")
    s = 1 - 2 * epsilon
    return TransmitterStrategy(
        epsilon + s * r.alpha, epsilon + s * r.beta, s * r.gamma, s * r.theta
    )


def _attend_code(attends_to: str) -> int:
    if attends_to not in ("t", "f"):
        raise ArgumentError(f"attends_to must be 't' or 'f', got {attends_to!r}")
    return 0 if attends_to == "t" else 1


def transition_matrix_single(
    r: TransmitterStrategy, q: ReceiverStrategy, epsilon: float, attends_to: str = "t"
) -> np.ndarray:
    """Transition operator of the one-receiver chain (states in kernel order).

    For ``memory_len == 1`` the row/column order is ``SINGLE_STATES``.
    """
    require_viable(r)
    m = q.memory_len
    P = np.empty((2 * (m + 1), 2 * (m + 1)))
    _kernels.build_single_chain(
        r.to_array(), q.to_array(), _attend_code(attends_to), m, float(epsilon), P
    )
    return P


def exact_stationary_single(
    r: TransmitterStrategy,
    q: ReceiverStrategy,
    cfg: SimConfig = SimConfig(),
    attends_to: str = "t",
) -> StationaryDistribution:
    """Stationary marginals for one transmitter and one receiver, solved exactly.

    Reducible error-free chains report the long-run occupancy reached from the
    opening state (true story, receiver not yet engaged).
    """
    require_viable(r)
    m = q.memory_len
    n = 2 * (m + 1)
    P = np.empty((n, n))
    work = np.empty((n, n))
    pi = np.empty(n)
    out = np.empty(4)
    _kernels.solve_single(
        r.to_array(), q.to_array(), _attend_code(attends_to), m, cfg.epsilon, P, work, pi, out
    )
    out = np.clip(out, 0.0, None)
    out /= out.sum()
    return StationaryDistribution(*map(float, out))


def stationary_vector(P: np.ndarray, start: int = 0) -> np.ndarray:
    """Stationary vector of an arbitrary row-stochastic matrix (GTH elimination)."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    pi = np.empty(P.shape[0])
    _kernels.stationary(P, start, np.empty_like(P), pi)
    return pi


def single_marginals_batch(
    rs: np.ndarray, recs: np.ndarray, epsilon: float, attends_to: str = "t", memory_len: int = 1
) -> np.ndarray:
    """Vectorized exact solve: rows of ``rs`` (n, 4) paired with rows of ``recs`` (n, 7).

    Returns an (n, 4) array of ``(v_tc, v_tn, v_fc, v_fn)``. Inputs are not validated.
    """
    rs = np.ascontiguousarray(rs, dtype=np.float64)
    recs = np.ascontiguousarray(recs, dtype=np.float64)
    if rs.shape[0] != recs.shape[0]:
        raise ArgumentError("strategy and receiver batches differ in length")
    out = np.empty((rs.shape[0], 4))
    _kernels.solve_single_batch(rs, recs, _attend_code(attends_to), memory_len, float(epsilon), out)
    return out


def _memoryless(receivers: Sequence[ReceiverStrategy]) -> bool:
    return all(q.a1 == 0 for q in receivers)


def group_transition_matrix(
    r: TransmitterStrategy,
    receivers: Sequence[ReceiverStrategy],
    epsilon: float,
    attends_to: str = "t",
) -> np.ndarray:
    """Transition operator over states ``(k, type)`` for memoryless receivers.

    Index ``2*k + c`` with ``c = 0`` for true, 1 for false. Given the next story
    type, the engaged count follows the Poisson binomial law of the receivers'
    error-adjusted engagement probabilities.
    """
    require_viable(r)
    if not receivers:
        raise ArgumentError("need at least one receiver")
    if not _memoryless(receivers):
        raise ArgumentError("exact group solve requires memoryless receivers (a1 = 0)")
    N = len(receivers)
    flip = lambda p: epsilon + (1 - 2 * epsilon) * p
    q_t, q_f = [], []
    for q in receivers:
        base = (1 - q.a0) * q.p0
        q_t.append(flip(base + (q.a0 if attends_to == "t" else 0.0)))
        q_f.append(flip(base + (q.a0 if attends_to == "f" else 0.0)))
    pmf_t = poisson_binomial(q_t).probs
    pmf_f = poisson_binomial(q_f).probs
    P = np.zeros((2 * (N + 1), 2 * (N + 1)))
    for k in range(N + 1):
        for c, (base, slope) in enumerate(((r.alpha, r.gamma), (r.beta, r.theta))):
            rt = flip(base + slope * k / N)
            P[2 * k + c, 0::2] = rt * pmf_t
            P[2 * k + c, 1::2] = (1 - rt) * pmf_f
    return P


def exact_stationary_group(
    r: TransmitterStrategy,
    receivers: Sequence[ReceiverStrategy],
    cfg: SimConfig = SimConfig(),
    attends_to: str = "t",
) -> StationaryDistribution:
    """Exact group-form distribution for receivers without memory (``a1 = 0``)."""
    P = group_transition_matrix(r, receivers, cfg.epsilon, attends_to)
    pi = stationary_vector(P, start=0)
    full = np.clip(pi.reshape(-1, 2), 0.0, None)
    return StationaryDistribution.from_full(full / full.sum())


@dataclass(frozen=True)
class GroupSimulation:
    distribution: StationaryDistribution
    per_receiver: np.ndarray  # (N, 2): engagement rate with true / false stories, per round
    rounds_counted: int


def simulate_group(
    r: TransmitterStrategy,
    receivers: Sequence[ReceiverStrategy],
    N: Optional[int] = None,
    cfg: SimConfig = SimConfig(),
    attends_to: str = "t",
    rng: Optional[np.random.Generator] = None,
    detail: bool = False,
):
    """Monte Carlo estimate of the group-form stationary distribution.

    Play opens after a true story with nobody engaged; the first
    ``cfg.effective_burn_in`` rounds are discarded. With ``detail=True`` a
    :class:`GroupSimulation` carrying per-receiver consumption is returned.
    """
    require_viable(r)
    receivers = list(receivers)
    if N is None:
        N = len(receivers)
    if N < 1 or N != len(receivers):
        raise ArgumentError(f"group size N={N} must equal the number of receivers ({len(receivers)})")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    recs = np.array([q.to_array() for q in receivers])
    mems = np.array([q.memory_len for q in receivers], dtype=np.int64)
    burn = cfg.effective_burn_in
    occupancy = np.zeros((N + 1, 2), dtype=np.int64)
    engaged = np.zeros((N, 2), dtype=np.int64)
    _kernels.simulate_group_kernel(
        r.to_array(), recs, mems, _attend_code(attends_to), cfg.epsilon, cfg.rounds, burn,
        rng, occupancy, engaged,
    )
    counted = cfg.rounds - burn
    dist = StationaryDistribution.from_full(occupancy / counted)
    if detail:
        return GroupSimulation(dist, engaged / counted, counted)
    return dist


def monte_carlo_stderr(d: StationaryDistribution, rounds: int) -> np.ndarray:
    """Binomial standard errors of the four marginals (ignores autocorrelation)."""
    v = np.array([d.v_tc, d.v_tn, d.v_fc, d.v_fn])
    return np.sqrt(v * (1 - v) / rounds)
