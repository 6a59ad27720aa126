"""Domain types, stage-game payoffs and the engagement relation a transmitter enforces.

Story types are ``"t"`` (true) and ``"f"`` (false); receiver actions on the
previous story are ``"c"`` (consumed) and ``"n"`` (not consumed).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from fakenews.errors import ArgumentError, DegenerateStrategyError, InvalidStrategyError

# slack for float noise on the viability polytope faces
_VIABILITY_TOL = 1e-12

STORY_TYPES = ("t", "f")
ACTIONS = ("c", "n")


@dataclass(frozen=True)
class TransmitterStrategy:
    """Linear response ``P(true next) = alpha + gamma*k/N`` after a true story,
    ``beta + theta*k/N`` after a false one."""

    alpha: float
    beta: float
    gamma: float
    theta: float

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "TransmitterStrategy":
        if len(values) != 4:
            raise ArgumentError(f"transmitter strategy needs 4 values, got {len(values)}")
        return cls(*(float(v) for v in values))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.theta)

    def to_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=np.float64)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    violation: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


def validate_strategy(r: TransmitterStrategy) -> Verdict:
    """Check the four interval constraints, reporting the first one violated."""
    a, b, g, t = r.as_tuple()
    tol = _VIABILITY_TOL
    if not all(math.isfinite(x) for x in (a, b, g, t)):
        return Verdict(False, "coefficients must be finite")
    if not (-tol <= a <= 1 + tol):
        return Verdict(False, f"alpha={a} outside [0, 1]")
    if not (-tol <= b <= 1 + tol):
        return Verdict(False, f"beta={b} outside [0, 1]")
    if not (-a - tol <= g <= 1 - a + tol):
        return Verdict(False, f"gamma={g} outside [-alpha, 1-alpha] = [{-a}, {1 - a}]")
    if not (-b - tol <= t <= 1 - b + tol):
        return Verdict(False, f"theta={t} outside [-beta, 1-beta] = [{-b}, {1 - b}]")
    return Verdict(True)


def require_viable(r: TransmitterStrategy) -> None:
    verdict = validate_strategy(r)
    if not verdict:
        raise InvalidStrategyError(verdict.violation)


def _check_prob(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ArgumentError(f"{name}={value} is not a probability")


@dataclass(frozen=True)
class ReceiverStrategy:
    """Engagement rule mixing accuracy attention, memory and a baseline rate.

    With probability ``a0`` the receiver judges the current story directly; otherwise
    it follows its memory-one behaviour ``p_ij`` with probability ``a1`` and the
    baseline ``p0`` with probability ``1 - a1``. ``memory_len`` sets how many past
    stories feed the ``j`` label (any false story in the window labels it false).
    """

    a0: float = 0.0
    a1: float = 0.0
    p0: float = 0.0
    p_ct: float = 0.0
    p_cf: float = 0.0
    p_nt: float = 0.0
    p_nf: float = 0.0
    memory_len: int = 1

    def __post_init__(self):
        for name in ("a0", "a1", "p0", "p_ct", "p_cf", "p_nt", "p_nf"):
            _check_prob(name, getattr(self, name))
        if int(self.memory_len) != self.memory_len or self.memory_len < 1:
            raise ArgumentError(f"memory_len={self.memory_len} must be a positive integer")

    @classmethod
    def never_engage(cls, a0: float = 0.0, a1: float = 0.0, memory_len: int = 1) -> "ReceiverStrategy":
        return cls(a0=a0, a1=a1, memory_len=memory_len)

    @classmethod
    def always_engage(cls) -> "ReceiverStrategy":
        return cls(p0=1.0, p_ct=1.0, p_cf=1.0, p_nt=1.0, p_nf=1.0)

    @property
    def behavior(self) -> tuple[float, float, float, float, float]:
        """The optimizable part ``(p0, p_ct, p_cf, p_nt, p_nf)``."""
        return (self.p0, self.p_ct, self.p_cf, self.p_nt, self.p_nf)

    def with_behavior(self, values: Sequence[float]) -> "ReceiverStrategy":
        p0, pct, pcf, pnt, pnf = (float(v) for v in values)
        return replace(self, p0=p0, p_ct=pct, p_cf=pcf, p_nt=pnt, p_nf=pnf)

    def to_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1, *self.behavior], dtype=np.float64)

    @classmethod
    def from_array(cls, values: Sequence[float], memory_len: int = 1) -> "ReceiverStrategy":
        return cls(*(float(v) for v in values[:7]), memory_len=memory_len)

    def to_dict(self) -> dict:
        return asdict(self)


class Preference(str, Enum):
    TRUTH = "truth"
    FALSEHOOD = "falsehood"


@dataclass(frozen=True)
class PayoffConfig:
    """Stage-game utilities; receivers gain ``B`` per engaged preferred story and
    lose ``C`` per engaged non-preferred story."""

    B: float = 2.0
    C: float = 1.0
    b_t: float = 1.0
    b_f: float = 1.0
    receiver_prefers: Preference = Preference.TRUTH

    def __post_init__(self):
        for name in ("B", "C", "b_t", "b_f"):
            v = getattr(self, name)
            if not (v >= 0) or not math.isfinite(v):
                raise ArgumentError(f"{name}={v} must be a finite nonnegative number")
        object.__setattr__(self, "receiver_prefers", Preference(self.receiver_prefers))

    @property
    def preferred_type(self) -> str:
        return "t" if self.receiver_prefers is Preference.TRUTH else "f"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["receiver_prefers"] = self.receiver_prefers.value
        return d


@dataclass(frozen=True)
class StationaryDistribution:
    """Long-run mass over (engaged?, story type) outcomes.

    ``full`` optionally holds the group form as an ``(N+1, 2)`` array of
    ``v[k, type]`` with column 0 true and column 1 false; the four marginals are
    then per-receiver averages ``v_tc = sum_k v[k, t] * k/N``.
    """

    v_tc: float
    v_tn: float
    v_fc: float
    v_fn: float
    full: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        vals = (self.v_tc, self.v_tn, self.v_fc, self.v_fn)
        if min(vals) < -1e-12:
            raise ArgumentError(f"negative stationary mass {vals}")
        if abs(sum(vals) - 1.0) > 1e-9:
            raise ArgumentError(f"stationary marginals sum to {sum(vals)}, not 1")
        if self.full is not None:
            full = np.asarray(self.full, dtype=np.float64)
            if full.ndim != 2 or full.shape[1] != 2 or full.shape[0] < 2:
                raise ArgumentError("full distribution must have shape (N+1, 2)")
            if abs(full.sum() - 1.0) > 1e-9:
                raise ArgumentError("full distribution does not sum to 1")
            derived = marginals_from_full(full)
            if max(abs(x - y) for x, y in zip(derived, vals)) > 1e-9:
                raise ArgumentError("stored marginals disagree with the full distribution")
            object.__setattr__(self, "full", full)

    @classmethod
    def from_full(cls, full: np.ndarray) -> "StationaryDistribution":
        full = np.asarray(full, dtype=np.float64)
        return cls(*marginals_from_full(full), full=full)

    @property
    def v_t(self) -> float:
        return self.v_tc + self.v_tn

    @property
    def v_f(self) -> float:
        return self.v_fc + self.v_fn

    @property
    def v_c(self) -> float:
        return self.v_tc + self.v_fc

    @property
    def group_size(self) -> Optional[int]:
        return None if self.full is None else self.full.shape[0] - 1

    def to_record(self) -> dict:
        return {
            "v_tc": self.v_tc,
            "v_tn": self.v_tn,
            "v_fc": self.v_fc,
            "v_fn": self.v_fn,
            "v_t": self.v_t,
            "v_f": self.v_f,
        }

    def group_rows(self) -> list[tuple[int, str, float]]:
        """``(k, type, mass)`` rows of the group form, k-major."""
        if self.full is None:
            raise ArgumentError("distribution has no group form")
        return [
            (k, typ, float(self.full[k, col]))
            for k in range(self.full.shape[0])
            for col, typ in enumerate(STORY_TYPES)
        ]


def marginals_from_full(full: np.ndarray) -> tuple[float, float, float, float]:
    n = full.shape[0] - 1
    frac = np.arange(n + 1) / n
    v_tc = float(full[:, 0] @ frac)
    v_fc = float(full[:, 1] @ frac)
    v_tn = float(full[:, 0].sum() - v_tc)
    v_fn = float(full[:, 1].sum() - v_fc)
    return v_tc, v_tn, v_fc, v_fn


def transmit_prob(r: TransmitterStrategy, prev_type: str, k: int, N: int) -> float:
    """Probability that the next story is true given last round's type and engagement."""
    require_viable(r)
    if N < 1:
        raise ArgumentError(f"group size N={N} must be >= 1")
    if not 0 <= k <= N:
        raise ArgumentError(f"engaged count k={k} outside [0, {N}]")
    if prev_type == "t":
        p = r.alpha + r.gamma * k / N
    elif prev_type == "f":
        p = r.beta + r.theta * k / N
    else:
        raise ArgumentError(f"unknown story type {prev_type!r}")
    return min(1.0, max(0.0, p))


def engage_prob(q: ReceiverStrategy, l: str, i: str, j: str, attends_to: str = "t") -> float:
    """Engagement probability for a story of type ``l`` after outcome ``(i, j)``.

    ``attends_to`` is the story type a receiver who assesses the story directly
    engages with; it is ``"t"`` unless the receiver prefers falsehood.
    """
    if l not in STORY_TYPES or j not in STORY_TYPES or i not in ACTIONS:
        raise ArgumentError(f"bad outcome indices l={l!r} i={i!r} j={j!r}")
    p_ij = {"ct": q.p_ct, "cf": q.p_cf, "nt": q.p_nt, "nf": q.p_nf}[i + j]
    delta = 1.0 if l == attends_to else 0.0
    return q.a0 * delta + (1 - q.a0) * ((1 - q.a1) * q.p0 + q.a1 * p_ij)


def enforced_fake_rate(r: TransmitterStrategy, v_tc: float, v_fc: float) -> float:
    """Share of false stories the strategy enforces given the consumption rates."""
    denom = 1 - r.alpha + r.beta
    if denom == 0:
        raise DegenerateStrategyError("1 - alpha + beta = 0 (alpha=1, beta=0)")
    return (1 - r.alpha) / denom - r.theta * v_fc / denom - r.gamma * v_tc / denom


def receiver_payoff(d: StationaryDistribution, pc: PayoffConfig) -> float:
    if pc.receiver_prefers is Preference.TRUTH:
        return pc.B * d.v_tc - pc.C * d.v_fc
    return pc.B * d.v_fc - pc.C * d.v_tc


def transmitter_payoff(d: StationaryDistribution, pc: PayoffConfig) -> float:
    return pc.b_t * d.v_tc + pc.b_f * d.v_fc
