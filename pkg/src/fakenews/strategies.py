"""Coercion and extortion classes of transmitter strategies.

A fake-news extortioner holds ``v_f >= v_tc + v_fc`` against every receiver; a
mainstream extortioner holds ``v_t >= v_tc + v_fc``. The two families are mirror
images under relabeling true and false stories, see :func:`mirror`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from fakenews.errors import ArgumentError, DegenerateParameterizationError
from fakenews.game import ReceiverStrategy, TransmitterStrategy, require_viable
from fakenews.stationary import single_marginals_batch

EQ_TOL = 1e-12
BOUND_TOL = -1e-9


class Coercion(str, Enum):
    FAKE = "fake_coercive"
    TRUE = "true_coercive"
    NEITHER = "neither"


class Extortion(str, Enum):
    FAKE = "fake_extortioner"
    MAINSTREAM = "mainstream_extortioner"
    NONE = "none"


KINDS = ("fake", "mainstream")


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ArgumentError(f"kind must be one of {KINDS}, got {kind!r}")


@dataclass(frozen=True)
class ExtortionParams:
    kappa: float
    lam: float
    chi: float

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "lambda": self.lam, "chi": self.chi}


@dataclass(frozen=True)
class StrategyClass:
    coercion: Coercion
    extortion: Extortion
    delta_extortion: Extortion


def classify_coercion(r: TransmitterStrategy) -> Coercion:
    if r.gamma < 0 and r.theta < 0:
        return Coercion.FAKE
    if r.gamma > 0 and r.theta > 0:
        return Coercion.TRUE
    return Coercion.NEITHER


def extortion_params(r: TransmitterStrategy) -> ExtortionParams:
    a, b, g, t = r.as_tuple()
    half = (g - t) / 2
    d1 = 1 - a + b + t
    d2 = 1 - a + b - half
    if abs(d1) < EQ_TOL or abs(d2) < EQ_TOL:
        raise DegenerateParameterizationError(
            f"zero denominator (1-a+b+theta={d1}, 1-a+b-(gamma-theta)/2={d2})"
        )
    return ExtortionParams(
        kappa=(1 - a - half) / d1,
        lam=-half / d1,
        chi=-(g + t) / (2 * d2),
    )


def mirror(r: TransmitterStrategy) -> TransmitterStrategy:
    """The same strategy with true and false stories relabeled.

    Maps the viable polytope onto itself, preserves max-norm distances and swaps
    fake and mainstream extortioners.
    """
    return TransmitterStrategy(1 - r.beta, 1 - r.alpha, -r.theta, -r.gamma)


def _fake_extortioner(r: TransmitterStrategy) -> bool:
    a, b, g, t = r.as_tuple()
    return abs(t + b) <= EQ_TOL and a + b + g <= 1 + EQ_TOL and g + t <= EQ_TOL


def is_extortioner(r: TransmitterStrategy, kind: str) -> bool:
    """Exact membership: ``theta = -beta``, ``alpha + beta + gamma <= 1`` and
    ``gamma + theta <= 0`` for fake news; the mirrored conditions for mainstream."""
    _check_kind(kind)
    require_viable(r)
    return _fake_extortioner(r if kind == "fake" else mirror(r))


def _fake_delta_extortioner(r: TransmitterStrategy, delta: float) -> bool:
    a, b, g, t = r.as_tuple()
    tol = EQ_TOL
    # feasible beta* of a neighbour with theta* = -beta*
    lo_b = max(b - delta, -t - delta, 0.0)
    hi_b = min(b + delta, -t + delta, 1.0)
    if lo_b > hi_b + tol or g - delta > hi_b + tol:
        return False
    # smallest alpha* loosens every remaining constraint; gamma* as low as allowed
    a_star = max(0.0, a - delta)
    g_star = max(g - delta, -a_star)
    b_star = max(lo_b, g_star)
    return a_star + b_star + g_star <= 1 + tol


def is_delta_extortioner(r: TransmitterStrategy, kind: str, delta: float) -> bool:
    """Whether some viable exact extortioner lies within max-norm distance ``delta``."""
    _check_kind(kind)
    if delta < 0:
        raise ArgumentError(f"delta={delta} must be >= 0")
    require_viable(r)
    return _fake_delta_extortioner(r if kind == "fake" else mirror(r), delta)


def _extortion_class(r: TransmitterStrategy, delta: Optional[float]) -> Extortion:
    for kind, label in (("fake", Extortion.FAKE), ("mainstream", Extortion.MAINSTREAM)):
        hit = is_extortioner(r, kind) if delta is None else is_delta_extortioner(r, kind, delta)
        if hit:
            return label
    return Extortion.NONE


def classify(r: TransmitterStrategy, delta: float = 0.05) -> StrategyClass:
    """Coercion, exact extortion and Delta-extortion classes (fake checked first)."""
    require_viable(r)
    return StrategyClass(classify_coercion(r), _extortion_class(r, None), _extortion_class(r, delta))


def classification_row(r: TransmitterStrategy, delta: float = 0.05) -> dict:
    cls = classify(r, delta)
    row = {
        "alpha": r.alpha,
        "beta": r.beta,
        "gamma": r.gamma,
        "theta": r.theta,
        "coercion": cls.coercion.value,
        "extortion": cls.extortion.value,
        "delta_extortion": cls.delta_extortion.value,
    }
    try:
        row.update(extortion_params(r).to_dict())
    except DegenerateParameterizationError:
        row.update({"kappa": "", "lambda": "", "chi": ""})
    return row


def receiver_grid(size: int = 5) -> np.ndarray:
    """Grid over ``(a0, p_ct, p_cf, p_nt, p_nf)`` with ``a1 = 1``, as (size**5, 7) rows.

    With ``a1 = 1`` the engagement rule ``a0*delta + (1-a0)*p_ij`` already spans
    every receiver of the model, so ``p0`` is redundant and fixed at 0.
    """
    if size < 2:
        raise ArgumentError("grid size must be >= 2")
    axis = np.linspace(0.0, 1.0, size)
    rows = [(a0, 1.0, 0.0, pct, pcf, pnt, pnf)
            for a0, pct, pcf, pnt, pnf in itertools.product(axis, repeat=5)]
    return np.array(rows)


@dataclass(frozen=True)
class ExtortionCheck:
    passed: bool
    min_margin: float
    worst_receiver: ReceiverStrategy
    n_receivers: int


def extortion_margins(r: TransmitterStrategy, kind: str, receivers: np.ndarray,
                      epsilon: float = 0.0) -> np.ndarray:
    """``v_f - v_c`` (fake) or ``v_t - v_c`` (mainstream) for each receiver row."""
    _check_kind(kind)
    require_viable(r)
    rs = np.broadcast_to(r.to_array(), (receivers.shape[0], 4))
    m = single_marginals_batch(rs, receivers, epsilon)
    v_c = m[:, 0] + m[:, 2]
    v_f = m[:, 2] + m[:, 3]
    return v_f - v_c if kind == "fake" else (1 - v_f) - v_c


def verify_extortion_bound(
    r: TransmitterStrategy,
    kind: str,
    receiver_grid_size: int = 5,
    n_random: int = 1000,
    seed: int = 0,
) -> ExtortionCheck:
    """Check the extortion inequality over a receiver grid plus random receivers.

    Uses error-free play; passes when the smallest margin is at least -1e-9.
    """
    rng = np.random.default_rng(seed)
    receivers = np.vstack([receiver_grid(receiver_grid_size), rng.random((n_random, 7))])
    margins = extortion_margins(r, kind, receivers)
    worst = int(np.argmin(margins))
    return ExtortionCheck(
        passed=bool(margins[worst] >= BOUND_TOL),
        min_margin=float(margins[worst]),
        worst_receiver=ReceiverStrategy.from_array(receivers[worst]),
        n_receivers=receivers.shape[0],
    )


def nash_min_true_rate(B: float, C: float) -> float:
    """Smallest fixed true-story rate at which always engaging pays off."""
    if B < 0 or C < 0 or B + C <= 0:
        raise ArgumentError(f"need B, C >= 0 with B + C > 0 (got B={B}, C={C})")
    return C / (B + C)
