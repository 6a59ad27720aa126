"""Independent reference implementations used as test oracles.

Everything here is written from the model definitions in plain Python and numpy,
without touching the package's kernels.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def flip(p, eps):
    return p * (1 - eps) + (1 - p) * eps


def ref_engage(q, l, i, j, attends="t"):
    """q is a dict with a0, a1, p0, p_ct, p_cf, p_nt, p_nf."""
    att = 1.0 if l == attends else 0.0
    return q["a0"] * att + (1 - q["a0"]) * ((1 - q["a1"]) * q["p0"] + q["a1"] * q["p_" + i + j])


def ref_true_prob(r, prev, frac):
    a, b, g, t = r
    return a + g * frac if prev == "t" else b + t * frac


def solve_stationary(P):
    """Left null vector of P - I by least squares with a normalization row."""
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones(n)])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return pi


def ref_single_chain(r, q, eps, attends="t"):
    """Memory-one chain over states (i, j): consumed flag and type of the last story."""
    states = [(i, j) for i in "cn" for j in "tf"]
    idx = {s: k for k, s in enumerate(states)}
    P = np.zeros((4, 4))
    for (i, j) in states:
        pt = flip(ref_true_prob(r, j, 1.0 if i == "c" else 0.0), eps)
        for l, pl in (("t", pt), ("f", 1 - pt)):
            e = flip(ref_engage(q, l, i, j, attends), eps)
            P[idx[(i, j)], idx[("c", l)]] += pl * e
            P[idx[(i, j)], idx[("n", l)]] += pl * (1 - e)
    return states, P


def ref_single_marginals(r, q, eps, attends="t"):
    states, P = ref_single_chain(r, q, eps, attends)
    pi = solve_stationary(P)
    v = dict(zip(states, pi))
    return np.array([v[("c", "t")], v[("n", "t")], v[("c", "f")], v[("n", "f")]])


def ref_memory_marginals(r, q, m, eps, attends="t"):
    """Chain whose state holds the consumed flag and the last m story types.

    The behaviour label is false if any of the last m stories was false.
    The history starts all-true.
    """
    hists = list(itertools.product("tf", repeat=m))
    states = [(i, h) for i in "cn" for h in hists]
    idx = {s: k for k, s in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    for (i, h) in states:
        prev = h[-1]
        label = "f" if "f" in h else "t"
        pt = flip(ref_true_prob(r, prev, 1.0 if i == "c" else 0.0), eps)
        for l, pl in (("t", pt), ("f", 1 - pt)):
            e = flip(ref_engage(q, l, i, label, attends), eps)
            nh = (h + (l,))[-m:]
            P[idx[(i, h)], idx[("c", nh)]] += pl * e
            P[idx[(i, h)], idx[("n", nh)]] += pl * (1 - e)
    pi = solve_stationary(P)
    v = np.zeros(4)
    for (i, h), p in zip(states, pi):
        v[{("c", "t"): 0, ("n", "t"): 1, ("c", "f"): 2, ("n", "f"): 3}[(i, h[-1])]] += p
    return v


def ref_group_full(r, engage_t, engage_f, eps):
    """Group chain by brute-force enumeration of who engages; returns (N+1, 2) masses.

    engage_t / engage_f are per-receiver error-free engagement probabilities.
    """
    N = len(engage_t)
    states = [(k, c) for k in range(N + 1) for c in "tf"]
    idx = {s: n for n, s in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    for (k, c) in states:
        pt = flip(ref_true_prob(r, c, k / N), eps)
        for l, pl, probs in (("t", pt, engage_t), ("f", 1 - pt, engage_f)):
            for who in itertools.product((0, 1), repeat=N):
                w = 1.0
                for x, p in zip(who, probs):
                    pe = flip(p, eps)
                    w *= pe if x else 1 - pe
                P[idx[(k, c)], idx[(sum(who), l)]] += pl * w
    pi = solve_stationary(P)
    return pi.reshape(N + 1, 2)


def ref_poisson_binomial(ps):
    out = np.zeros(len(ps) + 1)
    for who in itertools.product((0, 1), repeat=len(ps)):
        w = 1.0
        for x, p in zip(who, ps):
            w *= p if x else 1 - p
        out[sum(who)] += w
    return out


def ref_fermi(w_cur, w_cand, sigma):
    return 1.0 / (1.0 + math.exp(sigma * (w_cur - w_cand)))


def ref_optimize(r, behaviour, a0, a1, B, C, sigma, delta, eps, burn, measure, rng):
    """Pure-Python receiver optimizer drawing from ``rng`` in the documented order:
    five uniform shifts, then one uniform for the Fermi acceptance."""
    keys = ("p0", "p_ct", "p_cf", "p_nt", "p_nf")
    cur = list(behaviour)

    def payoff(vals):
        q = dict(zip(keys, vals), a0=a0, a1=a1)
        v = ref_single_marginals(r, q, eps)
        return v, B * v[0] - C * v[2]

    v_cur, w_cur = payoff(cur)
    total = np.zeros(4)
    accepted = 0
    for e in range(burn + measure):
        cand = [min(1.0, max(0.0, x + rng.uniform(-delta, delta))) for x in cur]
        v_cand, w_cand = payoff(cand)
        if rng.random() < ref_fermi(w_cur, w_cand, sigma):
            accepted += 1
            cur, v_cur, w_cur = cand, v_cand, w_cand
        if e >= burn:
            total += v_cur
    return total / max(measure, 1), accepted, cur


def ref_simulate_single(r, q, eps, rounds, rng):
    """Direct simulation of one receiver; returns empirical (v_tc, v_tn, v_fc, v_fn)."""
    counts = np.zeros(4)
    i, j = "n", "t"
    for _ in range(rounds):
        pt = flip(ref_true_prob(r, j, 1.0 if i == "c" else 0.0), eps)
        l = "t" if rng.random() < pt else "f"
        e = rng.random() < flip(ref_engage(q, l, i, j), eps)
        counts[{("t", True): 0, ("t", False): 1, ("f", True): 2, ("f", False): 3}[(l, bool(e))]] += 1
        i, j = ("c" if e else "n"), l
    return counts / rounds
