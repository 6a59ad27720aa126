"""Compiled inner loops: chain construction, stationary solves and update processes.

Receiver parameters travel as a length-7 array ``[a0, a1, p0, p_ct, p_cf, p_nt, p_nf]``
and transmitter strategies as ``[alpha, beta, gamma, theta]``. ``attend`` is 0 when
a receiver assessing a story directly engages with true stories, 1 for false ones.

The single-receiver chain with memory length ``m`` has ``2 * (m + 1)`` states
``(i, d)`` at index ``i * (m + 1) + d``: ``i`` is 0 if the receiver consumed the
current story, 1 if not; ``d`` counts the trailing run of true stories (capped at
``m``), so ``d == 0`` means the current story is false.
"""

import numpy as np
from numba import njit

ASSUME_NONE = 0
ASSUME_FAKE = 1
ASSUME_TRUE = 2


@njit(cache=True)
def gth_inplace(P, pi):
    """Grassmann-Taksar-Heyman elimination; destroys ``P``.

    Returns False when some censored state has no exit to lower states, which
    happens only for chains without a unique closed class reachable everywhere.
    """
    n = P.shape[0]
    for k in range(n - 1, 0, -1):
        s = 0.0
        for j in range(k):
            s += P[k, j]
        if s <= 0.0:
            return False
        for i in range(k):
            P[i, k] /= s
        for i in range(k):
            pik = P[i, k]
            if pik != 0.0:
                for j in range(k):
                    P[i, j] += pik * P[k, j]
    pi[0] = 1.0
    total = 1.0
    for j in range(1, n):
        acc = 0.0
        for i in range(j):
            acc += pi[i] * P[i, j]
        pi[j] = acc
        total += acc
    for j in range(n):
        pi[j] /= total
    return True


@njit(cache=True)
def _mixture_from_start(P, start, pi):
    """Long-run occupancy from ``start`` for a chain with several closed classes."""
    n = P.shape[0]
    reach = np.zeros((n, n), dtype=np.bool_)
    for i in range(n):
        reach[i, i] = True
        for j in range(n):
            if P[i, j] > 0.0:
                reach[i, j] = True
    for k in range(n):
        for i in range(n):
            if reach[i, k]:
                for j in range(n):
                    if reach[k, j]:
                        reach[i, j] = True
    label = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        closed = True
        for j in range(n):
            if reach[i, j] and not reach[j, i]:
                closed = False
                break
        if closed:
            for j in range(n):
                if reach[i, j]:
                    label[i] = j
                    break
    for j in range(n):
        pi[j] = 0.0
    # absorption probabilities from start into each class representative
    n_trans = 0
    for i in range(n):
        if label[i] < 0:
            n_trans += 1
    weight = np.zeros(n)
    if label[start] >= 0:
        weight[label[start]] = 1.0
    else:
        tidx = np.empty(n_trans, dtype=np.int64)
        pos = np.full(n, -1, dtype=np.int64)
        c = 0
        for i in range(n):
            if label[i] < 0:
                tidx[c] = i
                pos[i] = c
                c += 1
        A = np.eye(n_trans)
        rhs = np.zeros((n_trans, n))
        for a in range(n_trans):
            s = tidx[a]
            for j in range(n):
                if label[j] < 0:
                    A[a, pos[j]] -= P[s, j]
                else:
                    rhs[a, label[j]] += P[s, j]
        H = np.linalg.solve(A, rhs)
        for rep in range(n):
            weight[rep] = H[pos[start], rep]
    for rep in range(n):
        w = weight[rep]
        if w <= 0.0:
            continue
        members = np.empty(n, dtype=np.int64)
        cnt = 0
        for i in range(n):
            if label[i] == rep:
                members[cnt] = i
                cnt += 1
        sub = np.empty((cnt, cnt))
        for a in range(cnt):
            for b in range(cnt):
                sub[a, b] = P[members[a], members[b]]
        sub_pi = np.empty(cnt)
        gth_inplace(sub, sub_pi)
        for a in range(cnt):
            pi[members[a]] += w * sub_pi[a]


@njit(cache=True)
def stationary(P, start, work, pi):
    """Stationary distribution of ``P``; falls back to the occupancy reached from
    ``start`` when the chain has several closed classes."""
    n = P.shape[0]
    for i in range(n):
        for j in range(n):
            work[i, j] = P[i, j]
    if not gth_inplace(work, pi):
        _mixture_from_start(P, start, pi)


@njit(cache=True)
def _flip(p, eps):
    return eps + (1.0 - 2.0 * eps) * p


@njit(cache=True)
def build_single_chain(r, rec, attend, m, eps, P):
    n = 2 * (m + 1)
    for s in range(n):
        for t in range(n):
            P[s, t] = 0.0
    a0 = rec[0]
    a1 = rec[1]
    base = (1.0 - a0) * (1.0 - a1) * rec[2]
    att_t = a0 if attend == 0 else 0.0
    att_f = a0 if attend == 1 else 0.0
    for i in range(2):
        for d in range(m + 1):
            s = i * (m + 1) + d
            frac = 1.0 if i == 0 else 0.0
            if d >= 1:
                rt = r[0] + r[2] * frac
            else:
                rt = r[1] + r[3] * frac
            rt = _flip(rt, eps)
            # p_ij index: 3 + 2*i + (label false)
            lab_f = 1 if d < m else 0
            beh = (1.0 - a0) * a1 * rec[3 + 2 * i + lab_f]
            qt = _flip(att_t + base + beh, eps)
            qf = _flip(att_f + base + beh, eps)
            dt = d + 1 if d + 1 < m else m
            P[s, dt] += rt * qt
            P[s, (m + 1) + dt] += rt * (1.0 - qt)
            P[s, 0] += (1.0 - rt) * qf
            P[s, m + 1] += (1.0 - rt) * (1.0 - qf)


@njit(cache=True)
def single_marginals(pi, m, out):
    """Write ``(v_tc, v_tn, v_fc, v_fn)`` into ``out``."""
    v_tc = 0.0
    v_tn = 0.0
    for d in range(1, m + 1):
        v_tc += pi[d]
        v_tn += pi[m + 1 + d]
    out[0] = v_tc
    out[1] = v_tn
    out[2] = pi[0]
    out[3] = pi[m + 1]


@njit(cache=True)
def _row4(rt, qt, qf):
    # destinations in state order (c,f), (c,t), (n,f), (n,t)
    return (1.0 - rt) * qf, rt * qt, (1.0 - rt) * (1.0 - qf), rt * (1.0 - qt)


@njit(cache=True)
def _solve4(r, rec, attend, eps, out):
    """Unrolled GTH for the memory-one chain; False if the chain is degenerate."""
    a0 = rec[0]
    a1 = rec[1]
    base = (1.0 - a0) * (1.0 - a1) * rec[2]
    att_t = a0 if attend == 0 else 0.0
    att_f = a0 if attend == 1 else 0.0
    w = (1.0 - a0) * a1
    s = 1.0 - 2.0 * eps
    # state 0 (c,f)
    rt = eps + s * (r[1] + r[3])
    qt = eps + s * (att_t + base + w * rec[4])
    qf = eps + s * (att_f + base + w * rec[4])
    p00, p01, p02, p03 = _row4(rt, qt, qf)
    # state 1 (c,t)
    rt = eps + s * (r[0] + r[2])
    qt = eps + s * (att_t + base + w * rec[3])
    qf = eps + s * (att_f + base + w * rec[3])
    p10, p11, p12, p13 = _row4(rt, qt, qf)
    # state 2 (n,f)
    rt = eps + s * r[1]
    qt = eps + s * (att_t + base + w * rec[6])
    qf = eps + s * (att_f + base + w * rec[6])
    p20, p21, p22, p23 = _row4(rt, qt, qf)
    # state 3 (n,t)
    rt = eps + s * r[0]
    qt = eps + s * (att_t + base + w * rec[5])
    qf = eps + s * (att_f + base + w * rec[5])
    p30, p31, p32, p33 = _row4(rt, qt, qf)

    s3 = p30 + p31 + p32
    if s3 <= 0.0:
        return False
    p03 /= s3
    p13 /= s3
    p23 /= s3
    p01 += p03 * p31
    p02 += p03 * p32
    p10 += p13 * p30
    p12 += p13 * p32
    p20 += p23 * p30
    p21 += p23 * p31
    s2 = p20 + p21
    if s2 <= 0.0:
        return False
    p02 /= s2
    p12 /= s2
    p01 += p02 * p21
    p10 += p12 * p20
    if p10 <= 0.0:
        return False
    p01 /= p10
    pi0 = 1.0
    pi1 = p01
    pi2 = p02 + pi1 * p12
    pi3 = p03 + pi1 * p13 + pi2 * p23
    tot = pi0 + pi1 + pi2 + pi3
    out[0] = pi1 / tot
    out[1] = pi3 / tot
    out[2] = pi0 / tot
    out[3] = pi2 / tot
    return True


@njit(cache=True)
def solve_single(r, rec, attend, m, eps, P, work, pi, out):
    if m == 1 and _solve4(r, rec, attend, eps, out):
        return
    build_single_chain(r, rec, attend, m, eps, P)
    # start: previous story true, nobody engaged
    stationary(P, (m + 1) + m, work, pi)
    single_marginals(pi, m, out)


@njit(cache=True)
def solve_single_batch(rs, recs, attend, m, eps, out):
    """Marginals for paired rows of ``rs`` (n, 4) and ``recs`` (n, 7)."""
    n = 2 * (m + 1)
    P = np.empty((n, n))
    work = np.empty((n, n))
    pi = np.empty(n)
    for k in range(rs.shape[0]):
        solve_single(rs[k], recs[k], attend, m, eps, P, work, pi, out[k])


@njit(cache=True)
def fermi(w_current, w_candidate, sigma):
    x = sigma * (w_current - w_candidate)
    if x > 0.0:
        e = np.exp(-x)
        return e / (1.0 + e)
    return 1.0 / (1.0 + np.exp(x))


@njit(cache=True)
def _receiver_payoff(marg, B, C, prefers_truth):
    if prefers_truth:
        return B * marg[0] - C * marg[2]
    return B * marg[2] - C * marg[0]


@njit(cache=True)
def _mutate(cur, cand, delta_max, rng):
    """Local shift by U[-delta_max, delta_max] per entry; ``delta_max < 0`` draws afresh."""
    for k in range(5):
        if delta_max < 0.0:
            cand[k] = rng.random()
            continue
        x = cur[k] + rng.uniform(-delta_max, delta_max)
        if x < 0.0:
            x = 0.0
        elif x > 1.0:
            x = 1.0
        cand[k] = x


@njit(cache=True)
def optimize_kernel(rs, weights, rec0, attend, m, B, C, prefers_truth, sigma, delta_max,
                    eps, burn, measure, record_every, rng, mean_out, trace_out):
    """Myopic local optimization of one receiver facing ``T`` transmitters.

    The receiver applies its single strategy to every transmitter independently and
    scores the weighted payoff sum. ``mean_out`` (T, 4) receives the marginals
    averaged over the measurement events; every ``record_every`` events (if > 0)
    the current marginals are copied into ``trace_out`` (n_records, T, 4).
    Returns the number of accepted proposals.
    """
    T = rs.shape[0]
    n = 2 * (m + 1)
    P = np.empty((n, n))
    work = np.empty((n, n))
    pi = np.empty(n)
    rec = rec0.copy()
    cand_rec = rec0.copy()
    cur = np.empty(5)
    cand = np.empty(5)
    for k in range(5):
        cur[k] = rec0[2 + k]
    cur_marg = np.empty((T, 4))
    cand_marg = np.empty((T, 4))
    w_cur = 0.0
    for t in range(T):
        solve_single(rs[t], rec, attend, m, eps, P, work, pi, cur_marg[t])
        w_cur += weights[t] * _receiver_payoff(cur_marg[t], B, C, prefers_truth)
    for t in range(T):
        for c in range(4):
            mean_out[t, c] = 0.0
    accepted = 0
    n_rec = 0
    total = burn + measure
    for e in range(total):
        _mutate(cur, cand, delta_max, rng)
        for k in range(5):
            cand_rec[2 + k] = cand[k]
        w_cand = 0.0
        for t in range(T):
            solve_single(rs[t], cand_rec, attend, m, eps, P, work, pi, cand_marg[t])
            w_cand += weights[t] * _receiver_payoff(cand_marg[t], B, C, prefers_truth)
        if rng.random() < fermi(w_cur, w_cand, sigma):
            accepted += 1
            w_cur = w_cand
            for k in range(5):
                cur[k] = cand[k]
            for t in range(T):
                for c in range(4):
                    cur_marg[t, c] = cand_marg[t, c]
        if e >= burn:
            for t in range(T):
                for c in range(4):
                    mean_out[t, c] += cur_marg[t, c]
        if record_every > 0 and (e + 1) % record_every == 0 and n_rec < trace_out.shape[0]:
            for t in range(T):
                for c in range(4):
                    trace_out[n_rec, t, c] = cur_marg[t, c]
            n_rec += 1
    if measure > 0:
        for t in range(T):
            for c in range(4):
                mean_out[t, c] /= measure
    for k in range(5):
        rec0[2 + k] = cur[k]
    return accepted


@njit(cache=True)
def optimize_single_kernel(r, rec0, attend, B, C, prefers_truth, sigma, delta_max, eps,
                           burn, measure, record_every, rng, mean_out, trace_out):
    """Fast path of :func:`optimize_kernel` for one transmitter and memory one.

    Consumes the random stream identically and returns identical results.
    """
    rec = rec0.copy()
    cand = rec0.copy()
    marg = np.empty(4)
    cmarg = np.empty(4)
    n = 4
    P = np.empty((n, n))
    work = np.empty((n, n))
    pi = np.empty(n)
    solve_single(r, rec, attend, 1, eps, P, work, pi, marg)
    w_cur = _receiver_payoff(marg, B, C, prefers_truth)
    for c in range(4):
        mean_out[c] = 0.0
    accepted = 0
    n_rec = 0
    for e in range(burn + measure):
        for k in range(2, 7):
            if delta_max < 0.0:
                cand[k] = rng.random()
                continue
            x = rec[k] + rng.uniform(-delta_max, delta_max)
            if x < 0.0:
                x = 0.0
            elif x > 1.0:
                x = 1.0
            cand[k] = x
        if not _solve4(r, cand, attend, eps, cmarg):
            solve_single(r, cand, attend, 1, eps, P, work, pi, cmarg)
        w_cand = _receiver_payoff(cmarg, B, C, prefers_truth)
        if rng.random() < fermi(w_cur, w_cand, sigma):
            accepted += 1
            w_cur = w_cand
            for k in range(2, 7):
                rec[k] = cand[k]
            for c in range(4):
                marg[c] = cmarg[c]
        if e >= burn:
            for c in range(4):
                mean_out[c] += marg[c]
        if record_every > 0 and (e + 1) % record_every == 0 and n_rec < trace_out.shape[0]:
            for c in range(4):
                trace_out[n_rec, c] = marg[c]
            n_rec += 1
    if measure > 0:
        for c in range(4):
            mean_out[c] /= measure
    for k in range(2, 7):
        rec0[k] = rec[k]
    return accepted


@njit(cache=True)
def group_true_share(r, qt_bar, qf_bar, eps):
    """Long-run true-story share for a group of memoryless receivers.

    With memoryless receivers the engaged fraction after a story of type j has mean
    ``qj_bar`` independently of the past, so story types form a two-state chain.
    """
    p_tt = _flip(r[0] + r[2] * qt_bar, eps)
    p_ft = _flip(r[1] + r[3] * qf_bar, eps)
    denom = p_ft + (1.0 - p_tt)
    if denom <= 0.0:
        return 1.0
    return p_ft / denom


@njit(cache=True)
def _engage_pair(rec, attend, eps):
    """(q_t, q_f) after errors for a memoryless receiver."""
    base = (1.0 - rec[0]) * rec[2]
    qt = base + (rec[0] if attend == 0 else 0.0)
    qf = base + (rec[0] if attend == 1 else 0.0)
    return _flip(qt, eps), _flip(qf, eps)


@njit(cache=True)
def _pair_payoff(v_t, qt, qf, B, C, prefers_truth):
    v_tc = v_t * qt
    v_fc = (1.0 - v_t) * qf
    if prefers_truth:
        return B * v_tc - C * v_fc
    return B * v_fc - C * v_tc


@njit(cache=True)
def micro_kernel(r, recs, attend, eps, B, C, prefers_truth, sigma, delta_max,
                 burn, measure, rng, mean_out):
    """G memoryless receiver groups optimizing against one shared transmitter.

    Each event gives every group, in order, one local proposal scored against the
    current strategies of the others. ``mean_out`` (G, 4) receives per-group
    marginals averaged over the measurement events.
    """
    G = recs.shape[0]
    qt = np.empty(G)
    qf = np.empty(G)
    for g in range(G):
        qt[g], qf[g] = _engage_pair(recs[g], attend, eps)
    sum_t = qt.sum()
    sum_f = qf.sum()
    cur = np.empty(5)
    cand = np.empty(5)
    cand_rec = np.empty(7)
    for g in range(G):
        for c in range(4):
            mean_out[g, c] = 0.0
    accepted = 0
    for e in range(burn + measure):
        for g in range(G):
            for k in range(5):
                cur[k] = recs[g, 2 + k]
            _mutate(cur, cand, delta_max, rng)
            cand_rec[0] = recs[g, 0]
            cand_rec[1] = recs[g, 1]
            for k in range(5):
                cand_rec[2 + k] = cand[k]
            cqt, cqf = _engage_pair(cand_rec, attend, eps)
            v_cur = group_true_share(r, sum_t / G, sum_f / G, eps)
            c_sum_t = sum_t - qt[g] + cqt
            c_sum_f = sum_f - qf[g] + cqf
            v_cand = group_true_share(r, c_sum_t / G, c_sum_f / G, eps)
            w_cur = _pair_payoff(v_cur, qt[g], qf[g], B, C, prefers_truth)
            w_cand = _pair_payoff(v_cand, cqt, cqf, B, C, prefers_truth)
            if rng.random() < fermi(w_cur, w_cand, sigma):
                accepted += 1
                for k in range(5):
                    recs[g, 2 + k] = cand[k]
                qt[g] = cqt
                qf[g] = cqf
                sum_t = c_sum_t
                sum_f = c_sum_f
        if e >= burn:
            v_t = group_true_share(r, sum_t / G, sum_f / G, eps)
            for g in range(G):
                mean_out[g, 0] += v_t * qt[g]
                mean_out[g, 1] += v_t * (1.0 - qt[g])
                mean_out[g, 2] += (1.0 - v_t) * qf[g]
                mean_out[g, 3] += (1.0 - v_t) * (1.0 - qf[g])
    if measure > 0:
        for g in range(G):
            for c in range(4):
                mean_out[g, c] /= measure
    return accepted


@njit(cache=True)
def social_kernel(r, recs, attend, eps, B, C, prefers_truth, sigma, mu,
                  burn, measure, rng, mean_out, stats_out):
    """Pairwise payoff-biased imitation with uniform mutation in a receiver group.

    ``mean_out`` (4,) receives group-average marginals over the measurement events;
    ``stats_out`` (3,) gets the counts of strategy changes and imitation events and
    the summed adoption probability. Returns the number of strategy changes.
    """
    N = recs.shape[0]
    qt = np.empty(N)
    qf = np.empty(N)
    for g in range(N):
        qt[g], qf[g] = _engage_pair(recs[g], attend, eps)
    for c in range(4):
        mean_out[c] = 0.0
    changes = 0
    n_imitate = 0
    p_sum = 0.0
    for e in range(burn + measure):
        i = rng.integers(0, N)
        j = rng.integers(0, N - 1)
        if j >= i:
            j += 1
        if rng.random() < mu:
            for k in range(5):
                recs[i, 2 + k] = rng.random()
            qt[i], qf[i] = _engage_pair(recs[i], attend, eps)
            changes += 1
        else:
            v_t = group_true_share(r, qt.sum() / N, qf.sum() / N, eps)
            w_i = _pair_payoff(v_t, qt[i], qf[i], B, C, prefers_truth)
            w_j = _pair_payoff(v_t, qt[j], qf[j], B, C, prefers_truth)
            p = fermi(w_i, w_j, sigma)
            n_imitate += 1
            p_sum += p
            if rng.random() < p:
                same = True
                for k in range(7):
                    if recs[i, k] != recs[j, k]:
                        same = False
                    recs[i, k] = recs[j, k]
                qt[i] = qt[j]
                qf[i] = qf[j]
                if not same:
                    changes += 1
        if e >= burn:
            v_t = group_true_share(r, qt.sum() / N, qf.sum() / N, eps)
            mt = qt.sum() / N
            mf = qf.sum() / N
            mean_out[0] += v_t * mt
            mean_out[1] += v_t * (1.0 - mt)
            mean_out[2] += (1.0 - v_t) * mf
            mean_out[3] += (1.0 - v_t) * (1.0 - mf)
    if measure > 0:
        for c in range(4):
            mean_out[c] /= measure
    stats_out[0] = changes
    stats_out[1] = n_imitate
    stats_out[2] = p_sum
    return changes


@njit(cache=True)
def draw_transmitter(assume, rng, out):
    """Uniform draw from the viable polytope, or from its fake-/true-coercive part."""
    a = rng.random()
    b = rng.random()
    ug = rng.random()
    ut = rng.random()
    out[0] = a
    out[1] = b
    if assume == ASSUME_FAKE:
        out[2] = -a * (1.0 - ug)
        out[3] = -b * (1.0 - ut)
    elif assume == ASSUME_TRUE:
        out[2] = (1.0 - a) * (1.0 - ug)
        out[3] = (1.0 - b) * (1.0 - ut)
    else:
        out[2] = -a + ug
        out[3] = -b + ut


@njit(cache=True)
def coopt_kernel(r0, rec0, attend, m, B, C, prefers_truth, b_t, b_f, sigma_r, sigma_t,
                 delta_max, eps, assume, steps, receiver_events, receiver_first, record_every,
                 rng, trace_out):
    """Receiver and transmitter take turns for ``steps`` rounds.

    Each round holds ``receiver_events`` receiver updates and one transmitter
    update. The receiver proposes local perturbations; the transmitter proposes
    fresh draws from its assumption region. ``trace_out`` (n_records, 4) gets the
    current marginals after every ``record_every`` rounds.
    """
    n = 2 * (m + 1)
    P = np.empty((n, n))
    work = np.empty((n, n))
    pi = np.empty(n)
    r = r0.copy()
    cand_r = r0.copy()
    rec = rec0.copy()
    cand_rec = rec0.copy()
    cur = np.empty(5)
    cand = np.empty(5)
    for k in range(5):
        cur[k] = rec0[2 + k]
    marg = np.empty(4)
    cand_marg = np.empty(4)
    solve_single(r, rec, attend, m, eps, P, work, pi, marg)
    n_rec = 0
    for step in range(steps):
        for turn in range(receiver_events + 1):
            if receiver_first:
                receiver_turn = turn < receiver_events
            else:
                receiver_turn = turn > 0
            if receiver_turn:
                _mutate(cur, cand, delta_max, rng)
                for k in range(5):
                    cand_rec[2 + k] = cand[k]
                solve_single(r, cand_rec, attend, m, eps, P, work, pi, cand_marg)
                w_cur = _receiver_payoff(marg, B, C, prefers_truth)
                w_cand = _receiver_payoff(cand_marg, B, C, prefers_truth)
                if rng.random() < fermi(w_cur, w_cand, sigma_r):
                    for k in range(5):
                        cur[k] = cand[k]
                        rec[2 + k] = cand[k]
                    for c in range(4):
                        marg[c] = cand_marg[c]
            else:
                draw_transmitter(assume, rng, cand_r)
                solve_single(cand_r, rec, attend, m, eps, P, work, pi, cand_marg)
                w_cur = b_t * marg[0] + b_f * marg[2]
                w_cand = b_t * cand_marg[0] + b_f * cand_marg[2]
                if rng.random() < fermi(w_cur, w_cand, sigma_t):
                    for k in range(4):
                        r[k] = cand_r[k]
                    for c in range(4):
                        marg[c] = cand_marg[c]
        if record_every > 0 and (step + 1) % record_every == 0 and n_rec < trace_out.shape[0]:
            for c in range(4):
                trace_out[n_rec, c] = marg[c]
            n_rec += 1
    for k in range(4):
        r0[k] = r[k]
    for k in range(5):
        rec0[2 + k] = cur[k]


@njit(cache=True)
def simulate_group_kernel(r, recs, mems, attend, eps, rounds, burn, rng, occupancy, engaged):
    """Round-by-round Monte Carlo of one transmitter and N receivers.

    ``occupancy`` (N+1, 2) counts post-burn-in rounds by (k, type); ``engaged``
    (N, 2) counts, per receiver, post-burn-in engagements with true / false stories.
    """
    N = recs.shape[0]
    max_m = 1
    for g in range(N):
        if mems[g] > max_m:
            max_m = mems[g]
    consumed = np.zeros(N, dtype=np.bool_)
    prev_true = True
    k = 0
    run = max_m  # trailing run of true stories, capped
    for t in range(rounds):
        frac = k / N
        if prev_true:
            rt = r[0] + r[2] * frac
        else:
            rt = r[1] + r[3] * frac
        is_true = rng.random() < rt
        if rng.random() < eps:
            is_true = not is_true
        new_k = 0
        for g in range(N):
            a0 = recs[g, 0]
            a1 = recs[g, 1]
            lab_f = 1 if run < mems[g] else 0
            i = 0 if consumed[g] else 1
            att = 0.0
            if (is_true and attend == 0) or ((not is_true) and attend == 1):
                att = a0
            q = att + (1.0 - a0) * ((1.0 - a1) * recs[g, 2] + a1 * recs[g, 3 + 2 * i + lab_f])
            eng = rng.random() < q
            if rng.random() < eps:
                eng = not eng
            consumed[g] = eng
            if eng:
                new_k += 1
                if t >= burn:
                    engaged[g, 0 if is_true else 1] += 1
        k = new_k
        prev_true = is_true
        if is_true:
            if run < max_m:
                run += 1
        else:
            run = 0
        if t >= burn:
            occupancy[k, 0 if is_true else 1] += 1
