import math

import numpy as np
import pytest

from fakenews import ArgumentError, PayoffConfig, ReceiverStrategy, TransmitterStrategy
from fakenews.dynamics import (
    ALWAYS_TRUE,
    FAKE_SITE,
    MAINSTREAM_SITE,
    AssumptionKind,
    Mutation,
    OptimizerConfig,
    SocialLearningConfig,
    attention_sweep,
    co_optimize,
    competition_run,
    draw_transmitter,
    engagement_rate,
    fermi,
    memory_label,
    memory_sweep,
    microtargeting_run,
    mutate_global,
    mutate_local,
    optimize_receiver,
    percent_difference,
    social_learning_run,
)
from fakenews.parallel import derive_seed
from fakenews.stationary import SimConfig
from oracles import ref_fermi, ref_optimize

SHORT = OptimizerConfig(burn_in_events=2000, measure_events=2000)


def test_fermi_examples():
    assert fermi(1.0, 1.0, 3.0) == 0.5
    assert fermi(5.0, -2.0, 0.0) == 0.5
    assert fermi(math.log(3), 0.0, 1.0) == pytest.approx(0.25)
    assert fermi(0.0, 1e6, 1.0) == 1.0
    assert fermi(1e6, 0.0, 1.0) == 0.0
    with pytest.raises(ArgumentError):
        fermi(0, 0, -1)


def test_fermi_matches_reference():
    rng = np.random.default_rng(0)
    for w1, w2, s in rng.normal(size=(200, 3)):
        s = abs(s)
        assert fermi(w1, w2, s) == pytest.approx(ref_fermi(w1, w2, s), rel=1e-14)


def test_mutate_local_examples():
    rng = np.random.default_rng(1)
    q = ReceiverStrategy(p0=0.5, p_ct=0.5, p_cf=0.5, p_nt=0.5, p_nf=0.5)
    assert mutate_local(q, 0.0, rng) == q
    for _ in range(200):
        out = mutate_local(q, 0.05, rng).behavior
        assert all(0.45 <= x <= 0.55 for x in out)
        assert all(x >= 0 for x in mutate_local(ReceiverStrategy(), 0.05, rng).behavior)
    g = mutate_global(q, rng)
    assert g.a0 == q.a0 and all(0 <= x <= 1 for x in g.behavior)


def test_engagement_rate_floor():
    assert math.isnan(engagement_rate(0.0, 1e-7))
    assert engagement_rate(0.2, 0.4) == 0.5


def test_optimizer_matches_pure_python_reference():
    r = TransmitterStrategy(0.7, 0.2, -0.3, 0.4)
    q0 = ReceiverStrategy(p0=0.3, p_ct=0.2, p_cf=0.6, p_nt=0.4, p_nf=0.1)
    oc = OptimizerConfig(sigma=5.0, delta_max=0.1, burn_in_events=150, measure_events=150)
    res = optimize_receiver(r, q0, PayoffConfig(), oc, SimConfig(), np.random.default_rng(7))
    mean, accepted, final = ref_optimize(r.as_tuple(), q0.behavior, 0.0, 0.0, 2.0, 1.0, 5.0, 0.1,
                                         1e-3, 150, 150, np.random.default_rng(7))
    assert res.accepted == accepted
    np.testing.assert_allclose(res.final_receiver.behavior, final, atol=1e-15)
    np.testing.assert_allclose([res.mean.v_tc, res.mean.v_tn, res.mean.v_fc, res.mean.v_fn], mean,
                               atol=1e-10)


def test_general_kernel_matches_fast_path():
    from fakenews import _kernels

    r = np.array([0.6, 0.3, -0.2, 0.1])
    rec0 = ReceiverStrategy(a0=0.2, a1=0.5).to_array()
    args = (0, 2.0, 1.0, True, 1.0, 0.05, 1e-3, 300, 300, 0)
    rec_a, mean_a = rec0.copy(), np.zeros(4)
    acc_a = _kernels.optimize_single_kernel(r, rec_a, *args, np.random.default_rng(3), mean_a,
                                            np.zeros((0, 4)))
    rec_b, mean_b = rec0.copy(), np.zeros((1, 4))
    acc_b = _kernels.optimize_kernel(r.reshape(1, 4), np.ones(1), rec_b, 0, 1, *args[1:],
                                     np.random.default_rng(3), mean_b, np.zeros((0, 1, 4)))
    assert acc_a == acc_b
    np.testing.assert_array_equal(rec_a, rec_b)
    np.testing.assert_allclose(mean_a, mean_b[0], atol=1e-13)


def test_competition_single_source_matches_optimizer():
    oc = OptimizerConfig(burn_in_events=300, measure_events=300)
    b = competition_run(FAKE_SITE, MAINSTREAM_SITE, 1, PayoffConfig(), oc, SimConfig(), replicates=1, seed=0)
    c = optimize_receiver(FAKE_SITE, ReceiverStrategy(), PayoffConfig(), oc, SimConfig(),
                          np.random.default_rng(derive_seed(0, 0)))
    np.testing.assert_allclose(b.marginals[0], [c.mean.v_tc, c.mean.v_tn, c.mean.v_fc, c.mean.v_fn],
                               atol=1e-12)


def test_always_true_high_sigma_engages():
    res = optimize_receiver(ALWAYS_TRUE, pc=PayoffConfig(), oc=OptimizerConfig(sigma=10), cfg=SimConfig())
    assert res.mean.v_tc >= 0.9
    res = optimize_receiver(ALWAYS_TRUE, oc=OptimizerConfig(sigma=100))
    assert res.mean.v_tc >= 0.95


def test_falsehood_mirror_engages_always_false():
    always_false = TransmitterStrategy(0, 0, 0, 0)
    res = optimize_receiver(always_false, pc=PayoffConfig(receiver_prefers="falsehood"),
                            oc=OptimizerConfig(sigma=100))
    assert res.mean.v_fc >= 0.95


def test_zero_sigma_accepts_half():
    oc = OptimizerConfig(sigma=0, burn_in_events=0, measure_events=20_000)
    res = optimize_receiver(FAKE_SITE, oc=oc)
    se = math.sqrt(0.25 / oc.events)
    assert abs(res.acceptance_rate - 0.5) <= 3 * se


def test_fake_site_engagement_gap_over_replicates():
    diffs = []
    for i in range(100):
        res = optimize_receiver(FAKE_SITE, oc=SHORT, rng=np.random.default_rng(derive_seed(42, i)))
        diffs.append(res.engagement_true - res.engagement_fake)
    assert np.mean(diffs) < 0


def test_trace_recording():
    oc = OptimizerConfig(burn_in_events=100, measure_events=100, record_every=20)
    res = optimize_receiver(FAKE_SITE, oc=oc)
    assert res.trace.shape == (10, 4)
    np.testing.assert_allclose(res.trace.sum(axis=1), 1, atol=1e-12)


def test_optimizer_reproducible():
    a = optimize_receiver(FAKE_SITE, oc=OptimizerConfig(seed=5, burn_in_events=500, measure_events=500))
    b = optimize_receiver(FAKE_SITE, oc=OptimizerConfig(seed=5, burn_in_events=500, measure_events=500))
    assert a.mean == b.mean and a.accepted == b.accepted


def test_optimizer_config_validation():
    with pytest.raises(ArgumentError):
        OptimizerConfig(sigma=-1)
    with pytest.raises(ArgumentError):
        OptimizerConfig(delta_max=2)
    assert OptimizerConfig(mutation="global").kernel_delta < 0


@pytest.mark.parametrize("assume", list(AssumptionKind))
def test_draw_transmitter_regions(assume):
    rng = np.random.default_rng(0)
    for _ in range(500):
        r = draw_transmitter(assume, rng)
        if assume is AssumptionKind.PREFERS_FAKE:
            assert r.gamma <= 0 and r.theta <= 0
        elif assume is AssumptionKind.PREFERS_TRUE:
            assert r.gamma >= 0 and r.theta >= 0
        assert -r.alpha <= r.gamma <= 1 - r.alpha and -r.beta <= r.theta <= 1 - r.beta


def test_percent_difference():
    assert percent_difference(np.array([0.3, 0.2, 0.3, 0.2])) == 0
    v = np.array([0.4, 0.1, 0.1, 0.4])  # E_t = 0.8, E_f = 0.2
    assert percent_difference(v) == pytest.approx(100 * 0.6 / 0.5)


def test_coopt_signs_small():
    kw = dict(horizon=60, replicates=300, seed=1)
    fake = co_optimize(AssumptionKind.PREFERS_FAKE, **kw)
    true = co_optimize(AssumptionKind.PREFERS_TRUE, **kw)
    assert fake.long_run_difference < 0 < true.long_run_difference
    assert fake.steps[-1] == 60 and fake.marginals.shape == (len(fake.steps), 4)
    assert len(fake.to_rows()) == len(fake.steps)


def test_coopt_worker_invariance():
    kw = dict(horizon=20, replicates=70, seed=3)
    a = co_optimize(AssumptionKind.NONE, workers=1, **kw)
    b = co_optimize(AssumptionKind.NONE, workers=2, **kw)
    np.testing.assert_array_equal(a.marginals, b.marginals)


def test_coopt_validation():
    with pytest.raises(ArgumentError):
        co_optimize(AssumptionKind.NONE, replicates=0)
    with pytest.raises(ArgumentError):
        co_optimize(AssumptionKind.NONE, horizon=10, record_every=20)


def test_social_identical_no_change():
    q = ReceiverStrategy(p0=0.4)
    res = social_learning_run(FAKE_SITE, SocialLearningConfig(2, mu=0.0, rounds=2000), initial=[q, q])
    assert res.changes == 0
    np.testing.assert_array_equal(res.final_receivers[0], q.to_array())


def test_social_neutral_adoption():
    rng = np.random.default_rng(0)
    init = [ReceiverStrategy(p0=rng.random()) for _ in range(8)]
    res = social_learning_run(FAKE_SITE, SocialLearningConfig(8, mu=0.0, sigma=0.0, rounds=5000),
                              initial=init)
    assert res.mean_adoption_prob == pytest.approx(0.5, abs=1e-12)


def test_social_group_size_trend():
    fake_wins = []
    for N in (2, 8, 32):
        res = social_learning_run(FAKE_SITE, SocialLearningConfig(N, rounds=20_000), cfg=SimConfig(seed=N))
        rec = res.to_record()
        fake_wins.append(rec["engagement_fake"] >= rec["engagement_true"])
    assert all(fake_wins)


def test_social_rejects_memory():
    with pytest.raises(ArgumentError):
        social_learning_run(FAKE_SITE, SocialLearningConfig(2), initial=[ReceiverStrategy(a1=0.5)] * 2)


def test_micro_single_group_matches_optimizer():
    oc = OptimizerConfig(burn_in_events=500, measure_events=500)
    m = microtargeting_run(FAKE_SITE, 1, oc=oc, replicates=2, seed=9)
    for i in range(2):
        res = optimize_receiver(FAKE_SITE, oc=oc, rng=np.random.default_rng(derive_seed(9, i)))
        np.testing.assert_allclose(m.marginals[i], [res.mean.v_tc, res.mean.v_tn, res.mean.v_fc,
                                                    res.mean.v_fn], atol=1e-12)


def test_micro_gap_shrinks():
    oc = OptimizerConfig(burn_in_events=3000, measure_events=3000)
    g1 = microtargeting_run(FAKE_SITE, 1, oc=oc, replicates=30, seed=0)
    g16 = microtargeting_run(FAKE_SITE, 16, oc=oc, replicates=30, seed=0)
    assert abs(g16.mean_se("engagement_difference")[0]) < abs(g1.mean_se("engagement_difference")[0])


def test_competition_examples():
    none = competition_run(None, MAINSTREAM_SITE, 4, replicates=3)
    assert np.all(none.marginals == 0)
    oc = OptimizerConfig(burn_in_events=2000, measure_events=2000)
    v1 = competition_run(FAKE_SITE, MAINSTREAM_SITE, 1, oc=oc, replicates=20).pooled["v_fc"]
    v8 = competition_run(FAKE_SITE, MAINSTREAM_SITE, 8, oc=oc, replicates=20).pooled["v_fc"]
    assert v8 >= v1
    with pytest.raises(ArgumentError):
        competition_run(FAKE_SITE, MAINSTREAM_SITE, 0)


def test_memory_label_examples():
    assert memory_label(["t", "t", "t"], 3) == "t"
    assert memory_label(["t", "f", "t"], 3) == "f"
    assert memory_label(["t", "f", "t"], 1) == "t"
    assert memory_label([], 2) == "t"
    with pytest.raises(ArgumentError):
        memory_label(["x"], 1)


def test_memory_sweep_fake_advantage_persists():
    oc = OptimizerConfig(burn_in_events=1000, measure_events=1000)
    out = memory_sweep(FAKE_SITE, (1, 3, 6), oc=oc, replicates=10)
    for s in out:
        assert s.mean_se("engagement_difference")[0] < 0


def test_attention_sweep_a0_reduces_fake():
    rng = np.random.default_rng(0)
    rs = np.array([draw_transmitter(AssumptionKind.PREFERS_FAKE, rng).as_tuple() for _ in range(30)])
    oc = OptimizerConfig(burn_in_events=1000, measure_events=1000)
    lo, hi = attention_sweep(rs, "a0", (0.0, 0.9), oc=oc)
    assert hi.pooled["engagement_fake"] < lo.pooled["engagement_fake"]
    assert hi.pooled["v_fc"] < lo.pooled["v_fc"]
    with pytest.raises(ArgumentError):
        attention_sweep(rs, "bogus", (0.0,))


def test_mutation_enum_roundtrip():
    assert Mutation("local") is Mutation.LOCAL
    assert OptimizerConfig(mutation="global").mutation is Mutation.GLOBAL
