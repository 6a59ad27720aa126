import csv
import math

import numpy as np
import pytest
import scipy.stats as ss
from hypothesis import given, settings
from hypothesis import strategies as st

from fakenews import ArgumentError, DataError
from fakenews.stats import (
    COLUMNS,
    ArticleRecord,
    UndefinedRegressionError,
    betainc,
    binomial_sf,
    chi2_sf,
    class_accuracy_means,
    dersimonian_laird,
    fisher_combined,
    gammaincc,
    ingest_csv,
    ks_uniform,
    meta_report,
    normal_sf,
    ols,
    per_site_regressions,
    read_trust_csv,
    site_regression,
    t_sf,
    trust_regression,
)


# ---------------------------------------------------------------------------
# special functions, with scipy as the oracle


@pytest.mark.parametrize("df", [1, 2, 3, 6, 17, 50, 200])
def test_chi2_sf_against_scipy(df):
    for x in np.concatenate([np.linspace(0, 3 * df + 20, 60), [1e3]]):
        assert chi2_sf(x, df) == pytest.approx(ss.chi2.sf(x, df), abs=1e-10)


@pytest.mark.parametrize("df", [1, 2, 5, 30, 200])
def test_t_sf_against_scipy(df):
    for t in np.linspace(-30, 30, 121):
        assert t_sf(t, df) == pytest.approx(ss.t.sf(t, df), abs=1e-10)


def test_normal_and_binomial_against_scipy():
    for z in np.linspace(-8, 8, 81):
        assert normal_sf(z) == pytest.approx(ss.norm.sf(z), abs=1e-14)
    rng = np.random.default_rng(0)
    for _ in range(300):
        n = int(rng.integers(1, 400))
        k = int(rng.integers(0, n + 2))
        p = float(rng.random())
        assert binomial_sf(k, n, p) == pytest.approx(ss.binom.sf(k - 1, n, p), abs=1e-10)


def test_incomplete_functions_against_scipy():
    import scipy.special as sp

    rng = np.random.default_rng(1)
    for a, b, x in rng.uniform(0.1, 40, size=(200, 3)):
        assert gammaincc(a, x) == pytest.approx(sp.gammaincc(a, x), abs=1e-12)
        u = x / 40
        assert betainc(a, b, u) == pytest.approx(sp.betainc(a, b, u), abs=1e-12)


def test_special_function_examples():
    for x in (0.0, 0.3, 1.0, 7.5, 40.0, 700.0):
        assert chi2_sf(x, 2) == pytest.approx(math.exp(-x / 2), rel=1e-12, abs=1e-300)
    for df in (1, 3, 100):
        assert t_sf(0, df) == pytest.approx(0.5, abs=1e-15)
    assert chi2_sf(13.816, 6) == pytest.approx(0.0318, abs=5e-5)
    with pytest.raises(ArgumentError):
        chi2_sf(-1, 2)
    with pytest.raises(ArgumentError):
        t_sf(1.0, 0.5)


@given(st.floats(0, 500), st.floats(0, 500), st.integers(1, 200))
def test_chi2_monotone(x1, x2, df):
    lo, hi = sorted((x1, x2))
    a, b = chi2_sf(lo, df), chi2_sf(hi, df)
    assert 0 <= b <= a <= 1


@given(st.floats(-50, 50), st.floats(-50, 50), st.integers(1, 200))
def test_t_monotone(t1, t2, df):
    lo, hi = sorted((t1, t2))
    assert 0 <= t_sf(hi, df) <= t_sf(lo, df) + 1e-15 <= 1 + 1e-15


# ---------------------------------------------------------------------------
# combination and meta-analysis


def test_fisher_examples():
    r = fisher_combined([1, 1])
    assert r.statistic == 0 and r.p == 1
    r = fisher_combined([0.5])
    assert r.statistic == pytest.approx(2 * math.log(2)) and r.df == 2 and r.p == 0.5
    r = fisher_combined([0.1] * 3)
    assert r.statistic == pytest.approx(-6 * math.log(0.1))
    assert r.df == 6
    assert r.p == pytest.approx(ss.chi2.sf(-6 * math.log(0.1), 6), abs=1e-12)
    assert r.p == pytest.approx(0.0318, abs=5e-5)
    with pytest.raises(ArgumentError):
        fisher_combined([0.0])


@given(st.floats(1e-300, 1.0))
def test_fisher_single_identity(p):
    assert fisher_combined([p]).p == p


def test_dl_examples():
    r = dersimonian_laird([0, 2], [1, 1])
    assert (r.Q, r.tau2, r.mu_re) == (2.0, 1.0, 1.0)
    r = dersimonian_laird([0.4, 0.4, 0.4], [0.1, 0.2, 0.3])
    assert r.Q == pytest.approx(0, abs=1e-15) and r.tau2 == 0 and r.I2 == 0
    assert r.mu_re == pytest.approx(0.4)
    with pytest.raises(ArgumentError):
        dersimonian_laird([1.0], [1.0])


def test_dl_against_textbook_formulas():
    # independent hand-rolled DL
    y = np.array([0.1, 0.35, -0.2, 0.5, 0.05])
    v = np.array([0.02, 0.05, 0.03, 0.08, 0.01])
    w = 1 / v
    yb = (w * y).sum() / w.sum()
    Q = (w * (y - yb) ** 2).sum()
    tau2 = max(0, (Q - 4) / (w.sum() - (w ** 2).sum() / w.sum()))
    ws = 1 / (v + tau2)
    mu = (ws * y).sum() / ws.sum()
    r = dersimonian_laird(y, v)
    assert r.Q == pytest.approx(Q) and r.tau2 == pytest.approx(tau2) and r.mu_re == pytest.approx(mu)
    assert r.se_mu == pytest.approx(ws.sum() ** -0.5)


@settings(max_examples=100)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(0.01, 5)), min_size=2, max_size=12))
def test_dl_properties(pairs):
    y = [p[0] for p in pairs]
    v = [p[1] for p in pairs]
    r = dersimonian_laird(y, v)
    assert min(y) - 1e-9 <= r.mu_re <= max(y) + 1e-9
    if r.Q <= len(y) - 1:
        assert r.tau2 == 0


def test_dl_vanishing_variances():
    r = dersimonian_laird([0.7, 0.7, 0.7], [1e-12, 2e-12, 3e-12])
    assert r.mu_re == pytest.approx(0.7, abs=1e-12)


def test_fisher_null_calibration():
    # null p-values combined over 5 sites are uniform
    rng = np.random.default_rng(0)
    ps = [fisher_combined(rng.random(5)).p for _ in range(10_000)]
    d, p = ks_uniform(ps)
    assert d < 1.628 / math.sqrt(10_000)
    assert p > 0.01


def test_ks_uniform_matches_scipy():
    rng = np.random.default_rng(3)
    x = rng.random(500)
    d, p = ks_uniform(x)
    ref = ss.kstest(x, "uniform")
    assert d == pytest.approx(ref.statistic, abs=1e-12)
    assert p == pytest.approx(ref.pvalue, abs=0.02)
    assert ks_uniform(rng.random(500) ** 3)[1] < 1e-6


# ---------------------------------------------------------------------------
# regression


def test_ols_examples():
    r = ols([1, 2, 3], [1, 2, 3])
    assert r.slope == pytest.approx(1) and r.slope_stderr == pytest.approx(0, abs=1e-15)
    x, y = np.array([1.0, 2.0, 4.0]), np.array([2.0, 1.0, 3.0])
    ref = ((x - x.mean()) * (y - y.mean())).sum() / ((x - x.mean()) ** 2).sum()
    assert ols(x, y).slope == pytest.approx(ref)
    with pytest.raises(UndefinedRegressionError):
        ols([1, 2], [1, 2])
    with pytest.raises(UndefinedRegressionError):
        ols([1, 1, 1], [1, 2, 3])


def test_ols_against_scipy():
    rng = np.random.default_rng(2)
    x = rng.normal(size=40)
    y = 0.3 * x + rng.normal(size=40)
    ref = ss.linregress(x, y)
    r = ols(x, y, "positive")
    assert r.slope == pytest.approx(ref.slope)
    assert r.slope_stderr == pytest.approx(ref.stderr)
    assert r.p_two_tailed == pytest.approx(ref.pvalue, abs=1e-10)
    assert r.p_one_tailed == pytest.approx(ref.pvalue / 2, abs=1e-10)
    assert ols(x, y, "negative").p_one_tailed == pytest.approx(1 - ref.pvalue / 2, abs=1e-10)


def _site(site, cls, acc, eng):
    return [ArticleRecord(site, cls, f"h{i}", a, e) for i, (a, e) in enumerate(zip(acc, eng))]


def test_site_regression_transforms():
    rng = np.random.default_rng(5)
    acc = rng.uniform(1, 7, 30)
    eng = 10 ** (0.2 * acc + rng.normal(scale=0.5, size=30))
    recs = _site("s", "mainstream", acc, eng)
    raw = site_regression(recs, "raw_log10")
    assert raw.slope == pytest.approx(ss.linregress(acc, np.log10(eng)).slope)
    std = site_regression(recs, "standardized")
    assert std.slope == pytest.approx(ss.pearsonr(acc, np.log10(eng))[0])
    rank = site_regression(recs, "rank")
    shifted = _site("s", "mainstream", acc * 0.5 + 1, eng * 3)
    assert site_regression(shifted, "rank").slope == pytest.approx(rank.slope)
    assert site_regression(shifted, "standardized").slope == pytest.approx(std.slope)


def test_site_regression_shift_invariance():
    rng = np.random.default_rng(6)
    acc = rng.uniform(1, 6, 20)
    eng = rng.uniform(1, 100, 20)
    a = site_regression(_site("s", "fake", acc, eng))
    b = site_regression(_site("s", "fake", acc + 1, eng))
    assert a.slope == pytest.approx(b.slope)
    assert a.direction == "negative"


def test_site_regression_zero_engagement():
    recs = _site("s", "mainstream", [1, 2, 3, 4], [0, 10, 100, 1000])
    r = site_regression(recs)
    assert r.n == 3 and r.slope == pytest.approx(1)
    assert site_regression(recs, zero_engagement="log1p").n == 4
    with pytest.raises(UndefinedRegressionError):
        site_regression(_site("s", "fake", [1, 2, 3], [0, 0, 5]))


def test_trust_regression():
    trust = np.linspace(0, 1, 20)
    assert trust_regression(trust, trust).r2 == pytest.approx(1)
    rng = np.random.default_rng(0)
    r2 = [trust_regression(rng.permutation(trust), trust).r2 for _ in range(200)]
    assert np.mean(r2) < 0.15


# ---------------------------------------------------------------------------
# ingestion and report


def write_articles(path, rows, header=COLUMNS):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def fixture_rows(n_sites=4, per_site=25, seed=0):
    """Synthetic rows whose class accuracy means are exactly 5.05 and 4.27."""
    rng = np.random.default_rng(seed)
    rows = []
    for cls, target in (("mainstream", 5.05), ("fake", 4.27)):
        acc = rng.uniform(2, 6, n_sites * per_site)
        acc = np.round(acc - acc.mean() + target, 6)
        acc[-1] = round(target * acc.size - acc[:-1].sum(), 6)
        for i, a in enumerate(acc):
            site = f"{cls}_{i // per_site}"
            eng = float(np.round(10 ** (rng.normal(2, 0.7)), 3))
            rows.append([site, cls, f"headline {i}", a, eng, "2018-06-01"])
    return rows


def test_ingest_fixture_reproduces_means(tmp_path):
    rows = fixture_rows()
    path = write_articles(tmp_path / "a.csv", rows)
    recs = ingest_csv(path)
    assert len(recs) == len(rows)
    means = class_accuracy_means(recs)
    assert means["mainstream"] == pytest.approx(5.05, abs=1e-9)
    assert means["fake"] == pytest.approx(4.27, abs=1e-9)


def test_ingest_thousand_rows(tmp_path):
    rows = fixture_rows(n_sites=5, per_site=100)
    assert len(ingest_csv(write_articles(tmp_path / "k.csv", rows))) == 1000


def test_ingest_skips_bad_rows(tmp_path, caplog):
    rows = [["s", "fake", "h", 3.0, "", ""], ["s", "fake", "h", 3.0, 5.0, ""],
            ["s", "other", "h", 3.0, 5.0, ""], ["s", "fake", "h", 9.0, 5.0, ""]]
    recs = ingest_csv(write_articles(tmp_path / "b.csv", rows))
    assert len(recs) == 1
    assert "skipped" in caplog.text


def test_ingest_errors(tmp_path):
    with pytest.raises(DataError):
        ingest_csv(tmp_path / "missing.csv")
    with pytest.raises(DataError):
        ingest_csv(write_articles(tmp_path / "h.csv", [], header=("site_id", "headline")))


def test_meta_report_structure(tmp_path):
    recs = ingest_csv(write_articles(tmp_path / "a.csv", fixture_rows()))
    rep = meta_report(recs)
    assert set(rep["table"]) == {f"{t}/{c}" for t in ("raw_log10", "standardized", "rank")
                                 for c in ("mainstream", "fake")}
    cell = rep["table"]["standardized/fake"]
    assert cell["sites"] == 4 and "fisher" in cell and "random_effects" in cell
    assert len(per_site_regressions(recs)) == 8 * 3


def test_meta_null_data_not_significant():
    rng = np.random.default_rng(11)
    recs = []
    for s in range(10):
        cls = "fake" if s % 2 else "mainstream"
        recs += _site(f"s{s}", cls, rng.uniform(1, 7, 40), 10 ** rng.normal(2, 0.5, 40))
    rep = meta_report(recs)
    for key, cell in rep["table"].items():
        assert cell["fisher"]["p"] > 0.01, key


def test_trust_csv(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("site_id,trust\na,0.5\nb,x\n", encoding="utf-8")
    assert read_trust_csv(p) == {"a": 0.5}
    with pytest.raises(DataError):
        read_trust_csv(tmp_path / "none.csv")
