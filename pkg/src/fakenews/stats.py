"""Empirical pipeline: per-site accuracy/engagement regressions and their meta-analysis.

Distribution tails are computed natively from ``math.lgamma`` and ``math.erfc``
with series and continued-fraction expansions of the incomplete gamma and beta
functions, so the module has no dependency beyond numpy.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from fakenews.errors import ArgumentError, DataError

log = logging.getLogger(__name__)

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


class UndefinedRegressionError(ArgumentError):
    """Too few points or no spread in the predictor."""


# ---------------------------------------------------------------------------
# special functions


def _gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series (x < a + 1)."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by Lentz's continued fraction (x >= a + 1)."""
    b = x + 1 - a
    c = 1 / _TINY
    d = 1 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2
        d = an * d + b
        d = _TINY if abs(d) < _TINY else d
        c = b + an / c
        c = _TINY if abs(c) < _TINY else c
        d = 1 / d
        delta = d * c
        h *= delta
        if abs(delta - 1) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammaincc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma ``Q(a, x)``."""
    if a <= 0 or x < 0:
        raise ArgumentError(f"gammaincc needs a > 0 and x >= 0 (a={a}, x={x})")
    if x == 0:
        return 1.0
    if x < a + 1:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cf(a, x)


def _beta_cf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1, a - 1
    c = 1.0
    d = 1 - qab * x / qap
    d = 1 / (_TINY if abs(d) < _TINY else d)
    h = d
    for m in range(1, _MAX_ITER):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1 + aa * d
        d = 1 / (_TINY if abs(d) < _TINY else d)
        c = 1 + aa / c
        c = _TINY if abs(c) < _TINY else c
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1 + aa * d
        d = 1 / (_TINY if abs(d) < _TINY else d)
        c = 1 + aa / c
        c = _TINY if abs(c) < _TINY else c
        delta = d * c
        h *= delta
        if abs(delta - 1) < _EPS:
            break
    return h


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)``."""
    if a <= 0 or b <= 0 or not 0 <= x <= 1:
        raise ArgumentError(f"betainc needs a, b > 0 and x in [0, 1] (a={a}, b={b}, x={x})")
    if x == 0 or x == 1:
        return float(x)
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1) / (a + b + 2):
        return math.exp(log_front) * _beta_cf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _beta_cf(b, a, 1 - x) / b


def chi2_sf(x: float, df: float) -> float:
    """Upper tail of the chi-squared law."""
    if df < 1 or x < 0 or math.isnan(x):
        raise ArgumentError(f"chi2_sf needs x >= 0 and df >= 1 (x={x}, df={df})")
    if math.isinf(x):
        return 0.0
    return gammaincc(df / 2, x / 2)


def t_sf(t: float, df: float) -> float:
    """Upper tail ``P(T > t)`` of Student's t law."""
    if df < 1 or math.isnan(t):
        raise ArgumentError(f"t_sf needs df >= 1 (df={df}, t={t})")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    t2 = t * t
    if t2 < df:
        # complementary form avoids cancellation in 1 - df/(df + t^2) near t = 0
        tail = 0.5 * (1.0 - betainc(0.5, df / 2, t2 / (df + t2)))
    else:
        tail = 0.5 * betainc(df / 2, 0.5, df / (df + t2))
    return tail if t >= 0 else 1.0 - tail


def normal_sf(z: float) -> float:
    if math.isnan(z):
        raise ArgumentError("normal_sf of NaN")
    return 0.5 * math.erfc(z / math.sqrt(2))


def binomial_sf(k: int, n: int, p: float) -> float:
    """``P(X >= k)`` for ``X ~ Binomial(n, p)``."""
    if n < 0 or not 0 <= p <= 1:
        raise ArgumentError(f"binomial_sf needs n >= 0 and p in [0, 1] (n={n}, p={p})")
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    if p == 0:
        return 0.0
    if p == 1:
        return 1.0
    return betainc(k, n - k + 1, p)


def kolmogorov_sf(lam: float) -> float:
    """Asymptotic Kolmogorov tail ``2 sum (-1)^(j-1) exp(-2 j^2 lam^2)``."""
    if lam <= 0:
        return 1.0
    total = 0.0
    for j in range(1, 101):
        term = 2 * (-1) ** (j - 1) * math.exp(-2 * j * j * lam * lam)
        total += term
        if abs(term) < 1e-16:
            break
    return min(1.0, max(0.0, total))


def ks_uniform(values: Sequence[float]) -> tuple[float, float]:
    """One-sample Kolmogorov-Smirnov test against U(0, 1): ``(D, p)`` with Stephens' correction."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ArgumentError("ks_uniform needs at least one value")
    i = np.arange(1, n + 1)
    d = float(max((i / n - x).max(), (x - (i - 1) / n).max()))
    rn = math.sqrt(n)
    return d, kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d)


# ---------------------------------------------------------------------------
# data


class SiteClass(str, Enum):
    MAINSTREAM = "mainstream"
    FAKE = "fake"


@dataclass(frozen=True)
class ArticleRecord:
    site_id: str
    site_class: SiteClass
    headline: str
    accuracy_mean: float
    engagement: float
    published: Optional[dt.date] = None

    def __post_init__(self):
        object.__setattr__(self, "site_class", SiteClass(self.site_class))
        if not 1 <= self.accuracy_mean <= 7:
            raise ArgumentError(f"accuracy_mean={self.accuracy_mean} outside the 1-7 scale")
        if not self.engagement >= 0:
            raise ArgumentError(f"engagement={self.engagement} must be >= 0")


COLUMNS = ("site_id", "site_class", "headline", "accuracy_mean", "engagement", "published")


def _parse_row(row: Mapping[str, str]) -> ArticleRecord:
    published = (row.get("published") or "").strip()
    return ArticleRecord(
        site_id=row["site_id"].strip(),
        site_class=row["site_class"].strip().lower(),
        headline=row["headline"],
        accuracy_mean=float(row["accuracy_mean"]),
        engagement=float(row["engagement"]),
        published=dt.date.fromisoformat(published) if published else None,
    )


def ingest_csv(path: Path) -> list[ArticleRecord]:
    """Read headline records; unparseable rows are logged and skipped.

    A missing file or a header lacking a required column raises :class:`DataError`.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"data file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        header = reader.fieldnames or []
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise DataError(f"{path}: header lacks column(s) {', '.join(missing)}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            try:
                records.append(_parse_row(row))
            except (ValueError, TypeError, KeyError, AttributeError) as exc:
                log.warning("%s line %d skipped: %s", path, lineno, exc)
    return records


def class_accuracy_means(records: Iterable[ArticleRecord]) -> dict[str, float]:
    by: dict[str, list[float]] = {}
    for rec in records:
        by.setdefault(rec.site_class.value, []).append(rec.accuracy_mean)
    return {k: float(np.mean(v)) for k, v in by.items()}


def group_by_site(records: Iterable[ArticleRecord]) -> dict[str, list[ArticleRecord]]:
    sites: dict[str, list[ArticleRecord]] = {}
    for rec in records:
        sites.setdefault(rec.site_id, []).append(rec)
    return dict(sorted(sites.items()))


# ---------------------------------------------------------------------------
# regression


TRANSFORMS = ("raw_log10", "standardized", "rank")


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    slope_stderr: float
    t_stat: float
    p_one_tailed: float
    n: int
    r2: float = math.nan
    p_two_tailed: float = math.nan
    direction: str = "positive"

    def to_dict(self) -> dict:
        return asdict(self)


def ols(x: Sequence[float], y: Sequence[float], direction: str = "positive") -> RegressionResult:
    """Least-squares line of ``y`` on ``x`` with a one-tailed t test in ``direction``."""
    if direction not in ("positive", "negative"):
        raise ArgumentError(f"direction must be 'positive' or 'negative', got {direction!r}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.size
    if n != y.size:
        raise ArgumentError("x and y differ in length")
    if n < 3:
        raise UndefinedRegressionError(f"regression needs n >= 3 points, got {n}")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    if sxx <= 1e-300 * max(1.0, float(np.abs(x).max()) ** 2):
        raise UndefinedRegressionError("predictor has zero variance")
    slope = float(xc @ yc) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = yc - slope * xc
    sse = float(resid @ resid)
    syy = float(yc @ yc)
    df = n - 2
    se = math.sqrt(sse / df / sxx)
    if se > 0:
        t = slope / se
    else:
        t = math.copysign(math.inf, slope) if slope != 0 else 0.0
    signed = t if direction == "positive" else -t
    p_one = t_sf(signed, df) if not math.isnan(signed) else math.nan
    p_two = min(1.0, 2 * t_sf(abs(t), df))
    r2 = 1 - sse / syy if syy > 0 else math.nan
    return RegressionResult(slope, intercept, se, t, p_one, n, r2, p_two, direction)


def _ranks(v: np.ndarray) -> np.ndarray:
    """Ranks starting at 1, ties sharing their average rank."""
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(v.size)
    sv = v[order]
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _zscore(v: np.ndarray) -> np.ndarray:
    sd = v.std(ddof=1)
    if not sd > 0:
        raise UndefinedRegressionError("cannot standardize a constant variable")
    return (v - v.mean()) / sd


def default_direction(site_class: SiteClass) -> str:
    """Hypothesized slope sign: negative for misinformation sites, positive for mainstream."""
    return "negative" if SiteClass(site_class) is SiteClass.FAKE else "positive"


def site_regression(
    records: Sequence[ArticleRecord],
    transform: str = "raw_log10",
    direction: Optional[str] = None,
    zero_engagement: str = "exclude",
) -> RegressionResult:
    """Regress transformed engagement on transformed accuracy for one site.

    ``raw_log10`` uses accuracy against log10(engagement); ``standardized`` z-scores
    both within the site, so the slope is Pearson's r; ``rank`` regresses rank on
    rank. Zero-engagement articles are dropped with a diagnostic, or kept through
    log10(1 + engagement) when ``zero_engagement="log1p"``. The same article set
    feeds every transform.
    """
    if transform not in TRANSFORMS:
        raise ArgumentError(f"transform must be one of {TRANSFORMS}")
    if zero_engagement not in ("exclude", "log1p"):
        raise ArgumentError("zero_engagement must be 'exclude' or 'log1p'")
    if not records:
        raise UndefinedRegressionError("no articles")
    if direction is None:
        direction = default_direction(records[0].site_class)
    acc = np.array([r.accuracy_mean for r in records], dtype=np.float64)
    eng = np.array([r.engagement for r in records], dtype=np.float64)
    if zero_engagement == "exclude":
        keep = eng > 0
        if not keep.all():
            log.info("site %s: %d zero-engagement article(s) excluded",
                     records[0].site_id, int((~keep).sum()))
        acc, eng = acc[keep], eng[keep]
        y = np.log10(eng)
    else:
        y = np.log10(1 + eng)
    if acc.size < 3:
        raise UndefinedRegressionError(f"site needs >= 3 usable articles, has {acc.size}")
    x = acc
    if transform == "standardized":
        if not acc.std() > 0:
            raise UndefinedRegressionError("predictor has zero variance")
        x, y = _zscore(acc), _zscore(y)
    elif transform == "rank":
        x, y = _ranks(acc), _ranks(y)
    return ols(x, y, direction)


@dataclass(frozen=True)
class FisherResult:
    statistic: float
    df: int
    p: float


def fisher_combined(p_values: Sequence[float]) -> FisherResult:
    """Fisher's method: ``X^2 = -2 sum ln p`` on ``2k`` degrees of freedom."""
    ps = [float(p) for p in p_values]
    if not ps:
        raise ArgumentError("need at least one p-value")
    for p in ps:
        if not 0 < p <= 1:
            raise ArgumentError(f"p-value {p} outside (0, 1]")
    stat = -2 * math.fsum(math.log(p) for p in ps)
    df = 2 * len(ps)
    if len(ps) == 1:
        # the chi-squared(2) tail inverts -2 ln p exactly
        return FisherResult(stat, df, ps[0])
    return FisherResult(stat, df, chi2_sf(stat, df))


@dataclass(frozen=True)
class MetaResult:
    tau2: float
    mu_re: float
    se_mu: float
    I2: float
    Q: float
    p_mu: float
    p_q: float
    k: int

    def to_dict(self) -> dict:
        return asdict(self)


def dersimonian_laird(effects: Sequence[float], variances: Sequence[float]) -> MetaResult:
    """Random-effects pooling with the DerSimonian-Laird moment estimate of ``tau^2``."""
    y = np.asarray(effects, dtype=np.float64)
    v = np.asarray(variances, dtype=np.float64)
    k = y.size
    if k < 2 or v.size != k:
        raise ArgumentError("need k >= 2 studies with one variance each")
    if np.any(~(v > 0)):
        raise ArgumentError("study variances must be > 0")
    w = 1 / v
    sw = w.sum()
    ybar = float((w @ y) / sw)
    Q = float(w @ (y - ybar) ** 2)
    denom = sw - float(w @ w) / sw
    tau2 = max(0.0, (Q - (k - 1)) / denom) if denom > 0 else 0.0
    ws = 1 / (v + tau2)
    mu = float((ws @ y) / ws.sum())
    se = float(ws.sum() ** -0.5)
    I2 = max(0.0, (Q - (k - 1)) / Q) if Q > 0 else 0.0
    p_mu = min(1.0, 2 * normal_sf(abs(mu / se)))
    return MetaResult(tau2, mu, se, I2, Q, p_mu, chi2_sf(Q, k - 1), k)


def trust_regression(slopes: Sequence[float], trust: Sequence[float]) -> RegressionResult:
    """Regress standardized per-site slopes on site trust ratings."""
    return ols(trust, slopes, "positive")


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class SiteRow:
    site_id: str
    site_class: SiteClass
    transform: str
    result: RegressionResult

    def to_dict(self) -> dict:
        d = {"site_id": self.site_id, "site_class": self.site_class.value, "transform": self.transform}
        d.update(self.result.to_dict())
        return d


def per_site_regressions(records: Sequence[ArticleRecord], transforms: Sequence[str] = TRANSFORMS,
                         zero_engagement: str = "exclude") -> list[SiteRow]:
    rows = []
    for site, recs in group_by_site(records).items():
        for tr in transforms:
            try:
                res = site_regression(recs, tr, zero_engagement=zero_engagement)
            except UndefinedRegressionError as exc:
                log.warning("site %s (%s) skipped: %s", site, tr, exc)
                continue
            rows.append(SiteRow(site, recs[0].site_class, tr, res))
    return rows


def meta_report(
    records: Sequence[ArticleRecord],
    trust: Optional[Mapping[str, float]] = None,
    zero_engagement: str = "exclude",
) -> dict:
    """Table-S2-style summary: every transform crossed with every site class.

    Each cell holds the Fisher combination of one-tailed site p-values and the
    random-effects pooled slope. With ``trust`` ratings the standardized slopes are
    also regressed on trust.
    """
    rows = per_site_regressions(records, zero_engagement=zero_engagement)
    table = {}
    for tr in TRANSFORMS:
        for cls in SiteClass:
            cell = [r.result for r in rows if r.transform == tr and r.site_class is cls]
            entry: dict = {"sites": len(cell)}
            if cell:
                entry["fisher"] = asdict(fisher_combined([max(r.p_one_tailed, 1e-300) for r in cell]))
            usable = [r for r in cell if r.slope_stderr > 0]
            if len(usable) >= 2:
                entry["random_effects"] = dersimonian_laird(
                    [r.slope for r in usable], [r.slope_stderr ** 2 for r in usable]
                ).to_dict()
            table[f"{tr}/{cls.value}"] = entry
    report = {"table": table, "class_accuracy_means": class_accuracy_means(records),
              "sites": [r.to_dict() for r in rows]}
    if trust:
        std = {r.site_id: r.result.slope for r in rows if r.transform == "standardized"}
        common = sorted(set(std) & set(trust))
        if len(common) >= 3:
            res = trust_regression([std[s] for s in common], [trust[s] for s in common])
            report["trust_regression"] = res.to_dict()
        else:
            log.warning("trust regression skipped: only %d site(s) with both values", len(common))
    return report


def read_trust_csv(path: Path) -> dict[str, float]:
    """Trust ratings from a CSV with columns ``site_id`` and ``trust``."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"trust file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        if not {"site_id", "trust"} <= set(reader.fieldnames or []):
            raise DataError(f"{path}: header needs site_id and trust columns")
        out = {}
        for row in reader:
            try:
                out[row["site_id"].strip()] = float(row["trust"])
            except (TypeError, ValueError) as exc:
                log.warning("trust row %r skipped: %s", row, exc)
    return out
