"""Offsets between the frame center and semantic fixation centers, plus corpus stats."""
import csv
import math
from dataclasses import dataclass

import numpy as np

from .imaging import Point
from .sas import SamplingConfig, sas_sample

BUCKET_EDGES = (0.0, 33.0, 66.0, 100.0)
BUCKETS = ("[0,33)", "[33,66)", "[66,100)", "overflow")


class StatisticsError(ValueError):
    pass


@dataclass
class OffsetRecord:
    image_id: str
    offset: float

    @property
    def bucket(self):
        return bucket_of(self.offset)


@dataclass
class BucketStats:
    bucket: str
    count: int
    mean: float
    std: float


@dataclass
class CorpusReport:
    n: int
    mean: float
    std: float
    single: bool  # n == 1: std reported as 0
    histogram: list  # [(bin_left, count)]


def geometric_center(width, height):
    if width < 1 or height < 1:
        raise ValueError("dimensions must be positive")
    return Point((width - 1) / 2.0, (height - 1) / 2.0)


def semantic_offset(s_att, m_fg, config=SamplingConfig()):
    """Mean distance from the frame center to the sampled fixation centers."""
    h, w = np.shape(s_att)
    gc = geometric_center(w, h)
    fs = sas_sample(s_att, m_fg, config)
    return math.fsum(math.hypot(x - gc.x, y - gc.y) for x, y in fs.centers) / len(fs.centers)


def bucket_of(offset):
    if offset < 0:
        raise ValueError(f"offset must be >= 0, got {offset}")
    for name, lo, hi in zip(BUCKETS, BUCKET_EDGES, BUCKET_EDGES[1:]):
        if lo <= offset < hi:
            return name
    return BUCKETS[-1]


def _mean_std(values):
    n = len(values)
    if n == 0:
        return 0.0, 0.0
    mean = math.fsum(values) / n
    if n == 1:
        return mean, 0.0
    return mean, math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1))


def bucket_offsets(records):
    """Per-bucket count, mean and sample std (overflow included as its own bucket)."""
    groups = {name: [] for name in BUCKETS}
    for rec in records:
        groups[bucket_of(rec.offset)].append(rec.offset)
    return [BucketStats(name, len(vals), *_mean_std(vals)) for name, vals in groups.items()]


def corpus_report(records):
    offsets = [r.offset for r in records]
    if not offsets:
        raise StatisticsError("no offsets to summarise")
    mean, std = _mean_std(offsets)
    top = int(math.floor(max(offsets)))
    counts = np.bincount(np.floor(offsets).astype(np.int64), minlength=top + 1)
    hist = [(i, int(cnt)) for i, cnt in enumerate(counts)]
    return CorpusReport(len(offsets), mean, std, len(offsets) == 1, hist)


# ---------------------------------------------------------------------------
# Student t
# ---------------------------------------------------------------------------


def _betacf(a, b, x, max_iter=500, eps=1e-16):
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise StatisticsError("incomplete beta continued fraction did not converge")


def betainc_regularized(a, b, x):
    """Regularised incomplete beta ``I_x(a, b)``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t, df):
    """``P(|T| >= |t|)`` for Student's t with ``df`` degrees of freedom."""
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return min(1.0, betainc_regularized(df / 2.0, 0.5, x))


def one_sample_t(values, mu0=0.0):
    """Return ``(t, two_sided_p)`` for H0: mean == mu0."""
    vals = [float(v) for v in values]
    n = len(vals)
    if n < 2:
        raise StatisticsError("one-sample t-test needs at least two values")
    mean, std = _mean_std(vals)
    if std == 0.0:
        raise StatisticsError("zero sample variance")
    t = (mean - mu0) * math.sqrt(n) / std
    return t, student_t_two_sided_p(t, n - 1)


# ---------------------------------------------------------------------------
# threshold stability
# ---------------------------------------------------------------------------


def mask_stability(m_prob, tau_lo=0.3, tau_hi=0.7):
    """Fractions of pixels that are uncertain in ``(tau_lo, tau_hi]`` and of net area change."""
    if not 0.0 <= tau_lo < tau_hi <= 1.0:
        raise ValueError(f"need 0 <= tau_lo < tau_hi <= 1, got ({tau_lo}, {tau_hi})")
    m = np.asarray(m_prob, dtype=np.float64)
    total = m.size
    uncertain = np.count_nonzero((m > tau_lo) & (m <= tau_hi)) / total
    area = abs(np.count_nonzero(m > tau_lo) - np.count_nonzero(m > tau_hi)) / total
    return uncertain, area


def write_offsets_csv(path, records):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        out = csv.writer(fh, lineterminator="\n")  # bucket labels contain commas
        out.writerow(["image_id", "offset", "bucket"])
        out.writerows([r.image_id, repr(r.offset), r.bucket] for r in records)


def write_histogram_csv(path, report):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("bin_left,count\n")
        for left, count in report.histogram:
            fh.write(f"{left},{count}\n")


def write_buckets_csv(path, stats):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["bucket", "count", "mean", "std"])
        out.writerows([s.bucket, s.count, repr(s.mean), repr(s.std)] for s in stats)


def write_summary_csv(path, report):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,mean,std,single\n")
        fh.write(f"{report.n},{report.mean!r},{report.std!r},{int(report.single)}\n")


def write_stability_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("image_id,uncertain_fraction,area_diff_fraction\n")
        for image_id, unc, area in rows:
            fh.write(f"{image_id},{unc!r},{area!r}\n")
