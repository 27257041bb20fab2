"""Fixation-center selection: saliency-aware sampling and baseline samplers."""
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .imaging import masked_centroid, threshold_mask

STRATEGIES = ("saliency_aware", "random", "ring", "geometric_center", "non_salient")


class SamplingError(ValueError):
    pass


@dataclass(frozen=True)
class SamplingConfig:
    k: int = 3
    tau: float = 0.5
    gamma: float = 1.0
    strategy: str = "saliency_aware"
    rng_seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")


@dataclass
class FixationSet:
    centers: list = field(default_factory=list)  # [(x, y), ...] integer pixels
    scores: list = field(default_factory=list)
    fallback: bool = False

    def __len__(self):
        return len(self.centers)


def candidate_region(m_fg, tau=0.5):
    """Return ``(omega, fallback)``; an empty region becomes the full image."""
    omega = threshold_mask(m_fg, tau)
    if not omega.any():
        return np.ones(omega.shape, dtype=bool), True
    return omega, False


def min_distance_field(omega, centers):
    """Exact Euclidean distance from each pixel of ``omega`` to its nearest center.

    Pixels outside ``omega`` are NaN.
    """
    if len(centers) == 0:
        raise ValueError("center list is empty")
    omega = np.asarray(omega, dtype=bool)
    ys, xs = np.nonzero(omega)
    best = np.full(xs.shape, np.inf)
    for cx, cy in centers:
        dx = xs - float(cx)
        dy = ys - float(cy)
        np.minimum(best, np.sqrt(dx * dx + dy * dy), out=best)
    out = np.full(omega.shape, np.nan)
    out[ys, xs] = best
    return out


def _snap(xs, ys, point, taken=None):
    """Index into (xs, ys) of the region pixel nearest ``point`` (first on ties)."""
    dx = xs - point[0]
    dy = ys - point[1]
    d2 = dx * dx + dy * dy
    if taken is not None:
        d2 = np.where(taken, np.inf, d2)
    return int(np.argmin(d2))


def _greedy(xs, ys, weights, k, seed_idx):
    n = xs.shape[0]
    if k > n:
        raise SamplingError(f"K={k} exceeds the {n} candidate pixels (deficit {k - n})")
    taken = np.zeros(n, dtype=np.bool_)
    dmin = np.full(n, np.inf)
    chosen = [seed_idx]
    scores = [0.0]
    taken[seed_idx] = True
    for _ in range(1, k):
        last = chosen[-1]
        idx, score = kernels.sas_step(xs, ys, weights, dmin, taken, xs[last], ys[last])
        chosen.append(int(idx))
        scores.append(float(score))
        taken[idx] = True
    return chosen, scores


def _region_pixels(omega):
    ys, xs = np.nonzero(omega)
    return xs.astype(np.int64), ys.astype(np.int64)


def _check_maps(s_att, m_fg):
    s_att = np.asarray(s_att, dtype=np.float64)
    m_fg = np.asarray(m_fg, dtype=np.float64)
    if s_att.ndim != 2 or s_att.shape != m_fg.shape:
        raise ValueError(f"saliency {s_att.shape} and matte {m_fg.shape} must be equal 2-D shapes")
    return s_att, m_fg


def sas_sample(s_att, m_fg, config=SamplingConfig()):
    """Greedy saliency-aware fixation sampling.

    The seed is the saliency centroid inside the foreground region, snapped to
    the nearest region pixel.  Each later center maximises
    ``J(p) = D(p) * s_att(p) ** gamma`` over not-yet-chosen region pixels,
    with ``D`` the distance to the closest chosen center.  Ties go to the
    smallest row-major index.
    """
    s_att, m_fg = _check_maps(s_att, m_fg)
    omega, fallback = candidate_region(m_fg, config.tau)
    xs, ys = _region_pixels(omega)
    if config.k > xs.size:
        raise SamplingError(f"K={config.k} exceeds the {xs.size} candidate pixels (deficit {config.k - xs.size})")
    seed = masked_centroid(s_att, omega)
    seed_idx = _snap(xs, ys, seed)
    weights = kernels.pow_weights(np.ascontiguousarray(s_att[ys, xs]), float(config.gamma))
    chosen, scores = _greedy(xs, ys, weights, config.k, seed_idx)
    centers = [(int(xs[i]), int(ys[i])) for i in chosen]
    return FixationSet(centers, scores, fallback)


def _ring(s_att, m_fg, config):
    omega, fallback = candidate_region(m_fg, config.tau)
    xs, ys = _region_pixels(omega)
    if config.k > xs.size:
        raise SamplingError(f"K={config.k} exceeds the {xs.size} candidate pixels (deficit {config.k - xs.size})")
    seed_idx = _snap(xs, ys, masked_centroid(s_att, omega))
    taken = np.zeros(xs.size, dtype=bool)
    taken[seed_idx] = True
    chosen = [seed_idx]
    h, w = s_att.shape
    radius = min(h, w) / 4.0
    cx, cy = float(xs[seed_idx]), float(ys[seed_idx])
    n_ring = config.k - 1
    for j in range(n_ring):
        angle = 2.0 * math.pi * j / n_ring
        target = (cx + radius * math.cos(angle), cy + radius * math.sin(angle))
        idx = _snap(xs, ys, target, taken)
        taken[idx] = True
        chosen.append(idx)
    centers = [(int(xs[i]), int(ys[i])) for i in chosen]
    return FixationSet(centers, [0.0] * len(centers), fallback)


def _random(s_att, m_fg, config):
    omega, fallback = candidate_region(m_fg, config.tau)
    xs, ys = _region_pixels(omega)
    if config.k > xs.size:
        raise SamplingError(f"K={config.k} exceeds the {xs.size} candidate pixels (deficit {config.k - xs.size})")
    rng = np.random.default_rng(config.rng_seed)
    picks = rng.choice(xs.size, size=config.k, replace=False)
    centers = [(int(xs[i]), int(ys[i])) for i in picks]
    return FixationSet(centers, [0.0] * len(centers), fallback)


def _geometric_center(s_att, m_fg, config):
    h, w = s_att.shape
    # every view sits on the frame center, so K collapses to one
    return FixationSet([((w - 1) // 2, (h - 1) // 2)], [0.0], False)


def baseline_sample(s_att, m_fg, config):
    """Ablation samplers: ``random``, ``ring``, ``geometric_center``, ``non_salient``."""
    s_att, m_fg = _check_maps(s_att, m_fg)
    if config.strategy == "random":
        return _random(s_att, m_fg, config)
    if config.strategy == "ring":
        return _ring(s_att, m_fg, config)
    if config.strategy == "geometric_center":
        return _geometric_center(s_att, m_fg, config)
    if config.strategy == "non_salient":
        return sas_sample(1.0 - s_att, m_fg, config)
    raise ValueError(f"{config.strategy!r} is not a baseline strategy")


def sample(s_att, m_fg, config=SamplingConfig()):
    """Dispatch on ``config.strategy``."""
    if config.strategy == "saliency_aware":
        return sas_sample(s_att, m_fg, config)
    return baseline_sample(s_att, m_fg, config)


def write_fixations_csv(path, rows):
    """``rows``: iterable of ``(image_id, FixationSet)``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("image_id,k,x,y,score\n")
        for image_id, fs in rows:
            for k, ((x, y), score) in enumerate(zip(fs.centers, fs.scores), start=1):
                fh.write(f"{image_id},{k},{x},{y},{score!r}\n")


def read_fixations_csv(path):
    """Return ``{image_id: FixationSet}`` keeping file order within each id."""
    import csv

    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["image_id", "k", "x", "y", "score"]:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            fs = out.setdefault(row["image_id"], FixationSet())
            fs.centers.append((int(row["x"]), int(row["y"])))
            fs.scores.append(float(row["score"]))
    return out
