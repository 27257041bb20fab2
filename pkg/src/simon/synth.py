"""Deterministic synthetic corpus with known fixation answers.

Saliency maps are sums of Gaussian blobs, mattes are unions of soft-edged
disks, and images are smooth textures tinted under the blobs.  Gray maps are
quantised to 16 bits before anything is derived from them so that the
ground truth matches what the pipeline reads back from disk.

:func:`oracle_sas` is a deliberately naive re-implementation of saliency-aware
sampling: full per-pixel scans at every step, no shared distance field.
"""
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .imaging import save_image, save_map


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class Blob:
    cx: float
    cy: float
    radius: float
    peak: float


@dataclass
class SynthSpec:
    count: int = 20
    width: int = 64
    height: int = 64
    blobs: list | None = None  # per image: list of Blob; None draws a random layout
    rng_seed: int = 0
    k: int = 3
    gamma: float = 1.0
    tau: float = 0.5


@dataclass
class SynthImage:
    image_id: str
    image: np.ndarray
    matte: np.ndarray
    saliency: np.ndarray
    blobs: list
    analytic_centroid: tuple
    oracle_centers: list = field(default_factory=list)


def quantize16(m):
    return np.rint(np.clip(m, 0.0, 1.0) * 65535.0) / 65535.0


def _check_blob(b, w, h):
    if b.radius <= 0 or b.cx - b.radius < 0 or b.cy - b.radius < 0 or b.cx + b.radius > w - 1 or b.cy + b.radius > h - 1:
        raise SynthError(f"blob {b} is not inside the {w}x{h} frame")


def random_blobs(rng, w, h):
    out = []
    for _ in range(int(rng.integers(1, 4))):
        r = float(rng.uniform(min(w, h) / 16.0, min(w, h) / 6.0))
        out.append(Blob(float(rng.uniform(r, w - 1 - r)), float(rng.uniform(r, h - 1 - r)), r, float(rng.uniform(0.5, 1.0))))
    return out


def saliency_map(blobs, w, h):
    ys, xs = np.indices((h, w), dtype=np.float64)
    s = np.zeros((h, w))
    for b in blobs:
        s += b.peak * np.exp(-((xs - b.cx) ** 2 + (ys - b.cy) ** 2) / (2.0 * b.radius**2))
    return np.clip(s, 0.0, 1.0)


def matte_map(blobs, w, h, scale=1.6):
    ys, xs = np.indices((h, w), dtype=np.float64)
    m = np.zeros((h, w))
    for b in blobs:
        d = np.sqrt((xs - b.cx) ** 2 + (ys - b.cy) ** 2)
        m = np.maximum(m, np.clip(scale * b.radius + 0.5 - d, 0.0, 1.0))
    return m


def textured_image(rng, blobs, w, h):
    ys, xs = np.indices((h, w), dtype=np.float64)
    base = rng.uniform(0.2, 0.5, size=3)
    freq = rng.uniform(0.2, 0.6, size=2)
    img = np.empty((h, w, 3))
    for ch in range(3):
        texture = 0.15 * np.sin(freq[0] * xs + ch) * np.cos(freq[1] * ys - ch)
        img[..., ch] = base[ch] + 0.2 * xs / max(w - 1, 1) + texture
    tint = rng.uniform(0.0, 0.4, size=3)
    img += saliency_map(blobs, w, h)[..., None] * tint
    return np.clip(img, 0.0, 1.0)


def analytic_centroid(blobs):
    """Centroid of the untruncated blob sum (mass of each blob ~ peak * radius^2)."""
    mass = [b.peak * b.radius**2 for b in blobs]
    total = math.fsum(mass)
    return (math.fsum(m * b.cx for m, b in zip(mass, blobs)) / total,
            math.fsum(m * b.cy for m, b in zip(mass, blobs)) / total)


def oracle_sas(s_att, m_fg, k, tau=0.5, gamma=1.0):
    """Brute-force saliency-aware sampling on plain Python lists."""
    h, w = len(s_att), len(s_att[0])
    s = [[float(v) for v in row] for row in s_att]
    region = [(x, y) for y in range(h) for x in range(w) if float(m_fg[y][x]) > tau]
    if not region:
        region = [(x, y) for y in range(h) for x in range(w)]
    if k > len(region):
        raise SynthError(f"K={k} exceeds region size {len(region)}")

    total = math.fsum(s[y][x] for x, y in region)
    if total > 0.0:
        cx = math.fsum(s[y][x] * x for x, y in region) / total
        cy = math.fsum(s[y][x] * y for x, y in region) / total
    else:
        cx = math.fsum(x for x, _ in region) / len(region)
        cy = math.fsum(y for _, y in region) / len(region)

    best, best_d2 = None, math.inf
    for x, y in region:
        d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy)
        if d2 < best_d2:
            best, best_d2 = (x, y), d2
    centers = [best]

    while len(centers) < k:
        pick, pick_score = None, -1.0
        for x, y in region:
            if (x, y) in centers:
                continue
            d = min(math.sqrt(float(x - a) * float(x - a) + float(y - b) * float(y - b)) for a, b in centers)
            score = d * math.pow(s[y][x], gamma)
            if score > pick_score:
                pick, pick_score = (x, y), score
        centers.append(pick)
    return centers


def generate_corpus(spec=SynthSpec(), out_dir=None):
    """Build (and optionally write) the synthetic corpus.

    With ``out_dir`` set, writes ``images/``, ``masks/``, ``saliency/`` PNGs
    and ``ground_truth.csv``.
    """
    rng = np.random.default_rng(spec.rng_seed)
    w, h = spec.width, spec.height
    items = []
    for i in range(spec.count):
        blobs = list(spec.blobs[i]) if spec.blobs is not None else random_blobs(rng, w, h)
        for b in blobs:
            _check_blob(b, w, h)
        sal = quantize16(saliency_map(blobs, w, h))
        matte = quantize16(matte_map(blobs, w, h))
        img = textured_image(rng, blobs, w, h)
        centers = oracle_sas(sal.tolist(), matte.tolist(), spec.k, spec.tau, spec.gamma)
        items.append(SynthImage(f"img{i:03d}", img, matte, sal, blobs, analytic_centroid(blobs), centers))
    if out_dir is not None:
        write_corpus(out_dir, items)
    return items


def write_corpus(out_dir, items):
    for sub in ("images", "masks", "saliency"):
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)
    for it in items:
        save_image(os.path.join(out_dir, "images", f"{it.image_id}.png"), it.image)
        save_map(os.path.join(out_dir, "masks", f"{it.image_id}.png"), it.matte)
        save_map(os.path.join(out_dir, "saliency", f"{it.image_id}.png"), it.saliency)
    with open(os.path.join(out_dir, "ground_truth.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("image_id,analytic_cx,analytic_cy,k,x,y\n")
        for it in items:
            ax, ay = it.analytic_centroid
            for k, (x, y) in enumerate(it.oracle_centers, start=1):
                fh.write(f"{it.image_id},{ax!r},{ay!r},{k},{x},{y}\n")


def synth_pairs(n, dim=16, noise=0.05, rng_seed=0, source=None, rotation=None):
    """Paired embeddings ``z_brain = R z_semantic + N(0, noise^2)``.

    ``source`` supplies the semantic rows; otherwise unit-norm Gaussian rows
    are drawn.  Returns ``(z_semantic, z_brain, R)``.
    """
    rng = np.random.default_rng(rng_seed)
    if rotation is None:
        dim = source.shape[1] if source is not None else dim
        rotation, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    if source is None:
        z = rng.normal(size=(n, rotation.shape[0]))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
    else:
        z = np.asarray(source, dtype=np.float64)
    brain = z @ rotation.T + rng.normal(0.0, noise, size=z.shape)
    return z, brain, rotation
