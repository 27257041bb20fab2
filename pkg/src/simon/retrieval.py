"""Zero-shot top-k retrieval over an embedding gallery."""
import csv
from dataclasses import dataclass

import numpy as np

from . import lorentz

METRICS = ("hyperbolic", "cosine")


@dataclass
class RetrievalReport:
    ks: list
    accuracy_at_k: list
    per_query_rank: np.ndarray

    def rows(self):
        return list(zip(self.ks, self.accuracy_at_k))


def _project(queries, gallery, metric, params):
    """Map raw query/gallery vectors to the space the metric compares in."""
    q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    g = np.atleast_2d(np.asarray(gallery, dtype=np.float64))
    if params is not None:
        if g.shape[1] != params.w_v.shape[1]:
            raise ValueError(f"gallery width {g.shape[1]} != projection input {params.w_v.shape[1]}")
        g = params.alpha_v * g @ params.w_v.T
        q = params.alpha_b * q
    if q.shape[1] != g.shape[1]:
        raise ValueError(f"dimension mismatch: queries {q.shape[1]}, gallery {g.shape[1]}")
    return q, g


def similarity_matrix(queries, gallery, metric="hyperbolic", params=None, c=1.0):
    """Query-by-gallery similarities: ``-d^2`` on the hyperboloid, or cosine."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    q, g = _project(queries, gallery, metric, params)
    if g.shape[0] == 0:
        raise ValueError("empty gallery")
    if metric == "cosine":
        qn = np.linalg.norm(q, axis=1, keepdims=True)
        gn = np.linalg.norm(g, axis=1, keepdims=True)
        return (q / np.where(qn > 0, qn, 1.0)) @ (g / np.where(gn > 0, gn, 1.0)).T
    hq = lorentz.exp_origin(q, c)
    hg = lorentz.exp_origin(g, c)
    out = np.empty((hq.shape[0], hg.shape[0]))
    for i in range(hq.shape[0]):
        out[i] = -lorentz.dist(hq[i][None, :], hg, c, check=False) ** 2
    return out


def rank(query, gallery, metric="hyperbolic", params=None, c=1.0):
    """Gallery indices by descending similarity; equal scores keep index order."""
    sim = similarity_matrix(np.atleast_2d(query), gallery, metric, params, c)[0]
    return np.argsort(-sim, kind="stable")


def _ranks_of_truth(sim, truth):
    true_score = sim[np.arange(sim.shape[0]), truth][:, None]
    cols = np.arange(sim.shape[1])[None, :]
    ahead = (sim > true_score) | ((sim == true_score) & (cols < truth[:, None]))
    return 1 + ahead.sum(axis=1)


def topk_accuracy(queries, gallery, truth, ks=(1, 5), metric="hyperbolic", params=None, c=1.0):
    """Fraction of queries whose true gallery item is among the top ``k``."""
    sim = similarity_matrix(queries, gallery, metric, params, c)
    truth = np.asarray(truth, dtype=np.int64)
    if truth.shape != (sim.shape[0],):
        raise ValueError(f"need one truth index per query ({sim.shape[0]}), got {truth.shape}")
    if truth.size and (truth.min() < 0 or truth.max() >= sim.shape[1]):
        raise ValueError("truth index outside the gallery")
    ranks = _ranks_of_truth(sim, truth)
    ks = [int(k) for k in ks]
    if any(k < 1 for k in ks):
        raise ValueError("cutoffs must be >= 1")
    acc = [float(np.mean(ranks <= k)) for k in ks]
    return RetrievalReport(ks, acc, ranks)


def read_truth_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["query_index", "gallery_index"]:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        pairs = sorted((int(r["query_index"]), int(r["gallery_index"])) for r in reader)
    q = [p[0] for p in pairs]
    if q != list(range(len(q))):
        raise ValueError(f"{path}: query indices must cover 0..{len(q) - 1} once each")
    return np.array([p[1] for p in pairs], dtype=np.int64)


def write_truth_csv(path, truth):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("query_index,gallery_index\n")
        for i, g in enumerate(truth):
            fh.write(f"{i},{int(g)}\n")


def write_report_csv(path, report):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("k,accuracy\n")
        for k, acc in report.rows():
            fh.write(f"{k},{acc!r}\n")
