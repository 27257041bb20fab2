"""View embeddings: a deterministic toy encoder, mean-pooled aggregation, EMB1 files.

EMB1 layout (all little-endian)::

    bytes 0-3    b"EMB1"
    bytes 4-7    row count   uint32
    bytes 8-11   dimension   uint32
    then         count*dim   float32, row-major

Row labels live in an optional UTF-8 sidecar ``<file>.labels``, one per line.
"""
import math
import os
import struct

import numpy as np

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sII")


class DegenerateEmbeddingError(ValueError):
    pass


class EmbeddingFormatError(ValueError):
    pass


def _area_matrix(n_in, n_out):
    """Row i averages input cells over ``[i*n_in/n_out, (i+1)*n_in/n_out)``."""
    a = np.zeros((n_out, n_in))
    scale = n_in / n_out
    for i in range(n_out):
        lo, hi = i * scale, (i + 1) * scale
        for j in range(int(math.floor(lo)), min(n_in, int(math.ceil(hi)))):
            a[i, j] = min(hi, j + 1) - max(lo, j)
    return a / scale


def toy_view_encoder(view, dim):
    """Gray, area-downsample to ``g x g`` (``dim = g*g``), flatten, subtract mean."""
    g = math.isqrt(dim) if dim >= 1 else 0
    if dim < 1 or g * g != dim:
        raise ValueError(f"dim must be a positive perfect square, got {dim}")
    img = np.asarray(getattr(view, "image", view), dtype=np.float64)
    gray = img.mean(axis=2) if img.ndim == 3 else img
    h, w = gray.shape
    small = _area_matrix(h, g) @ gray @ _area_matrix(w, g).T
    flat = small.ravel()
    return flat - flat.mean()


def aggregate_views(rows):
    """Mean of the L2-normalised rows."""
    f = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    if f.shape[0] < 1:
        raise ValueError("need at least one view embedding")
    norms = np.linalg.norm(f, axis=1)
    bad = np.flatnonzero(~(norms > 0))
    if bad.size:
        raise DegenerateEmbeddingError(f"view embedding row {int(bad[0])} has zero norm")
    return (f / norms[:, None]).mean(axis=0)


def write_emb(path, data, labels=None):
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if data.ndim != 2:
        raise ValueError("embedding matrix must be 2-D")
    if not np.all(np.isfinite(data)):
        raise ValueError("embedding matrix has non-finite entries")
    count, dim = data.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, count, dim))
        fh.write(data.astype("<f4").tobytes(order="C"))
    label_path = os.fspath(path) + ".labels"
    if labels is not None:
        labels = [str(x) for x in labels]
        if len(labels) != count:
            raise ValueError(f"{len(labels)} labels for {count} rows")
        with open(label_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("".join(f"{x}\n" for x in labels))
    elif os.path.exists(label_path):
        os.remove(label_path)


def read_emb(path):
    """Return ``(matrix float64, labels or None)``."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise EmbeddingFormatError(f"{path}: truncated header")
        magic, count, dim = _HEADER.unpack(head)
        if magic != MAGIC:
            raise EmbeddingFormatError(f"{path}: bad magic {magic!r}")
        body = fh.read()
    if len(body) != 4 * count * dim:
        raise EmbeddingFormatError(f"{path}: expected {4 * count * dim} payload bytes, got {len(body)}")
    data = np.frombuffer(body, dtype="<f4").astype(np.float64).reshape(count, dim)
    labels = None
    label_path = os.fspath(path) + ".labels"
    if os.path.exists(label_path):
        with open(label_path, encoding="utf-8") as fh:
            labels = fh.read().splitlines()
        if len(labels) != count:
            raise EmbeddingFormatError(f"{label_path}: {len(labels)} labels for {count} rows")
    return data, labels
