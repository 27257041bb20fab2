"""Raster helpers: image I/O, Gaussian blur, thresholding, masked centroid.

Images are float64 numpy arrays with samples in [0, 1], shaped ``(H, W)`` for
gray maps and ``(H, W, 3)`` for colour.  Pixel coordinates are ``(x, y)`` =
(column, row).
"""
import math
import os
from typing import NamedTuple

import cv2
import numpy as np

from . import kernels

_MAX_CODE = {np.dtype(np.uint8): 255.0, np.dtype(np.uint16): 65535.0}
_SUFFIXES = (".png", ".pgm", ".ppm", ".pnm")


class ImageDecodeError(ValueError):
    pass


class Point(NamedTuple):
    x: float
    y: float


def load_image(path):
    """Read a PNG or PGM/PPM file into a float image scaled to [0, 1].

    8-bit files are divided by 255, 16-bit files by 65535.  Colour files come
    back as RGB ``(H, W, 3)``; an alpha channel, if present, is dropped.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    if not path.lower().endswith(_SUFFIXES):
        raise ImageDecodeError(f"unsupported image format: {path}")
    raw = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise ImageDecodeError(f"cannot decode {path}")
    scale = _MAX_CODE.get(raw.dtype)
    if scale is None:
        raise ImageDecodeError(f"unsupported bit depth {raw.dtype} in {path}")
    if raw.ndim == 3:
        if raw.shape[2] == 1:
            raw = raw[..., 0]
        elif raw.shape[2] == 2:
            raw = raw[..., 0]
        else:
            raw = cv2.cvtColor(raw[..., :3], cv2.COLOR_BGR2RGB)
    return raw.astype(np.float64) / scale


def save_image(path, img, bits=8):
    """Write ``img`` (values in [0, 1]) as PNG/PGM/PPM with 8 or 16 bits."""
    path = os.fspath(path)
    if bits not in (8, 16):
        raise ValueError("bits must be 8 or 16")
    img = np.asarray(img, dtype=np.float64)
    maxv = 255 if bits == 8 else 65535
    codes = np.rint(np.clip(img, 0.0, 1.0) * maxv).astype(np.uint8 if bits == 8 else np.uint16)
    if codes.ndim == 3:
        codes = cv2.cvtColor(codes, cv2.COLOR_RGB2BGR)
    params = [cv2.IMWRITE_PNG_COMPRESSION, 6] if path.lower().endswith(".png") else []
    if not cv2.imwrite(path, codes, params):
        raise OSError(f"failed to write {path}")


def save_map(path, m):
    """Gray maps round-trip through 16-bit PNG."""
    save_image(path, m, bits=16)


def check_unit(img, name="image"):
    a = np.asarray(img, dtype=np.float64)
    if a.ndim not in (2, 3) or (a.ndim == 3 and a.shape[2] not in (1, 3)):
        raise ValueError(f"{name} must be HxW or HxWx3, got shape {a.shape}")
    if a.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(a)) or a.min() < 0.0 or a.max() > 1.0:
        raise ValueError(f"{name} samples must lie in [0, 1]")
    return a


def gaussian_kernel(sigma):
    """Sampled Gaussian truncated at ``ceil(3 sigma)`` and normalised to sum 1."""
    radius = int(math.ceil(3.0 * sigma))
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-0.5 * (offsets / sigma) ** 2)
    return w / w.sum()


def gaussian_blur(img, sigma):
    """Separable Gaussian blur with clamp-to-edge borders.

    ``sigma == 0`` returns an unchanged copy.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    a = np.asarray(img, dtype=np.float64)
    if sigma == 0:
        return a.copy()
    w = gaussian_kernel(sigma)
    squeeze = a.ndim == 2
    planes = a[..., None] if squeeze else a
    h, wd, c = planes.shape
    # channels-first so each pass convolves contiguous lines
    chw = np.ascontiguousarray(np.moveaxis(planes, 2, 0))
    rows = kernels.convolve_lines(chw.reshape(c * h, wd), w).reshape(c, h, wd)
    cols = np.ascontiguousarray(rows.transpose(0, 2, 1)).reshape(c * wd, h)
    out = kernels.convolve_lines(cols, w).reshape(c, wd, h).transpose(2, 1, 0)
    out = np.ascontiguousarray(out)
    return out[..., 0] if squeeze else out


def threshold_mask(m, tau=0.5):
    """Boolean map, true exactly where ``m > tau``."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    return np.asarray(m) > tau


def masked_centroid(s, omega=None):
    """Saliency-weighted centroid of ``s`` restricted to ``omega``.

    An empty ``omega`` means the whole map; zero total weight on ``omega``
    falls back to the unweighted centroid of ``omega``.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.size == 0:
        raise ValueError("saliency map must be a non-empty 2-D array")
    if omega is None or not np.any(omega):
        omega = np.ones(s.shape, dtype=bool)
    omega = np.asarray(omega, dtype=bool)
    if omega.shape != s.shape:
        raise ValueError(f"mask shape {omega.shape} != map shape {s.shape}")
    ys, xs = np.nonzero(omega)
    wts = s[ys, xs]
    total = math.fsum(wts)
    if total <= 0.0:
        return Point(math.fsum(xs) / xs.size, math.fsum(ys) / ys.size)
    return Point(math.fsum(wts * xs) / total, math.fsum(wts * ys) / total)
