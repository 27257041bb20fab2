"""Background suppression and radial foveated rendering."""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .imaging import gaussian_blur


@dataclass(frozen=True)
class FoveationConfig:
    bg_sigma: float = 12.0
    sigma_max: float = 8.0
    r_max: float | None = None  # None: half the image diagonal
    pyramid_levels: int = 6

    def __post_init__(self):
        if self.bg_sigma < 0 or self.sigma_max < 0:
            raise ValueError("blur strengths must be >= 0")
        if self.r_max is not None and self.r_max <= 0:
            raise ValueError(f"r_max must be > 0, got {self.r_max}")
        if self.pyramid_levels < 2:
            raise ValueError(f"pyramid_levels must be >= 2, got {self.pyramid_levels}")

    def resolved_r_max(self, height, width):
        if self.r_max is not None:
            return float(self.r_max)
        return 0.5 * math.hypot(height, width)


@dataclass
class FoveatedView:
    image: np.ndarray
    center: tuple


def suppress_background(i_orig, m_fg, bg_sigma=12.0):
    """Composite the sharp image over its blurred copy using the soft matte."""
    img = np.asarray(i_orig, dtype=np.float64)
    matte = np.asarray(m_fg, dtype=np.float64)
    if img.shape[:2] != matte.shape or matte.ndim != 2:
        raise ValueError(f"image {img.shape} and matte {matte.shape} dimensions differ")
    blurred = gaussian_blur(img, bg_sigma)
    if img.ndim == 3:
        matte = matte[..., None]
    return img * matte + blurred * (1.0 - matte)


def radial_sigma(r, config=FoveationConfig(), r_max=None):
    """``sigma_max * min(1, r / r_max)``; vectorised over ``r``."""
    if r_max is None:
        if config.r_max is None:
            raise ValueError("r_max must be given when the config leaves it unset")
        r_max = config.r_max
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0):
        raise ValueError("radius must be >= 0")
    out = config.sigma_max * np.minimum(1.0, r / r_max)
    return float(out) if out.ndim == 0 else out


def level_sigmas(config):
    n = config.pyramid_levels
    return [config.sigma_max * level / (n - 1) for level in range(n)]


def build_pyramid(i_base, config):
    """Stack of blurred copies, shape ``(L, H, W, C)``; level 0 is the input."""
    img = np.asarray(i_base, dtype=np.float64)
    planes = img[..., None] if img.ndim == 2 else img
    return np.stack([gaussian_blur(planes, s) for s in level_sigmas(config)])


def sigma_field(shape, center, config):
    h, w = shape
    ys, xs = np.indices((h, w), dtype=np.float64)
    r = np.sqrt((xs - center[0]) ** 2 + (ys - center[1]) ** 2)
    return radial_sigma(r, config, config.resolved_r_max(h, w))


def foveate(i_base, center, config=FoveationConfig(), pyramid=None):
    """Render one view sharp at ``center`` and blurrier with distance.

    Each pixel blends the two pyramid levels bracketing its target sigma.
    ``pyramid`` may be passed in to share it across views of one image.
    """
    img = np.asarray(i_base, dtype=np.float64)
    h, w = img.shape[:2]
    cx, cy = center
    if not (0 <= cx < w and 0 <= cy < h):
        raise ValueError(f"center {center} outside {w}x{h} image")
    if config.sigma_max == 0:
        return FoveatedView(img.copy(), tuple(center))
    if pyramid is None:
        pyramid = build_pyramid(img, config)
    step = config.sigma_max / (config.pyramid_levels - 1)
    out = kernels.pyramid_blend(pyramid, sigma_field((h, w), center, config), step)
    if img.ndim == 2:
        out = out[..., 0]
    return FoveatedView(out, tuple(center))


def generate_views(i_orig, m_fg, fixations, config=FoveationConfig()):
    """One background-suppressed base image and one foveated view per center."""
    centers = fixations.centers if hasattr(fixations, "centers") else list(fixations)
    if len(centers) < 1:
        raise ValueError("need at least one fixation center")
    base = suppress_background(i_orig, m_fg, config.bg_sigma)
    pyramid = build_pyramid(base, config) if config.sigma_max > 0 else None
    return [foveate(base, c, config, pyramid) for c in centers]
