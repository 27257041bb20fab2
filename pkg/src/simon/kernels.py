"""Hot per-pixel kernels, each with a numba and a numpy implementation.

Both implementations perform the same floating-point operations in the same
order, so their outputs agree bit for bit.  The public names at the bottom of
the module dispatch on :data:`simon._accel.USE_JIT`.
"""
import math

import numpy as np

from ._accel import USE_JIT, njit

# ---------------------------------------------------------------------------
# separable convolution along the last axis, clamp-to-edge
# ---------------------------------------------------------------------------


@njit
def _convolve_lines_jit(a, weights):
    rows, n = a.shape
    radius = (weights.shape[0] - 1) // 2
    out = np.empty_like(a)
    for i in range(rows):
        for j in range(n):
            acc = 0.0
            for k in range(weights.shape[0]):
                idx = j + k - radius
                if idx < 0:
                    idx = 0
                elif idx > n - 1:
                    idx = n - 1
                acc += weights[k] * a[i, idx]
            out[i, j] = acc
    return out


def _convolve_lines_np(a, weights):
    rows, n = a.shape
    radius = (weights.shape[0] - 1) // 2
    padded = np.pad(a, ((0, 0), (radius, radius)), mode="edge")
    out = np.zeros_like(a)
    for k in range(weights.shape[0]):
        out += weights[k] * padded[:, k:k + n]
    return out


# ---------------------------------------------------------------------------
# one greedy step of saliency-aware sampling
# ---------------------------------------------------------------------------


@njit
def _sas_step_jit(xs, ys, weights, dmin, taken, cx, cy):
    best = -1
    best_score = -1.0
    for i in range(xs.shape[0]):
        dx = float(xs[i] - cx)
        dy = float(ys[i] - cy)
        d = math.sqrt(dx * dx + dy * dy)
        if d < dmin[i]:
            dmin[i] = d
        if taken[i]:
            continue
        score = dmin[i] * weights[i]
        if score > best_score:
            best_score = score
            best = i
    return best, best_score


def _sas_step_np(xs, ys, weights, dmin, taken, cx, cy):
    dx = (xs - cx).astype(np.float64)
    dy = (ys - cy).astype(np.float64)
    np.minimum(dmin, np.sqrt(dx * dx + dy * dy), out=dmin)
    score = dmin * weights
    score[taken] = -np.inf
    best = int(np.argmax(score))
    if taken[best]:
        return -1, -1.0
    return best, float(score[best])


@njit
def _pow_weights_jit(s, gamma):
    out = np.empty_like(s)
    for i in range(s.shape[0]):
        out[i] = math.pow(s[i], gamma)
    return out


_pow_ufunc = np.frompyfunc(math.pow, 2, 1)


def _pow_weights_np(s, gamma):
    # libm pow, not np.power: keeps results identical to the scalar oracle
    return _pow_ufunc(s, float(gamma)).astype(np.float64)


# ---------------------------------------------------------------------------
# two-level pyramid blend
# ---------------------------------------------------------------------------


@njit
def _pyramid_blend_jit(levels, sigma, step):
    n_levels, h, w, c = levels.shape
    out = np.empty((h, w, c))
    for y in range(h):
        for x in range(w):
            pos = sigma[y, x] / step
            lo = int(math.floor(pos))
            if lo > n_levels - 2:
                lo = n_levels - 2
            if lo < 0:
                lo = 0
            frac = pos - lo
            if frac > 1.0:
                frac = 1.0
            w_lo = 1.0 - frac
            for ch in range(c):
                v = w_lo * levels[lo, y, x, ch] + frac * levels[lo + 1, y, x, ch]
                if v < 0.0:
                    v = 0.0
                elif v > 1.0:
                    v = 1.0
                out[y, x, ch] = v
    return out


def _blend_index_np(sigma, step, n_levels):
    pos = sigma / step
    lo = np.clip(np.floor(pos).astype(np.int64), 0, n_levels - 2)
    frac = np.minimum(pos - lo, 1.0)
    return lo, frac


def _pyramid_blend_np(levels, sigma, step):
    n_levels, h, w, c = levels.shape
    lo, frac = _blend_index_np(sigma, step, n_levels)
    rows, cols = np.indices((h, w))
    lower = levels[lo, rows, cols]
    upper = levels[lo + 1, rows, cols]
    out = (1.0 - frac)[..., None] * lower + frac[..., None] * upper
    return np.clip(out, 0.0, 1.0)


def blend_weights(sigma, step, n_levels):
    """Per-pixel ``(lower_index, w_lower, w_upper)`` used by the blend kernel."""
    lo, frac = _blend_index_np(np.asarray(sigma, dtype=np.float64), step, n_levels)
    return lo, 1.0 - frac, frac


if USE_JIT:
    convolve_lines = _convolve_lines_jit
    sas_step = _sas_step_jit
    pow_weights = _pow_weights_jit
    pyramid_blend = _pyramid_blend_jit
else:
    convolve_lines = _convolve_lines_np
    sas_step = _sas_step_np
    pow_weights = _pow_weights_np
    pyramid_blend = _pyramid_blend_np

JIT_KERNELS = {
    "convolve_lines": _convolve_lines_jit,
    "sas_step": _sas_step_jit,
    "pow_weights": _pow_weights_jit,
    "pyramid_blend": _pyramid_blend_jit,
}
NUMPY_KERNELS = {
    "convolve_lines": _convolve_lines_np,
    "sas_step": _sas_step_np,
    "pow_weights": _pow_weights_np,
    "pyramid_blend": _pyramid_blend_np,
}
