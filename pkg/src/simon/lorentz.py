"""Lorentz (hyperboloid) model of hyperbolic space with curvature ``-c``.

Points are arrays ``(..., n+1)``: time coordinate first, then ``n`` spatial
coordinates, satisfying ``<x, x>_L = -1/c`` and ``x[0] > 0``, where
``<u, v>_L = -u0 v0 + sum_i ui vi``.  The origin is ``(1/sqrt(c), 0, ..., 0)``.

All functions broadcast over leading axes and keep the input floating dtype.
:class:`LorentzManifold` defaults to ``np.longdouble`` storage: far from the
origin (``sqrt(c)*|v|`` around 14) float64 cannot represent a point to better
than ~1e-4 in the hyperboloid constraint.
"""
from dataclasses import dataclass

import numpy as np

_SMALL_R = 1e-8
_SMALL_THETA = 1e-8


class GeometryError(ValueError):
    pass


def _float(a, dtype=None):
    a = np.asarray(a)
    if dtype is None:
        dtype = np.result_type(a.dtype, np.float64)
    return a.astype(dtype, copy=False)


def minkowski_inner(u, v):
    u = _float(u)
    v = _float(v)
    if u.shape[-1] != v.shape[-1]:
        raise ValueError(f"dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}")
    return -u[..., 0] * v[..., 0] + np.sum(u[..., 1:] * v[..., 1:], axis=-1)


def origin(n, c=1.0, dtype=np.float64):
    o = np.zeros(n + 1, dtype=dtype)
    o[0] = 1 / np.sqrt(dtype(c))
    return o


def constraint_residual(x, c=1.0):
    """``c <x, x>_L + 1``; zero on the manifold."""
    x = _float(x)
    return c * minkowski_inner(x, x) + 1


def _check_on_manifold(x, c, tol=1e-4):
    x = _float(x)
    res = np.abs(constraint_residual(x, c))
    # representability floor: coordinates near |x0| carry eps*|x0| rounding
    floor = 8 * np.finfo(x.dtype).eps * c * x[..., 0] ** 2
    if np.any(~np.isfinite(res)) or np.any(res > tol + floor) or np.any(x[..., 0] <= 0):
        raise GeometryError(f"point(s) off the hyperboloid (max residual {float(np.max(res)):.3g})")
    return x


def exp_origin(v, c=1.0):
    """Exponential map at the origin for tangent vectors ``v`` (spatial part)."""
    v = _float(v)
    if not np.all(np.isfinite(v)):
        raise GeometryError("tangent vector has non-finite entries")
    sc = np.sqrt(v.dtype.type(c))
    norm = np.sqrt(np.sum(v * v, axis=-1, keepdims=True))
    r = sc * norm
    small = r < _SMALL_R
    safe_r = np.where(small, 1, r)
    scale = np.where(small, 1, np.sinh(safe_r) / safe_r)
    x0 = np.cosh(r) / sc
    return np.concatenate([x0, scale * v], axis=-1)


def log_origin(x, c=1.0, check=True):
    """Inverse of :func:`exp_origin`."""
    x = _check_on_manifold(x, c) if check else _float(x)
    sc = np.sqrt(x.dtype.type(c))
    spatial = x[..., 1:]
    snorm = np.sqrt(np.sum(spatial * spatial, axis=-1, keepdims=True))
    # asinh keeps precision near the origin where arccosh(sqrt(c) x0) would not
    dist = np.arcsinh(sc * snorm) / sc
    safe = np.where(snorm > 0, snorm, 1)
    return np.where(snorm > 0, spatial * (dist / safe), 0)


def dist(u, v, c=1.0, check=True):
    """Geodesic distance ``arccosh(max(1, -c <u, v>_L)) / sqrt(c)``.

    Close pairs use the equivalent chord form ``2 asinh(sqrt(c q) / 2) / sqrt(c)``
    with ``q = <u - v, u - v>_L``, which avoids cancellation in arccosh near 1.
    """
    if check:
        u = _check_on_manifold(u, c)
        v = _check_on_manifold(v, c)
    u = _float(u)
    v = _float(v)
    dtype = np.result_type(u, v)
    sc = np.sqrt(dtype.type(c))
    a = -c * minkowski_inner(u, v)
    diff = u - v
    q = np.maximum(minkowski_inner(diff, diff), 0)
    near = np.arcsinh(sc * np.sqrt(q) / 2) * 2 / sc
    far = np.arccosh(np.maximum(a, 1)) / sc
    return np.where(a < 2, near, far)


def _reproject(spatial, c):
    x0 = np.sqrt(1 / spatial.dtype.type(c) + np.sum(spatial * spatial, axis=-1, keepdims=True))
    return np.concatenate([x0, spatial], axis=-1)


def geodesic(u, v, t, c=1.0, check=True):
    """Point at fraction ``t`` of the way from ``u`` to ``v`` along the geodesic."""
    if not 0 <= t <= 1:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if check:
        u = _check_on_manifold(u, c)
        v = _check_on_manifold(v, c)
    u = _float(u)
    v = _float(v)
    dtype = np.result_type(u, v)
    u = u.astype(dtype, copy=False)
    v = v.astype(dtype, copy=False)
    theta = (np.sqrt(dtype.type(c)) * dist(u, v, c, check=False))[..., None]
    degenerate = theta < _SMALL_THETA
    th = np.where(degenerate, 1, theta)
    a = np.sinh((1 - t) * th) / np.sinh(th)
    b = np.sinh(t * th) / np.sinh(th)
    a = np.where(degenerate, 1 - t, a)
    b = np.where(degenerate, t, b)
    return _reproject(a * u[..., 1:] + b * v[..., 1:], c)


def lift(z, alpha=1.0, w=None, c=1.0, dtype=None):
    """``exp_origin(alpha * (w @ z))``; ``w`` defaults to the identity."""
    z = _float(z, dtype)
    if w is not None:
        w = _float(w, z.dtype)
        if w.shape[-1] != z.shape[-1]:
            raise ValueError(f"projection expects dim {w.shape[-1]}, got {z.shape[-1]}")
        z = z @ w.T
    return exp_origin(alpha * z, c)


@dataclass(frozen=True)
class LorentzManifold:
    """Curvature ``-curvature_c`` hyperboloid; ``dtype`` sets point precision."""

    curvature_c: float = 1.0
    dtype: type = np.longdouble

    def __post_init__(self):
        if not self.curvature_c > 0:
            raise ValueError(f"curvature must be > 0, got {self.curvature_c}")

    @property
    def c(self):
        return self.curvature_c

    def origin(self, n):
        return origin(n, self.c, self.dtype)

    def inner(self, u, v):
        return minkowski_inner(u, v)

    def residual(self, x):
        return constraint_residual(x, self.c)

    def exp_origin(self, v):
        return exp_origin(_float(v, self.dtype), self.c)

    def log_origin(self, x):
        return log_origin(_float(x, self.dtype), self.c)

    def dist(self, u, v):
        return dist(_float(u, self.dtype), _float(v, self.dtype), self.c)

    def geodesic(self, u, v, t):
        return geodesic(_float(u, self.dtype), _float(v, self.dtype), t, self.c)

    def lift(self, z, alpha=1.0, w=None):
        return lift(z, alpha, w, self.c, self.dtype)
