"""Symmetric hyperbolic InfoNCE between visual and brain embeddings.

Visual rows are projected by ``w_v``, scaled by ``alpha_v`` and lifted to the
hyperboloid with the exponential map at the origin; brain rows are scaled by
``alpha_b`` and lifted the same way.  Logits are ``-lambda * d^2``.  The
positive scalars are optimised through their logarithms.

Gradients are analytic (hand-written reverse pass); :func:`loss_grad` is
checked against central differences in the test-suite.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import lorentz

PARAM_KEYS = ("w_v", "log_alpha_v", "log_alpha_b", "log_lambda")


class AlignConfigError(ValueError):
    pass


@dataclass
class AlignParams:
    w_v: np.ndarray
    alpha_v: float = 1.0
    alpha_b: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        self.w_v = np.asarray(self.w_v, dtype=np.float64)
        if min(self.alpha_v, self.alpha_b, self.lam) <= 0:
            raise ValueError("alpha_v, alpha_b and lambda must be positive")

    @classmethod
    def initial(cls, n, d):
        """Identity-padded ``n x d`` projection scaled by ``1/sqrt(d)``; unit scalars."""
        return cls(np.eye(n, d) / math.sqrt(d), 1.0, 1.0, 1.0)

    def as_vector(self):
        return {
            "w_v": self.w_v.copy(),
            "log_alpha_v": math.log(self.alpha_v),
            "log_alpha_b": math.log(self.alpha_b),
            "log_lambda": math.log(self.lam),
        }

    @classmethod
    def from_vector(cls, theta):
        return cls(
            np.array(theta["w_v"], dtype=np.float64),
            math.exp(theta["log_alpha_v"]),
            math.exp(theta["log_alpha_b"]),
            math.exp(theta["log_lambda"]),
        )


@dataclass
class AlignBatch:
    z_semantic: np.ndarray
    z_brain: np.ndarray
    z_perceptual: np.ndarray | None = None
    t: float = 0.0

    def __post_init__(self):
        self.z_semantic = np.atleast_2d(np.asarray(self.z_semantic, dtype=np.float64))
        self.z_brain = np.atleast_2d(np.asarray(self.z_brain, dtype=np.float64))
        if self.z_perceptual is not None:
            self.z_perceptual = np.atleast_2d(np.asarray(self.z_perceptual, dtype=np.float64))
        rows = {self.z_semantic.shape[0], self.z_brain.shape[0]}
        if self.z_perceptual is not None:
            rows.add(self.z_perceptual.shape[0])
            if self.z_perceptual.shape[1] != self.z_semantic.shape[1]:
                raise ValueError("perceptual and semantic embeddings differ in width")
        if len(rows) != 1 or 0 in rows:
            raise ValueError(f"batch matrices must share a positive row count, got {sorted(rows)}")
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {self.t}")
        if self.t > 0 and self.z_perceptual is None:
            raise AlignConfigError("t > 0 requires perceptual embeddings")

    def __len__(self):
        return self.z_semantic.shape[0]


@dataclass
class TrainConfig:
    learning_rate: float = 3e-4
    weight_decay: float = 1e-4
    epochs: int = 50
    batch_size: int = 1024
    rng_seed: int = 0
    t: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


def similarity(u, v, c=1.0):
    """``-d(u, v)^2``."""
    return -lorentz.dist(u, v, c) ** 2


def _exp_forward(u, c):
    sc = math.sqrt(c)
    norm = np.linalg.norm(u, axis=1, keepdims=True)
    r = sc * norm
    small = r < 1e-8
    safe = np.where(small, 1.0, r)
    s = np.where(small, 1.0, np.sinh(safe) / safe)
    x = np.concatenate([np.cosh(r) / sc, s * u], axis=1)
    return x, (u, r, s)


def _exp_backward(g, cache, c):
    u, r, s = cache
    g0, gs = g[:, :1], g[:, 1:]
    sc = math.sqrt(c)
    # S'(r)/r and sinh(r)/r with series for small r
    small = r < 1e-3
    safe = np.where(small, 1.0, r)
    ds_over_r = np.where(small, 1.0 / 3.0 + r * r / 30.0, (safe * np.cosh(safe) - np.sinh(safe)) / safe**3)
    sinh_over_r = np.where(small, 1.0 + r * r / 6.0, np.sinh(safe) / safe)
    radial = c * (ds_over_r * np.sum(gs * u, axis=1, keepdims=True) + g0 * sinh_over_r / sc)
    return s * gs + radial * u


def _acosh_ratio(a):
    """``arccosh(a) / sqrt(a^2 - 1)``, continuous at ``a = 1``."""
    e = np.maximum(a - 1.0, 0.0)
    small = e < 1e-6
    safe = np.where(small, 2.0, a)
    direct = np.arccosh(safe) / np.sqrt(safe * safe - 1.0)
    return np.where(small, 1.0 - e / 3.0 + 2.0 * e * e / 15.0, direct)


def _geodesic_forward(u, v, t, c):
    theta = math.sqrt(c) * lorentz.dist(u, v, c, check=False)[:, None]
    degen = theta < 1e-8
    th = np.where(degen, 1.0, theta)
    sh = np.sinh(th)
    a = np.where(degen, 1.0 - t, np.sinh((1.0 - t) * th) / sh)
    b = np.where(degen, t, np.sinh(t * th) / sh)
    ys = a * u[:, 1:] + b * v[:, 1:]
    y0 = np.sqrt(1.0 / c + np.sum(ys * ys, axis=1, keepdims=True))
    return np.concatenate([y0, ys], axis=1), (u, v, t, th, degen, a, b, ys, y0)


def _geodesic_backward(g, cache, c):
    u, v, t, th, degen, a, b, ys, y0 = cache
    gys = g[:, 1:] + g[:, :1] * ys / y0
    gu = np.zeros_like(u)
    gv = np.zeros_like(v)
    gu[:, 1:] = a * gys
    gv[:, 1:] = b * gys
    sh, ch = np.sinh(th), np.cosh(th)
    da = ((1.0 - t) * np.cosh((1.0 - t) * th) * sh - np.sinh((1.0 - t) * th) * ch) / sh**2
    db = (t * np.cosh(t * th) * sh - np.sinh(t * th) * ch) / sh**2
    gtheta = np.sum(gys * u[:, 1:], axis=1, keepdims=True) * da + np.sum(gys * v[:, 1:], axis=1, keepdims=True) * db
    # theta = arccosh(A), A = c (u0 v0 - us.vs), dtheta/dA = 1/sinh(theta)
    ga = np.where(degen, 0.0, gtheta / sh)
    gu[:, :1] += ga * c * v[:, :1]
    gu[:, 1:] -= ga * c * v[:, 1:]
    gv[:, :1] += ga * c * u[:, :1]
    gv[:, 1:] -= ga * c * u[:, 1:]
    return gu, gv


def _check_finite(arr, what):
    bad = np.flatnonzero(~np.all(np.isfinite(arr.reshape(arr.shape[0], -1)), axis=1))
    if bad.size:
        raise FloatingPointError(f"non-finite {what} at row {int(bad[0])}")


def _log_softmax_rows(x):
    shifted = x - x.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _loss_from_logits(logits):
    lv = _log_softmax_rows(logits)
    lb = _log_softmax_rows(logits.T)
    return -(np.trace(lv) + np.trace(lb)) / (2.0 * logits.shape[0]), lv, lb


def loss_from_logits(logits):
    """Symmetric InfoNCE of a square logit matrix whose diagonal holds the positives."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[0] != logits.shape[1] or logits.shape[0] == 0:
        raise ValueError(f"need a non-empty square logit matrix, got {logits.shape}")
    return float(_loss_from_logits(logits)[0])


# ---------------------------------------------------------------------------
# targets, loss, gradient
# ---------------------------------------------------------------------------


def _forward(batch, params, c):
    """Shared forward pass; returns loss and the cache needed by the reverse pass."""
    w, av, ab, lam = params.w_v, params.alpha_v, params.alpha_b, params.lam
    if batch.z_semantic.shape[1] != w.shape[1]:
        raise ValueError(f"w_v expects width {w.shape[1]}, semantic rows have {batch.z_semantic.shape[1]}")
    if batch.z_brain.shape[1] != w.shape[0]:
        raise ValueError(f"brain width {batch.z_brain.shape[1]} != manifold dim {w.shape[0]}")
    cache = {}
    us = av * batch.z_semantic @ w.T
    hs, cache["exp_s"] = _exp_forward(us, c)
    _check_finite(hs, "semantic lift")
    cache["us"] = us
    if batch.z_perceptual is not None and batch.t > 0:
        up = av * batch.z_perceptual @ w.T
        hp, cache["exp_p"] = _exp_forward(up, c)
        _check_finite(hp, "perceptual lift")
        cache["up"] = up
        if batch.t == 1.0:
            target = hp
            cache["mode"] = "p"
        else:
            target, cache["geo"] = _geodesic_forward(hs, hp, batch.t, c)
            cache["mode"] = "geo"
    else:
        target = hs
        cache["mode"] = "s"
    ub = ab * batch.z_brain
    hb, cache["exp_b"] = _exp_forward(ub, c)
    _check_finite(hb, "brain lift")
    cache["ub"] = ub

    a = c * (np.outer(target[:, 0], hb[:, 0]) - target[:, 1:] @ hb[:, 1:].T)
    acos = np.arccosh(np.maximum(a, 1.0))
    d2 = acos * acos / c
    logits = -lam * d2
    _check_finite(logits, "logit")
    loss, lv, lb = _loss_from_logits(logits)
    cache.update(target=target, hb=hb, a=a, logits=logits, lv=lv, lb=lb)
    return float(loss), cache


def build_targets(batch, params, c=1.0):
    """Visual targets: semantic lift, or its geodesic blend toward the perceptual lift."""
    _, cache = _forward(batch, params, c)
    return cache["target"]


def logit_matrix(batch, params, c=1.0):
    """``-lambda * d^2`` between every target row and every brain row."""
    return _forward(batch, params, c)[1]["logits"]


def infonce_loss(batch, params, c=1.0):
    return _forward(batch, params, c)[0]


def loss_grad(batch, params, c=1.0):
    """Return ``(loss, grads)`` with grads keyed by :data:`PARAM_KEYS`."""
    loss, k = _forward(batch, params, c)
    n = k["logits"].shape[0]
    eye = np.eye(n)
    g_logits = (np.exp(k["lv"]) - eye + (np.exp(k["lb"]) - eye).T) / (2.0 * n)
    g_loglam = float(np.sum(g_logits * k["logits"]))
    g_a = -params.lam * g_logits * 2.0 * _acosh_ratio(k["a"]) / c
    g_a = np.where(k["a"] < 1.0, 0.0, g_a)
    target, hb = k["target"], k["hb"]
    g_target = np.concatenate([c * g_a @ hb[:, :1], -c * g_a @ hb[:, 1:]], axis=1)
    g_hb = np.concatenate([c * g_a.T @ target[:, :1], -c * g_a.T @ target[:, 1:]], axis=1)

    g_ub = _exp_backward(g_hb, k["exp_b"], c)
    g_logab = float(np.sum(g_ub * k["ub"]))

    if k["mode"] == "geo":
        g_hs, g_hp = _geodesic_backward(g_target, k["geo"], c)
    elif k["mode"] == "p":
        g_hs, g_hp = np.zeros_like(g_target), g_target
    else:
        g_hs, g_hp = g_target, None
    g_us = _exp_backward(g_hs, k["exp_s"], c)
    g_w = params.alpha_v * g_us.T @ batch.z_semantic
    g_logav = float(np.sum(g_us * k["us"]))
    if g_hp is not None:
        g_up = _exp_backward(g_hp, k["exp_p"], c)
        g_w = g_w + params.alpha_v * g_up.T @ batch.z_perceptual
        g_logav += float(np.sum(g_up * k["up"]))
    grads = {"w_v": g_w, "log_alpha_v": g_logav, "log_alpha_b": g_logab, "log_lambda": g_loglam}
    return loss, grads


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


@dataclass
class TrainResult:
    params: AlignParams
    history: list = field(default_factory=list)  # [(epoch, mean_loss)], epoch 0 = initialisation


def _batches(n, size, order):
    return [order[i:i + size] for i in range(0, n, size)]


def _mean_loss(params, z_s, z_b, z_p, t, size, order, c):
    total = 0.0
    for idx in _batches(z_s.shape[0], size, order):
        batch = AlignBatch(z_s[idx], z_b[idx], None if z_p is None else z_p[idx], t)
        total += infonce_loss(batch, params, c) * len(idx)
    return total / z_s.shape[0]


def train_align(z_semantic, z_brain, cfg=TrainConfig(), c=1.0, z_perceptual=None, init=None):
    """AdamW over shuffled mini-batches.

    Weight decay is decoupled and touches ``w_v`` only.  ``history`` starts
    with the loss of the initial parameters (epoch 0) followed by the mean
    training loss of every epoch.
    """
    z_s = np.atleast_2d(np.asarray(z_semantic, dtype=np.float64))
    z_b = np.atleast_2d(np.asarray(z_brain, dtype=np.float64))
    z_p = None if z_perceptual is None else np.atleast_2d(np.asarray(z_perceptual, dtype=np.float64))
    n = z_s.shape[0]
    if n == 0:
        raise ValueError("empty dataset")
    if z_b.shape[0] != n or (z_p is not None and z_p.shape[0] != n):
        raise ValueError(f"row-count mismatch: semantic {n}, brain {z_b.shape[0]}")
    if cfg.t > 0 and z_p is None:
        raise AlignConfigError("t > 0 requires perceptual embeddings")
    params = init if init is not None else AlignParams.initial(z_b.shape[1], z_s.shape[1])
    size = min(cfg.batch_size, n)
    rng = np.random.default_rng(cfg.rng_seed)
    theta = params.as_vector()
    m = {k: np.zeros_like(np.asarray(v, dtype=np.float64)) for k, v in theta.items()}
    v = {k: np.zeros_like(np.asarray(val, dtype=np.float64)) for k, val in theta.items()}
    history = [(0, _mean_loss(params, z_s, z_b, z_p, cfg.t, size, np.arange(n), c))]
    step = 0
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for idx in _batches(n, size, order):
            batch = AlignBatch(z_s[idx], z_b[idx], None if z_p is None else z_p[idx], cfg.t)
            loss, grads = loss_grad(batch, AlignParams.from_vector(theta), c)
            total += loss * len(idx)
            step += 1
            for key in PARAM_KEYS:
                g = np.asarray(grads[key], dtype=np.float64)
                p = np.asarray(theta[key], dtype=np.float64)
                if key == "w_v":
                    p = p - cfg.learning_rate * cfg.weight_decay * p
                m[key] = cfg.beta1 * m[key] + (1.0 - cfg.beta1) * g
                v[key] = cfg.beta2 * v[key] + (1.0 - cfg.beta2) * g * g
                m_hat = m[key] / (1.0 - cfg.beta1**step)
                v_hat = v[key] / (1.0 - cfg.beta2**step)
                p = p - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)
                theta[key] = p if key == "w_v" else float(p)
        history.append((epoch, total / n))
    return TrainResult(AlignParams.from_vector(theta), history)


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


def params_to_matrix(params):
    """``w_v`` rows followed by a trailer row ``(alpha_v, alpha_b, lambda, 0, ...)``."""
    n, d = params.w_v.shape
    if d < 3:
        raise ValueError("parameter files need a projection width of at least 3")
    trailer = np.zeros((1, d))
    trailer[0, :3] = (params.alpha_v, params.alpha_b, params.lam)
    return np.vstack([params.w_v, trailer])


def params_from_matrix(mat):
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] < 2 or mat.shape[1] < 3:
        raise ValueError(f"not an AlignParams matrix: shape {mat.shape}")
    av, ab, lam = mat[-1, :3]
    return AlignParams(mat[:-1].copy(), float(av), float(ab), float(lam))


def write_history_csv(path, history):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epoch,mean_loss\n")
        for epoch, loss in history:
            fh.write(f"{epoch},{loss!r}\n")
