"""Independent reference computations used by the tests."""
import math

import mpmath
import numpy as np


def t_two_sided_p(t, df):
    """Two-sided Student-t tail by quadrature of the density (40 digits)."""
    with mpmath.workdps(40):
        nu = mpmath.mpf(df)
        norm = mpmath.gamma((nu + 1) / 2) / (mpmath.sqrt(nu * mpmath.pi) * mpmath.gamma(nu / 2))
        pdf = lambda x: norm * (1 + x * x / nu) ** (-(nu + 1) / 2)
        return float(2 * mpmath.quad(pdf, [abs(t), mpmath.inf]))


def lift_row(z, alpha, w, c):
    """exp map at the origin for one row, written out with math.* calls."""
    v = [alpha * x for x in (z if w is None else np.asarray(w) @ np.asarray(z))]
    norm = math.sqrt(sum(x * x for x in v))
    r = math.sqrt(c) * norm
    if r == 0.0:
        return [1.0 / math.sqrt(c)] + [0.0] * len(v)
    return [math.cosh(r) / math.sqrt(c)] + [math.sinh(r) * x / r for x in v]


def lorentz_dist(u, v, c):
    inner = -u[0] * v[0] + sum(a * b for a, b in zip(u[1:], v[1:]))
    return math.acosh(max(1.0, -c * inner)) / math.sqrt(c)


def naive_infonce(z_s, z_b, w, alpha_v, alpha_b, lam, c):
    """Symmetric InfoNCE straight from the formula, no log-sum-exp shift."""
    hv = [lift_row(z, alpha_v, w, c) for z in z_s]
    hb = [lift_row(z, alpha_b, None, c) for z in z_b]
    n = len(hv)
    sim = [[-lorentz_dist(hv[i], hb[j], c) ** 2 for j in range(n)] for i in range(n)]
    total = 0.0
    for i in range(n):
        row = sum(math.exp(lam * sim[i][j]) for j in range(n))
        col = sum(math.exp(lam * sim[j][i]) for j in range(n))
        total += -math.log(math.exp(lam * sim[i][i]) / row) - math.log(math.exp(lam * sim[i][i]) / col)
    return total / (2 * n)


def scan_rank(query, gallery, sim_fn):
    """Full-scan ranking: score every item, sort by (-score, index)."""
    scores = [sim_fn(query, g) for g in gallery]
    return sorted(range(len(gallery)), key=lambda j: (-scores[j], j))


def cosine(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
