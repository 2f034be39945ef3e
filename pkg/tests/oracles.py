"""Independent reference computations for the test-suite.

Nothing here imports the optimiser; profits are written out directly from the
model's definitions with plain loops or a dense grid.
"""

import itertools
import math

import numpy as np


def profit_loops(qualities, groups, z, weights=None, price=1.0, gamma=1.0, damaged=False, beta=1.0):
    """groups: iterable of (alpha, sigma, proportion)."""
    m = len(qualities)
    weights = [1.0 / m] * m if weights is None else list(weights)

    def pw(x, e):
        return 1.0 if e == 0 else x**e

    top = max(qualities)
    total = 0.0
    for alpha, sigma, c in groups:
        denom = sum(weights[j] * pw(qualities[j], sigma) for j in range(m))
        for j, q in enumerate(qualities):
            ps = weights[j] * pw(q, sigma) / denom if denom > 0 else weights[j]
            if price == 1.0:
                pa = (1 - (alpha + 1) ** (-beta)) * pw(q, alpha)
            else:
                pa = (1 - price / (alpha + 1)) * pw(q / price, alpha)
            margin = price - pw(top if damaged else q, gamma)
            total += c * ps * pa * margin
    fixed = z if damaged else m * z
    return total - fixed


def _grid_profit(Q, groups, z):
    """Profit for an (n, M) array of quality vectors with uniform weights."""
    m = Q.shape[1]
    out = np.zeros(len(Q))
    for alpha, sigma, c in groups:
        w = Q**sigma if sigma > 0 else np.ones_like(Q)
        d = w.sum(axis=1, keepdims=True)
        ps = np.where(d > 0, w / np.where(d > 0, d, 1), 1.0 / m)
        pa = (1 - 1 / (alpha + 1)) * (Q**alpha if alpha > 0 else 1.0)
        out += c * (ps * pa * (1 - Q)).sum(axis=1)
    return out - m * z


def dense_grid_optimum(m, groups, z, points=200):
    """Best sorted quality vector on a uniform grid of ``points`` per axis."""
    axis = np.linspace(0.0, 1.0, points)
    best_val, best_q = -np.inf, None
    combos = itertools.combinations_with_replacement(range(points), m)
    chunk = 200_000
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        Q = axis[np.array(block)]
        vals = _grid_profit(Q, groups, z)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_q = float(vals[i]), Q[i].copy()
    return best_q, best_val


def zoomed_grid_optimum(m, groups, z, points=200, zoom_points=41):
    """Dense grid followed by an exhaustive rescan of the +-1 cell box."""
    q0, v0 = dense_grid_optimum(m, groups, z, points)
    h = 1.0 / (points - 1)
    axes = [np.linspace(max(q - h, 0), min(q + h, 1), zoom_points) for q in q0]
    Q = np.array(list(itertools.product(*axes)))
    vals = _grid_profit(Q, groups, z)
    i = int(np.argmax(vals))
    if vals[i] > v0:
        return np.sort(Q[i]), float(vals[i])
    return q0, v0


def central_difference(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2 * h)


def spam_profit_loops(q, m, alpha, z):
    pa = (1 - 1 / (alpha + 1)) * q**alpha
    return (1 - q) * (1 - (1 - pa) ** m) - m * z


def spam_bruteforce_m(q, alpha, z, m_max=None):
    """Best integer count at fixed quality by direct enumeration."""
    m_max = m_max or math.ceil(10 / z)
    best = max(range(1, m_max + 1), key=lambda m: (spam_profit_loops(q, m, alpha, z), -m))
    return best


def purchase_distribution(qualities, sigma, merge_tol=1e-6, min_prob=1e-9):
    """Selection mass per distinct quality level for one group, uniform weights.

    Two displays with the same distribution for every group earn the same
    gross profit, whatever the individual vectors look like.
    """
    q = np.asarray(qualities, dtype=float)
    w = q**sigma if sigma > 0 else np.ones_like(q)
    ps = w / w.sum() if w.sum() > 0 else np.full(len(q), 1 / len(q))
    levels = []
    for qi, pi in sorted(zip(q, ps)):
        if levels and abs(qi - levels[-1][0]) <= merge_tol:
            levels[-1][1] += pi
        else:
            levels.append([qi, pi])
    return [(lv, p) for lv, p in levels if p > min_prob]


def displays_equivalent(a, b, sigmas, q_tol, p_tol=1e-3):
    for sigma in sigmas:
        da, db = purchase_distribution(a, sigma, q_tol), purchase_distribution(b, sigma, q_tol)
        if len(da) != len(db):
            return False
        for (qa, pa), (qb, pb) in zip(da, db):
            if abs(qa - qb) > q_tol or abs(pa - pb) > p_tol:
                return False
    return True
