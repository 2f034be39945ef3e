"""Economics of spamming: many identical low-quality offers shown one by one.

Buyers are identical and examine the offers sequentially, so the selection
step plays no role; a buyer is won if any one of the M offers is accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DomainError, acceptance_prob


class NoProfitableSpam(RuntimeError):
    """No (quality, count) pair yields a positive profit."""

    def __init__(self, best_profit: float, q: float, m: int):
        super().__init__(f"best spam profit per buyer is {best_profit:.6g} <= 0 (Q={q:.6g}, M={m})")
        self.best_profit = best_profit
        self.q = q
        self.m = m


@dataclass(frozen=True)
class SpamScenario:
    alpha: float
    z: float
    perception_cap: int | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be > 0, got {self.alpha}")
        if not self.z >= 0:
            raise DomainError(f"z must be >= 0, got {self.z}")
        if self.perception_cap is not None and self.perception_cap < 1:
            raise DomainError("perception_cap must be >= 1")

    @property
    def b(self) -> float:
        return self.z * (1.0 + 1.0 / self.alpha)

    def effective_m(self, m):
        if self.perception_cap is None:
            return m
        return np.minimum(m, self.perception_cap)


@dataclass(frozen=True)
class SpamOptimum:
    q_star: float
    m_star: int
    m_star_real: float  # closed-form count at q_star, diagnostic only
    x_star: float
    b: float
    q_root: float | None  # small-z transcendental root, diagnostic only


def spam_accept_prob(Q, alpha: float, M):
    """Probability that at least one of M identical offers is accepted."""
    if np.any(np.asarray(M) < 1):
        raise DomainError("M must be >= 1")
    p = np.asarray(acceptance_prob(Q, alpha), dtype=float)
    # -expm1(M log1p(-p)) == 1 - (1-p)**M without cancellation for small p
    out = -np.expm1(np.asarray(M, dtype=float) * np.log1p(-p))
    return float(out) if np.ndim(out) == 0 else out


def spam_profit(Q, M, scenario: SpamScenario):
    m = scenario.effective_m(M)
    out = (1.0 - np.asarray(Q, dtype=float)) * spam_accept_prob(Q, scenario.alpha, m) - np.asarray(m) * scenario.z
    return float(out) if np.ndim(out) == 0 else out


def spam_profit_exponential(Q, M, scenario: SpamScenario):
    """Profit with (1 - P_A)**M replaced by exp(-M P_A)."""
    m = scenario.effective_m(M)
    p = acceptance_prob(Q, scenario.alpha)
    return (1.0 - Q) * -np.expm1(-m * p) - m * scenario.z


def spam_optimal_m(Q: float, scenario: SpamScenario) -> float:
    """Real-valued optimal count from the exponential approximation.

    Returns 1 when the log argument is <= 1, i.e. when at most one offer pays.
    """
    a, z = scenario.alpha, scenario.z
    if z <= 0:
        raise DomainError("the optimal count diverges at z = 0")
    p = acceptance_prob(Q, a)
    if p <= 0:
        return 1.0
    arg = a * (1.0 - Q) * Q**a / (z * (a + 1.0))
    if arg <= 1.0:
        return 1.0
    return (a + 1.0) / (a * Q**a) * math.log(arg)


def spam_optimal_m_rounded(Q: float, scenario: SpamScenario) -> int:
    """Better of floor/ceil of ``spam_optimal_m`` under the exact profit."""
    m = spam_optimal_m(Q, scenario)
    lo, hi = max(1, math.floor(m)), max(1, math.ceil(m))
    if scenario.perception_cap is not None:
        lo, hi = min(lo, scenario.perception_cap), min(hi, scenario.perception_cap)
    return lo if spam_profit(Q, lo, scenario) >= spam_profit(Q, hi, scenario) else hi


def bisect(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200) -> float:
    flo = f(lo)
    if flo == 0:
        return lo
    if flo * f(hi) > 0:
        raise ValueError("root is not bracketed")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0 or hi - lo < tol:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def transcendental_quality(scenario: SpamScenario, tol: float = 1e-10) -> float | None:
    """Small-z leading-order optimal quality.

    Root of alpha * b * ln(alpha Q^alpha / b) = Q^(alpha+1), b = z (1 + 1/alpha),
    on the branch where the left side falls below the right one. Returns
    None when there is no such crossing in (Q_min, 1).
    """
    a, b = scenario.alpha, scenario.b
    if b <= 0:
        return None
    q_min = (b / a) ** (1.0 / a)
    if q_min >= 1.0:
        return None

    def f(q):
        return a * b * (math.log(a / b) + a * math.log(q)) - q ** (a + 1.0)

    # f < 0 at q_min and usually at 1: locate the + to - crossing on a log grid
    grid = np.geomspace(max(q_min, 1e-300), 1.0, 4001)[1:]
    vals = np.array([f(q) for q in grid])
    crossings = np.nonzero((vals[:-1] > 0) & (vals[1:] <= 0))[0]
    if len(crossings) == 0:
        return None
    i = crossings[-1]
    return bisect(f, float(grid[i]), float(grid[i + 1]), tol=tol)


def _scan(scenario: SpamScenario, qs: np.ndarray, m_max: int, chunk: int = 16) -> tuple[float, float, int]:
    """Exhaustive max of the exact profit over qs x {1..m_max}."""
    ms = np.arange(1, m_max + 1, dtype=float)
    best = (-np.inf, 0.0, 1)
    for start in range(0, len(qs), chunk):
        q = qs[start:start + chunk, None]
        p = acceptance_prob(q, scenario.alpha)
        x = (1.0 - q) * -np.expm1(ms * np.log1p(-p)) - ms * scenario.z
        flat = int(np.argmax(x))
        i, j = np.unravel_index(flat, x.shape)
        if x[i, j] > best[0]:
            best = (float(x[i, j]), float(q[i, 0]), int(ms[j]))
    return best


def spam_oracle(scenario: SpamScenario, q_points: int = 1001) -> tuple[float, float, int]:
    """Brute-force (profit, Q, M) over a Q grid and every integer M up to 10/z.

    A second pass rescans one coarse cell on each side of the best Q.
    """
    if scenario.z > 0:
        m_max = math.ceil(10.0 / scenario.z)
    elif scenario.perception_cap is not None:
        m_max = scenario.perception_cap
    else:
        raise DomainError("z = 0 without a perception cap has no finite optimum")
    if scenario.perception_cap is not None:
        m_max = min(m_max, scenario.perception_cap)
    coarse = np.linspace(0.0, 1.0, q_points)
    x, q, m = _scan(scenario, coarse, m_max)
    h = coarse[1] - coarse[0]
    fine = np.linspace(max(q - h, 0.0), min(q + h, 1.0), q_points)
    x2, q2, m2 = _scan(scenario, fine, m_max)
    if x2 > x:
        x, q, m = x2, q2, m2
    return x, q, m


def spam_optimal_quality(scenario: SpamScenario, q_points: int = 1001) -> SpamOptimum:
    """Optimal spam campaign; the brute-force optimum is authoritative."""
    if not scenario.z > 0:
        raise DomainError("spam optimum needs z > 0")
    x, q, m = spam_oracle(scenario, q_points)
    if x <= 0:
        raise NoProfitableSpam(x, q, m)
    return SpamOptimum(
        q_star=q,
        m_star=m,
        m_star_real=spam_optimal_m(q, scenario) if q > 0 else 1.0,
        x_star=x,
        b=scenario.b,
        q_root=transcendental_quality(scenario),
    )
