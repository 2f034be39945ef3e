"""Derivative-free global maximisation of the profit functionals.

One-dimensional problems are bracketed on a uniform grid and every grid-local
maximum is polished by golden-section search, so multimodal objectives report
all their peaks. Quality vectors with up to four variants are found by
multi-start coordinate ascent; longer product lines use a two-level ansatz
(``M - k`` copies of a low quality, ``k`` copies of a high one).
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import (
    DAMAGED_GOODS,
    CostModel,
    DomainError,
    Population,
    check_weights,
    expected_profit_priced,
    uniform_weights,
)

log = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
TIE_TOL = 1e-10
DISTINCT_TOL = 1e-4
PHASE_GAP = 1e-3
MAX_COORDINATE_DIM = 4
LATTICE_PER_AXIS = 4
SWEEP_IMPROVEMENT = 1e-10


class UnsupportedConfiguration(ValueError):
    pass


@dataclass(frozen=True)
class LocalMaximum:
    argument: tuple[float, ...]
    value: float


@dataclass(frozen=True)
class OptimizationResult:
    global_arg: tuple[float, ...]
    global_value: float
    local_maxima: tuple[LocalMaximum, ...]
    distinct_qualities: int

    @property
    def levels(self) -> list[float]:
        """Distinct quality levels of the optimum, ascending."""
        return _levels(self.global_arg)


@dataclass(frozen=True)
class VariantCountTable:
    m_values: tuple[int, ...]
    x_star: tuple[float, ...]
    arguments: tuple[tuple[float, ...], ...]
    distinct: tuple[int, ...]
    chosen_m: int
    ansatz_gap: float | None = None  # unconstrained minus two-level profit at M=4

    def increments(self) -> np.ndarray:
        return np.diff(self.x_star)


@dataclass(frozen=True)
class PhaseSummary:
    label: int
    x1: float
    q1: float
    x2: float
    q2: tuple[float, ...]


def _levels(qualities: Sequence[float], tol: float = DISTINCT_TOL) -> list[float]:
    levels: list[float] = []
    for q in sorted(qualities):
        if not levels or q - levels[-1] > tol:
            levels.append(q)
    return levels


def count_distinct(qualities: Sequence[float], tol: float = DISTINCT_TOL) -> int:
    return len(_levels(qualities, tol))


# -- one dimension -----------------------------------------------------------


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float]:
    """Maximise a unimodal ``f`` on [a, b] until the bracket is shorter than ``tol``."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _better(value: float, arg: float, best_value: float, best_arg: float) -> bool:
    if value > best_value + TIE_TOL:
        return True
    return abs(value - best_value) <= TIE_TOL and arg < best_arg


def maximize_1d(
    objective: Callable[[float], float],
    lo: float,
    hi: float,
    grid_points: int = 1024,
    tol: float = 1e-9,
    batch: Callable[[np.ndarray], np.ndarray] | None = None,
) -> OptimizationResult:
    """Global maximum of ``objective`` on [lo, hi] with every local maximum.

    ``batch``, when given, evaluates the objective on a whole array and is
    used for the initial grid scan.
    """
    if not lo < hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if grid_points < 64:
        raise ValueError("grid_points must be at least 64")
    if not tol > 0:
        raise ValueError("tol must be positive")

    xs = np.linspace(lo, hi, grid_points)
    if batch is not None:
        fs = np.asarray(batch(xs), dtype=float)
    else:
        fs = np.array([objective(float(x)) for x in xs])

    # left edge of a plateau counts, so a constant objective yields lo only
    candidates = []
    if fs[0] >= fs[1]:
        candidates.append(0)
    for i in range(1, grid_points - 1):
        if fs[i] > fs[i - 1] and fs[i] >= fs[i + 1]:
            candidates.append(i)
    if fs[-1] > fs[-2]:
        candidates.append(grid_points - 1)

    found: list[tuple[float, float]] = []
    for i in candidates:
        a, b = xs[max(i - 1, 0)], xs[min(i + 1, grid_points - 1)]
        arg, val = golden_section(objective, float(a), float(b), tol)
        # golden section never lands on lo/hi exactly; the grid point may win
        grid_arg = float(xs[i])
        grid_val = float(objective(grid_arg))
        if _better(grid_val, grid_arg, val, arg):
            arg, val = grid_arg, grid_val
        found.append((float(arg), float(val)))

    found.sort(key=lambda t: (-t[1], t[0]))
    maxima: list[LocalMaximum] = []
    for arg, val in found:
        if any(abs(arg - m.argument[0]) < 10 * tol for m in maxima):
            continue
        maxima.append(LocalMaximum((arg,), val))

    best = maxima[0]
    for m in maxima[1:]:
        if _better(m.value, m.argument[0], best.value, best.argument[0]):
            best = m
    ordered = [best] + [m for m in maxima if m is not best]
    return OptimizationResult(best.argument, best.value, tuple(ordered), 1)


# -- fast profit kernel ------------------------------------------------------


def _pw(x: float, e: float) -> float:
    if e == 0.0:
        return 1.0
    return x**e


class ProfitKernel:
    """Profit per buyer for a fixed population, cost model and display weights.

    ``scalar`` is a pure-Python path for line searches, ``batch`` evaluates
    quality arrays of shape (..., M). Weights may be broadcast against the
    batch, which the two-level ansatz uses for variant multiplicities.
    """

    def __init__(self, pop: Population, cost: CostModel, m: int, weights=None, price: float = 1.0,
                 beta: float = 1.0, gamma: float = 1.0, fixed_cost: float | None = None):
        if price != 1.0:
            if beta != 1.0:
                raise DomainError("the prefactor exponent only applies at unit price")
            if price > pop.max_price():
                raise DomainError(f"price exceeds min(alpha)+1 = {pop.max_price()}")
        self.m = m
        self.price = float(price)
        self.gamma = float(gamma)
        self.damaged = cost.mode == DAMAGED_GOODS
        self.weights = np.asarray(uniform_weights(m) if weights is None else weights, dtype=float)
        self.fixed = cost.fixed_cost(m) if fixed_cost is None else fixed_cost
        self.groups = []
        for g in pop.groups:
            if g.proportion == 0:
                continue
            if self.price == 1.0:
                pref = 1.0 - (g.alpha + 1.0) ** (-beta)
            else:
                pref = 1.0 - self.price / (g.alpha + 1.0)
            self.groups.append((g.alpha, g.sigma, g.proportion, pref))
        self._wlist = [float(r) for r in np.ravel(self.weights)] if self.weights.ndim == 1 else None

    def scalar(self, q: Sequence[float]) -> float:
        price, gamma = self.price, self.gamma
        if self.damaged:
            top = price - _pw(max(q), gamma)
            margins = [top] * len(q)
        else:
            margins = [price - _pw(qm, gamma) for qm in q]
        rel = [qm / price for qm in q] if price != 1.0 else q
        r = self._wlist
        total = 0.0
        for alpha, sigma, c, pref in self.groups:
            w = [r[i] * _pw(q[i], sigma) for i in range(len(q))]
            s = sum(w)
            if s <= 0:
                w, s = r, 1.0
            acc = 0.0
            for i in range(len(q)):
                if w[i]:
                    acc += margins[i] * w[i] * _pw(rel[i], alpha)
            total += c * pref * acc / s
        return total - self.fixed

    def batch(self, Q: np.ndarray) -> np.ndarray:
        Q = np.asarray(Q, dtype=float)
        price = self.price
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.damaged:
                margins = price - np.power(Q.max(axis=-1, keepdims=True), self.gamma)
            else:
                margins = price - np.power(Q, self.gamma)
            rel = Q / price
            total = 0.0
            for alpha, sigma, c, pref in self.groups:
                w = self.weights * (np.power(Q, sigma) if sigma else 1.0)
                s = w.sum(axis=-1, keepdims=True)
                share = np.where(s > 0, w / np.where(s > 0, s, 1.0), self.weights)
                accept = pref * (np.power(rel, alpha) if alpha else 1.0)
                total = total + c * (margins * share * accept).sum(axis=-1)
        return total - self.fixed


# -- coordinate ascent -------------------------------------------------------


def _coordinate_ascent(kernel: ProfitKernel, start: Sequence[float], ordered: bool,
                       max_sweeps: int = 2000) -> tuple[list[float], float]:
    q = [float(v) for v in start]
    value = kernel.scalar(q)
    m = len(q)
    price = kernel.price
    for _ in range(max_sweeps):
        before = value
        for i in range(m):
            lo = q[i - 1] if ordered and i > 0 else 0.0
            hi = q[i + 1] if ordered and i < m - 1 else price
            if hi - lo < 1e-12:
                continue

            def f(x, i=i):
                trial = q[:]
                trial[i] = x
                return kernel.scalar(trial)

            def fb(xs, i=i):
                Q = np.tile(np.asarray(q, dtype=float), (len(xs), 1))
                Q[:, i] = xs
                return kernel.batch(Q)

            res = maximize_1d(f, lo, hi, grid_points=64, tol=1e-10, batch=fb)
            if res.global_value > value:
                q[i] = res.global_arg[0]
                value = res.global_value
        if value - before < SWEEP_IMPROVEMENT:
            break
    return q, value


def _lattice_starts(m: int, price: float, sorted_only: bool) -> list[tuple[float, ...]]:
    levels = [price * (k + 0.5) / LATTICE_PER_AXIS for k in range(LATTICE_PER_AXIS)]
    if sorted_only:
        return list(itertools.combinations_with_replacement(levels, m))
    return list(itertools.product(levels, repeat=m))


def _collect(points: list[tuple[list[float], float]], canonical: bool) -> OptimizationResult:
    maxima: list[LocalMaximum] = []
    points = [((sorted(q) if canonical else list(q)), v) for q, v in points]
    points.sort(key=lambda t: (-t[1], t[0]))
    for q, v in points:
        if any(max(abs(a - b) for a, b in zip(q, mx.argument)) < DISTINCT_TOL for mx in maxima):
            continue
        maxima.append(LocalMaximum(tuple(q), v))
    # equal heights: the lexicographically lowest qualities win
    top = maxima[0].value
    best = min((mx for mx in maxima if mx.value >= top - TIE_TOL), key=lambda mx: mx.argument)
    ordered = [best] + [mx for mx in maxima if mx is not best]
    return OptimizationResult(best.argument, best.value, tuple(ordered), count_distinct(best.argument))


def _two_level(m: int, pop: Population, cost: CostModel, price: float, beta: float, gamma: float,
               grid: int = 65, refine: int = 3) -> OptimizationResult:
    """Best display of ``m - k`` low and ``k`` high copies over all k."""
    ks = np.arange(1, m + 1, dtype=float)  # k = m is the one-level display
    kw = np.stack([(m - ks) / m, ks / m], axis=-1)
    fixed = cost.fixed_cost(m)
    kernel = ProfitKernel(pop, cost, 2, weights=kw[:, None, None, :], price=price, beta=beta,
                          gamma=gamma, fixed_cost=fixed)
    axis = np.linspace(0.0, price, grid)
    ql, qh = np.meshgrid(axis, axis, indexing="ij")
    Q = np.stack([ql, qh], axis=-1)[None]
    values = kernel.batch(Q)  # shape (k, grid, grid)
    mask = ql <= qh
    values = np.where(mask[None], values, -np.inf)
    per_k = values.reshape(len(ks), -1).max(axis=1)
    order = np.lexsort((ks, -per_k))[:refine]

    points = []
    for idx in order:
        k = int(ks[idx])
        flat = int(np.argmax(values[idx]))
        i, j = np.unravel_index(flat, ql.shape)
        sub = ProfitKernel(pop, cost, 2, weights=kw[idx], price=price, beta=beta, gamma=gamma,
                           fixed_cost=fixed)
        (lo_q, hi_q), v = _coordinate_ascent(sub, (axis[i], axis[j]), ordered=False)
        vec = [lo_q] * (m - k) + [hi_q] * k
        points.append((sorted(vec), v))
    return _collect(points, canonical=True)


def maximize_qualities(
    m: int,
    pop: Population,
    cost: CostModel,
    weights: Sequence[float] | None = None,
    price: float = 1.0,
    beta: float = 1.0,
    gamma: float = 1.0,
    ordered: bool | None = None,
) -> OptimizationResult:
    """Optimal qualities of ``m`` displayed variants.

    With uniform weights variant labels are interchangeable and the result is
    sorted ascending. With explicit weights labels matter; pass
    ``ordered=True`` to additionally require ascending qualities (e.g. when
    the last weight is the premium variant's share).
    """
    if m < 1:
        raise ValueError("need at least one variant")
    if weights is not None:
        if len(weights) != m:
            raise ValueError(f"got {len(weights)} weights for {m} variants")
        weights = check_weights(weights, m)
    uniform = weights is None or all(abs(r - 1.0 / m) < 1e-15 for r in weights)
    if ordered is None:
        ordered = False
    canonical = uniform

    if m > MAX_COORDINATE_DIM:
        if not uniform:
            raise UnsupportedConfiguration("weighted displays support at most 4 variants")
        return _two_level(m, pop, cost, price, beta, gamma)

    kernel = ProfitKernel(pop, cost, m, weights=weights, price=price, beta=beta, gamma=gamma)
    starts = _lattice_starts(m, price, sorted_only=canonical or ordered)
    points = [_coordinate_ascent(kernel, s, ordered=ordered) for s in starts]
    return _collect(points, canonical=canonical)


def best_variant_count(m_max: int, pop: Population, cost: CostModel, price: float = 1.0,
                       beta: float = 1.0, gamma: float = 1.0) -> VariantCountTable:
    """Optimal profit for every display size 1..m_max and the best size."""
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    results = [maximize_qualities(m, pop, cost, price=price, beta=beta, gamma=gamma)
               for m in range(1, m_max + 1)]
    x = [r.global_value for r in results]
    best = max(x)
    chosen = next(i for i, v in enumerate(x) if v >= best - 1e-12) + 1

    gap = None
    if m_max >= MAX_COORDINATE_DIM:
        ansatz = _two_level(MAX_COORDINATE_DIM, pop, cost, price, beta, gamma)
        gap = results[MAX_COORDINATE_DIM - 1].global_value - ansatz.global_value
        if gap > 1e-6:
            log.warning("unconstrained M=4 beats the two-level ansatz by %.3g", gap)
    return VariantCountTable(
        m_values=tuple(range(1, m_max + 1)),
        x_star=tuple(x),
        arguments=tuple(r.global_arg for r in results),
        distinct=tuple(r.distinct_qualities for r in results),
        chosen_m=chosen,
        ansatz_gap=gap,
    )


def phase_summary(pop: Population, cost: CostModel, weights: Sequence[float] | None = None,
                  ordered: bool | None = None) -> PhaseSummary:
    one = maximize_qualities(1, pop, cost)
    two = maximize_qualities(2, pop, cost, weights=weights, ordered=ordered)
    return PhaseSummary(
        label=phase_label(one.global_value, two.global_value, two.global_arg),
        x1=one.global_value,
        q1=one.global_arg[0],
        x2=two.global_value,
        q2=two.global_arg,
    )


def phase_label(x1: float, x2: float, q2: Sequence[float]) -> int:
    """0 = produce nothing, 1 = one variant, 2 = two distinct variants."""
    if max(x1, x2) <= 0:
        return 0
    if x1 >= x2:
        return 1
    if max(q2) - min(q2) <= PHASE_GAP:
        return 1
    return 2


def differentiation_decision(pop: Population, cost: CostModel, weights: Sequence[float] | None = None,
                             ordered: bool | None = None) -> int:
    return phase_summary(pop, cost, weights, ordered).label


# -- price -------------------------------------------------------------------


def maximize_price_quality(pop: Population, cost: CostModel, gamma: float = 1.0,
                           grid_points: int = 256, tol: float = 1e-10) -> OptimizationResult:
    """Joint maximisation over 0 <= Q <= p <= alpha + 1 for identical buyers."""
    if not pop.is_homogeneous:
        raise UnsupportedConfiguration("price optimisation is only defined for a homogeneous population")
    p_hi = pop.max_price()
    p_lo = min(1e-9, p_hi / 2)

    def inner(p: float) -> OptimizationResult:
        return maximize_1d(
            lambda q: expected_profit_priced(q, p, pop, cost, gamma),
            0.0, p, grid_points=64, tol=tol,
            batch=lambda qs: expected_profit_priced(qs, p, pop, cost, gamma),
        )

    cache: dict[float, OptimizationResult] = {}

    def outer(p: float) -> float:
        if p not in cache:
            cache[p] = inner(p)
        return cache[p].global_value

    res = maximize_1d(outer, p_lo, p_hi, grid_points=grid_points, tol=tol)
    maxima = []
    for lm in res.local_maxima:
        p = lm.argument[0]
        q = inner(p).global_arg[0]
        maxima.append(LocalMaximum((q, p), lm.value))
    best = maxima[0]
    return OptimizationResult(best.argument, best.value, tuple(maxima), 1)
