"""Agent-level sampling of the purchase process.

Random numbers come from numpy's Philox4x64 generator keyed by the seed.
Buyer ``i`` consumes exactly the four uniforms produced at counter value
``i``, so any split of the buyers into chunks, in any order, sees the same
numbers. Reductions are integer counts, so results are bit-identical.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import (
    CostModel,
    Population,
    ProductLine,
    acceptance_prob,
    acceptance_prob_priced,
    expected_profit_multi,
    selection_probs,
    unit_margins,
)
from .spam import SpamScenario, spam_accept_prob, spam_profit

CHUNK = 1 << 18
UNIFORMS_PER_BUYER = 4


@dataclass(frozen=True)
class SimulationReport:
    sampled_profit_per_buyer: float
    standard_error: float
    sales: tuple[int, ...]  # per variant
    accepted_by_group: tuple[int, ...]
    buyers_by_group: tuple[int, ...]
    seed: int
    n_buyers: int
    sales_by_group: tuple[tuple[int, ...], ...] = ()

    def within(self, expected: float, n_se: float = 4.0) -> bool:
        return abs(self.sampled_profit_per_buyer - expected) <= n_se * self.standard_error


def buyer_uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """Uniforms of buyers start..start+count-1, shape (count, 4)."""
    bitgen = np.random.Philox(key=seed)
    bitgen.advance(start)
    return np.random.Generator(bitgen).random((count, UNIFORMS_PER_BUYER))


def _chunks(n: int) -> list[tuple[int, int]]:
    return [(s, min(CHUNK, n - s)) for s in range(0, n, CHUNK)]


def _map_chunks(fn, n: int, threads: int):
    parts = _chunks(n)
    if threads <= 1 or len(parts) == 1:
        return [fn(s, c) for s, c in parts]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda sc: fn(*sc), parts))


def _profit_stats(counts: np.ndarray, margins: np.ndarray, n: int) -> tuple[float, float]:
    """Mean and standard error of per-buyer revenue from per-variant counts."""
    total = math.fsum(float(c) * float(m) for c, m in zip(counts, margins))
    total_sq = math.fsum(float(c) * float(m) ** 2 for c, m in zip(counts, margins))
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return mean, math.sqrt(var / n)


def simulate_market(line: ProductLine, pop: Population, cost: CostModel, n_buyers: int, seed: int,
                    threads: int = 1) -> SimulationReport:
    """Draw a group, pick a variant by the selection rule, then accept or not."""
    if n_buyers < 1:
        raise ValueError("n_buyers must be >= 1")
    expected_profit_multi(line, pop, cost)  # domain checks
    qualities = np.array(line.qualities)
    choice_cdf = []
    accept_p = []
    for g in pop.groups:
        choice_cdf.append(np.cumsum(selection_probs(qualities, line.weights, g.sigma)))
        if line.price == 1.0:
            accept_p.append(acceptance_prob(qualities, g.alpha, line.beta))
        else:
            accept_p.append(acceptance_prob_priced(qualities, line.price, g.alpha))
    choice_cdf = np.array(choice_cdf)
    choice_cdf[:, -1] = 1.0
    accept_p = np.array(accept_p)
    group_cdf = np.cumsum(pop.proportions)
    group_cdf[-1] = 1.0
    n_groups, m = len(pop.groups), line.m

    def run(start: int, count: int) -> np.ndarray:
        u = buyer_uniforms(seed, start, count)
        group = np.searchsorted(group_cdf, u[:, 0], side="right")
        variant = np.empty(count, dtype=np.int64)
        for gi in range(n_groups):
            sel = group == gi
            variant[sel] = np.searchsorted(choice_cdf[gi], u[sel, 1], side="right")
        variant = np.minimum(variant, m - 1)
        bought = u[:, 2] < accept_p[group, variant]
        counts = np.zeros((n_groups, m + 1), dtype=np.int64)
        np.add.at(counts, (group, np.where(bought, variant, m)), 1)
        return counts

    counts = sum(_map_chunks(run, n_buyers, threads))
    by_group_variant = counts[:, :m]
    sales = by_group_variant.sum(axis=0)
    margins = unit_margins(line, cost.mode)
    mean, se = _profit_stats(sales, margins, n_buyers)
    return SimulationReport(
        sampled_profit_per_buyer=mean - cost.fixed_cost(m),
        standard_error=se,
        sales=tuple(int(s) for s in sales),
        accepted_by_group=tuple(int(s) for s in by_group_variant.sum(axis=1)),
        buyers_by_group=tuple(int(s) for s in counts.sum(axis=1)),
        seed=seed,
        n_buyers=n_buyers,
        sales_by_group=tuple(tuple(int(s) for s in row) for row in by_group_variant),
    )


def simulate_spam(scenario: SpamScenario, Q: float, M: int, n_buyers: int, seed: int,
                  threads: int = 1) -> SimulationReport:
    """Each buyer inspects the offers in turn and stops at the first acceptance.

    The index of the first acceptance is geometric and is drawn by inversion
    from one uniform per buyer.
    """
    if n_buyers < 1:
        raise ValueError("n_buyers must be >= 1")
    m_eff = int(scenario.effective_m(M))
    spam_profit(Q, M, scenario)  # domain checks
    p = float(acceptance_prob(Q, scenario.alpha))

    def run(start: int, count: int) -> np.ndarray:
        u = buyer_uniforms(seed, start, count)[:, 0]
        if p <= 0:
            return np.zeros(1, dtype=np.int64)
        if p >= 1:
            first = np.ones(count)
        else:
            first = np.ceil(np.log1p(-u) / math.log1p(-p))
            first = np.maximum(first, 1)
        return np.array([np.count_nonzero(first <= m_eff)], dtype=np.int64)

    accepted = int(sum(_map_chunks(run, n_buyers, threads))[0])
    mean, se = _profit_stats(np.array([accepted]), np.array([1.0 - Q]), n_buyers)
    return SimulationReport(
        sampled_profit_per_buyer=mean - m_eff * scenario.z,
        standard_error=se,
        sales=(accepted,),
        accepted_by_group=(accepted,),
        buyers_by_group=(n_buyers,),
        seed=seed,
        n_buyers=n_buyers,
    )


def spam_expected(scenario: SpamScenario, Q: float, M: int) -> tuple[float, float]:
    """Analytic (profit, acceptance rate) for comparison with ``simulate_spam``."""
    m_eff = scenario.effective_m(M)
    return spam_profit(Q, M, scenario), spam_accept_prob(Q, scenario.alpha, m_eff)
