"""Acceptance/selection probabilities and expected-profit functionals.

Everything here is a pure function of immutable inputs. Profits are per
buyer (x = X / N). Probability functions accept numpy arrays and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

INDEPENDENT = "independent"
DAMAGED_GOODS = "damaged-goods"
COST_MODES = (INDEPENDENT, DAMAGED_GOODS)

_SUM_TOL = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain where the model is defined."""


def _power(base, exponent):
    """base**exponent with 0**0 := 1, elementwise."""
    base = np.asarray(base, dtype=float)
    exponent = np.asarray(exponent, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.power(base, exponent)
    return np.where((base == 0.0) & (exponent == 0.0), 1.0, out)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class BuyerGroup:
    """Homogeneous sub-population of buyers."""

    alpha: float
    sigma: float = 0.0
    proportion: float = 1.0

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be a finite value >= 0, got {self.alpha}")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise DomainError(f"sigma must be a finite value >= 0, got {self.sigma}")
        if not 0 <= self.proportion <= 1:
            raise DomainError(f"proportion must lie in [0, 1], got {self.proportion}")


@dataclass(frozen=True)
class Population:
    groups: tuple[BuyerGroup, ...]
    n_buyers: int = 1_000_000

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        if not self.groups:
            raise DomainError("a population needs at least one buyer group")
        total = math.fsum(g.proportion for g in self.groups)
        if abs(total - 1.0) > _SUM_TOL:
            raise DomainError(f"group proportions sum to {total!r}, expected 1")
        if int(self.n_buyers) != self.n_buyers or self.n_buyers < 1:
            raise DomainError(f"n_buyers must be a positive integer, got {self.n_buyers}")

    @classmethod
    def homogeneous(cls, alpha: float, sigma: float = 0.0, n_buyers: int = 1_000_000) -> "Population":
        return cls((BuyerGroup(alpha, sigma, 1.0),), n_buyers)

    @classmethod
    def two_group(
        cls,
        alpha1: float,
        alpha2: float,
        c2: float,
        sigma1: float = 0.0,
        sigma2: float = 0.0,
        n_buyers: int = 1_000_000,
    ) -> "Population":
        """Group 1 with share 1 - c2, group 2 with share c2."""
        return cls((BuyerGroup(alpha1, sigma1, 1.0 - c2), BuyerGroup(alpha2, sigma2, c2)), n_buyers)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([g.alpha for g in self.groups])

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([g.sigma for g in self.groups])

    @property
    def proportions(self) -> np.ndarray:
        return np.array([g.proportion for g in self.groups])

    @property
    def is_homogeneous(self) -> bool:
        return len(self.groups) == 1

    def max_price(self) -> float:
        """Largest price admitted by every group's acceptance function."""
        return min(g.alpha for g in self.groups) + 1.0


def uniform_weights(m: int) -> tuple[float, ...]:
    return (1.0 / m,) * m


def check_weights(weights: Sequence[float], m: int) -> tuple[float, ...]:
    weights = tuple(float(r) for r in weights)
    if len(weights) != m:
        raise DomainError(f"expected {m} weights, got {len(weights)}")
    if any(r < 0 for r in weights):
        raise DomainError("weights must be non-negative")
    total = math.fsum(weights)
    if abs(total - 1.0) > _SUM_TOL:
        raise DomainError(f"weights sum to {total!r}, expected 1")
    return weights


@dataclass(frozen=True)
class ProductLine:
    """Displayed variants: qualities, display weights, common unit price.

    ``beta`` is the exponent of the acceptance prefactor 1 - (alpha+1)**-beta
    and ``gamma`` the exponent of the unit production cost Q**gamma.
    """

    qualities: tuple[float, ...]
    weights: tuple[float, ...] | None = None
    price: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        qualities = tuple(float(q) for q in np.atleast_1d(self.qualities))
        object.__setattr__(self, "qualities", qualities)
        if not qualities:
            raise DomainError("a product line needs at least one variant")
        if not self.price > 0:
            raise DomainError(f"price must be positive, got {self.price}")
        if any(not 0 <= q <= self.price for q in qualities):
            raise DomainError(f"qualities must lie in [0, price={self.price}], got {qualities}")
        if self.weights is None:
            object.__setattr__(self, "weights", uniform_weights(len(qualities)))
        else:
            object.__setattr__(self, "weights", check_weights(self.weights, len(qualities)))
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")

    @property
    def m(self) -> int:
        return len(self.qualities)


@dataclass(frozen=True)
class CostModel:
    z: float = 0.0
    mode: str = INDEPENDENT

    def __post_init__(self):
        if not self.z >= 0:
            raise DomainError(f"fixed cost z must be >= 0, got {self.z}")
        if self.mode not in COST_MODES:
            raise DomainError(f"unknown cost mode {self.mode!r}; expected one of {COST_MODES}")

    def fixed_cost(self, m: int) -> float:
        if self.mode == DAMAGED_GOODS:
            if m < 2:
                raise DomainError("damaged-goods mode needs at least two variants")
            return self.z
        return m * self.z


# -- probabilities ---------------------------------------------------------


def acceptance_prob(Q, alpha, beta: float = 1.0):
    """Probability that a buyer accepts a product of quality Q at price 1."""
    Q = np.asarray(Q, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any((Q < 0) | (Q > 1)) or np.any(np.isnan(Q)):
        raise DomainError("quality must lie in [0, 1] at unit price")
    if np.any(alpha < 0):
        raise DomainError("alpha must be >= 0")
    if not beta > 0:
        raise DomainError("beta must be positive")
    prefactor = 1.0 - np.power(alpha + 1.0, -beta)
    return _scalar(prefactor * _power(Q, alpha))


def acceptance_prob_priced(Q, p, alpha):
    """Acceptance probability when the unit price p is a free parameter."""
    Q = np.asarray(Q, dtype=float)
    p = np.asarray(p, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0):
        raise DomainError("alpha must be >= 0")
    if np.any(p <= 0) or np.any(p > alpha + 1.0):
        raise DomainError("price must satisfy 0 < p <= alpha + 1")
    if np.any(Q < 0) or np.any(Q > p):
        raise DomainError("quality must satisfy 0 <= Q <= p")
    return _scalar((1.0 - p / (alpha + 1.0)) * _power(Q / p, alpha))


def selection_weights(qualities, weights, sigma) -> np.ndarray:
    """Unnormalised r_m * Q_m**sigma along the last axis."""
    return np.asarray(weights, dtype=float) * _power(qualities, sigma)


def selection_probs(qualities, weights, sigma) -> np.ndarray:
    """Selection probabilities of all variants along the last axis.

    If every variant with positive weight has zero quality the weights are
    returned (the continuous limit of uniformly vanishing qualities).
    """
    if sigma < 0:
        raise DomainError("sigma must be >= 0")
    qualities = np.asarray(qualities, dtype=float)
    weights = np.broadcast_to(np.asarray(weights, dtype=float), qualities.shape)
    w = selection_weights(qualities, weights, sigma)
    total = w.sum(axis=-1, keepdims=True)
    safe = np.where(total > 0, total, 1.0)
    return np.where(total > 0, w / safe, weights)


def selection_prob(m: int, qualities, weights=None, sigma: float = 0.0) -> float:
    """Probability of picking variant ``m`` (1-based) among the displayed ones."""
    qualities = tuple(float(q) for q in qualities)
    if weights is None:
        weights = uniform_weights(len(qualities))
    weights = check_weights(weights, len(qualities))
    if not 1 <= m <= len(qualities):
        raise DomainError(f"variant index {m} out of range 1..{len(qualities)}")
    return float(selection_probs(qualities, weights, sigma)[m - 1])


# -- expected profits ------------------------------------------------------


def expected_profit_single(Q, pop: Population, cost: CostModel, beta: float = 1.0, gamma: float = 1.0):
    """Expected profit per buyer of a single product of quality Q at price 1."""
    Q = np.asarray(Q, dtype=float)
    demand = sum(g.proportion * acceptance_prob(Q, g.alpha, beta) for g in pop.groups)
    return _scalar((1.0 - _power(Q, gamma)) * demand - cost.z)


def expected_profit_priced(Q, p, pop: Population, cost: CostModel, gamma: float = 1.0):
    """Expected profit per buyer of one product at quality Q and price p."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr > pop.max_price()):
        raise DomainError(f"price exceeds min(alpha)+1 = {pop.max_price()}")
    demand = sum(g.proportion * acceptance_prob_priced(Q, p, g.alpha) for g in pop.groups)
    return _scalar((p_arr - _power(Q, gamma)) * demand - cost.z)


def _gross_profit_multi(qualities, weights, price, beta, gamma, mode, pop: Population):
    """Sum over variants and groups without the fixed cost; vectorised over leading axes."""
    Q = np.asarray(qualities, dtype=float)
    if mode == DAMAGED_GOODS:
        margin = price - _power(Q.max(axis=-1, keepdims=True), gamma)
    else:
        margin = price - _power(Q, gamma)
    total = 0.0
    for g in pop.groups:
        if g.proportion == 0:
            continue
        if price == 1.0:
            accept = acceptance_prob(Q, g.alpha, beta)
        else:
            accept = acceptance_prob_priced(Q, price, g.alpha)
        chosen = selection_probs(Q, weights, g.sigma)
        total = total + g.proportion * (margin * chosen * accept).sum(axis=-1)
    return total


def expected_profit_multi(line: ProductLine, pop: Population, cost: CostModel) -> float:
    """Expected profit per buyer when all variants of ``line`` are displayed."""
    if line.price != 1.0:
        if line.beta != 1.0:
            raise DomainError("the prefactor exponent only applies at unit price")
        if line.price > pop.max_price():
            raise DomainError(f"price exceeds min(alpha)+1 = {pop.max_price()}")
    fixed = cost.fixed_cost(line.m)
    gross = _gross_profit_multi(line.qualities, line.weights, line.price, line.beta, line.gamma, cost.mode, pop)
    return float(gross) - fixed


def expected_profit_batch(qualities, pop: Population, cost: CostModel, weights=None,
                          price: float = 1.0, beta: float = 1.0, gamma: float = 1.0) -> np.ndarray:
    """Profit per buyer for a batch of quality vectors of shape (..., M).

    No per-vector validation beyond the probability domain checks; intended
    for grid scans.
    """
    Q = np.asarray(qualities, dtype=float)
    m = Q.shape[-1]
    weights = uniform_weights(m) if weights is None else check_weights(weights, m)
    gross = _gross_profit_multi(Q, weights, price, beta, gamma, cost.mode, pop)
    return gross - cost.fixed_cost(m)


@dataclass(frozen=True)
class SaleProbabilities:
    """P_S * P_A per (group, variant), used by the Monte Carlo checks."""

    by_group: np.ndarray = field(repr=False)  # shape (groups, M)

    def variant_totals(self, pop: Population) -> np.ndarray:
        return pop.proportions @ self.by_group


def sale_probabilities(line: ProductLine, pop: Population) -> SaleProbabilities:
    rows = []
    for g in pop.groups:
        chosen = selection_probs(line.qualities, line.weights, g.sigma)
        if line.price == 1.0:
            accept = acceptance_prob(np.array(line.qualities), g.alpha, line.beta)
        else:
            accept = acceptance_prob_priced(np.array(line.qualities), line.price, g.alpha)
        rows.append(chosen * accept)
    return SaleProbabilities(np.array(rows))


def unit_margins(line: ProductLine, mode: str = INDEPENDENT) -> np.ndarray:
    Q = np.array(line.qualities)
    if mode == DAMAGED_GOODS:
        return np.full(line.m, line.price - Q.max() ** line.gamma)
    return line.price - _power(Q, line.gamma)
