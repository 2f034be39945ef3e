"""Analytic optima for identical buyers.

Used as an API and as ground truth for the numerical optimiser.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import CostModel, DomainError, Population, expected_profit_priced
from .optimizer import maximize_1d


@dataclass(frozen=True)
class PriceQualityOptimum:
    q_star: float
    p_star: float
    x_star: float


def _check_alpha(alpha: float) -> None:
    if not alpha >= 0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")


def optimal_quality_homogeneous(alpha: float) -> float:
    _check_alpha(alpha)
    return alpha / (alpha + 1.0)


def optimal_profit_homogeneous(alpha: float, z: float = 0.0, beta: float = 1.0) -> float:
    """Best profit per buyer at unit price; the prefactor exponent does not move Q*."""
    _check_alpha(alpha)
    if z < 0:
        raise DomainError("z must be >= 0")
    if not beta > 0:
        raise DomainError("beta must be positive")
    if alpha == 0:
        return -z
    if beta == 1.0:
        return alpha ** (alpha + 1) / (alpha + 1) ** (alpha + 2) - z
    prefactor = 1.0 - (alpha + 1.0) ** (-beta)
    return prefactor * alpha**alpha / (alpha + 1.0) ** (alpha + 1) - z


def optimal_price_quality(alpha: float, z: float = 0.0) -> PriceQualityOptimum:
    _check_alpha(alpha)
    q, p = alpha / 2.0, (alpha + 1.0) / 2.0
    x = expected_profit_priced(q, p, Population.homogeneous(alpha), CostModel(z))
    return PriceQualityOptimum(q, p, float(x))


def cooperative_boundary(z: float = 0.05, beta: float = 1.0, lo: float = 1e-3, hi: float = 10.0) -> float:
    """Acceptance parameter at which the homogeneous optimal profit peaks.

    Below it, sharper buyers raise the vendor's profit; above it they lower it.
    """
    res = maximize_1d(lambda a: optimal_profit_homogeneous(a, z, beta), lo, hi, grid_points=1024, tol=1e-9)
    return res.global_arg[0]
