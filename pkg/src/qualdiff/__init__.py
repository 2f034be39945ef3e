"""Probabilistic consumer-choice model of a monopolist's quality decisions."""

__version__ = "0.1.0"

from .closed_form import (  # noqa: E402
    PriceQualityOptimum,
    cooperative_boundary,
    optimal_price_quality,
    optimal_profit_homogeneous,
    optimal_quality_homogeneous,
)
from .model import (  # noqa: E402
    BuyerGroup,
    CostModel,
    DomainError,
    Population,
    ProductLine,
    acceptance_prob,
    acceptance_prob_priced,
    expected_profit_multi,
    expected_profit_priced,
    expected_profit_single,
    selection_prob,
)
from .optimizer import (  # noqa: E402
    OptimizationResult,
    VariantCountTable,
    best_variant_count,
    differentiation_decision,
    maximize_1d,
    maximize_price_quality,
    maximize_qualities,
)
from .spam import (  # noqa: E402
    SpamOptimum,
    SpamScenario,
    spam_accept_prob,
    spam_optimal_m,
    spam_optimal_quality,
    spam_profit,
)
from .montecarlo import SimulationReport, simulate_market, simulate_spam  # noqa: E402
