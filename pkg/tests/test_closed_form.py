import numpy as np
import pytest

from qualdiff.closed_form import (
    cooperative_boundary,
    optimal_price_quality,
    optimal_profit_homogeneous,
    optimal_quality_homogeneous,
)
from qualdiff.model import CostModel, DomainError, Population, expected_profit_priced, expected_profit_single

from oracles import central_difference

ALPHAS = np.linspace(0.05, 5, 34)


@pytest.mark.parametrize("alpha, q", [(1, 0.5), (0, 0.0), (3, 0.75)])
def test_optimal_quality(alpha, q):
    assert optimal_quality_homogeneous(alpha) == pytest.approx(q, abs=1e-15)


@pytest.mark.parametrize("alpha, z, x", [(1, 0, 0.125), (0, 0, 0.0), (3, 0.05, 81 / 1024 - 0.05)])
def test_optimal_profit(alpha, z, x):
    assert optimal_profit_homogeneous(alpha, z) == pytest.approx(x, abs=1e-15)


@pytest.mark.parametrize("alpha, q, p", [(1, 0.5, 1.0), (0, 0.0, 0.5), (3, 1.5, 2.0)])
def test_optimal_price_quality(alpha, q, p):
    opt = optimal_price_quality(alpha)
    assert (opt.q_star, opt.p_star) == pytest.approx((q, p), abs=1e-15)
    pop = Population.homogeneous(alpha)
    assert opt.x_star == pytest.approx(expected_profit_priced(q, p, pop, CostModel(0)), abs=1e-15)


def test_negative_alpha_rejected():
    for fn in (optimal_quality_homogeneous, optimal_profit_homogeneous, optimal_price_quality):
        with pytest.raises(DomainError):
            fn(-0.5)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_optimal_quality_is_stationary(alpha):
    pop = Population.homogeneous(alpha)
    q = optimal_quality_homogeneous(alpha)
    d = central_difference(lambda x: expected_profit_single(x, pop, CostModel(0)), q)
    assert abs(d) < 1e-6


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("z", [0.0, 0.03])
def test_optimal_profit_matches_direct_evaluation(alpha, z):
    pop = Population.homogeneous(alpha)
    direct = expected_profit_single(optimal_quality_homogeneous(alpha), pop, CostModel(z))
    assert optimal_profit_homogeneous(alpha, z) == pytest.approx(direct, abs=1e-12)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_price_quality_is_stationary(alpha):
    pop = Population.homogeneous(alpha)
    opt = optimal_price_quality(alpha)
    dq = central_difference(lambda q: expected_profit_priced(q, opt.p_star, pop, CostModel(0)), opt.q_star)
    dp = central_difference(lambda p: expected_profit_priced(opt.q_star, p, pop, CostModel(0)), opt.p_star)
    assert abs(dq) < 1e-6
    assert abs(dp) < 1e-6


@pytest.mark.parametrize("alpha", np.concatenate([[0.0], ALPHAS, [17.0, 250.0]]))
def test_price_minus_quality_is_one_half(alpha):
    opt = optimal_price_quality(alpha)
    assert opt.p_star - opt.q_star == pytest.approx(0.5, abs=1e-12)


def test_cooperative_boundary_near_0_65():
    a0 = cooperative_boundary(0.05, 1.0)
    assert a0 == pytest.approx(0.65, abs=5e-3)
    d = central_difference(lambda a: optimal_profit_homogeneous(a), a0, h=1e-4)
    assert abs(d) < 1e-6


def test_cooperative_boundary_independent_of_z():
    assert cooperative_boundary(0.0) == pytest.approx(cooperative_boundary(0.05), abs=1e-6)


def test_cooperative_boundary_grows_with_weaker_prefactor():
    assert cooperative_boundary(0.05, 1 / 3) > cooperative_boundary(0.05, 1.0)


def test_cooperative_boundary_against_dense_scan():
    for beta in (1.0, 1 / 3):
        alphas = np.linspace(1e-3, 3, 300_001)
        x = [optimal_profit_homogeneous(a, 0.05, beta) for a in alphas[::1000]]
        coarse = alphas[::1000][int(np.argmax(x))]
        fine = alphas[(alphas > coarse - 0.02) & (alphas < coarse + 0.02)]
        vals = [optimal_profit_homogeneous(a, 0.05, beta) for a in fine]
        assert cooperative_boundary(0.05, beta) == pytest.approx(fine[int(np.argmax(vals))], abs=2e-5)
