"""Tests for the Black-Scholes kernel and the conditional price C(y)."""

import math

import numpy as np
import pytest

from app.services.pricing.bs_core import (
    ConditionalPriceEvaluator,
    bs_call,
    conditional_delta_s1,
    conditional_delta_s2,
    conditional_price,
)
from app.services.pricing.errors import UnsupportedGreeksError
from app.services.pricing.model import BasketContract
from tests.conftest import benchmark_model


def test_bs_call_reference_value():
    assert bs_call(100.0, 100.0, 0.2, 0.05, 1.0) == pytest.approx(10.450583572185565, rel=1e-12)


def test_bs_call_vectorized_over_strike():
    strikes = np.array([80.0, 100.0, 120.0])
    values = bs_call(100.0, strikes, 0.25, 0.03, 0.5)
    assert values.shape == (3,)
    for k, v in zip(strikes, values):
        assert v == pytest.approx(bs_call(100.0, float(k), 0.25, 0.03, 0.5), rel=1e-14)
    assert np.all(np.diff(values) < 0)


def test_bs_call_nonpositive_strike_is_forward():
    assert bs_call(100.0, -5.0, 0.3, 0.03, 1.0) == pytest.approx(100.0 + 5.0 * math.exp(-0.03))
    assert bs_call(100.0, 0.0, 0.3, 0.03, 1.0) == pytest.approx(100.0)


def test_bs_call_zero_volatility_is_discounted_intrinsic():
    disc = math.exp(-0.03)
    assert bs_call(100.0, 90.0, 0.0, 0.03, 1.0) == pytest.approx(100.0 - 90.0 * disc)
    assert bs_call(100.0, 120.0, 0.0, 0.03, 1.0) == 0.0


def test_bs_call_respects_lower_bound_deep_in_the_money():
    value = bs_call(100.0, 1e-8, 0.3, 0.03, 1.0)
    assert value >= 100.0 - 1e-8 * math.exp(-0.03)


def test_conditional_price_uncorrelated_spread():
    model = benchmark_model(rho=0.0)
    contract = BasketContract()
    evaluator = ConditionalPriceEvaluator.build(model, contract)
    for y in (-0.5, 0.0, 0.3):
        strike = 1.0 + 96.0 * math.exp(y)
        expected = bs_call(100.0, strike, 0.3, 0.03, 1.0)
        assert conditional_price(evaluator, y) == pytest.approx(expected, rel=1e-13)


def test_conditional_price_is_decreasing_for_negative_correlation(evaluator):
    ys = np.linspace(-1.5, 1.5, 31)
    values = evaluator(ys)
    assert np.all(np.diff(values) < 0)
    assert np.all(values >= 0)


def _c_at(model, contract, y):
    return float(ConditionalPriceEvaluator.build(model, contract)(y))


@pytest.mark.parametrize("rho", [-0.7, -0.3, 0.3, 0.7])
@pytest.mark.parametrize("y", [-0.6, 0.0, 0.2])
def test_conditional_deltas_match_finite_differences(rho, y):
    model = benchmark_model(rho=rho)
    contract = BasketContract()
    evaluator = ConditionalPriceEvaluator.build(model, contract)
    h = 1e-4

    fd1 = (
        _c_at(model.with_spots(s1=model.s1 + h), contract, y)
        - _c_at(model.with_spots(s1=model.s1 - h), contract, y)
    ) / (2 * h)
    fd2 = (
        _c_at(model.with_spots(s2=model.s2 + h), contract, y)
        - _c_at(model.with_spots(s2=model.s2 - h), contract, y)
    ) / (2 * h)
    assert conditional_delta_s1(evaluator, y) == pytest.approx(fd1, abs=1e-6)
    assert conditional_delta_s2(evaluator, y) == pytest.approx(fd2, abs=1e-6)


def test_conditional_deltas_match_finite_differences_on_random_grid():
    rng = np.random.default_rng(99)
    contract = BasketContract()
    h = 1e-4
    for y, s1, s2 in zip(
        rng.uniform(-0.6, 0.6, 100), rng.uniform(90.0, 110.0, 100), rng.uniform(90.0, 110.0, 100)
    ):
        model = benchmark_model(s1=s1, s2=s2)
        evaluator = ConditionalPriceEvaluator.build(model, contract)
        fd1 = (
            _c_at(model.with_spots(s1=s1 + h), contract, y)
            - _c_at(model.with_spots(s1=s1 - h), contract, y)
        ) / (2 * h)
        fd2 = (
            _c_at(model.with_spots(s2=s2 + h), contract, y)
            - _c_at(model.with_spots(s2=s2 - h), contract, y)
        ) / (2 * h)
        assert conditional_delta_s1(evaluator, y) == pytest.approx(fd1, abs=1e-6)
        assert conditional_delta_s2(evaluator, y) == pytest.approx(fd2, abs=1e-6)


def test_conditional_delta_s2_is_negative_for_spread(evaluator):
    deltas = conditional_delta_s2(evaluator, np.array([-0.5, 0.0, 0.5]))
    assert np.all(deltas < 0)


def test_certain_exercise_has_unit_delta():
    model = benchmark_model()
    contract = BasketContract(w1=1.0, w2=1.0, strike=1.0)
    evaluator = ConditionalPriceEvaluator.build(model, contract)
    assert float(evaluator.strike(0.0)) < 0
    assert conditional_delta_s1(evaluator, 0.0) == 1.0


def test_greeks_rejected_for_perfect_correlation():
    evaluator = ConditionalPriceEvaluator.build(benchmark_model(rho=-1.0), BasketContract())
    with pytest.raises(UnsupportedGreeksError):
        conditional_delta_s1(evaluator, 0.0)
    # The price itself falls back to the deterministic branch.
    assert float(evaluator(0.0)) >= 0.0
