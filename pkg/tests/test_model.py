"""Tests for market/contract validation and the conditional-law reduction."""

import logging
import math

import numpy as np
import pytest

from app.services.pricing.errors import ParameterDomainError
from app.services.pricing.model import (
    BasketContract,
    MarketModel,
    Window,
    conditional_law,
    strike_map,
    strike_map_ds2,
    strike_map_slope,
)
from tests.conftest import benchmark_model


@pytest.mark.parametrize(
    "overrides",
    [
        {"s1": 0.0},
        {"s2": -1.0},
        {"sigma1": 0.0},
        {"sigma2": -0.1},
        {"rho": 1.2},
        {"rho": -1.01},
        {"r": -0.01},
    ],
)
def test_invalid_market_rejected(overrides):
    with pytest.raises(ParameterDomainError):
        benchmark_model(**overrides)


@pytest.mark.parametrize(
    "kwargs",
    [{"w1": 0.0}, {"w1": -1.0}, {"strike": -1.0}, {"maturity": 0.0}],
)
def test_invalid_contract_rejected(kwargs):
    with pytest.raises(ParameterDomainError):
        BasketContract(**kwargs)


def test_domain_error_is_value_error():
    with pytest.raises(ValueError):
        BasketContract(maturity=-1.0)


def test_perfect_correlation_warns_and_zeroes_conditional_vol(caplog, spread):
    with caplog.at_level(logging.WARNING):
        model = benchmark_model(rho=1.0)
    assert model.perfectly_correlated
    assert "Perfect correlation" in caplog.text
    assert conditional_law(model, spread).sigma_cond == 0.0


@pytest.mark.parametrize("rho", [-0.7, -0.3, 0.0, 0.1, 0.5, 0.9])
@pytest.mark.parametrize("y", [-2.0, -0.3, 0.0, 0.025, 1.1])
def test_exponent_identity_vanishes(rho, y, spread):
    law = conditional_law(benchmark_model(rho=rho), spread)
    assert abs(law.exponent_gap(y)) < 1e-12


@pytest.mark.parametrize("rho", [-0.7, -0.1, 0.3, 0.7])
def test_weight_integrates_to_tilted_normalization(rho, spread):
    # A + beta * mean + u^2 / 2 = 0, so E[e^{A + beta Y}] = 1
    law = conditional_law(benchmark_model(rho=rho), spread)
    assert law.A + law.mu_slope * law.mean_y2 + 0.5 * law.tilt**2 == pytest.approx(0.0, abs=1e-14)


def test_law_constants_benchmark(model, spread):
    law = conditional_law(model, spread)
    assert law.mu_slope == pytest.approx(-0.9)
    assert law.sigma_cond == pytest.approx(math.sqrt(0.91) * 0.3)
    assert law.mean_y2 == pytest.approx(0.025)
    assert law.sd_y2 == pytest.approx(0.1)
    assert law.tilt == pytest.approx(-0.09)


def test_strike_map_uncorrelated_spread(spread):
    model = benchmark_model(rho=0.0)
    law = conditional_law(model, spread)
    assert law.A == 0.0
    assert strike_map(law, model, spread, 0.0) == pytest.approx(97.0)
    assert strike_map(law, model, spread, 0.1) == pytest.approx(1.0 + 96.0 * math.exp(0.1))


def test_strike_map_slope_matches_finite_difference(model, spread):
    law = conditional_law(model, spread)
    h = 1e-6
    for y in (-1.0, 0.0, 0.4):
        up = strike_map(law, model, spread, y + h)
        down = strike_map(law, model, spread, y - h)
        fd = (up - down) / (2 * h)
        assert strike_map_slope(law, model, spread, y) == pytest.approx(fd, rel=1e-7)


def test_strike_map_ds2_matches_finite_difference(model, spread):
    law = conditional_law(model, spread)
    h = 1e-4
    up = strike_map(law, model.with_spots(s2=model.s2 + h), spread, 0.2)
    down = strike_map(law, model.with_spots(s2=model.s2 - h), spread, 0.2)
    assert strike_map_ds2(law, spread, 0.2) == pytest.approx((up - down) / (2 * h), rel=1e-8)


def test_strike_map_negative_for_positive_weights():
    model = benchmark_model()
    contract = BasketContract(w1=1.0, w2=1.0, strike=1.0)
    law = conditional_law(model, contract)
    assert strike_map(law, model, contract, 0.0) < 0


def test_covariance_and_payoff(model, spread):
    cov = model.covariance(2.0)
    np.testing.assert_allclose(cov, 2.0 * np.array([[0.09, -0.009], [-0.009, 0.01]]))
    payoff = spread.payoff(np.array([110.0, 90.0]), np.array([100.0, 95.0]))
    np.testing.assert_allclose(payoff, [9.0, 0.0])


def test_window_validation_and_standardization(model, spread):
    law = conditional_law(model, spread)
    window = Window.from_bounds(-4.0, 0.25, law)
    assert window.a_std == pytest.approx((-4.0 - 0.025) / 0.1)
    assert window.b_std == pytest.approx(2.25)
    assert window.width == pytest.approx(4.25)
    assert bool(window.contains(0.0)) and not bool(window.contains(0.3))
    with pytest.raises(ParameterDomainError):
        Window.from_bounds(0.25, -4.0, law)
    with pytest.raises(ParameterDomainError):
        Window.from_bounds(1.0, 1.0, law)


def test_exponent_identity_vanishes_on_random_markets():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        sigma1, sigma2 = rng.uniform(0.05, 0.6, 2)
        model = MarketModel(
            s1=100.0,
            s2=96.0,
            sigma1=sigma1,
            sigma2=sigma2,
            rho=rng.uniform(-0.95, 0.95),
            r=rng.uniform(0.0, 0.1),
        )
        contract = BasketContract(w1=1.0, w2=-1.0, strike=1.0, maturity=rng.uniform(0.1, 3.0))
        law = conditional_law(model, contract)
        y = rng.uniform(-2.0, 2.0)
        assert abs(law.exponent_gap(y)) < 1e-12, (model, contract.maturity, y)
