"""Shared fixtures: the benchmark market, the spread contract and windows."""

import pytest

from app.services.pricing.bs_core import ConditionalPriceEvaluator
from app.services.pricing.model import (
    BasketContract,
    MarketModel,
    Window,
    conditional_law,
)


def benchmark_model(rho: float = -0.3, **overrides) -> MarketModel:
    params = dict(s1=100.0, s2=96.0, sigma1=0.3, sigma2=0.1, rho=rho, r=0.03)
    params.update(overrides)
    return MarketModel(**params)


def make_window(model: MarketModel, contract: BasketContract, a: float, b: float) -> Window:
    return Window.from_bounds(a, b, conditional_law(model, contract))


@pytest.fixture
def model() -> MarketModel:
    return benchmark_model()


@pytest.fixture
def spread() -> BasketContract:
    return BasketContract(w1=1.0, w2=-1.0, strike=1.0, maturity=1.0)


@pytest.fixture
def evaluator(model, spread) -> ConditionalPriceEvaluator:
    return ConditionalPriceEvaluator.build(model, spread)


@pytest.fixture
def pricing_window(model, spread) -> Window:
    return make_window(model, spread, -4.0, 0.25)


@pytest.fixture
def fit_window(model, spread) -> Window:
    return make_window(model, spread, -1.5, 1.5)
