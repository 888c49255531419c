"""Tests for the Chebyshev expansion, price and deltas."""

import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from app.services.pricing.bs_core import ConditionalPriceEvaluator
from app.services.pricing.chebyshev import (
    cheb_delta,
    cheb_power_coeffs,
    cheb_price,
    cheb_T,
    eval_expansion,
    fit,
)
from app.services.pricing.errors import OrderCapExceededError, ParameterDomainError
from app.services.pricing.model import BasketContract
from app.services.pricing.oracles import (
    margrabe_price,
    quad_price,
    weighted_expectation,
    window_price,
)
from tests.conftest import benchmark_model, make_window


def _to_unit(window, y):
    return -1.0 + 2.0 * (np.asarray(y) - window.a) / window.width


def test_cheb_T_base_cases_and_identity():
    assert cheb_T(0, 0.3) == 1.0
    assert cheb_T(1, 0.3) == pytest.approx(0.3)
    assert cheb_T(2, 0.5) == pytest.approx(-0.5)
    assert cheb_T(9, math.cos(0.7)) == pytest.approx(math.cos(6.3), abs=1e-12)
    assert cheb_T(5, 1.0 + 1e-13) == pytest.approx(1.0)


def test_power_coeffs_small_orders():
    assert cheb_power_coeffs(0) == [1.0]
    assert cheb_power_coeffs(1) == [1.0]
    assert cheb_power_coeffs(2) == [2.0, -1.0]
    assert cheb_power_coeffs(3) == [4.0, -3.0]
    assert cheb_power_coeffs(4) == [8.0, -8.0, 1.0]


@pytest.mark.parametrize("k", [10, 17, 30, 40])
def test_power_coeffs_reproduce_recurrence(k):
    # float evaluation of the power form loses about k * log10(1 + sqrt(2))
    # digits, so the comparison sums the integer coefficients exactly
    xs = np.random.default_rng(7).uniform(-1.0, 1.0, 20)
    coeffs = cheb_power_coeffs(k)
    assert all(b == int(b) for b in coeffs)
    power_form = [
        float(sum(Fraction(int(b)) * Fraction(x) ** (k - 2 * l) for l, b in enumerate(coeffs)))
        for x in xs
    ]
    np.testing.assert_allclose(power_form, cheb_T(k, xs), atol=1e-9)



def test_power_coeffs_cap():
    with pytest.raises(OrderCapExceededError):
        cheb_power_coeffs(65)


def test_fit_constant_function(fit_window):
    expansion = fit(lambda y: np.ones_like(y), 6, 64, fit_window)
    np.testing.assert_allclose(expansion.coeffs, [2.0, 0, 0, 0, 0, 0, 0], atol=1e-12)
    assert eval_expansion(expansion, 0.3) == pytest.approx(1.0)


@pytest.mark.parametrize("m", [1, 3, 7])
def test_fit_recovers_basis_polynomial(m, fit_window):
    expansion = fit(lambda y: cheb_T(m, _to_unit(fit_window, y)), 10, 64, fit_window)
    expected = np.zeros(11)
    expected[m] = 1.0
    np.testing.assert_allclose(expansion.coeffs, expected, atol=1e-10)


def test_fit_needs_enough_points(evaluator, fit_window):
    with pytest.raises(ParameterDomainError):
        fit(evaluator, 15, 10, fit_window)
    with pytest.raises(ParameterDomainError):
        fit(evaluator, 0, 10, fit_window)


def test_fit_error_shrinks_with_order(evaluator, fit_window):
    ys = np.linspace(fit_window.a, fit_window.b, 301)
    exact = evaluator(ys)
    errors = [
        np.max(np.abs(eval_expansion(fit(evaluator, n, 200, fit_window), ys) - exact))
        for n in (4, 15, 40)
    ]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-3


def test_eval_expansion_tail_modes_and_endpoint(evaluator, fit_window):
    truncated = fit(evaluator, 10, 100, fit_window)
    flat = fit(evaluator, 10, 100, fit_window, tail="flat")
    assert eval_expansion(truncated, -2.0) == 0.0
    assert eval_expansion(flat, -2.0) == pytest.approx(float(evaluator(fit_window.a)))
    assert eval_expansion(flat, 2.0) == pytest.approx(float(evaluator(fit_window.b)))
    at_b = 0.5 * truncated.coeffs[0] + sum(truncated.coeffs[1:])
    assert eval_expansion(truncated, fit_window.b) == pytest.approx(at_b)


def test_benchmark_price_default_correlation(model, spread, pricing_window):
    result = cheb_price(model, spread, 15, 100, pricing_window)
    assert result.value == pytest.approx(14.96293, abs=0.02)
    assert result.method == "chebyshev"
    assert len(result.coefficients) == 16


@pytest.mark.parametrize("rho", [-0.3, -0.5, -0.7])
def test_order_fifteen_bias_is_bounded(rho, spread):
    # the pricing window is wide against the conditional volatility, so
    # order 15 carries a visible bias that grows as rho moves toward -1
    model = benchmark_model(rho=rho)
    window = make_window(model, spread, -4.0, 0.25)
    value = cheb_price(model, spread, 15, 100, window).value
    assert value == pytest.approx(quad_price(model, spread), abs=0.1)


def test_price_converges_in_order(spread):
    model = benchmark_model(rho=-0.5)
    window = make_window(model, spread, -4.0, 0.25)
    reference = window_price(model, spread, window)
    low = abs(cheb_price(model, spread, 15, 200, window).value - reference)
    high = abs(cheb_price(model, spread, 40, 200, window).value - reference)
    assert high < 0.25 * low
    assert high < 0.02


def test_flat_extension_reduces_truncation_bias(spread):
    model = benchmark_model(rho=0.5)
    window = make_window(model, spread, -4.0, 0.25)
    reference = quad_price(model, spread)
    truncated = cheb_price(model, spread, 15, 100, window).value
    flat = cheb_price(model, spread, 15, 100, window, tail="flat").value
    assert abs(flat - reference) < abs(truncated - reference)


def test_price_matches_quadrature_of_expansion(model, spread, evaluator, pricing_window):
    expansion = fit(evaluator, 15, 100, pricing_window)
    reference = weighted_expectation(
        model, spread, lambda y: eval_expansion(expansion, y), pricing_window
    )
    assert cheb_price(model, spread, 15, 100, pricing_window).value == pytest.approx(
        reference, abs=1e-8
    )


def test_price_matches_monte_carlo_of_expansion(model, spread, evaluator, pricing_window):
    expansion = fit(evaluator, 15, 100, pricing_window)
    law = evaluator.law
    ys = law.mean_y2 + law.sd_y2 * np.random.default_rng(11).standard_normal(1_000_000)
    samples = law.weight(ys) * eval_expansion(expansion, ys)
    mean, se = samples.mean(), samples.std(ddof=1) / math.sqrt(len(samples))
    assert cheb_price(model, spread, 15, 100, pricing_window).value == pytest.approx(
        mean, abs=3 * se
    )


def test_stable_in_trapezoid_points(model, spread, pricing_window):
    coarse = cheb_price(model, spread, 15, 100, pricing_window).value
    fine = cheb_price(model, spread, 15, 400, pricing_window).value
    assert abs(coarse - fine) < 1e-4


def test_exchange_option_matches_margrabe():
    model = benchmark_model()
    contract = BasketContract(strike=0.0)
    # eight standard deviations of Y either side of its mean
    window = make_window(model, contract, -0.775, 0.825)
    assert cheb_price(model, contract, 20, 100, window).value == pytest.approx(
        margrabe_price(model, contract), abs=1e-3
    )


def test_prices_monotone_in_strike_and_maturity(model, spread):
    strikes = (0.0, 5.0, 10.0)
    maturities = (1 / 12, 0.5, 1.0)
    grid = np.empty((len(maturities), len(strikes)))
    for i, maturity in enumerate(maturities):
        for j, strike in enumerate(strikes):
            contract = replace(spread, strike=strike, maturity=maturity)
            window = make_window(model, contract, -4.0, 0.25)
            grid[i, j] = cheb_price(model, contract, 10, 100, window).value
    assert np.all(np.diff(grid, axis=1) < 0)
    assert np.all(np.diff(grid, axis=0) > 0)


@pytest.mark.parametrize("asset", [1, 2])
@pytest.mark.parametrize("spots", [(96.0, 96.0), (100.0, 96.0), (106.0, 101.0)])
def test_delta_matches_finite_difference(asset, spots, spread):
    model = benchmark_model().with_spots(*spots)
    window = make_window(model, spread, -4.0, 0.25)
    h = 0.01
    if asset == 1:
        up, down = model.with_spots(s1=spots[0] + h), model.with_spots(s1=spots[0] - h)
    else:
        up, down = model.with_spots(s2=spots[1] + h), model.with_spots(s2=spots[1] - h)
    fd = (
        cheb_price(up, spread, 15, 100, window).value
        - cheb_price(down, spread, 15, 100, window).value
    ) / (2 * h)
    assert cheb_delta(asset, model, spread, 15, 100, window) == pytest.approx(fd, abs=5e-3)


def test_delta_signs_on_spot_grid(spread):
    for s1 in (96.0, 101.0, 106.0):
        for s2 in (96.0, 101.0, 106.0):
            model = benchmark_model().with_spots(s1, s2)
            window = make_window(model, spread, -4.0, 0.25)
            assert 0.0 < cheb_delta(1, model, spread, 15, 100, window) < 1.0
            assert -1.0 < cheb_delta(2, model, spread, 15, 100, window) < 0.0


def test_delta_rejects_bad_asset_index(model, spread, pricing_window):
    with pytest.raises(ParameterDomainError):
        cheb_delta(3, model, spread, 15, 100, pricing_window)


def test_evaluator_is_reused_for_fit(model, spread, pricing_window):
    evaluator = ConditionalPriceEvaluator.build(model, spread)
    expansion = fit(evaluator, 15, 100, pricing_window)
    assert expansion.order == 15 and expansion.quad_points == 100
