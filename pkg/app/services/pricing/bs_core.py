"""One-dimensional Black-Scholes kernel and the conditional price C(y).

C(y) is the Black-Scholes call on asset 1 with conditional volatility
sigma_cond and the random strike K(y). Its spot sensitivities follow by
differentiating through K(y, s2):

    dC/ds1 = N(d1)
    dC/ds2 = -e^{-rT} N(d2) dK/ds2,   dK/ds2 = -(w2 / w1) e^{-A} e^{(1 - beta) y}

The density terms of the product rule cancel through the identity
s1 phi(d1) = K e^{-rT} phi(d2).

Degenerate inputs take analytic branches instead of raising:
- k <= 0: exercise is certain, the call is the forward s - k e^{-rT}.
- sigma = 0: the deterministic payoff max(s - k e^{-rT}, 0).
Logarithms are only taken on the k > 0 branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from app.services.pricing.errors import UnsupportedGreeksError
from app.services.pricing.gauss_moments import norm_cdf
from app.services.pricing.model import (
    BasketContract,
    ConditionalLaw,
    MarketModel,
    conditional_law,
    strike_map,
    strike_map_ds2,
)


def _d1_d2(
    s: float, k: np.ndarray, sigma: float, r: float, T: float
) -> tuple[np.ndarray, np.ndarray]:
    """d1, d2 with k > 0 assumed (callers mask the other branch)."""
    vol = sigma * math.sqrt(T)
    d1 = (np.log(s / k) + (r + 0.5 * sigma * sigma) * T) / vol
    return d1, d1 - vol


def _as_output(values: np.ndarray, scalar: bool) -> float | np.ndarray:
    return float(values[0]) if scalar else values


def bs_call(
    s: float,
    k: float | np.ndarray,
    sigma: float,
    r: float,
    T: float,
) -> float | np.ndarray:
    """Black-Scholes European call value, vectorized over the strike.

    Args:
        s: Spot price (> 0).
        k: Strike(s); nonpositive strikes give the forward value.
        sigma: Volatility (>= 0).
        r: Risk-free rate.
        T: Maturity (> 0).

    Returns:
        Call value(s), never below max(s - k e^{-rT}, 0).
    """
    scalar = np.ndim(k) == 0
    k_arr = np.atleast_1d(np.asarray(k, dtype=float))
    disc = math.exp(-r * T)
    forward = s - k_arr * disc
    if sigma == 0.0:
        return _as_output(np.maximum(forward, 0.0), scalar)

    positive = k_arr > 0
    k_safe = np.where(positive, k_arr, 1.0)
    d1, d2 = _d1_d2(s, k_safe, sigma, r, T)
    value = s * norm_cdf(d1) - k_safe * disc * norm_cdf(d2)
    value = np.where(positive, np.maximum(value, np.maximum(forward, 0.0)), forward)
    return _as_output(value, scalar)


@dataclass(frozen=True)
class ConditionalPriceEvaluator:
    """Deterministic evaluator of C(y) for a fixed market and contract.

    Attributes:
        law: The conditional-law constants.
        model: Market parameters (the spots enter C through s1 and K(y)).
        contract: Basket contract.
    """

    law: ConditionalLaw
    model: MarketModel
    contract: BasketContract

    @classmethod
    def build(cls, model: MarketModel, contract: BasketContract) -> ConditionalPriceEvaluator:
        return cls(law=conditional_law(model, contract), model=model, contract=contract)

    def __call__(self, y: float | np.ndarray) -> float | np.ndarray:
        return conditional_price(self, y)

    def strike(self, y: float | np.ndarray) -> float | np.ndarray:
        return strike_map(self.law, self.model, self.contract, y)


def conditional_price(
    evaluator: ConditionalPriceEvaluator, y: float | np.ndarray
) -> float | np.ndarray:
    """C(y) = bs_call(s1, K(y), sigma_cond, r, T)."""
    return bs_call(
        evaluator.model.s1,
        evaluator.strike(y),
        evaluator.law.sigma_cond,
        evaluator.model.r,
        evaluator.contract.maturity,
    )


def exercise_probabilities(
    evaluator: ConditionalPriceEvaluator, y: float | np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """N(d1), N(d2) at K(y); both are 1 where K(y) <= 0."""
    law = evaluator.law
    if law.sigma_cond == 0.0:
        raise UnsupportedGreeksError(
            "Closed-form deltas need a positive conditional volatility (|rho| < 1)"
        )
    k = np.atleast_1d(np.asarray(evaluator.strike(y), dtype=float))
    positive = k > 0
    k_safe = np.where(positive, k, 1.0)
    d1, d2 = _d1_d2(
        evaluator.model.s1, k_safe, law.sigma_cond, evaluator.model.r, law.maturity
    )
    n1 = np.where(positive, norm_cdf(d1), 1.0)
    n2 = np.where(positive, norm_cdf(d2), 1.0)
    return n1, n2


def conditional_delta_s1(
    evaluator: ConditionalPriceEvaluator, y: float | np.ndarray
) -> float | np.ndarray:
    """Partial derivative of C(y, s1, s2) with respect to s1.

    Raises:
        UnsupportedGreeksError: If sigma_cond = 0.
    """
    n1, _ = exercise_probabilities(evaluator, y)
    return _as_output(n1, np.ndim(y) == 0)


def conditional_delta_s2(
    evaluator: ConditionalPriceEvaluator, y: float | np.ndarray
) -> float | np.ndarray:
    """Partial derivative of C(y, s1, s2) with respect to s2.

    Carries the factor (w2 / w1) e^{-A} e^{(1 - beta) y} through dK/ds2.

    Raises:
        UnsupportedGreeksError: If sigma_cond = 0.
    """
    _, n2 = exercise_probabilities(evaluator, y)
    disc = math.exp(-evaluator.model.r * evaluator.contract.maturity)
    dk = strike_map_ds2(evaluator.law, evaluator.contract, np.atleast_1d(y))
    return _as_output(-disc * n2 * dk, np.ndim(y) == 0)
