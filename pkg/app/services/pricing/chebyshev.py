"""Chebyshev expansion of the conditional price, its price and its deltas.

C is expanded on [a, b] in the shifted first-kind polynomials
T_k^{a,b}(y) = T_k(-1 + 2 (y - a) / (b - a)):

    C_CH(y) = c_0 / 2 + sum_{k=1}^n c_k T_k^{a,b}(y),   a <= y <= b

The coefficients c_k = (2 / pi) int_0^pi C(a + (b - a)(cos t + 1) / 2) cos(k t) dt
are estimated with the trapezoidal rule on N + 1 equispaced angles. Writing
each T_k in powers of its argument turns the weighted conditional expectation into
mixed exponential-power moments, giving the closed-form price

    w1/2 c_0 [N(b~ - u) - N(a~ - u)]
      + w1 e^{-u^2/2} sum_k sum_l c_k b_l^(k) (2 sd / (b - a))^{k-2l} G(k - 2l)

with u = sigma1 rho sqrt(T) and G the binomial mix of mixed moments around
the centre (2 mean - a - b) / (2 sd).

Key design decisions:
- The trapezoid weights are the standard 2/N with halved endpoints; the
  endpoint terms carry cos(k pi) at y = a.
- Delta coefficients differentiate the same estimator node by node, endpoints
  included, so ``cheb_delta`` is the exact spot derivative of ``cheb_price``.
- Outside [a, b] the expansion is zero ("truncate", the closed form above) or
  the flat extension C(a) / C(b) ("flat"), whose tails enter analytically.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as cheb

from app.config import get_settings
from app.services.pricing.bs_core import (
    ConditionalPriceEvaluator,
    conditional_delta_s1,
    conditional_delta_s2,
)
from app.services.pricing.errors import OrderCapExceededError, ParameterDomainError
from app.services.pricing.gauss_moments import (
    mixed_exp_moments,
    norm_cdf,
    tilted_tail_masses,
)
from app.services.pricing.model import BasketContract, MarketModel, PriceResult, Window

logger = logging.getLogger(__name__)

TAIL_MODES = ("truncate", "flat")


@dataclass(frozen=True)
class ChebyshevExpansion:
    """Fitted Chebyshev expansion of C(y) on a window.

    Attributes:
        order: Polynomial order n.
        window: Expansion window [a, b].
        coeffs: Estimated coefficients c_0..c_n (c_0 not halved).
        quad_points: Trapezoid subintervals N.
        edge_values: (C(a), C(b)), used by the flat extension.
        tail: "truncate" or "flat".
    """

    order: int
    window: Window
    coeffs: tuple[float, ...]
    quad_points: int
    edge_values: tuple[float, float] = (0.0, 0.0)
    tail: str = "truncate"

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.order + 1:
            raise ParameterDomainError(
                f"Expected {self.order + 1} coefficients, got {len(self.coeffs)}"
            )
        if self.quad_points < self.order:
            raise ParameterDomainError(
                f"Need quad_points >= order, got N={self.quad_points}, n={self.order}"
            )


def cheb_T(k: int, x: float | np.ndarray) -> float | np.ndarray:
    """First-kind Chebyshev polynomial T_k by the three-term recurrence.

    Arguments within 1e-12 of [-1, 1] are clamped onto the interval.
    """
    if k < 0:
        raise ParameterDomainError(f"Chebyshev degree must be nonnegative, got {k}")
    x_arr = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    prev, curr = np.ones_like(x_arr), x_arr
    if k == 0:
        result = prev
    else:
        for _ in range(k - 1):
            prev, curr = curr, 2.0 * x_arr * curr - prev
        result = curr
    return float(result) if result.ndim == 0 else result


def cheb_power_coeffs(k: int, *, cap: int | None = None) -> list[float]:
    """Coefficients b_l^(k), l = 0..floor(k/2), with T_k(x) = sum_l b_l x^{k-2l}.

    The coefficients are exact integers up to k = 40. Summing the power form
    in floating point on [-1, 1] loses about k * log10(1 + sqrt(2)) digits.

    Raises:
        OrderCapExceededError: If k exceeds the cap (default moment_order_cap).
    """
    limit = get_settings().moment_order_cap if cap is None else cap
    if k < 0:
        raise ParameterDomainError(f"Chebyshev degree must be nonnegative, got {k}")
    if k > limit:
        raise OrderCapExceededError(f"Chebyshev degree {k} exceeds cap {limit}")
    if k == 0:
        return [1.0]
    out: list[float] = []
    for l in range(k // 2 + 1):
        if 2 * l == k:
            out.append(float((-1) ** l))
            continue
        # k / (k - l) * C(k - l, l) = C(k - l, l) + C(k - l - 1, l - 1)
        ratio = math.comb(k - l, l) + (math.comb(k - l - 1, l - 1) if l else 0)
        out.append(float((-1) ** l * 2 ** (k - 2 * l - 1) * ratio))
    return out


def _check_tail(tail: str) -> None:
    if tail not in TAIL_MODES:
        raise ParameterDomainError(f"Unknown tail mode '{tail}', expected one of {TAIL_MODES}")


def _trapezoid_nodes(window: Window, quad_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Angles pi j / N and the mapped nodes a + (b - a)(cos + 1) / 2, j = 0..N."""
    theta = np.pi * np.arange(quad_points + 1) / quad_points
    return theta, window.a + 0.5 * window.width * (np.cos(theta) + 1.0)


def _trapezoid_coeffs(values: np.ndarray, theta: np.ndarray, n: int) -> np.ndarray:
    """(2/N) trapezoid sums of values * cos(k theta) for k = 0..n."""
    quad_points = len(theta) - 1
    weights = np.ones(quad_points + 1)
    weights[0] = weights[-1] = 0.5
    cosines = np.cos(np.outer(np.arange(n + 1), theta))
    return (2.0 / quad_points) * (cosines @ (weights * values))


def _check_orders(n: int, quad_points: int) -> None:
    if n < 1:
        raise ParameterDomainError(f"Chebyshev order must be >= 1, got {n}")
    if quad_points < n:
        raise ParameterDomainError(
            f"Trapezoid points N={quad_points} must be >= order n={n}"
        )


def fit(
    evaluator: ConditionalPriceEvaluator,
    n: int,
    quad_points: int,
    window: Window,
    *,
    tail: str = "truncate",
) -> ChebyshevExpansion:
    """Estimate c_0..c_n by the trapezoidal rule with N = quad_points.

    Raises:
        ParameterDomainError: If N < n or n < 1.
    """
    _check_orders(n, quad_points)
    _check_tail(tail)
    theta, nodes = _trapezoid_nodes(window, quad_points)
    values = np.atleast_1d(evaluator(nodes))
    coeffs = _trapezoid_coeffs(values, theta, n)
    return ChebyshevExpansion(
        order=n,
        window=window,
        coeffs=tuple(float(c) for c in coeffs),
        quad_points=quad_points,
        edge_values=(float(values[-1]), float(values[0])),
        tail=tail,
    )


def eval_expansion(expansion: ChebyshevExpansion, y: float | np.ndarray) -> float | np.ndarray:
    """c_0 / 2 + sum_k c_k T_k^{a,b}(y) inside the window; tail mode outside."""
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    window = expansion.window
    x = np.clip(-1.0 + 2.0 * (y_arr - window.a) / window.width, -1.0, 1.0)
    coeffs = np.array(expansion.coeffs)
    coeffs[0] *= 0.5
    values = cheb.chebval(x, coeffs)

    if expansion.tail == "flat":
        c_a, c_b = expansion.edge_values
        outside = np.where(y_arr < window.a, c_a, c_b)
    else:
        outside = np.zeros_like(y_arr)
    values = np.where(window.contains(y_arr), values, outside)
    return float(values[0]) if np.ndim(y) == 0 else values


def g_hat(evaluator: ConditionalPriceEvaluator, n: int, window: Window) -> np.ndarray:
    """G(k) = sum_m C(k, m) centre^m d^{k-m}M_Z(u, a~, b~)/du^{k-m}, k = 0..n."""
    law = evaluator.law
    moments = mixed_exp_moments(law.tilt, n, window.a_std, window.b_std)
    centre = (2.0 * law.mean_y2 - window.a - window.b) / (2.0 * law.sd_y2)
    out = np.empty(n + 1)
    for k in range(n + 1):
        out[k] = sum(
            math.comb(k, m) * centre**m * moments[k - m] for m in range(k + 1)
        )
    return out


def _closed_form(
    evaluator: ConditionalPriceEvaluator,
    coeffs: np.ndarray,
    window: Window,
) -> float:
    """weighted conditional expectation of the expansion on [a, b], per unit w1."""
    law = evaluator.law
    n = len(coeffs) - 1
    u = law.tilt
    g = g_hat(evaluator, n, window)
    ratio = 2.0 * law.sd_y2 / window.width

    head = 0.5 * coeffs[0] * float(norm_cdf(window.b_std - u) - norm_cdf(window.a_std - u))
    body = 0.0
    for k in range(1, n + 1):
        for l, b_l in enumerate(cheb_power_coeffs(k)):
            j = k - 2 * l
            body += coeffs[k] * b_l * ratio**j * g[j]
    return head + math.exp(-0.5 * u * u) * body


def _flat_tails(
    evaluator: ConditionalPriceEvaluator, window: Window, c_a: float, c_b: float
) -> float:
    """e^A E[e^{beta Y} (c_a 1_{Y<a} + c_b 1_{Y>b})]."""
    law = evaluator.law
    below, above = tilted_tail_masses(law.tilt, window.a_std, window.b_std)
    return math.exp(law.A + law.mu_slope * law.mean_y2) * (c_a * below + c_b * above)


def cheb_price(
    model: MarketModel,
    contract: BasketContract,
    n: int,
    quad_points: int,
    window: Window,
    *,
    tail: str = "truncate",
) -> PriceResult:
    """n-th order Chebyshev approximation of the basket price.

    Args:
        model: Market parameters.
        contract: Basket contract.
        n: Expansion order.
        quad_points: Trapezoid subintervals N (>= n).
        window: Truncation window.
        tail: "truncate" (closed form on [a, b]) or "flat".

    Returns:
        PriceResult carrying the coefficient estimates.
    """
    started = time.perf_counter()
    evaluator = ConditionalPriceEvaluator.build(model, contract)
    expansion = fit(evaluator, n, quad_points, window, tail=tail)
    coeffs = np.asarray(expansion.coeffs)
    value = _closed_form(evaluator, coeffs, window)
    if tail == "flat":
        value += _flat_tails(evaluator, window, *expansion.edge_values)
    value *= contract.w1

    elapsed = time.perf_counter() - started
    logger.debug(
        "Chebyshev n=%d N=%d window=[%g, %g] price=%.8f in %.4fs",
        n, quad_points, window.a, window.b, value, elapsed,
    )
    return PriceResult(
        value=value,
        method="chebyshev",
        order=n,
        quad_points=quad_points,
        window=(window.a, window.b),
        coefficients=expansion.coeffs,
        elapsed_seconds=elapsed,
        diagnostics={"tail": tail},
    )


def cheb_delta(
    asset: int,
    model: MarketModel,
    contract: BasketContract,
    n: int,
    quad_points: int,
    window: Window,
    *,
    tail: str = "truncate",
) -> float:
    """Chebyshev estimate of the spot delta with respect to asset 1 or 2.

    The coefficient derivatives are trapezoid sums of dC/ds_j at the nodes;
    they replace c_k in the closed-form price.

    Raises:
        ParameterDomainError: If asset is not 1 or 2, or N < n.
        UnsupportedGreeksError: If the conditional volatility is zero.
    """
    if asset not in (1, 2):
        raise ParameterDomainError(f"Asset index must be 1 or 2, got {asset}")
    _check_orders(n, quad_points)
    _check_tail(tail)
    evaluator = ConditionalPriceEvaluator.build(model, contract)
    theta, nodes = _trapezoid_nodes(window, quad_points)
    sensitivity = conditional_delta_s1 if asset == 1 else conditional_delta_s2
    node_deltas = np.atleast_1d(sensitivity(evaluator, nodes))
    coeffs = _trapezoid_coeffs(node_deltas, theta, n)

    value = _closed_form(evaluator, coeffs, window)
    if tail == "flat":
        value += _flat_tails(evaluator, window, float(node_deltas[-1]), float(node_deltas[0]))
    return contract.w1 * value
