"""Bernstein expansion of the conditional price and the Bernstein price.

The n-th Bernstein expansion of C on [a, b] interpolates C at the
equispaced nodes a + (b - a) v / n:

    C_B(y) = sum_v C(a + (b - a) v / n) b_{v,n}(y; a, b) 1_[a,b](y)

Its weighted conditional expectation is computed exactly. Writing
w = (Y - b) / (b - a), the basis polynomial expands as

    (Y - a)^v (Y - b)^{n-v} / (b - a)^n = sum_k C(v, k) w^{n-v+k}

and E[e^{beta Y} w^p 1_[a,b](Y)] reduces, after standardizing Y, to the
mixed exponential-power moments of ``gauss_moments``. The closed-form
nested sums that transcribe this price are not used; the expansion above
is the same expectation with the (b - a) scaling folded in.

The alternating inner sum amplifies rounding by the ratio of its absolute
to its signed value. On the benchmark window [-4, 0.25] that ratio passes
1e16 near n = 150, where the closed form returns garbage. Once the
amplification would cost more than eight digits the basis expectations are
recomputed from nonnegative terms by composite Gauss-Legendre quadrature of
b_{v,n}(y) against the weighted density. The amplification and the path
taken are reported in ``PriceResult.diagnostics``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom, norm

from app.config import get_settings
from app.services.pricing.bs_core import ConditionalPriceEvaluator
from app.services.pricing.errors import (
    NumericalFailureError,
    OrderCapExceededError,
    ParameterDomainError,
)
from app.services.pricing.gauss_moments import (
    binomial_weights,
    gauss_legendre_panels,
    log_binom,
    mixed_exp_moments,
    tilted_tail_masses,
)
from app.services.pricing.model import BasketContract, MarketModel, PriceResult, Window

logger = logging.getLogger(__name__)

TAIL_MODES = ("truncate", "flat")

# Above this amplification the closed form keeps fewer than eight digits.
_CANCELLATION_LIMIT = 1e-8 / np.finfo(float).eps
# Gauss-Legendre points per panel for the quadrature fallback.
_PANEL_POINTS = 32
# Standard deviations of the tilted law of Y kept by the quadrature fallback.
_DENSITY_REACH = 40.0


@dataclass(frozen=True)
class BernsteinExpansion:
    """Bernstein expansion of C(y) on a window.

    Attributes:
        order: Polynomial order n.
        window: Interpolation window [a, b].
        node_values: C at a + (b - a) v / n, v = 0..n.
        tail: "truncate" (zero outside [a, b]) or "flat" (C(a) / C(b)).
    """

    order: int
    window: Window
    node_values: tuple[float, ...]
    tail: str = "truncate"

    def __post_init__(self) -> None:
        if len(self.node_values) != self.order + 1:
            raise ParameterDomainError(
                f"Expected {self.order + 1} node values, got {len(self.node_values)}"
            )


def _check_tail(tail: str) -> None:
    if tail not in TAIL_MODES:
        raise ParameterDomainError(f"Unknown tail mode '{tail}', expected one of {TAIL_MODES}")


def bernstein_basis(
    nu: int, n: int, y: float | np.ndarray, window: Window
) -> float | np.ndarray:
    """Bernstein basis polynomial b_{nu,n}(y; a, b), zero outside [a, b].

    Raises:
        ParameterDomainError: If nu is outside 0..n.
    """
    if not 0 <= nu <= n:
        raise ParameterDomainError(f"Basis index {nu} outside 0..{n}")
    y_arr = np.asarray(y, dtype=float)
    t = np.clip((y_arr - window.a) / window.width, 0.0, 1.0)
    values = np.where(window.contains(y_arr), binom.pmf(nu, n, t), 0.0)
    return float(values) if values.ndim == 0 else values


def expand(
    evaluator: ConditionalPriceEvaluator,
    n: int,
    window: Window,
    *,
    tail: str = "truncate",
) -> BernsteinExpansion:
    """Sample C at the n + 1 equispaced nodes of the window."""
    if n < 1:
        raise ParameterDomainError(f"Bernstein order must be >= 1, got {n}")
    _check_tail(tail)
    nodes = window.a + window.width * np.arange(n + 1) / n
    values = np.atleast_1d(evaluator(nodes))
    return BernsteinExpansion(
        order=n,
        window=window,
        node_values=tuple(float(v) for v in values),
        tail=tail,
    )


def eval_expansion(expansion: BernsteinExpansion, y: float | np.ndarray) -> float | np.ndarray:
    """Evaluate the expansion; interpolates C at both endpoints."""
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    window = expansion.window
    n = expansion.order
    t = np.clip((y_arr - window.a) / window.width, 0.0, 1.0)
    basis = binom.pmf(np.arange(n + 1)[:, None], n, t[None, :])
    values = np.asarray(expansion.node_values) @ basis

    inside = window.contains(y_arr)
    if expansion.tail == "flat":
        outside = np.where(y_arr < window.a, expansion.node_values[0], expansion.node_values[-1])
    else:
        outside = np.zeros_like(y_arr)
    values = np.where(inside, values, outside)
    return float(values[0]) if np.ndim(y) == 0 else values


def _scaled_power_expectations(
    evaluator: ConditionalPriceEvaluator, n: int, window: Window, cap: int
) -> np.ndarray:
    """E[e^{beta Y} ((Y - b) / (b - a))^p 1_[a,b](Y)] for p = 0..n."""
    law = evaluator.law
    width = window.width
    moments = mixed_exp_moments(law.tilt, n, window.a_std, window.b_std, cap=cap)
    # (Y - b) / (b - a) = shift + scale * Z
    shift = (law.mean_y2 - window.b) / width
    scale = law.sd_y2 / width
    scaled_moments = moments * np.power(scale, np.arange(n + 1, dtype=float))
    prefactor = math.exp(law.mu_slope * law.mean_y2)
    out = np.empty(n + 1)
    for p in range(n + 1):
        out[p] = prefactor * float(np.dot(binomial_weights(p, shift), scaled_moments[: p + 1]))
    return out


def bernstein_weights(
    evaluator: ConditionalPriceEvaluator, n: int, window: Window
) -> tuple[np.ndarray, float]:
    """Weighted conditional expectations of each basis polynomial, in closed form.

    Returns:
        (weights, cancellation) where weights[v] =
        E[e^{A + beta Y} b_{v,n}(Y) 1_[a,b](Y)] and cancellation is the
        worst ratio of absolute to signed inner sums.

    Raises:
        OrderCapExceededError: If n exceeds ``Settings.bernstein_order_cap``.
    """
    settings = get_settings()
    cap = settings.bernstein_order_cap
    if n < 1:
        raise ParameterDomainError(f"Bernstein order must be >= 1, got {n}")
    if n > cap:
        raise OrderCapExceededError(f"Bernstein order {n} exceeds cap {cap}")

    powers = _scaled_power_expectations(evaluator, n, window, cap)
    scale_a = math.exp(evaluator.law.A)
    weights = np.empty(n + 1)
    cancellation = 1.0
    for nu in range(n + 1):
        terms = binomial_weights(nu, 1.0) * powers[n - nu : n + 1]
        inner = float(np.sum(terms))
        if inner != 0.0:
            cancellation = max(cancellation, float(np.sum(np.abs(terms))) / abs(inner))
        sign = -1.0 if (n - nu) % 2 else 1.0
        if n > settings.log_space_order:
            binom_n = math.exp(float(log_binom(n, nu)))
        else:
            binom_n = float(math.comb(n, nu))
        weights[nu] = sign * binom_n * scale_a * inner
    return weights, cancellation


def basis_quadrature_weights(
    evaluator: ConditionalPriceEvaluator, n: int, window: Window
) -> np.ndarray:
    """Basis expectations E[e^{A + beta Y} b_{v,n}(Y) 1_[a,b](Y)] by quadrature.

    Every integrand is nonnegative, so the result keeps full relative
    precision at any order. Panels are no wider than the basis spacing
    (b - a) / n or the standard deviation of Y, whichever is smaller.

    Raises:
        NumericalFailureError: If the integrals are not finite.
    """
    law = evaluator.law
    centre = law.mean_y2 + law.mu_slope * law.sd_y2**2
    lo = max(window.a, centre - _DENSITY_REACH * law.sd_y2)
    hi = min(window.b, centre + _DENSITY_REACH * law.sd_y2)
    if lo >= hi:
        return np.zeros(n + 1)

    nodes, quad = gauss_legendre_panels(
        lo, hi, min(law.sd_y2, window.width / n), points=_PANEL_POINTS
    )
    log_density = law.A + law.mu_slope * nodes + norm.logpdf(nodes, law.mean_y2, law.sd_y2)
    t = np.clip((nodes - window.a) / window.width, 0.0, 1.0)
    basis = binom.pmf(np.arange(n + 1)[:, None], n, t[None, :])
    weights = basis @ (quad * np.exp(log_density))
    if not np.all(np.isfinite(weights)):
        raise NumericalFailureError(f"Bernstein basis quadrature failed at n={n}")
    return weights



def bernstein_price(
    model: MarketModel,
    contract: BasketContract,
    n: int,
    window: Window,
    *,
    tail: str = "truncate",
) -> PriceResult:
    """Bernstein approximation of order n of the basket price.

    Args:
        model: Market parameters.
        contract: Basket contract.
        n: Expansion order (1 <= n <= bernstein_order_cap).
        window: Truncation window.
        tail: "truncate" (zero outside the window) or "flat".

    Returns:
        PriceResult with the node values as coefficients.
    """
    _check_tail(tail)
    started = time.perf_counter()
    evaluator = ConditionalPriceEvaluator.build(model, contract)
    expansion = expand(evaluator, n, window, tail=tail)
    weights, cancellation = bernstein_weights(evaluator, n, window)
    source = "closed_form"
    if not (cancellation <= _CANCELLATION_LIMIT and np.all(np.isfinite(weights))):
        logger.info(
            "Bernstein n=%d on [%g, %g] amplifies rounding by %.1e; using basis quadrature",
            n,
            window.a,
            window.b,
            cancellation,
        )
        weights = basis_quadrature_weights(evaluator, n, window)
        source = "quadrature"
    node_values = np.asarray(expansion.node_values)
    value = contract.w1 * float(np.dot(node_values, weights))

    if tail == "flat":
        value += contract.w1 * _flat_tail_value(evaluator, window, node_values[0], node_values[-1])

    elapsed = time.perf_counter() - started
    logger.debug("Bernstein n=%d price=%.8f in %.4fs", n, value, elapsed)
    return PriceResult(
        value=value,
        method="bernstein",
        order=n,
        window=(window.a, window.b),
        coefficients=expansion.node_values,
        elapsed_seconds=elapsed,
        diagnostics={"cancellation": cancellation, "tail": tail, "weights": source},
    )


def _flat_tail_value(
    evaluator: ConditionalPriceEvaluator, window: Window, c_a: float, c_b: float
) -> float:
    """e^A E[e^{beta Y} (C(a) 1_{Y<a} + C(b) 1_{Y>b})]."""
    law = evaluator.law
    below, above = tilted_tail_masses(law.tilt, window.a_std, window.b_std)
    scale = math.exp(law.A + law.mu_slope * law.mean_y2)
    return scale * (c_a * below + c_b * above)
