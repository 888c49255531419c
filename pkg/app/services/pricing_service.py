"""Pricing service: dispatches a RunConfig to the pricing methods.

Shared by the CLI and the HTTP routers so both surfaces resolve defaults
(orders, windows, Monte Carlo settings) the same way.
"""

import logging
import time

from app.config import get_settings
from app.schemas.pricing import GreeksResponse, RunConfig, Table1Row
from app.services.pricing.bernstein import bernstein_price
from app.services.pricing.chebyshev import cheb_delta, cheb_price
from app.services.pricing.model import (
    BasketContract,
    MarketModel,
    PriceResult,
    Window,
    conditional_law,
)
from app.services.pricing.oracles import McConfig, mc_price, quad_price
from app.services.pricing.taylor import taylor_price

logger = logging.getLogger(__name__)

TABLE1_RHOS = (-0.1, 0.1, -0.3, 0.3, -0.5, 0.5, -0.7, 0.7)
BENCHMARK_BERNSTEIN_ORDER = 100


def resolve_window(
    model: MarketModel,
    contract: BasketContract,
    a: float | None = None,
    b: float | None = None,
) -> Window:
    """Window from explicit bounds, falling back to the configured defaults."""
    settings = get_settings()
    law = conditional_law(model, contract)
    return Window.from_bounds(
        settings.window_a if a is None else a,
        settings.window_b if b is None else b,
        law,
    )


def run_price(config: RunConfig) -> PriceResult:
    """Price one configuration with the requested method.

    Raises:
        PricingError: Propagated from the pricing methods.
    """
    settings = get_settings()
    model, contract = config.market(), config.contract()
    tail = "flat" if config.flat_ext else "truncate"
    logger.info(
        "Pricing method=%s rho=%s K=%s T=%s",
        config.method, model.rho, contract.strike, contract.maturity,
    )

    if config.method == "chebyshev":
        window = resolve_window(model, contract, config.window_a, config.window_b)
        n = config.order or settings.cheb_order
        quad_points = config.quad_points or max(settings.cheb_quad_points, n)
        return cheb_price(model, contract, n, quad_points, window, tail=tail)
    if config.method == "bernstein":
        window = resolve_window(model, contract, config.window_a, config.window_b)
        n = config.order or BENCHMARK_BERNSTEIN_ORDER
        return bernstein_price(model, contract, n, window, tail=tail)
    if config.method in ("taylor1", "taylor2"):
        return taylor_price(model, contract, config.y_star, order=int(config.method[-1]))
    if config.method == "mc":
        cfg = McConfig.from_settings(paths=config.paths, seed=config.seed)
        started = time.perf_counter()
        result = mc_price(model, contract, cfg)
        return result.to_price_result(time.perf_counter() - started)

    started = time.perf_counter()
    value = quad_price(model, contract)
    return PriceResult(value=value, method="quad", elapsed_seconds=time.perf_counter() - started)


def run_greeks(config: RunConfig) -> GreeksResponse:
    """Chebyshev price and both spot deltas for the configuration."""
    settings = get_settings()
    model, contract = config.market(), config.contract()
    window = resolve_window(model, contract, config.window_a, config.window_b)
    n = config.order or settings.cheb_order
    quad_points = config.quad_points or max(settings.cheb_quad_points, n)
    tail = "flat" if config.flat_ext else "truncate"

    price = cheb_price(model, contract, n, quad_points, window, tail=tail)
    return GreeksResponse(
        price=price.value,
        delta_s1=cheb_delta(1, model, contract, n, quad_points, window, tail=tail),
        delta_s2=cheb_delta(2, model, contract, n, quad_points, window, tail=tail),
        order=n,
        quad_points=quad_points,
        window=(window.a, window.b),
    )


def table1_rows(
    *,
    include_mc: bool = True,
    paths: int | None = None,
    seed: int | None = None,
) -> list[Table1Row]:
    """Benchmark spread prices across the correlation grid.

    Chebyshev uses n = 15, N = 100 on [-4, 0.25]; Taylor expands at y* = 0.
    """
    settings = get_settings()
    contract = BasketContract()
    rows: list[Table1Row] = []
    for rho in TABLE1_RHOS:
        model = MarketModel(s1=100.0, s2=96.0, sigma1=0.3, sigma2=0.1, rho=rho, r=0.03)
        window = resolve_window(model, contract, -4.0, 0.25)
        cheb = cheb_price(model, contract, 15, settings.cheb_quad_points, window)
        taylor = taylor_price(model, contract, 0.0, order=2)
        mc_value = mc_error = mc_seconds = None
        if include_mc:
            started = time.perf_counter()
            result = mc_price(model, contract, McConfig.from_settings(paths=paths, seed=seed))
            mc_seconds = time.perf_counter() - started
            mc_value, mc_error = result.price, result.std_error
        logger.info(
            "Table row rho=%+.1f cheb=%.6f (%.3fs) taylor=%.6f",
            rho, cheb.value, cheb.elapsed_seconds, taylor.value,
        )
        rows.append(
            Table1Row(
                rho=rho,
                mc=mc_value,
                mc_std_error=mc_error,
                taylor2=taylor.value,
                cheb15=cheb.value,
                cheb_seconds=cheb.elapsed_seconds,
                mc_seconds=mc_seconds,
            )
        )
    return rows
