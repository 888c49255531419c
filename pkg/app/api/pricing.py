"""Pricing API endpoints.

Routes:
    POST /api/price   - Price a RunConfig with any method
    POST /api/greeks  - Chebyshev price and spot deltas
    GET  /api/table1  - Benchmark prices across the correlation grid
"""

import logging

from fastapi import APIRouter, HTTPException, Query, status

from app.schemas.pricing import GreeksResponse, PriceResponse, RunConfig, Table1Response
from app.services.pricing.errors import (
    NumericalFailureError,
    ParameterDomainError,
    PricingError,
    UnsupportedGreeksError,
)
from app.services.pricing_service import run_greeks, run_price, table1_rows

logger = logging.getLogger(__name__)

router = APIRouter(tags=["pricing"])


def _http_error(exc: PricingError) -> HTTPException:
    if isinstance(exc, ParameterDomainError):
        return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))
    if isinstance(exc, UnsupportedGreeksError):
        return HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))
    return HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=str(exc))


@router.post("/price", response_model=PriceResponse)
def price(config: RunConfig):
    """Price one configuration."""
    try:
        result = run_price(config)
    except NumericalFailureError as exc:
        logger.exception("Pricing failed for method %s", config.method)
        raise _http_error(exc)
    except PricingError as exc:
        raise _http_error(exc)
    return PriceResponse(
        method=result.method,
        value=result.value,
        std_error=result.std_error,
        order=result.order,
        quad_points=result.quad_points,
        window=result.window,
        elapsed_seconds=result.elapsed_seconds,
        diagnostics=result.diagnostics,
    )


@router.post("/greeks", response_model=GreeksResponse)
def greeks(config: RunConfig):
    """Chebyshev spot deltas for the configuration."""
    try:
        return run_greeks(config)
    except PricingError as exc:
        raise _http_error(exc)


@router.get("/table1", response_model=Table1Response)
def table1(
    include_mc: bool = Query(False, description="Add the Monte Carlo column"),
    paths: int | None = Query(None, ge=2),
    seed: int | None = Query(None, ge=0),
):
    """Benchmark spread prices for rho in {+-0.1, +-0.3, +-0.5, +-0.7}."""
    try:
        rows = table1_rows(include_mc=include_mc, paths=paths, seed=seed)
    except PricingError as exc:
        logger.exception("Table computation failed")
        raise _http_error(exc)
    return Table1Response(rows=rows)
