"""Pydantic schemas for request/response validation."""

from app.schemas.pricing import (
    GreeksResponse,
    PriceResponse,
    RunConfig,
    Table1Response,
    Table1Row,
)

__all__ = [
    "GreeksResponse",
    "PriceResponse",
    "RunConfig",
    "Table1Response",
    "Table1Row",
]
