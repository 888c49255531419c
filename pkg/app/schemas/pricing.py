"""Pydantic schemas for pricing runs (CLI configuration and HTTP payloads)."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.services.pricing.model import BasketContract, MarketModel

Method = Literal["chebyshev", "bernstein", "taylor1", "taylor2", "mc", "quad"]

EXPANSION_METHODS = ("chebyshev", "bernstein")


class RunConfig(BaseModel):
    """One pricing run. Defaults are the benchmark market and spread contract."""

    model_config = ConfigDict(extra="forbid")

    # market
    s1: float = Field(100.0, gt=0)
    s2: float = Field(96.0, gt=0)
    sigma1: float = Field(0.3, gt=0)
    sigma2: float = Field(0.1, gt=0)
    rho: float = Field(-0.3, ge=-1.0, le=1.0)
    r: float = Field(0.03, ge=0)

    # contract
    w1: float = Field(1.0, gt=0)
    w2: float = -1.0
    strike: float = Field(1.0, ge=0)
    maturity: float = Field(1.0, gt=0)

    method: Method = "chebyshev"
    order: int | None = Field(None, ge=1)
    quad_points: int | None = Field(None, ge=1)
    window_a: float | None = None
    window_b: float | None = None
    flat_ext: bool = False
    # None expands around the mean of Y_T^(2)
    y_star: float | None = 0.0
    paths: int | None = Field(None, ge=2)
    seed: int | None = Field(None, ge=0, lt=2**64)
    output: Literal["human", "csv"] = "human"

    @model_validator(mode="after")
    def check_method_fields(self) -> "RunConfig":
        if self.method != "mc" and (self.paths is not None or self.seed is not None):
            raise ValueError("--paths and --seed apply to the mc method only")
        if self.method != "chebyshev" and self.quad_points is not None:
            raise ValueError("--quad-points applies to the chebyshev method only")
        if self.method not in EXPANSION_METHODS:
            if self.order is not None:
                raise ValueError(f"--order does not apply to method '{self.method}'")
            if self.window_a is not None or self.window_b is not None or self.flat_ext:
                raise ValueError(f"Window options do not apply to method '{self.method}'")
        if (
            self.window_a is not None
            and self.window_b is not None
            and not self.window_a < self.window_b
        ):
            raise ValueError(f"Window must satisfy a < b, got [{self.window_a}, {self.window_b}]")
        if (
            self.order is not None
            and self.quad_points is not None
            and self.quad_points < self.order
        ):
            raise ValueError("--quad-points must be >= --order")
        return self

    def market(self) -> MarketModel:
        return MarketModel(
            s1=self.s1, s2=self.s2, sigma1=self.sigma1, sigma2=self.sigma2, rho=self.rho, r=self.r
        )

    def contract(self) -> BasketContract:
        return BasketContract(w1=self.w1, w2=self.w2, strike=self.strike, maturity=self.maturity)


class PriceResponse(BaseModel):
    """Schema for a priced run."""

    method: str
    value: float
    std_error: float | None = None
    order: int | None = None
    quad_points: int | None = None
    window: tuple[float, float] | None = None
    elapsed_seconds: float
    diagnostics: dict = Field(default_factory=dict)


class GreeksResponse(BaseModel):
    """Chebyshev price and spot deltas."""

    price: float
    delta_s1: float
    delta_s2: float
    order: int
    quad_points: int
    window: tuple[float, float]


class Table1Row(BaseModel):
    """One correlation of the benchmark table."""

    rho: float
    mc: float | None = None
    mc_std_error: float | None = None
    taylor2: float
    cheb15: float
    cheb_seconds: float | None = None
    mc_seconds: float | None = None


class Table1Response(BaseModel):
    rows: list[Table1Row]
