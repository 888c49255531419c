"""Two-asset basket and spread option pricing under bivariate Black-Scholes.

Polynomial pricers (Bernstein, Chebyshev, Taylor) expand the conditional
price C(y) and integrate the expansion in closed form; the oracles give
independent reference values.
"""

from app.services.pricing.bernstein import bernstein_price
from app.services.pricing.chebyshev import cheb_delta, cheb_price
from app.services.pricing.errors import (
    NumericalFailureError,
    OrderCapExceededError,
    ParameterDomainError,
    PricingError,
    UnsupportedGreeksError,
)
from app.services.pricing.model import BasketContract, MarketModel, PriceResult, Window
from app.services.pricing.oracles import McConfig, margrabe_price, mc_price, quad_price
from app.services.pricing.taylor import taylor_price

__all__ = [
    "BasketContract",
    "McConfig",
    "MarketModel",
    "NumericalFailureError",
    "OrderCapExceededError",
    "ParameterDomainError",
    "PriceResult",
    "PricingError",
    "UnsupportedGreeksError",
    "Window",
    "bernstein_price",
    "cheb_delta",
    "cheb_price",
    "margrabe_price",
    "mc_price",
    "quad_price",
    "taylor_price",
]
