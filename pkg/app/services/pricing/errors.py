"""Exception hierarchy for the pricing engine.

Every error raised by ``app.services.pricing`` derives from PricingError so
callers (CLI, HTTP routers) can map failures to exit codes or status codes
without catching bare exceptions.
"""


class PricingError(Exception):
    """Base class for all pricing engine errors."""


class ParameterDomainError(PricingError, ValueError):
    """Market, contract, window or index parameters outside their domain."""


class OrderCapExceededError(ParameterDomainError):
    """An expansion or moment order above the configured cap."""


class UnsupportedGreeksError(PricingError):
    """Closed-form sensitivities requested where they are undefined (sigma = 0)."""


class NumericalFailureError(PricingError, RuntimeError):
    """Non-convergence or a non-finite result in a numerical routine."""
