"""Market and contract parameters plus the conditional-law reduction.

Conditioning the two-asset payoff on the log-return of the second asset
Y = Y_T^(2) turns the basket price into a one-dimensional expectation:

    C_S = w1 * E[ exp(A + beta * Y) * C(Y) ],   beta = rho * sigma1 / sigma2

where C(y) is a Black-Scholes call on asset 1 with volatility
sigma = sqrt(1 - rho^2) * sigma1 and the random strike K(y) computed by
``strike_map``. Every pricing method (Bernstein, Chebyshev, Taylor and the
restricted-window oracle) starts from the ConditionalLaw built here.

Key design decisions:
- Parameters are validated once, at construction, so K(y) can be evaluated
  in hot loops without re-checking.
- |rho| = 1 is accepted and flagged; sigma_cond = 0 then routes C(y) to the
  deterministic-call branch of ``bs_call``.
- The correlation enters through correlated Brownian motions with a diagonal
  volatility loading, i.e. Y_T ~ N((r - diag(Sigma)/2) T, Sigma_rho T).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from app.services.pricing.errors import ParameterDomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MarketModel:
    """Risk-neutral bivariate geometric Brownian motion.

    Attributes:
        s1: Spot price of asset 1 (dollars).
        s2: Spot price of asset 2 (dollars).
        sigma1: Annualized volatility of asset 1.
        sigma2: Annualized volatility of asset 2.
        rho: Correlation of the driving Brownian motions.
        r: Annualized risk-free rate.
    """

    s1: float
    s2: float
    sigma1: float
    sigma2: float
    rho: float
    r: float

    def __post_init__(self) -> None:
        if not (self.s1 > 0 and self.s2 > 0):
            raise ParameterDomainError(
                f"Spot prices must be positive, got s1={self.s1}, s2={self.s2}"
            )
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ParameterDomainError(
                "Volatilities must be positive, got "
                f"sigma1={self.sigma1}, sigma2={self.sigma2}"
            )
        if not -1.0 <= self.rho <= 1.0:
            raise ParameterDomainError(f"Correlation must lie in [-1, 1], got {self.rho}")
        if self.r < 0:
            raise ParameterDomainError(f"Rate must be nonnegative, got {self.r}")
        if abs(self.rho) == 1.0:
            logger.warning(
                "Perfect correlation rho=%s: conditional volatility is zero", self.rho
            )

    @property
    def perfectly_correlated(self) -> bool:
        """True when |rho| = 1 and the conditional law degenerates."""
        return abs(self.rho) == 1.0

    def covariance(self, maturity: float) -> np.ndarray:
        """Return Sigma_rho * T, the covariance of the terminal log-returns."""
        off = self.rho * self.sigma1 * self.sigma2
        return maturity * np.array(
            [[self.sigma1**2, off], [off, self.sigma2**2]], dtype=float
        )

    def with_spots(self, s1: float | None = None, s2: float | None = None) -> MarketModel:
        """Copy of the model with shifted spot prices (used for sensitivities)."""
        return replace(
            self,
            s1=self.s1 if s1 is None else s1,
            s2=self.s2 if s2 is None else s2,
        )


@dataclass(frozen=True)
class BasketContract:
    """European call on w1 * S_T^(1) + w2 * S_T^(2) struck at K.

    Attributes:
        w1: Weight of asset 1 (must be positive; the reduction divides by it).
        w2: Weight of asset 2 (-1 for a spread).
        strike: Strike price K (dollars).
        maturity: Time to expiry T (years).
    """

    w1: float = 1.0
    w2: float = -1.0
    strike: float = 1.0
    maturity: float = 1.0

    def __post_init__(self) -> None:
        if not self.w1 > 0:
            raise ParameterDomainError(f"Weight w1 must be positive, got {self.w1}")
        if self.strike < 0:
            raise ParameterDomainError(f"Strike must be nonnegative, got {self.strike}")
        if not self.maturity > 0:
            raise ParameterDomainError(f"Maturity must be positive, got {self.maturity}")

    @property
    def is_spread(self) -> bool:
        """True for the (1, -1) weights of a spread contract."""
        return self.w1 == 1.0 and self.w2 == -1.0

    def payoff(self, s1_t: np.ndarray, s2_t: np.ndarray) -> np.ndarray:
        """Vectorized payoff (w1 S1 + w2 S2 - K)_+ at maturity."""
        return np.maximum(self.w1 * s1_t + self.w2 * s2_t - self.strike, 0.0)


@dataclass(frozen=True)
class ConditionalLaw:
    """Constants of the conditional-law reduction.

    Attributes:
        A: Exponent constant of the weight exp(A + beta * y).
        sigma_cond: Conditional volatility sqrt(1 - rho^2) * sigma1.
        mu_intercept: Intercept of the conditional mean mu(y).
        mu_slope: Slope beta = rho * sigma1 / sigma2 of mu(y).
        mean_y2: Mean (r - sigma2^2 / 2) T of Y_T^(2).
        sd_y2: Standard deviation sigma2 * sqrt(T) of Y_T^(2).
        r: Risk-free rate (carried for the exponent identity).
        maturity: T.
    """

    A: float
    sigma_cond: float
    mu_intercept: float
    mu_slope: float
    mean_y2: float
    sd_y2: float
    r: float
    maturity: float

    @property
    def tilt(self) -> float:
        """u = sigma1 * rho * sqrt(T), the exponential tilt in standard units."""
        return self.mu_slope * self.sd_y2

    def mu(self, y: float | np.ndarray) -> float | np.ndarray:
        """Conditional mean of Y_T^(1) given Y_T^(2) = y."""
        return self.mu_intercept + self.mu_slope * y

    def weight(self, y: float | np.ndarray) -> float | np.ndarray:
        """The measure-change weight exp(A + beta * y)."""
        return np.exp(self.A + self.mu_slope * y)

    def exponent_gap(self, y: float) -> float:
        """-(r - sigma^2/2) T + mu(y) - beta * y - A; identically zero."""
        drift = (self.r - 0.5 * self.sigma_cond**2) * self.maturity
        return -drift + self.mu(y) - self.mu_slope * y - self.A

    def standardize(self, y: float) -> float:
        """Map y to (y - mean_y2) / sd_y2; infinities pass through."""
        return (y - self.mean_y2) / self.sd_y2


@dataclass(frozen=True)
class Window:
    """Truncation interval [a, b] with its standardized counterpart.

    Attributes:
        a: Lower bound in log-return units.
        b: Upper bound in log-return units.
        a_std: (a - mean_y2) / sd_y2.
        b_std: (b - mean_y2) / sd_y2.
    """

    a: float
    b: float
    a_std: float
    b_std: float

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise ParameterDomainError(
                f"Window must satisfy a < b, got [{self.a}, {self.b}]"
            )

    @classmethod
    def from_bounds(cls, a: float, b: float, law: ConditionalLaw) -> Window:
        """Build a window and its standardized pair for the given law."""
        if not a < b:
            raise ParameterDomainError(f"Window must satisfy a < b, got [{a}, {b}]")
        return cls(a=a, b=b, a_std=law.standardize(a), b_std=law.standardize(b))

    @property
    def width(self) -> float:
        return self.b - self.a

    def contains(self, y: float | np.ndarray) -> bool | np.ndarray:
        return (y >= self.a) & (y <= self.b)


@dataclass(frozen=True)
class PriceResult:
    """Output of any pricing method.

    Attributes:
        value: Price (dollars).
        method: Method tag ("chebyshev", "bernstein", "taylor2", "mc", "quad", ...).
        order: Expansion order n, when applicable.
        quad_points: Trapezoid points N (Chebyshev) or quadrature nodes.
        window: Truncation window, when applicable.
        coefficients: Expansion coefficients or node values.
        std_error: Monte Carlo standard error.
        elapsed_seconds: Wall-clock pricing time.
        diagnostics: Free-form method-specific details.
    """

    value: float
    method: str
    order: int | None = None
    quad_points: int | None = None
    window: tuple[float, float] | None = None
    coefficients: tuple[float, ...] = ()
    std_error: float | None = None
    elapsed_seconds: float = 0.0
    diagnostics: dict = field(default_factory=dict)


def conditional_law(model: MarketModel, contract: BasketContract) -> ConditionalLaw:
    """Compute the constants of the conditional-law reduction.

    Args:
        model: Market parameters.
        contract: Basket contract (only the maturity enters the law).

    Returns:
        ConditionalLaw with A, sigma_cond, the affine coefficients of mu(y)
        and the mean / standard deviation of Y_T^(2).
    """
    s1v, s2v, rho, r = model.sigma1, model.sigma2, model.rho, model.r
    T = contract.maturity
    beta = s1v / s2v * rho
    A = -0.5 * beta * (rho * s1v * s2v + 2.0 * r - s2v**2) * T
    sigma_cond = math.sqrt(max(1.0 - rho * rho, 0.0)) * s1v
    mu_intercept = (r * (1.0 - beta) + 0.5 * s1v * s2v * rho - 0.5 * s1v**2) * T
    return ConditionalLaw(
        A=A,
        sigma_cond=sigma_cond,
        mu_intercept=mu_intercept,
        mu_slope=beta,
        mean_y2=(r - 0.5 * s2v**2) * T,
        sd_y2=s2v * math.sqrt(T),
        r=r,
        maturity=T,
    )


def strike_map(
    law: ConditionalLaw,
    model: MarketModel,
    contract: BasketContract,
    y: float | np.ndarray,
) -> float | np.ndarray:
    """Random strike K(y) of the conditional call.

    K(y) = e^{-A} (K e^{-beta y} - w2 s2 e^{(1 - beta) y}) / w1. May be
    negative for baskets with w2 > 0, in which case exercise is certain.
    """
    beta = law.mu_slope
    return (
        math.exp(-law.A)
        * (
            contract.strike * np.exp(-beta * y)
            - contract.w2 * model.s2 * np.exp((1.0 - beta) * y)
        )
        / contract.w1
    )


def strike_map_slope(
    law: ConditionalLaw,
    model: MarketModel,
    contract: BasketContract,
    y: float | np.ndarray,
) -> float | np.ndarray:
    """Analytic derivative K'(y) of ``strike_map``."""
    beta = law.mu_slope
    return (
        math.exp(-law.A)
        * (
            -beta * contract.strike * np.exp(-beta * y)
            - (1.0 - beta) * contract.w2 * model.s2 * np.exp((1.0 - beta) * y)
        )
        / contract.w1
    )


def strike_map_ds2(
    law: ConditionalLaw,
    contract: BasketContract,
    y: float | np.ndarray,
) -> float | np.ndarray:
    """Partial derivative of K(y) with respect to the spot s2."""
    return -contract.w2 / contract.w1 * math.exp(-law.A) * np.exp((1.0 - law.mu_slope) * y)
