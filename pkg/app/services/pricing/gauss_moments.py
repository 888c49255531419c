"""Truncated standard-normal moments.

Provides the Gaussian building blocks shared by every polynomial pricer:

- ``norm_pdf`` / ``norm_cdf``: standard normal density and distribution.
- ``truncated_power_moments``: mu_{a,b}(k) = E[Z^k 1_[a,b](Z)], k = 0..k_max.
- ``mixed_exp_moment``: E[e^{uZ} Z^m 1_[a,b](Z)], the m-th u-derivative of
  the truncated moment generating function M_Z(u, a, b).

The mixed moment is evaluated through the shift identity

    E[e^{uZ} Z^m 1_[a,b](Z)] = e^{u^2/2} sum_v C(m, v) u^{m-v} mu_{a-u,b-u}(v)

which carries the prefactor e^{+u^2/2}. A prefactor e^{-u^2/2} in front of
the derivative, as sometimes written in the closed-form Bernstein price,
does not match adaptive quadrature of e^{ux} x^m phi(x); the tests pin the
positive sign.

Key design decisions:
- Power moments come from the regularized incomplete gamma function, one
  order at a time. They satisfy the two-term recursion
  mu(k) = (k-1) mu(k-2) + a^{k-1} phi(a) - b^{k-1} phi(b) to rounding, but
  running that recursion forward loses all accuracy on narrow windows.
- Tails use the complementary function Q(s, x) so windows far from the
  origin keep full relative precision.
- Endpoints may be -inf / +inf; the endpoint terms vanish there.
- The shift identity cancels badly when |u| is large next to the window
  (the u^{m-v} terms alternate). Orders that would lose more than five
  digits are recomputed by composite Gauss-Legendre on the original window.
- Binomial weights switch to log-space magnitudes with tracked signs above
  ``log_space_order`` (large factorials overflow in the direct form).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammainc, gammaincc, gammaln, ndtr

from app.config import get_settings
from app.services.pricing.errors import OrderCapExceededError, ParameterDomainError

logger = logging.getLogger(__name__)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# A binomial mixed moment may lose this many digits before quadrature takes over.
_MAX_LOST_DIGITS = 5
_TINY = 1e-300
# e^{uz} phi(z) z^m is negligible further than this from u for every capped order.
_PANEL_REACH = 40.0
_PANEL_POINTS = 64


@dataclass(frozen=True)
class MomentTable:
    """Truncated power moments mu_{a,b}(k) for k = 0..order_max.

    Attributes:
        order_max: Highest order k stored.
        window: (a, b), extended reals allowed.
        values: values[k] = integral of x^k phi(x) over [a, b].
    """

    order_max: int
    window: tuple[float, float]
    values: tuple[float, ...]

    def __getitem__(self, k: int) -> float:
        return self.values[k]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def norm_pdf(x: float | np.ndarray) -> float | np.ndarray:
    """Standard normal density."""
    return np.exp(-0.5 * np.square(x) - _LOG_SQRT_2PI)


def norm_cdf(x: float | np.ndarray) -> float | np.ndarray:
    """Standard normal distribution function."""
    return ndtr(x)


def _check_window(a: float, b: float) -> None:
    if not a < b:
        raise ParameterDomainError(f"Inverted moment window [{a}, {b}]")


def _check_cap(order: int, cap: int | None) -> None:
    limit = get_settings().moment_order_cap if cap is None else cap
    if order < 0:
        raise ParameterDomainError(f"Moment order must be nonnegative, got {order}")
    if order > limit:
        raise OrderCapExceededError(f"Moment order {order} exceeds cap {limit}")


def _half_line_scale(ks: np.ndarray) -> np.ndarray:
    """2^{(k-1)/2} Gamma((k+1)/2) / sqrt(2 pi), the full half-line moment."""
    s = 0.5 * (ks + 1.0)
    return np.exp(0.5 * (ks - 1.0) * math.log(2.0) + gammaln(s) - _LOG_SQRT_2PI)


def _moments_nonneg(ks: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Moments on [lo, hi] with 0 <= lo < hi, via upper incomplete gamma."""
    s = 0.5 * (ks + 1.0)
    upper_lo = gammaincc(s, 0.5 * lo * lo)
    upper_hi = gammaincc(s, 0.5 * hi * hi) if math.isfinite(hi) else 0.0
    return _half_line_scale(ks) * (upper_lo - upper_hi)


def truncated_power_moments(
    k_max: int,
    a: float,
    b: float,
    *,
    cap: int | None = None,
) -> MomentTable:
    """Compute mu_{a,b}(k) = E[Z^k 1_[a,b](Z)] for k = 0..k_max.

    Args:
        k_max: Highest order.
        a: Lower endpoint (may be -inf).
        b: Upper endpoint (may be +inf).
        cap: Order cap; defaults to ``Settings.moment_order_cap``.

    Returns:
        MomentTable with k_max + 1 values.

    Raises:
        ParameterDomainError: If a >= b.
        OrderCapExceededError: If k_max exceeds the cap.
    """
    _check_window(a, b)
    _check_cap(k_max, cap)
    ks = np.arange(k_max + 1, dtype=float)
    parity = np.where(ks % 2 == 0, 1.0, -1.0)

    if a >= 0:
        values = _moments_nonneg(ks, a, b)
    elif b <= 0:
        # Reflect x -> -x: mu_{a,b}(k) = (-1)^k mu_{-b,-a}(k)
        values = parity * _moments_nonneg(ks, -b, -a)
    else:
        s = 0.5 * (ks + 1.0)
        lower_b = gammainc(s, 0.5 * b * b)
        lower_a = gammainc(s, 0.5 * a * a)
        values = _half_line_scale(ks) * (lower_b + parity * lower_a)

    return MomentTable(order_max=k_max, window=(a, b), values=tuple(float(v) for v in values))


def log_binom(n: int, k: int | np.ndarray) -> float | np.ndarray:
    """Natural log of the binomial coefficient C(n, k)."""
    return gammaln(n + 1.0) - gammaln(np.asarray(k) + 1.0) - gammaln(n - np.asarray(k) + 1.0)


def binomial_weights(m: int, x: float, *, log_space_order: int | None = None) -> np.ndarray:
    """Return w[v] = C(m, v) x^{m-v} for v = 0..m.

    Above ``log_space_order`` the magnitudes are accumulated as logarithms
    and the sign of x^{m-v} is tracked separately.
    """
    threshold = get_settings().log_space_order if log_space_order is None else log_space_order
    vs = np.arange(m + 1)
    powers = m - vs
    if x == 0.0:
        out = np.zeros(m + 1)
        out[m] = 1.0
        return out
    if m <= threshold:
        coeffs = np.array([math.comb(m, int(v)) for v in vs], dtype=float)
        return coeffs * np.power(x, powers.astype(float))
    signs = np.where((powers % 2 == 1) & (x < 0), -1.0, 1.0)
    logs = log_binom(m, vs) + powers * math.log(abs(x))
    return signs * np.exp(logs)


def mixed_exp_moments(
    u: float,
    m_max: int,
    a: float,
    b: float,
    *,
    cap: int | None = None,
) -> np.ndarray:
    """Vector of E[e^{uZ} Z^m 1_[a,b](Z)] for m = 0..m_max.

    One moment table on the shifted window [a - u, b - u] serves every m.
    Orders whose binomial sum would lose more than ``_MAX_LOST_DIGITS``
    are recomputed by panel Gauss-Legendre quadrature of the nonnegative
    weight on the original window.
    """
    _check_window(a, b)
    shifted = truncated_power_moments(m_max, a - u, b - u, cap=cap)
    if u == 0.0:
        return shifted.as_array()
    mu = shifted.as_array()
    mu_abs = _absolute_moments(m_max, a - u, b - u)
    scale = math.exp(0.5 * u * u)
    out = np.empty(m_max + 1)
    lost = np.zeros(m_max + 1)
    for m in range(m_max + 1):
        weights = binomial_weights(m, u)
        out[m] = scale * float(np.dot(weights, mu[: m + 1]))
        spread = float(np.dot(np.abs(weights), mu_abs[: m + 1]))
        lost[m] = spread * scale / max(abs(out[m]), _TINY)

    unstable = lost > 10.0**_MAX_LOST_DIGITS
    if unstable.any():
        logger.debug(
            "Mixed moments u=%g on [%g, %g]: quadrature for orders %s",
            u, a, b, np.flatnonzero(unstable).tolist(),
        )
        out[unstable] = _panel_mixed_moments(u, m_max, a, b)[unstable]
    return out


def _absolute_moments(k_max: int, a: float, b: float) -> np.ndarray:
    """E[|Z|^k 1_[a,b](Z)], the scale of the rounding in mu_{a,b}(k)."""
    ks = np.arange(k_max + 1, dtype=float)
    if a >= 0:
        return _moments_nonneg(ks, a, b)
    if b <= 0:
        return _moments_nonneg(ks, -b, -a)
    s = 0.5 * (ks + 1.0)
    upper = gammainc(s, 0.5 * b * b) if math.isfinite(b) else np.ones_like(ks)
    lower = gammainc(s, 0.5 * a * a) if math.isfinite(a) else np.ones_like(ks)
    return _half_line_scale(ks) * (upper + lower)


def _panel_mixed_moments(u: float, m_max: int, a: float, b: float) -> np.ndarray:
    """E[e^{uZ} Z^m 1_[a,b](Z)] by Gauss-Legendre on unit panels.

    The weight e^{uz} phi(z) = e^{u^2/2} phi(z - u) is negligible beyond
    ``_PANEL_REACH`` of u, so infinite endpoints are clipped there.
    """
    lo = max(a, u - _PANEL_REACH)
    hi = min(b, u + _PANEL_REACH)
    if not lo < hi:
        return np.zeros(m_max + 1)
    nodes, weights = gauss_legendre_panels(lo, hi, 1.0)
    orders = np.arange(m_max + 1)
    log_density = u * nodes - 0.5 * nodes * nodes - _LOG_SQRT_2PI
    # |z|^m in log space; high orders overflow as plain powers
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(nodes))
    exponents = np.outer(log_abs, orders.astype(float))
    exponents[:, 0] = 0.0
    signs = np.where((nodes[:, None] < 0) & (orders[None, :] % 2 == 1), -1.0, 1.0)
    terms = signs * np.exp(exponents + log_density[:, None])
    return weights @ terms


@lru_cache(maxsize=8)
def _legendre_rule(points: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(points)


def gauss_legendre_panels(
    lo: float, hi: float, panel_width: float, points: int = _PANEL_POINTS
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Gauss-Legendre on [lo, hi].

    The interval is cut into equal panels no wider than ``panel_width``.
    """
    panels = max(1, math.ceil((hi - lo) / panel_width))
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x, w = _legendre_rule(points)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def mixed_exp_moment(
    u: float,
    m: int,
    a: float,
    b: float,
    *,
    cap: int | None = None,
) -> float:
    """E[e^{uZ} Z^m 1_[a,b](Z)] for standard normal Z.

    Equals d^m M_Z(u, a, b) / du^m. At u = 0 it reduces exactly to the
    truncated power moment mu_{a,b}(m).

    Raises:
        ParameterDomainError: If a >= b.
        OrderCapExceededError: If m exceeds the cap.
    """
    return float(mixed_exp_moments(u, m, a, b, cap=cap)[m])


def tilted_tail_masses(u: float, a: float, b: float) -> tuple[float, float]:
    """E[e^{uZ} 1_{Z<a}] and E[e^{uZ} 1_{Z>b}], the Gaussian tails outside [a, b]."""
    _check_window(a, b)
    scale = math.exp(0.5 * u * u)
    return scale * float(norm_cdf(a - u)), scale * float(norm_cdf(u - b))
