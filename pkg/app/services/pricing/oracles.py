"""Independent reference pricers.

- ``mc_price``: terminal-sampling Monte Carlo of the correlated log-returns,
  parallel and reproducible (one Philox substream per worker, fixed-order
  reduction).
- ``quad_price``: Gauss-Hermite quadrature over the second driver with the
  conditional lognormal call of asset 1 in closed form, refined by doubling.
- ``margrabe_price``: closed form of the exchange option (spread, K = 0).
- ``window_price`` / ``weighted_expectation``: adaptive quadrature of the
  one-dimensional conditional representation, optionally restricted to a
  window, to split truncation bias from polynomial error.

None of these share code with the polynomial pricers beyond the model types.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy import integrate

from app.config import get_settings
from app.services.pricing.bs_core import ConditionalPriceEvaluator
from app.services.pricing.errors import NumericalFailureError, ParameterDomainError
from app.services.pricing.gauss_moments import norm_cdf, norm_pdf
from app.services.pricing.model import BasketContract, MarketModel, PriceResult, Window

logger = logging.getLogger(__name__)

_MIN_QUAD_NODES = 64


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings.

    Attributes:
        paths: Number of simulated terminal pairs (>= 2).
        seed: Root seed of the SeedSequence.
        antithetic: Pair each draw with its negation.
        workers: Worker threads; each gets its own substream.
        batch_size: Draws generated per batch inside a worker.
    """

    paths: int
    seed: int = 42
    antithetic: bool = True
    workers: int = 1
    batch_size: int = 1_000_000

    def __post_init__(self) -> None:
        if self.paths < 2:
            raise ParameterDomainError(f"Need at least 2 paths, got {self.paths}")
        if not 0 <= self.seed < 2**64:
            raise ParameterDomainError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise ParameterDomainError(f"Need at least one worker, got {self.workers}")
        if self.batch_size < 1:
            raise ParameterDomainError(f"Batch size must be positive, got {self.batch_size}")

    @classmethod
    def from_settings(cls, paths: int | None = None, seed: int | None = None) -> McConfig:
        settings = get_settings()
        return cls(
            paths=settings.mc_paths if paths is None else paths,
            seed=settings.mc_seed if seed is None else seed,
            antithetic=settings.mc_antithetic,
            workers=settings.mc_workers,
            batch_size=settings.mc_batch_size,
        )


@dataclass(frozen=True)
class McResult:
    """Monte Carlo estimate.

    Attributes:
        price: Discounted mean payoff.
        std_error: Sample standard deviation over sqrt(samples); an
            antithetic pair counts as one sample.
        paths_used: Terminal pairs actually simulated.
    """

    price: float
    std_error: float
    paths_used: int

    def to_price_result(self, elapsed: float = 0.0) -> PriceResult:
        return PriceResult(
            value=self.price,
            method="mc",
            std_error=self.std_error,
            elapsed_seconds=elapsed,
            diagnostics={"paths_used": self.paths_used},
        )


def lower_factor(model: MarketModel, maturity: float) -> np.ndarray:
    """Lower-triangular L with L L^T = Sigma_rho T; valid at |rho| = 1 too."""
    if model.perfectly_correlated:
        root = math.sqrt(maturity)
        return root * np.array([[model.sigma1, 0.0], [model.rho * model.sigma2, 0.0]])
    return np.linalg.cholesky(model.covariance(maturity))


def simulate_log_returns(
    model: MarketModel, contract: BasketContract, normals: np.ndarray
) -> np.ndarray:
    """Map standard normals of shape (n, 2) to terminal log-returns (Y1, Y2)."""
    T = contract.maturity
    drift = (model.r - 0.5 * np.array([model.sigma1**2, model.sigma2**2])) * T
    return drift + normals @ lower_factor(model, T).T


def _discounted_payoff(
    model: MarketModel, contract: BasketContract, normals: np.ndarray
) -> np.ndarray:
    log_returns = simulate_log_returns(model, contract, normals)
    s1_t = model.s1 * np.exp(log_returns[:, 0])
    s2_t = model.s2 * np.exp(log_returns[:, 1])
    return math.exp(-model.r * contract.maturity) * contract.payoff(s1_t, s2_t)


@dataclass
class _Moments:
    """Running count / mean / sum of squared deviations (pairwise update)."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def merge(self, other: _Moments) -> None:
        if other.count == 0:
            return
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / total
        self.m2 += other.m2 + delta * delta * self.count * other.count / total
        self.count = total


def _worker(
    model: MarketModel,
    contract: BasketContract,
    cfg: McConfig,
    seed_seq: np.random.SeedSequence,
    samples: int,
) -> _Moments:
    rng = np.random.Generator(np.random.Philox(seed_seq))
    acc = _Moments()
    remaining = samples
    while remaining > 0:
        size = min(cfg.batch_size, remaining)
        normals = rng.standard_normal((size, 2))
        values = _discounted_payoff(model, contract, normals)
        if cfg.antithetic:
            values = 0.5 * (values + _discounted_payoff(model, contract, -normals))
        acc.merge(
            _Moments(
                count=size,
                mean=float(values.mean()),
                m2=float(np.sum((values - values.mean()) ** 2)),
            )
        )
        remaining -= size
    return acc


def _split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def mc_price(model: MarketModel, contract: BasketContract, cfg: McConfig) -> McResult:
    """Monte Carlo price of the basket call.

    Reproducible bit for bit for a fixed (seed, workers, batch_size).
    """
    samples = (cfg.paths + 1) // 2 if cfg.antithetic else cfg.paths
    counts = _split(samples, cfg.workers)
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.workers)

    started = time.perf_counter()
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [
            pool.submit(_worker, model, contract, cfg, stream, count)
            for stream, count in zip(streams, counts)
        ]
        partials = [future.result() for future in futures]

    total = _Moments()
    for part in partials:
        total.merge(part)
    variance = total.m2 / (total.count - 1) if total.count > 1 else 0.0
    std_error = math.sqrt(variance / total.count)
    paths_used = 2 * total.count if cfg.antithetic else total.count

    logger.debug(
        "MC price=%.6f se=%.2e paths=%d workers=%d in %.2fs",
        total.mean, std_error, paths_used, cfg.workers, time.perf_counter() - started,
    )
    return McResult(price=total.mean, std_error=std_error, paths_used=paths_used)


def _conditional_call(
    model: MarketModel, contract: BasketContract, z2: np.ndarray
) -> np.ndarray:
    """E[(w1 S1 + w2 S2 - K)_+ | Z2 = z2] with asset 1 lognormal given z2."""
    T = contract.maturity
    root = math.sqrt(T)
    s2_t = model.s2 * np.exp((model.r - 0.5 * model.sigma2**2) * T + model.sigma2 * root * z2)
    residual_var = max(1.0 - model.rho**2, 0.0) * model.sigma1**2 * T
    forward = model.s1 * np.exp(
        (model.r - 0.5 * model.sigma1**2) * T
        + model.rho * model.sigma1 * root * z2
        + 0.5 * residual_var
    )
    strike = (contract.strike - contract.w2 * s2_t) / contract.w1
    intrinsic = np.maximum(forward - strike, 0.0)
    if residual_var == 0.0:
        return contract.w1 * intrinsic

    vol = math.sqrt(residual_var)
    positive = strike > 0
    k_safe = np.where(positive, strike, 1.0)
    d1 = (np.log(forward / k_safe) + 0.5 * residual_var) / vol
    call = forward * norm_cdf(d1) - k_safe * norm_cdf(d1 - vol)
    return contract.w1 * np.where(positive, call, forward - strike)


def _hermite_price(model: MarketModel, contract: BasketContract, nodes: int) -> float:
    z, w = hermegauss(nodes)
    integrand = _conditional_call(model, contract, z)
    disc = math.exp(-model.r * contract.maturity)
    return disc * float(np.dot(w, integrand)) / math.sqrt(2.0 * math.pi)


def quad_price(model: MarketModel, contract: BasketContract, nodes: int | None = None) -> float:
    """Deterministic reference price by Gauss-Hermite quadrature.

    The node count doubles from ``nodes`` (default ``Settings.quad_nodes``)
    until two successive values differ by less than ``Settings.quad_tol``.

    Raises:
        ParameterDomainError: If fewer than 64 nodes are requested.
        NumericalFailureError: If the cap ``Settings.quad_max_nodes`` is hit
            before convergence.
    """
    settings = get_settings()
    current = settings.quad_nodes if nodes is None else nodes
    if current < _MIN_QUAD_NODES:
        raise ParameterDomainError(f"Need at least {_MIN_QUAD_NODES} nodes, got {current}")

    value = _hermite_price(model, contract, current)
    while 2 * current <= settings.quad_max_nodes:
        current *= 2
        refined = _hermite_price(model, contract, current)
        if abs(refined - value) < settings.quad_tol:
            return refined
        value = refined
    logger.error("Quadrature did not converge within %d nodes", settings.quad_max_nodes)
    raise NumericalFailureError(
        f"Quadrature did not reach tolerance {settings.quad_tol} within "
        f"{settings.quad_max_nodes} nodes (last value {value:.8f})"
    )


def margrabe_price(model: MarketModel, contract: BasketContract) -> float:
    """Exchange option value s1 N(d1) - s2 N(d2) at the contract maturity.

    Raises:
        ParameterDomainError: Unless the contract is a spread with K = 0.
    """
    if not (contract.is_spread and contract.strike == 0.0):
        raise ParameterDomainError(
            "Margrabe formula needs spread weights (1, -1) and strike 0, got "
            f"w=({contract.w1}, {contract.w2}), K={contract.strike}"
        )
    T = contract.maturity
    var = model.sigma1**2 + model.sigma2**2 - 2.0 * model.rho * model.sigma1 * model.sigma2
    vol = math.sqrt(max(var, 0.0) * T)
    if vol == 0.0:
        return max(model.s1 - model.s2, 0.0)
    d1 = (math.log(model.s1 / model.s2) + 0.5 * vol * vol) / vol
    return float(model.s1 * norm_cdf(d1) - model.s2 * norm_cdf(d1 - vol))


def weighted_expectation(
    model: MarketModel,
    contract: BasketContract,
    func: Callable[[float], float],
    window: Window | None = None,
) -> float:
    """w1 E[e^{A + beta Y} func(Y) 1_[a,b](Y)] by adaptive quadrature.

    Without a window the integral runs over the whole line.
    """
    evaluator = ConditionalPriceEvaluator.build(model, contract)
    law = evaluator.law
    lo, hi = (-math.inf, math.inf) if window is None else (window.a_std, window.b_std)

    def integrand(z: float) -> float:
        y = law.mean_y2 + law.sd_y2 * z
        return float(law.weight(y)) * float(func(y)) * float(norm_pdf(z))

    value, abserr = integrate.quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=400)
    if not math.isfinite(value):
        raise NumericalFailureError(f"Adaptive quadrature returned {value}")
    logger.debug("Weighted expectation=%.10f (abserr %.1e)", value, abserr)
    return contract.w1 * value


def window_price(
    model: MarketModel, contract: BasketContract, window: Window | None = None
) -> float:
    """Basket price restricted to Y in the window; the full price without one."""
    evaluator = ConditionalPriceEvaluator.build(model, contract)
    return weighted_expectation(model, contract, evaluator, window)
