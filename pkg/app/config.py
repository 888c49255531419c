"""Application configuration using pydantic-settings."""

from functools import lru_cache

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Engine settings loaded from environment variables and .env file."""

    app_title: str = "Basket Pricer"
    log_level: str = "INFO"

    # Order caps for the moment engine and the polynomial expansions
    moment_order_cap: int = 64
    bernstein_order_cap: int = 256
    log_space_order: int = 60

    # Chebyshev defaults (spread pricing use-case)
    cheb_order: int = 15
    cheb_quad_points: int = 100
    window_a: float = -4.0
    window_b: float = 0.25

    # Monte Carlo oracle
    mc_paths: int = 10_000_000
    mc_seed: int = 42
    mc_workers: int = 4
    mc_antithetic: bool = True
    mc_batch_size: int = 1_000_000

    # Gauss-Hermite quadrature oracle
    quad_nodes: int = 64
    quad_max_nodes: int = 512
    quad_tol: float = 1e-6

    model_config = {
        "env_prefix": "BASKET_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
    }


@lru_cache
def get_settings() -> Settings:
    """Return cached engine settings."""
    return Settings()
