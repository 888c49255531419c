"""FastAPI application entry point."""

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app import __version__
from app.api.health import router as health_router
from app.api.pricing import router as pricing_router
from app.config import get_settings

settings = get_settings()

logging.basicConfig(level=settings.log_level.upper())
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Log the engine configuration on startup."""
    logger.info(
        "Basket pricer started -- Chebyshev n=%d N=%d on [%g, %g], MC %d paths",
        settings.cheb_order,
        settings.cheb_quad_points,
        settings.window_a,
        settings.window_b,
        settings.mc_paths,
    )
    yield
    logger.info("Basket pricer shutdown complete")


app = FastAPI(
    title=settings.app_title,
    version=__version__,
    lifespan=lifespan,
)

# Local-only service, allow all origins
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(health_router)
app.include_router(pricing_router, prefix="/api")
