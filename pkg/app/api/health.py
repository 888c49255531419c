"""Health check endpoint."""

from fastapi import APIRouter

from app import __version__
from app.config import get_settings

router = APIRouter(tags=["health"])


@router.get("/health")
async def health_check():
    """Return service status and the active engine caps."""
    settings = get_settings()
    return {
        "status": "ok",
        "version": __version__,
        "moment_order_cap": settings.moment_order_cap,
        "bernstein_order_cap": settings.bernstein_order_cap,
    }
