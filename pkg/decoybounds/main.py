# decoybounds/main.py
"""
Entry point for the decoy-state bounds API.
Separate and global estimation of single-photon contributions for decoy-state
BB84 and MDI-QKD.
"""
import logging

import uvicorn
from fastapi import FastAPI

from decoybounds import __version__
from decoybounds.api.models import HealthResponse
from decoybounds.api.routes import router
from decoybounds.settings import settings

# Create FastAPI app
app = FastAPI(
    title="Decoy Bounds API",
    description="Separate and global decoy-state bounds on single-photon yields, "
    "error rates and secure key rates.",
    version=__version__,
)

# Include API routes
app.include_router(router)


@app.get(
    "/health",
    tags=["health"],
    response_model=HealthResponse,
    summary="Check service health",
)
async def health_check():
    """Returns the API's health status"""
    return HealthResponse(status="UP", version=__version__, message="Estimators ready")


@app.head("/health", tags=["health"], summary="Check service health (HEAD)")
async def health_check_head():
    """Returns the API's health status without body"""
    return None


def main():
    """Run the application with uvicorn"""
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s [%(levelname)s] [%(name)s] %(message)s",
    )
    uvicorn.run(app, host=settings.host, port=settings.port)


if __name__ == "__main__":
    main()
