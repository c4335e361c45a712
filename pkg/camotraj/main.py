"""FastAPI application entrypoint for the camouflage trajectory service."""

from __future__ import annotations

from contextlib import asynccontextmanager
import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from camotraj import __version__
from camotraj.config import settings
from camotraj.routers import health, scenarios

logging.basicConfig(
    level=settings.log_level.upper(),
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Log startup and shutdown; no solver state outlives a request."""

    logger.info("Camouflage trajectory service starting up (env=%s)", settings.app_env)
    yield
    logger.info("Camouflage trajectory service shut down")


app = FastAPI(
    title="Camouflage Trajectory API",
    version=__version__,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(health.router)
app.include_router(scenarios.router, prefix="/scenarios")
