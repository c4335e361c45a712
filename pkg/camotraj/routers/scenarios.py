"""Scenario endpoints for validating and running engagement configs."""

from __future__ import annotations

import asyncio
import logging
from pathlib import Path

from fastapi import APIRouter, HTTPException, status
from pydantic import ValidationError

from camotraj.config import settings
from camotraj.exceptions import CamouflageError
from camotraj.schemas.scenario import ScenarioConfig
from camotraj.services.scenario_runner import list_bundled, load_scenario, run_scenario

logger = logging.getLogger(__name__)

router = APIRouter(tags=["scenarios"])


async def _run(config: ScenarioConfig) -> dict[str, object]:
    """Run a scenario off the event loop and return its JSON summary."""

    try:
        result = await asyncio.to_thread(run_scenario, config)
    except CamouflageError as exc:
        logger.warning("Scenario %s failed: %s", config.name, exc)
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=f"scenario {config.name}: {exc}",
        ) from exc
    return result.summary.to_payload()


@router.post("/validate", response_model=ScenarioConfig)
async def validate_scenario(payload: ScenarioConfig) -> ScenarioConfig:
    """Return the normalized config; FastAPI rejects invalid bodies with 422."""

    return payload


@router.post("/run")
async def run_posted_scenario(payload: ScenarioConfig) -> dict[str, object]:
    """Run a posted scenario and return its summary."""

    return await _run(payload)


@router.get("/bundled")
async def get_bundled_scenarios() -> list[str]:
    """Return the names of the scenario files shipped with the service."""

    return list_bundled()


@router.post("/bundled/{name}/run")
async def run_bundled_scenario(name: str) -> dict[str, object]:
    """Run a bundled scenario by name."""

    if name not in list_bundled():
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail="Scenario not found.")

    try:
        config = load_scenario(Path(settings.scenario_dir) / f"{name}.json")
    except ValidationError as exc:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=exc.errors()) from exc
    return await _run(config)
