"""Schema exports for scenarios, summaries and energy reports."""

from camotraj.schemas.reports import EnergyReport, RunSummary
from camotraj.schemas.scenario import (
    CartesianInitialConditions,
    CircularSpec,
    ConstantVelocitySpec,
    ReactiveSpec,
    SampledSpec,
    ScenarioConfig,
)

__all__ = [
    "CartesianInitialConditions",
    "CircularSpec",
    "ConstantVelocitySpec",
    "EnergyReport",
    "ReactiveSpec",
    "RunSummary",
    "SampledSpec",
    "ScenarioConfig",
]
