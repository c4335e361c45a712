"""Pydantic schemas for run summaries and energy comparison reports."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator


class EnergyReport(BaseModel):
    """Optimal versus straight-line baseline energy for one interception."""

    J_optimal: float = Field(gt=0)
    J_baseline: float = Field(gt=0)
    final_speed_optimal: float
    final_speed_baseline: float
    initial_speed_optimal: float
    initial_speed_baseline: float
    ratio: float
    interception_time: float
    interception_point: list[float]
    capture_source: Literal["open", "horizon"]
    end_separation: float = Field(default=0.0, ge=0)
    static_point: list[float]
    k0: float
    k0_dot: float

    @model_validator(mode="after")
    def _check_ratio(self) -> EnergyReport:
        expected = self.J_baseline / self.J_optimal
        if abs(self.ratio - expected) > 1e-9 * expected:
            raise ValueError("ratio must equal J_baseline / J_optimal")
        return self

    def as_text_block(self) -> str:
        """Return the report as flat ``key = value`` lines."""

        lines = []
        for key, value in self.model_dump().items():
            if isinstance(value, list):
                value = " ".join(f"{item:.12g}" for item in value)
            elif isinstance(value, float):
                value = f"{value:.12g}"
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"


class RunSummary(BaseModel):
    """JSON summary written next to every scenario's data files."""

    scenario: str
    mode: str
    capture_time: float | None
    final_speed_shadower: float
    energy_J: float
    max_orthogonality_cos: float
    max_collinearity_dev: float
    ratio: float | None = None

    def to_payload(self) -> dict[str, object]:
        """Return the serializable payload; ``ratio`` only for energy comparisons."""

        payload = self.model_dump()
        if self.ratio is None:
            payload.pop("ratio")
        return payload
