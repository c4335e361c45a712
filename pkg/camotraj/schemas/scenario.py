"""Pydantic schemas for declarative engagement scenarios."""

from __future__ import annotations

from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

Vector = Annotated[list[float], Field(min_length=2, max_length=3)]

ScenarioMode = Literal["analytic", "ode", "guidance", "energy-compare", "infinity"]


class ConstantVelocitySpec(BaseModel):
    """Target moving in a straight line from ``position`` at t = 0."""

    kind: Literal["constant_velocity"]
    position: Vector
    velocity: Vector


class SampledSpec(BaseModel):
    """Target splined through a ``t, x, y[, z]`` sample file."""

    kind: Literal["sampled"]
    path: str


class CircularSpec(BaseModel):
    """Target circling ``center`` in the x-y plane."""

    kind: Literal["circular"]
    center: Vector
    radius: float = Field(gt=0)
    omega: float
    phase: float = 0.0


class ReactiveSpec(BaseModel):
    """Target flying true proportional navigation against the shadower."""

    kind: Literal["reactive"]
    position: Vector
    velocity: Vector
    gain: float | None = Field(default=None, gt=0)


TargetSpec = Annotated[
    ConstantVelocitySpec | SampledSpec | CircularSpec | ReactiveSpec,
    Field(discriminator="kind"),
]


class CartesianInitialConditions(BaseModel):
    """Both agents' initial states; the engagement is inferred from them."""

    target_position: Vector
    target_velocity: Vector
    shadower_position: Vector
    shadower_velocity: Vector


class ScenarioConfig(BaseModel):
    """One engagement scenario as stored in ``scenarios/*.json``."""

    model_config = ConfigDict(extra="forbid")

    name: str = Field(min_length=1, pattern=r"^[A-Za-z0-9_.-]+$")
    description: str = ""
    mode: ScenarioMode
    static_point: Vector | None = None
    infinity: bool = False
    shadower_position: Vector | None = None
    target: TargetSpec | None = None
    k0: float | None = Field(default=None, le=1.0)
    k0_dot: float | None = None
    initial_conditions: CartesianInitialConditions | None = None
    boundary: Literal["open", "capture", "track"] = "open"
    solution: Literal["optimal", "range-linear"] = "optimal"
    gain: float | None = Field(default=None, gt=0)
    integrator: Literal["semi-implicit-euler", "rk4"] = "semi-implicit-euler"
    tf: float = Field(gt=0)
    dt: float | None = Field(default=None, gt=0)
    ccl_interval: float | None = Field(default=None, gt=0)
    output_dir: str | None = None

    @model_validator(mode="after")
    def _check_consistency(self) -> ScenarioConfig:
        problems: list[str] = []
        has_ratio = self.k0 is not None or self.k0_dot is not None

        if self.mode == "energy-compare":
            if self.initial_conditions is None:
                problems.append("initial_conditions: required for energy-compare")
            if has_ratio:
                problems.append("k0: give either k0/k0_dot or initial_conditions, not both")
        elif self.mode == "infinity":
            if self.target is None:
                problems.append("target: required")
            if self.shadower_position is None:
                problems.append("shadower_position: required for camouflage at infinity")
            if self.boundary == "open" and self.k0_dot is None:
                problems.append("k0_dot: required for an open engagement")
            if self.static_point is not None:
                problems.append("static_point: not used for camouflage at infinity")
        else:
            if self.initial_conditions is not None and has_ratio:
                problems.append("k0: give either k0/k0_dot or initial_conditions, not both")
            if self.initial_conditions is None:
                if self.target is None:
                    problems.append("target: required")
                if self.k0 is None:
                    problems.append("k0: required unless initial_conditions are given")
                if self.boundary == "open" and self.k0_dot is None:
                    problems.append("k0_dot: required for an open engagement")
                if self.static_point is None:
                    problems.append("static_point: required unless initial_conditions are given")
            if self.boundary == "track":
                problems.append("boundary: track applies to camouflage at infinity only")

        if self.infinity != (self.mode == "infinity"):
            problems.append("infinity: must be true exactly when mode is infinity")
        if self.ccl_interval is not None and self.mode == "infinity":
            problems.append("ccl_interval: constraint lines at infinity are parallel; export the direction e instead")
        if self.ccl_interval is not None and self.dt is not None and self.ccl_interval < self.dt:
            problems.append("ccl_interval: must be at least dt")
        if self.mode == "guidance" and self.boundary == "capture":
            problems.append("boundary: guidance runs are open-ended")
        if self.mode != "analytic" and self.solution != "optimal":
            problems.append("solution: range-linear paths exist for analytic runs only")

        if problems:
            raise ValueError("; ".join(problems))
        return self
