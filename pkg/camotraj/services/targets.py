"""Target (shadowee) trajectory models evaluable at arbitrary times."""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass, field
import logging
import math
from pathlib import Path
from typing import Literal, NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicSpline

from camotraj.exceptions import HorizonError, ReactiveTargetError, ScenarioConfigError
from camotraj.services.geometry import Vec3, as_vec3, as_vec3_array

logger = logging.getLogger(__name__)

# Absolute slack (s) on horizon checks so grids ending at tf survive rounding.
HORIZON_SLACK = 1e-9
MIN_SAMPLES = 4


class TargetState(NamedTuple):
    """Position, velocity and acceleration of a target at one instant."""

    position: Vec3
    velocity: Vec3
    acceleration: Vec3


class TargetStates(NamedTuple):
    """Row-aligned (n, 3) arrays of target states at many instants."""

    position: NDArray[np.float64]
    velocity: NDArray[np.float64]
    acceleration: NDArray[np.float64]


class TargetModel(ABC):
    """Base class for targets evaluable on the horizon ``[t0, tf]``."""

    __slots__ = ()

    t0: float
    tf: float

    def evaluate(self, t: float) -> TargetState:
        """Return the state at a single time."""

        states = self.evaluate_many([t])
        return TargetState(states.position[0], states.velocity[0], states.acceleration[0])

    def evaluate_many(self, times: ArrayLike) -> TargetStates:
        """Return states at every time in ``times`` after checking the horizon."""

        times = np.atleast_1d(np.asarray(times, dtype=np.float64))
        self._check_horizon(times)
        return self._evaluate_many(times)

    def position(self, t: float) -> Vec3:
        """Return the position at a single time."""

        return self.evaluate(t).position

    def _check_horizon(self, times: NDArray[np.float64]) -> None:
        """Raise when any requested time falls outside the model horizon."""

        if times.size == 0:
            return
        outside = (times < self.t0 - HORIZON_SLACK) | (times > self.tf + HORIZON_SLACK)
        if np.any(outside):
            bad = float(times[np.argmax(outside)])
            raise HorizonError(
                f"{type(self).__name__} is defined on [{self.t0:g}, {self.tf:g}] s",
                time=bad,
            )

    @abstractmethod
    def _evaluate_many(self, times: NDArray[np.float64]) -> TargetStates:
        """Return states for times already known to lie on the horizon."""


@dataclass(frozen=True, slots=True)
class ConstantVelocityTarget(TargetModel):
    """Target moving in a straight line at constant velocity from ``r0`` at ``t0``."""

    r0: Vec3
    v: Vec3
    t0: float = 0.0
    tf: float = math.inf

    def __post_init__(self) -> None:
        object.__setattr__(self, "r0", as_vec3(self.r0))
        object.__setattr__(self, "v", as_vec3(self.v))
        if self.tf <= self.t0:
            raise HorizonError(f"target horizon must satisfy tf > t0, got [{self.t0:g}, {self.tf:g}]")

    def _evaluate_many(self, times: NDArray[np.float64]) -> TargetStates:
        elapsed = (times - self.t0)[:, None]
        position = self.r0 + elapsed * self.v
        velocity = np.broadcast_to(self.v, position.shape).copy()
        return TargetStates(position, velocity, np.zeros_like(position))


@dataclass(frozen=True, slots=True)
class SampledTarget(TargetModel):
    """Target interpolated through samples by a natural cubic spline (C2)."""

    times: NDArray[np.float64]
    positions: NDArray[np.float64]
    _spline: CubicSpline = field(init=False, repr=False, compare=False)
    _velocity: CubicSpline = field(init=False, repr=False, compare=False)
    _acceleration: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        positions = as_vec3_array(self.positions)
        if times.size < MIN_SAMPLES:
            raise ScenarioConfigError(
                f"a sampled target needs at least {MIN_SAMPLES} samples for C2 interpolation, got {times.size}"
            )
        if positions.shape[0] != times.size:
            raise ScenarioConfigError("sample times and positions differ in length")
        if np.any(np.diff(times) <= 0):
            raise ScenarioConfigError("sample times must be strictly increasing")

        spline = CubicSpline(times, positions, axis=0, bc_type="natural")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "_spline", spline)
        object.__setattr__(self, "_velocity", spline.derivative(1))
        object.__setattr__(self, "_acceleration", spline.derivative(2))

    @property
    def t0(self) -> float:  # type: ignore[override]
        return float(self.times[0])

    @property
    def tf(self) -> float:  # type: ignore[override]
        return float(self.times[-1])

    def _evaluate_many(self, times: NDArray[np.float64]) -> TargetStates:
        return TargetStates(self._spline(times), self._velocity(times), self._acceleration(times))


@dataclass(frozen=True, slots=True)
class AnalyticTarget(TargetModel):
    """Target given by closed-form position, velocity and acceleration callables."""

    position_fn: Callable[[float], ArrayLike]
    velocity_fn: Callable[[float], ArrayLike]
    acceleration_fn: Callable[[float], ArrayLike]
    t0: float = 0.0
    tf: float = math.inf

    def _evaluate_many(self, times: NDArray[np.float64]) -> TargetStates:
        return TargetStates(
            as_vec3_array([as_vec3(self.position_fn(float(t))) for t in times]),
            as_vec3_array([as_vec3(self.velocity_fn(float(t))) for t in times]),
            as_vec3_array([as_vec3(self.acceleration_fn(float(t))) for t in times]),
        )


@dataclass(frozen=True, slots=True)
class ReactiveTarget(TargetModel):
    """Target steered by its own guidance law against the shadower.

    Its path depends on the shadower, so it only exists inside the joint
    integration of :func:`camotraj.services.guidance.simulate_mcpn`.
    """

    r0: Vec3
    v0: Vec3
    law: Literal["tpn"] = "tpn"
    gain: float | None = None
    t0: float = 0.0
    tf: float = math.inf

    def __post_init__(self) -> None:
        object.__setattr__(self, "r0", as_vec3(self.r0))
        object.__setattr__(self, "v0", as_vec3(self.v0))

    def _evaluate_many(self, times: NDArray[np.float64]) -> TargetStates:
        raise ReactiveTargetError(
            "reactive targets have no standalone path; integrate them with guidance.simulate_mcpn"
        )


def eval_target(model: TargetModel, t: float) -> TargetState:
    """Return (position, velocity, acceleration) of ``model`` at time ``t``."""

    return model.evaluate(t)


def sampled_from_function(
    f: Callable[[float], ArrayLike],
    t0: float,
    tf: float,
    n: int,
) -> SampledTarget:
    """Return a spline target through ``n`` evenly spaced samples of ``f``."""

    if n < MIN_SAMPLES:
        raise ScenarioConfigError(f"need at least {MIN_SAMPLES} samples for C2 interpolation, got {n}")
    if tf <= t0:
        raise HorizonError(f"sampling window must satisfy tf > t0, got [{t0:g}, {tf:g}]")

    times = np.linspace(t0, tf, n)
    positions = as_vec3_array([as_vec3(f(float(t))) for t in times])
    return SampledTarget(times, positions)


def circular_target(
    center: ArrayLike,
    radius: float,
    omega: float,
    *,
    phase: float = 0.0,
    t0: float = 0.0,
    tf: float = math.inf,
) -> AnalyticTarget:
    """Return a target circling ``center`` in the x-y plane at angular rate ``omega``."""

    center = as_vec3(center)

    def position(t: float) -> Vec3:
        angle = omega * t + phase
        return center + radius * np.array([math.cos(angle), math.sin(angle), 0.0])

    def velocity(t: float) -> Vec3:
        angle = omega * t + phase
        return radius * omega * np.array([-math.sin(angle), math.cos(angle), 0.0])

    def acceleration(t: float) -> Vec3:
        angle = omega * t + phase
        return -radius * omega * omega * np.array([math.cos(angle), math.sin(angle), 0.0])

    return AnalyticTarget(position, velocity, acceleration, t0=t0, tf=tf)


def load_sampled_target(path: str | Path) -> SampledTarget:
    """Load a target from a delimited text file with rows ``t, x, y[, z]``.

    Commas or whitespace separate columns; lines starting with ``#`` are skipped.
    """

    path = Path(path)
    text = path.read_text(encoding="utf-8")
    delimiter = "," if "," in text else None
    try:
        table = np.loadtxt(path, delimiter=delimiter, comments="#", ndmin=2)
    except ValueError as exc:
        raise ScenarioConfigError(f"could not parse target samples in {path}: {exc}") from exc

    if table.shape[1] not in (3, 4):
        raise ScenarioConfigError(f"{path} must have columns t, x, y[, z]; found {table.shape[1]}")

    logger.info("Loaded %s target samples from %s", table.shape[0], path)
    return SampledTarget(table[:, 0], table[:, 1:])
