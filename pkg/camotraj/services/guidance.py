"""Closed-loop motion-camouflage proportional navigation (MCPN) in the plane.

The shadower only uses quantities it can measure: the line of sight to the
target, its rate, and the camouflage ratio implied by the static point.
Its command ``a_D = k a_T + 2 k' rT theta'`` acts normal to the line of
sight, which keeps it on the camouflage constraint line. A reactive target
flies true proportional navigation, ``a_T = gain * r0_dot * theta'``.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from camotraj.exceptions import CamouflageViolationError, ScenarioConfigError, SingularityError
from camotraj.services.elode import OdeConfig
from camotraj.services.geometry import Vec3, as_vec3, los_rate
from camotraj.services.kpath_analytic import Engagement
from camotraj.services.targets import ConstantVelocityTarget, ReactiveTarget
from camotraj.services.trajectory import Trajectory

logger = logging.getLogger(__name__)

DEFAULT_TPN_GAIN = 3.0
CAPTURE_EPSILON = 1e-6
LOSS_TOLERANCE = 1e-3

Integrator = Literal["semi-implicit-euler", "rk4"]


@dataclass(slots=True)
class GuidanceState:
    """Measured two-body state at one instant of the loop."""

    rd: Vec3
    vd: Vec3
    rt: Vec3
    vt: Vec3
    t: float
    k: float
    k_dot: float
    theta_dot: float
    target_range: float

    @property
    def los_unit(self) -> Vec3:
        """Return the unit line of sight from shadower to target."""

        rel = self.rt - self.rd
        return rel / np.linalg.norm(rel)

    @property
    def normal(self) -> Vec3:
        """Return the line of sight rotated +90 degrees in the engagement plane."""

        los = self.los_unit
        return np.array([-los[1], los[0], 0.0])


@dataclass(frozen=True, slots=True)
class AccelRecord:
    """Line-of-sight components of both agents' accelerations at one step."""

    t: float
    a_r: float
    a_theta: float
    target_a_r: float
    target_a_theta: float


@dataclass(frozen=True, slots=True)
class SimulationResult:
    """Output of a closed-loop run."""

    trajectory: Trajectory
    accelerations: list[AccelRecord]
    target_accelerations: NDArray[np.float64]
    capture_time: float | None
    termination: Literal["capture", "horizon"]
    gain: float | None
    r0_dot: float


def measure_state(
    p: ArrayLike,
    rd: ArrayLike,
    vd: ArrayLike,
    rt: ArrayLike,
    vt: ArrayLike,
    t: float,
) -> GuidanceState:
    """Return the guidance state measured from positions and velocities."""

    p, rd, vd, rt, vt = (as_vec3(value) for value in (p, rd, vd, rt, vt))
    axis = rt - p
    target_range = float(np.linalg.norm(axis))
    unit = axis / target_range
    k = float((rd - p) @ unit) / target_range
    k_dot = (float(vd @ unit) - k * float(vt @ unit)) / target_range
    return GuidanceState(
        rd=rd,
        vd=vd,
        rt=rt,
        vt=vt,
        t=t,
        k=k,
        k_dot=k_dot,
        theta_dot=los_rate(rt - rd, vt - vd),
        target_range=target_range,
    )


def mcpn_accel(state: GuidanceState, a_t: ArrayLike) -> Vec3:
    """Return the MCPN command, normal to the line of sight."""

    normal = state.normal
    lateral = float(as_vec3(a_t) @ normal)
    magnitude = state.k * lateral + 2.0 * state.k_dot * state.target_range * state.theta_dot
    return magnitude * normal


def tpn_accel(state: GuidanceState, gain: float, r0_dot: float) -> Vec3:
    """Return the true proportional navigation command ``gain * r0_dot * theta'``."""

    return gain * r0_dot * state.theta_dot * state.normal


def _commands(
    px: float,
    py: float,
    y: list[float],
    tpn_factor: float | None,
) -> tuple[float, float, float, float, float, float, float, float]:
    """Return (aDx, aDy, aTx, aTy, k, los_x, los_y, rT) for the packed state ``y``.

    ``y`` holds ``rdx, rdy, vdx, vdy, rtx, rty, vtx, vty``.
    """

    rdx, rdy, vdx, vdy, rtx, rty, vtx, vty = y
    ax, ay = rtx - px, rty - py
    target_range = math.hypot(ax, ay)
    ex, ey = ax / target_range, ay / target_range
    k = ((rdx - px) * ex + (rdy - py) * ey) / target_range
    k_dot = ((vdx * ex + vdy * ey) - k * (vtx * ex + vty * ey)) / target_range

    relx, rely = rtx - rdx, rty - rdy
    rel = math.hypot(relx, rely)
    lx, ly = relx / rel, rely / rel
    nx, ny = -ly, lx
    theta_dot = (relx * (vty - vdy) - rely * (vtx - vdx)) / (rel * rel)

    target_lateral = 0.0 if tpn_factor is None else tpn_factor * theta_dot
    magnitude = k * target_lateral + 2.0 * k_dot * target_range * theta_dot
    return magnitude * nx, magnitude * ny, target_lateral * nx, target_lateral * ny, k, lx, ly, target_range


def simulate_mcpn(
    engagement: Engagement,
    gain: float | None,
    cfg: OdeConfig,
    *,
    integrator: Integrator = "semi-implicit-euler",
    capture_epsilon: float = CAPTURE_EPSILON,
    loss_tolerance: float = LOSS_TOLERANCE,
) -> SimulationResult:
    """Fly the shadower with MCPN against a plain or TPN-guided target.

    ``gain`` switches the target to TPN; a :class:`ReactiveTarget` always flies
    TPN, with its own gain when ``gain`` is None. The run ends before the
    first state where k reaches 1 or the range drops below
    ``capture_epsilon`` times the initial range.
    """

    target = engagement.target
    if isinstance(target, ReactiveTarget):
        gain = gain if gain is not None else (target.gain if target.gain is not None else DEFAULT_TPN_GAIN)
        rt0, vt0 = target.r0, target.v0
    elif isinstance(target, ConstantVelocityTarget):
        rt0, vt0 = target.position(target.t0), target.v
    else:
        raise TypeError(f"closed-loop guidance needs a constant-velocity or reactive target, got {type(target).__name__}")

    if engagement.static_point is None:
        raise ScenarioConfigError("closed-loop guidance needs a static point")
    p = engagement.static_point
    if any(abs(float(vector[2])) > 0.0 for vector in (p, rt0, vt0)):
        raise ScenarioConfigError("closed-loop guidance is planar; every z component must be 0")
    if cfg.tf <= cfg.t0:
        raise ScenarioConfigError("closed-loop guidance integrates forward only")

    k0, k0_dot = engagement.k0, engagement.k0_dot
    alpha0 = p - rt0
    rd0 = p - k0 * alpha0
    vd0 = k0 * vt0 - k0_dot * alpha0
    target_range0 = float(np.linalg.norm(alpha0))
    target_range_rate0 = float((rt0 - p) @ vt0) / target_range0
    r0_dot = (1.0 - k0) * target_range_rate0 - k0_dot * target_range0
    tpn_factor = None if gain is None else gain * r0_dot

    px, py = float(p[0]), float(p[1])
    y = [rd0[0], rd0[1], vd0[0], vd0[1], rt0[0], rt0[1], vt0[0], vt0[1]]
    y = [float(value) for value in y]
    initial_range = math.hypot(y[4] - y[0], y[5] - y[1])
    capture_range = capture_epsilon * initial_range
    dt = cfg.dt
    steps = max(1, math.ceil((cfg.tf - cfg.t0) / dt - 1e-9))

    logger.info(
        "Simulating MCPN for up to %s steps (dt=%s, %s target, %s)",
        steps,
        dt,
        "TPN" if tpn_factor is not None else "non-maneuvering",
        integrator,
    )

    times: list[float] = []
    rows: list[list[float]] = []
    commands: list[tuple[float, float, float, float]] = []
    ratios: list[tuple[float, float]] = []
    records: list[AccelRecord] = []
    capture_time: float | None = None

    for step in range(steps + 1):
        t = cfg.t0 + step * dt
        separation = math.hypot(y[4] - y[0], y[5] - y[1])
        if step > 0 and separation <= capture_range:
            capture_time = t
            break

        adx, ady, atx, aty, k, lx, ly, target_range = _commands(px, py, y, tpn_factor)
        if step > 0 and k >= 1.0:
            capture_time = t
            break

        offset = abs((y[0] - px) * (y[5] - py) - (y[1] - py) * (y[4] - px)) / target_range
        if offset > loss_tolerance * target_range:
            raise CamouflageViolationError(
                f"closed loop lost camouflage: deviation {offset / target_range:.3g} relative",
                time=t,
            )
        if not all(math.isfinite(value) for value in (adx, ady, atx, aty)):
            raise SingularityError("guidance gain overflowed before capture", time=t)

        k_dot = ((y[2] - k * y[6]) * (y[4] - px) + (y[3] - k * y[7]) * (y[5] - py)) / (target_range * target_range)
        times.append(t)
        rows.append(list(y))
        commands.append((adx, ady, atx, aty))
        ratios.append((k, k_dot))
        nx, ny = -ly, lx
        records.append(
            AccelRecord(
                t=t,
                a_r=adx * lx + ady * ly,
                a_theta=adx * nx + ady * ny,
                target_a_r=atx * lx + aty * ly,
                target_a_theta=atx * nx + aty * ny,
            )
        )
        if step == steps:
            break

        if integrator == "rk4":
            y = _rk4_step(px, py, y, tpn_factor, dt)
        else:
            y = _euler_step(y, (adx, ady, atx, aty), dt)

    termination: Literal["capture", "horizon"] = "capture" if capture_time is not None else "horizon"
    logger.info("MCPN run ended by %s after %s samples", termination, len(times))

    state = np.asarray(rows)
    accel = np.asarray(commands)
    zeros = np.zeros((state.shape[0], 1))
    trajectory = Trajectory.build(
        np.asarray(times),
        rd=np.hstack([state[:, 0:2], zeros]),
        vd=np.hstack([state[:, 2:4], zeros]),
        ad=np.hstack([accel[:, 0:2], zeros]),
        rt=np.hstack([state[:, 4:6], zeros]),
        vt=np.hstack([state[:, 6:8], zeros]),
        k=np.asarray(ratios)[:, 0],
        k_dot=np.asarray(ratios)[:, 1],
        static_point=p,
    )
    return SimulationResult(
        trajectory=trajectory,
        accelerations=records,
        target_accelerations=np.hstack([accel[:, 2:4], zeros]),
        capture_time=capture_time,
        termination=termination,
        gain=gain,
        r0_dot=r0_dot,
    )


def _euler_step(y: list[float], accel: tuple[float, float, float, float], dt: float) -> list[float]:
    """Advance velocities first, then positions with the new velocities."""

    adx, ady, atx, aty = accel
    vdx, vdy = y[2] + adx * dt, y[3] + ady * dt
    vtx, vty = y[6] + atx * dt, y[7] + aty * dt
    return [y[0] + vdx * dt, y[1] + vdy * dt, vdx, vdy, y[4] + vtx * dt, y[5] + vty * dt, vtx, vty]


def _rk4_step(px: float, py: float, y: list[float], tpn_factor: float | None, dt: float) -> list[float]:
    """Advance the packed two-body state by one classical RK4 step."""

    def derivative(state: list[float]) -> list[float]:
        adx, ady, atx, aty, *_ = _commands(px, py, state, tpn_factor)
        return [state[2], state[3], adx, ady, state[6], state[7], atx, aty]

    def shifted(base: list[float], slope: list[float], scale: float) -> list[float]:
        return [value + scale * rate for value, rate in zip(base, slope)]

    d1 = derivative(y)
    d2 = derivative(shifted(y, d1, 0.5 * dt))
    d3 = derivative(shifted(y, d2, 0.5 * dt))
    d4 = derivative(shifted(y, d3, dt))
    return [
        value + dt * (a + 2.0 * b + 2.0 * c + d) / 6.0
        for value, a, b, c, d in zip(y, d1, d2, d3, d4)
    ]
