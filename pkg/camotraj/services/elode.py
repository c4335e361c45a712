"""Numerical Euler-Lagrange solver for k(t) against arbitrary target paths.

With ``alpha = p - rT`` the stationary paths of the shadower's energy obey

    k'' (alpha . alpha) + 2 k' (alpha' . alpha) + k (alpha'' . alpha) = 0,

which says the shadower's acceleration ``-(k alpha)''`` is normal to the
line of sight. The ODE is integrated with fixed-step classical RK4.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from camotraj.exceptions import CamouflageViolationError, HorizonError, SingularityError
from camotraj.services.geometry import K_UPPER_SLACK, as_vec3
from camotraj.services.kpath_analytic import KPath, SampledKPath
from camotraj.services.targets import TargetModel
from camotraj.services.trajectory import Trajectory

logger = logging.getLogger(__name__)

SINGULARITY_FRACTION = 1e-9
# Accelerations below this share of the record's largest are treated as zero.
ZERO_ACCELERATION_FRACTION = 1e-9


class OdeConfig(BaseModel):
    """Fixed-step integration settings; ``tf < t0`` integrates backward."""

    model_config = ConfigDict(frozen=True)

    dt: float = Field(gt=0)
    tf: float
    t0: float = 0.0
    method: Literal["rk4"] = "rk4"

    @model_validator(mode="after")
    def _check_span(self) -> OdeConfig:
        if self.tf == self.t0:
            raise ValueError("tf must differ from t0")
        return self


@dataclass(frozen=True, slots=True)
class ResidualReport:
    """Orthogonality and collinearity diagnostics for a trajectory."""

    max_orthogonality_cos: float
    max_collinearity_dev: float
    orthogonality: NDArray[np.float64]
    collinearity: NDArray[np.float64]


def solve_el_ode(
    p: ArrayLike,
    target: TargetModel,
    k0: float,
    k0_dot: float,
    cfg: OdeConfig,
) -> SampledKPath:
    """Integrate the Euler-Lagrange ODE for k from ``(k0, k0_dot)`` at ``cfg.t0``.

    Integration stops at the first step where k reaches 1; the crossing is
    located on the step's Hermite interpolant and stored as the path's
    capture event.
    """

    if k0 > 1.0 + K_UPPER_SLACK:
        raise CamouflageViolationError(f"initial ratio k0 = {k0:g} places the shadower beyond the target")

    p = as_vec3(p)
    span = cfg.tf - cfg.t0
    steps = max(1, math.ceil(abs(span) / cfg.dt - 1e-9))
    h = span / steps
    half_times = cfg.t0 + 0.5 * h * np.arange(2 * steps + 1)
    half_times[-1] = cfg.tf

    states = target.evaluate_many(half_times)
    alpha = p - states.position
    a_sq = np.einsum("ij,ij->i", alpha, alpha)
    # alpha' = -vT and alpha'' = -aT.
    b_dot = -np.einsum("ij,ij->i", states.velocity, alpha)
    c_dot = -np.einsum("ij,ij->i", states.acceleration, alpha)

    floor = (SINGULARITY_FRACTION * math.sqrt(a_sq[0])) ** 2
    singular = np.flatnonzero(a_sq < floor)
    last_step = steps if singular.size == 0 else (int(singular[0]) - 1) // 2 - 1

    a_list, b_list, c_list = a_sq.tolist(), b_dot.tolist(), c_dot.tolist()

    def accel(index: int, k: float, k_dot: float) -> float:
        return -(2.0 * k_dot * b_list[index] + k * c_list[index]) / a_list[index]

    logger.info("Solving Euler-Lagrange ODE over [%s, %s] s with %s RK4 steps", cfg.t0, cfg.tf, steps)
    times = [cfg.t0]
    ks, k_dots, k_ddots = [k0], [k0_dot], [accel(0, k0, k0_dot)]
    k, k_dot = k0, k0_dot
    capture_event: float | None = None

    for step in range(steps):
        if step > last_step:
            raise SingularityError(
                "target reached the static point; alpha . alpha vanished",
                time=float(half_times[int(singular[0])]),
            )

        i0, i1, i2 = 2 * step, 2 * step + 1, 2 * step + 2
        q1, v1 = k_dot, accel(i0, k, k_dot)
        q2, v2 = k_dot + 0.5 * h * v1, accel(i1, k + 0.5 * h * q1, k_dot + 0.5 * h * v1)
        q3, v3 = k_dot + 0.5 * h * v2, accel(i1, k + 0.5 * h * q2, k_dot + 0.5 * h * v2)
        q4, v4 = k_dot + h * v3, accel(i2, k + h * q3, k_dot + h * v3)
        next_k = k + h * (q1 + 2.0 * q2 + 2.0 * q3 + q4) / 6.0
        next_k_dot = k_dot + h * (v1 + 2.0 * v2 + 2.0 * v3 + v4) / 6.0
        t_next = float(half_times[i2])

        if k < 1.0 <= next_k:
            step_spline = _step_spline(times[-1], t_next, k, next_k, k_dot, next_k_dot)
            capture_event = _locate_capture(step_spline, times[-1], t_next, next_k)
            logger.info("Capture event at t=%.6f s (k reached 1)", capture_event)
            if capture_event != times[-1]:
                times.append(capture_event)
                ks.append(1.0)
                k_dots.append(float(step_spline(capture_event, 1)))
                k_ddots.append(float(step_spline(capture_event, 2)))
            break

        k, k_dot = next_k, next_k_dot
        times.append(t_next)
        ks.append(k)
        k_dots.append(k_dot)
        k_ddots.append(accel(i2, k, k_dot))
    else:
        logger.info("Euler-Lagrange ODE reached the horizon without capture")

    order = slice(None) if h > 0 else slice(None, None, -1)
    return SampledKPath(
        np.asarray(times)[order],
        np.asarray(ks)[order],
        np.asarray(k_dots)[order],
        np.asarray(k_ddots)[order],
        capture_event=capture_event,
    )


def _step_spline(
    t_start: float,
    t_end: float,
    k_start: float,
    k_end: float,
    k_dot_start: float,
    k_dot_end: float,
) -> CubicHermiteSpline:
    """Return the cubic Hermite interpolant of k across one step, either direction."""

    if t_start < t_end:
        return CubicHermiteSpline([t_start, t_end], [k_start, k_end], [k_dot_start, k_dot_end])
    return CubicHermiteSpline([t_end, t_start], [k_end, k_start], [k_dot_end, k_dot_start])


def _locate_capture(spline: CubicHermiteSpline, t_start: float, t_end: float, k_end: float) -> float:
    """Return where the step interpolant of k crosses 1."""

    if k_end == 1.0:
        return t_end
    lo, hi = min(t_start, t_end), max(t_start, t_end)
    return float(brentq(lambda t: float(spline(t)) - 1.0, lo, hi, xtol=1e-15, rtol=1e-15))


def ode_residual(
    p: ArrayLike,
    target: TargetModel,
    kpath: KPath,
    times: ArrayLike,
) -> NDArray[np.float64]:
    """Return ``|k'' A + 2 k' B + k C|`` relative to the largest term at each time."""

    p = as_vec3(p)
    times = np.asarray(times, dtype=np.float64)
    states = target.evaluate_many(times)
    alpha = p - states.position
    k, k_dot, k_ddot = kpath.evaluate(times)
    terms = np.column_stack(
        [
            k_ddot * np.einsum("ij,ij->i", alpha, alpha),
            -2.0 * k_dot * np.einsum("ij,ij->i", states.velocity, alpha),
            -k * np.einsum("ij,ij->i", states.acceleration, alpha),
        ]
    )
    scale = np.max(np.abs(terms), axis=1)
    residual = np.abs(terms.sum(axis=1))
    return np.divide(residual, scale, out=np.zeros_like(residual), where=scale > 0.0)


def orthogonality_residual(traj: Trajectory) -> ResidualReport:
    """Return how far the trajectory's acceleration strays from normal to the line of sight.

    Accelerations are second differences of ``rd``; the line of sight is
    ``p - rd`` about a static point or the fixed direction ``e`` at infinity.
    """

    if len(traj) < 3:
        raise HorizonError("orthogonality residual needs at least three samples")
    if not traj.is_uniform():
        raise HorizonError("orthogonality residual needs uniformly spaced samples")

    rd = traj.rd
    accel = rd[2:] - 2.0 * rd[1:-1] + rd[:-2]
    if traj.direction is not None:
        los = np.broadcast_to(traj.direction, accel.shape)
    else:
        los = traj.static_point - rd[1:-1]

    accel_norm = np.linalg.norm(accel, axis=1)
    los_norm = np.linalg.norm(los, axis=1)
    peak = float(accel_norm.max(initial=0.0))
    usable = (accel_norm > ZERO_ACCELERATION_FRACTION * peak) & (accel_norm > 0.0) & (los_norm > 0.0)

    cosines = np.zeros(accel.shape[0])
    dots = np.abs(np.einsum("ij,ij->i", accel, los))
    np.divide(dots, accel_norm * los_norm, out=cosines, where=usable)

    collinearity = _collinearity_profile(traj)
    return ResidualReport(
        max_orthogonality_cos=float(cosines.max(initial=0.0)),
        max_collinearity_dev=float(collinearity.max(initial=0.0)),
        orthogonality=cosines,
        collinearity=collinearity,
    )


def _collinearity_profile(traj: Trajectory) -> NDArray[np.float64]:
    """Return the relative camouflage deviation of every sample."""

    separation = traj.rt - traj.rd
    if traj.direction is not None:
        e = traj.direction / np.linalg.norm(traj.direction)
        lengths = np.linalg.norm(separation, axis=1)
        crosses = np.linalg.norm(np.cross(separation, e), axis=1)
        return np.divide(crosses, lengths, out=np.zeros_like(lengths), where=lengths > 0.0)

    axis = traj.rt - traj.static_point
    axis_norm = np.linalg.norm(axis, axis=1)
    offsets = np.linalg.norm(np.cross(traj.rd - traj.static_point, axis), axis=1)
    return offsets / (axis_norm * axis_norm)
