"""Energy functional, engagement inference and the straight-line baseline."""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import simpson
from scipy.optimize import minimize

from camotraj.exceptions import CamouflageViolationError, DegenerateGeometryError, HorizonError
from camotraj.schemas.reports import EnergyReport
from camotraj.services.geometry import K_UPPER_SLACK, Vec3, as_vec3
from camotraj.services.kpath_analytic import (
    Engagement,
    KPath,
    PerturbedKPath,
    k_const_velocity,
    reconstruct_shadower,
)
from camotraj.services.targets import ConstantVelocityTarget
from camotraj.services.trajectory import Trajectory

logger = logging.getLogger(__name__)

DEFAULT_DT = 1e-3
INFERENCE_RESIDUAL = 1e-9
FIRST_VARIATION_EPS = 1e-4


class InferredEngagement(NamedTuple):
    """Static point and initial ratio data recovered from Cartesian states."""

    static_point: NDArray[np.float64]
    k0: float
    k0_dot: float


@dataclass(frozen=True, slots=True)
class PerturbationResult:
    """Energy change of one bump amplitude; ``delta_j`` is None when infeasible."""

    amplitude: float
    delta_j: float | None


@dataclass(frozen=True, slots=True)
class EnergyComparison:
    """Report plus both trajectories of an optimal-versus-straight comparison."""

    report: EnergyReport
    optimal: Trajectory
    baseline: Trajectory
    kpath: KPath
    engagement: Engagement


@dataclass(frozen=True, slots=True)
class GridOracleResult:
    """Outcome of brute-force minimization of the discretized energy."""

    times: NDArray[np.float64]
    k: NDArray[np.float64]
    energy: float
    iterations: int
    converged: bool


def energy_of(traj: Trajectory) -> float:
    """Return ``0.5 * int |vd|^2 dt`` by composite Simpson quadrature."""

    if len(traj) < 2:
        raise HorizonError("energy needs at least two samples")
    if not traj.is_uniform():
        raise HorizonError("energy quadrature needs uniformly spaced samples")

    power = 0.5 * np.einsum("ij,ij->i", traj.vd, traj.vd)
    return float(simpson(power, x=traj.times))


def uniform_times(t0: float, tf: float, dt: float) -> NDArray[np.float64]:
    """Return an evenly spaced grid from ``t0`` to ``tf`` with step at most ``dt``."""

    if not tf > t0:
        raise HorizonError(f"time grid needs tf > t0, got [{t0:g}, {tf:g}]")
    steps = max(2, math.ceil((tf - t0) / dt - 1e-9))
    return np.linspace(t0, tf, steps + 1)


def infer_engagement(
    xt0: ArrayLike,
    vt0: ArrayLike,
    xd0: ArrayLike,
    vd0: ArrayLike,
) -> InferredEngagement:
    """Return the static point, k0 and k0_dot consistent with both agents' states.

    Solves ``vd0 = k0 vt0 - beta (xd0 - xt0)`` with ``beta = k0_dot / (1 - k0)``.
    """

    xt0, vt0, xd0, vd0 = (as_vec3(value) for value in (xt0, vt0, xd0, vd0))
    offset = xd0 - xt0
    scale = float(np.linalg.norm(offset))
    if scale == 0.0:
        raise DegenerateGeometryError("shadower and target start at the same point")

    system = np.column_stack([vt0, -offset])
    solution, _, rank, _ = np.linalg.lstsq(system, vd0, rcond=None)
    if rank < 2:
        raise DegenerateGeometryError("target velocity is parallel to the shadower-target offset; system is singular")

    residual = float(np.linalg.norm(system @ solution - vd0))
    if residual > INFERENCE_RESIDUAL * max(float(np.linalg.norm(vd0)), float(np.linalg.norm(vt0)), 1.0):
        raise CamouflageViolationError(
            f"initial velocities admit no camouflaged engagement (residual {residual:.3g})"
        )

    k0, beta = float(solution[0]), float(solution[1])
    if k0 >= 1.0:
        raise CamouflageViolationError(f"inferred k0 = {k0:.6g} is not below 1")

    static_point = xt0 + offset / (1.0 - k0)
    k0_dot = beta * (1.0 - k0)
    logger.debug("Inferred engagement p=%s k0=%s k0_dot=%s", static_point, k0, k0_dot)
    return InferredEngagement(static_point, k0, k0_dot)


def straight_line_baseline(
    p: ArrayLike,
    target: ConstantVelocityTarget,
    d0: ArrayLike,
    interception: tuple[float, ArrayLike],
    *,
    times: ArrayLike | None = None,
    dt: float = DEFAULT_DT,
) -> Trajectory:
    """Return the camouflaged shadower that flies the straight segment ``d0 -> x_int``.

    Its position at ``t`` is where the segment meets the constraint line
    through ``p`` and ``rT(t)``, so the speed profile has no free parameter.
    """

    p, d0 = as_vec3(p), as_vec3(d0)
    t_int, x_int = float(interception[0]), as_vec3(interception[1])
    if times is None:
        times = uniform_times(target.t0, t_int, dt)
    times = np.asarray(times, dtype=np.float64)
    states = target.evaluate_many(times)

    segment = x_int - d0
    q = p - d0
    w = states.position - p
    w_dot = states.velocity
    a = np.cross(q, w)
    b = np.cross(segment, w)
    a_dot = np.cross(q, w_dot)
    b_dot = np.cross(segment, w_dot)

    b_sq = np.einsum("ij,ij->i", b, b)
    parallel = b_sq <= (1e-12 * float(np.linalg.norm(segment)) * np.linalg.norm(w, axis=1)) ** 2
    if np.any(parallel):
        raise DegenerateGeometryError(
            "constraint line is parallel to the straight segment",
            time=float(times[np.argmax(parallel)]),
        )

    ab = np.einsum("ij,ij->i", a, b)
    s = ab / b_sq
    outside = (s < -1e-9) | (s > 1.0 + 1e-9)
    if np.any(outside):
        raise DegenerateGeometryError(
            "constraint line misses the straight segment",
            time=float(times[np.argmax(outside)]),
        )

    ab_dot = np.einsum("ij,ij->i", a_dot, b) + np.einsum("ij,ij->i", a, b_dot)
    b_sq_dot = 2.0 * np.einsum("ij,ij->i", b, b_dot)
    s_dot = (ab_dot * b_sq - ab * b_sq_dot) / (b_sq * b_sq)

    rd = d0 + s[:, None] * segment
    vd = s_dot[:, None] * segment
    # Coplanar geometry keeps the segment on every constraint line; verify it.
    offsets = np.linalg.norm(np.cross(rd - p, w), axis=1) / np.einsum("ij,ij->i", w, w)
    if np.any(offsets > 1e-6):
        raise DegenerateGeometryError(
            "straight segment does not meet the constraint line",
            time=float(times[np.argmax(offsets > 1e-6)]),
        )

    alpha = p - states.position
    alpha_sq = np.einsum("ij,ij->i", alpha, alpha)
    k = np.einsum("ij,ij->i", p - rd, alpha) / alpha_sq
    k_dot = np.einsum("ij,ij->i", k[:, None] * states.velocity - vd, alpha) / alpha_sq
    ad = np.gradient(vd, times, axis=0, edge_order=2) if times.size > 2 else np.zeros_like(vd)

    return Trajectory.build(
        times,
        rd=rd,
        vd=vd,
        ad=ad,
        rt=states.position,
        vt=states.velocity,
        k=k,
        k_dot=k_dot,
        static_point=p,
    )


def _along_initial_velocity(p: Vec3, target: ConstantVelocityTarget, d0: Vec3, v0: Vec3, t_end: float) -> Vec3:
    """Return where the ray from ``d0`` along ``v0`` meets the constraint line at ``t_end``."""

    w = target.position(t_end) - p
    normal = np.cross(v0, w)
    normal_sq = float(normal @ normal)
    if normal_sq <= (1e-12 * float(np.linalg.norm(v0)) * float(np.linalg.norm(w))) ** 2:
        raise DegenerateGeometryError("initial velocity is parallel to the constraint line", time=t_end)
    reach = float(np.cross(p - d0, w) @ normal) / normal_sq
    if reach <= 0.0:
        raise DegenerateGeometryError("constraint line lies behind the initial velocity", time=t_end)
    return d0 + reach * v0


def compare_energy(
    xt0: ArrayLike,
    vt0: ArrayLike,
    xd0: ArrayLike,
    vd0: ArrayLike,
    *,
    tf: float,
    dt: float = DEFAULT_DT,
) -> EnergyComparison:
    """Compare the stationary path with the straight camouflaged baseline.

    The optimal path always starts from the given shadower state. When it
    captures within ``tf`` the baseline is the straight segment to the same
    capture. Otherwise both run to ``tf`` without capture: the baseline
    holds the initial velocity's direction, so the two share their start
    state, and ``end_separation`` reports how far apart they finish.
    """

    d0, v0 = as_vec3(xd0), as_vec3(vd0)
    inferred = infer_engagement(xt0, vt0, d0, v0)
    target = ConstantVelocityTarget(as_vec3(xt0), as_vec3(vt0))
    open_path = k_const_velocity(inferred.static_point, target, inferred.k0, inferred.k0_dot, tf=tf)
    capture = open_path.capture_time()

    if capture is not None and capture > target.t0:
        end = capture
        kpath: KPath = k_const_velocity(inferred.static_point, target, inferred.k0, inferred.k0_dot, tf=capture)
        source = "open"
        logger.info("Optimal path captures at t=%.6f s on its own", capture)
    else:
        end = tf
        kpath = open_path
        source = "horizon"
        logger.warning(
            "Optimal path with k0_dot=%.6g does not capture by tf=%s; comparing both paths from the shared start state to tf",
            inferred.k0_dot,
            tf,
        )

    engagement = Engagement(
        target=target,
        k0=inferred.k0,
        k0_dot=inferred.k0_dot,
        tf=end,
        mode="capture" if source == "open" else "open",
        static_point=inferred.static_point,
    )
    times = uniform_times(target.t0, end, dt)
    optimal = reconstruct_shadower(engagement, kpath, times)
    if source == "open":
        baseline_end = target.position(end)
    else:
        baseline_end = _along_initial_velocity(inferred.static_point, target, d0, v0, end)
    baseline = straight_line_baseline(inferred.static_point, target, d0, (end, baseline_end), times=times)

    j_optimal, j_baseline = energy_of(optimal), energy_of(baseline)
    report = EnergyReport(
        J_optimal=j_optimal,
        J_baseline=j_baseline,
        final_speed_optimal=optimal.final_speed,
        final_speed_baseline=baseline.final_speed,
        initial_speed_optimal=optimal.initial_speed,
        initial_speed_baseline=baseline.initial_speed,
        ratio=j_baseline / j_optimal,
        interception_time=end,
        interception_point=optimal.rd[-1].tolist(),
        capture_source=source,
        end_separation=float(np.linalg.norm(optimal.rd[-1] - baseline.rd[-1])),
        static_point=inferred.static_point.tolist(),
        k0=inferred.k0,
        k0_dot=inferred.k0_dot,
    )
    logger.info("Energy comparison: baseline uses %.4g times the optimal energy", report.ratio)
    return EnergyComparison(report, optimal, baseline, kpath, engagement)


def _path_energy(engagement: Engagement, kpath: KPath, times: NDArray[np.float64]) -> float:
    return energy_of(reconstruct_shadower(engagement, kpath, times))


def perturbation_test(
    kpath: KPath,
    engagement: Engagement,
    amplitudes: list[float],
    *,
    dt: float = DEFAULT_DT,
) -> list[PerturbationResult]:
    """Return the energy change of ``k + eps * bump`` for each amplitude.

    The bump vanishes at both ends of the path's domain; amplitudes that push
    k above 1 anywhere are reported with ``delta_j = None``.
    """

    times = uniform_times(kpath.t0, kpath.tf, dt)
    baseline_energy = _path_energy(engagement, kpath, times)
    results = []
    for amplitude in amplitudes:
        try:
            perturbed = _path_energy(engagement, PerturbedKPath(kpath, amplitude), times)
        except CamouflageViolationError:
            logger.info("Perturbation amplitude %s pushes k above 1; marked infeasible", amplitude)
            results.append(PerturbationResult(amplitude, None))
            continue
        results.append(PerturbationResult(amplitude, perturbed - baseline_energy))
    return results


def first_variation(
    kpath: KPath,
    engagement: Engagement,
    *,
    eps: float = FIRST_VARIATION_EPS,
    dt: float = DEFAULT_DT,
) -> float:
    """Return the central-difference derivative of J along the endpoint-vanishing bump."""

    times = uniform_times(kpath.t0, kpath.tf, dt)
    plus = _path_energy(engagement, PerturbedKPath(kpath, eps), times)
    minus = _path_energy(engagement, PerturbedKPath(kpath, -eps), times)
    return (plus - minus) / (2.0 * eps)


def grid_minimize(
    engagement: Engagement,
    k_start: float,
    k_end: float,
    t0: float,
    tf: float,
    *,
    n: int = 200,
) -> GridOracleResult:
    """Minimize the discretized energy over interior k values with fixed endpoints.

    Shadower positions on an ``n``-point grid follow from k by the constraint
    line; the energy sums ``0.5 |v|^2 h`` over forward-difference velocities.
    """

    if n < 3:
        raise HorizonError("grid oracle needs at least three points")
    if engagement.static_point is None:
        raise DegenerateGeometryError("grid oracle is defined for static-point engagements")

    times = np.linspace(t0, tf, n)
    h = float(times[1] - times[0])
    alpha = engagement.static_point - engagement.target.evaluate_many(times).position
    p = engagement.static_point

    def energy_and_gradient(interior: NDArray[np.float64]) -> tuple[float, NDArray[np.float64]]:
        k = np.concatenate([[k_start], interior, [k_end]])
        rd = p - k[:, None] * alpha
        velocity = np.diff(rd, axis=0) / h
        energy = 0.5 * h * float(np.einsum("ij,ij->", velocity, velocity))
        gradient = np.einsum("ij,ij->i", alpha[1:-1], velocity[1:] - velocity[:-1])
        return energy, gradient

    start = np.linspace(k_start, k_end, n)[1:-1]
    scale, _ = energy_and_gradient(start)
    scale = scale if scale > 0.0 else 1.0

    def objective(interior: NDArray[np.float64]) -> tuple[float, NDArray[np.float64]]:
        energy, gradient = energy_and_gradient(interior)
        return energy / scale, gradient / scale

    result = minimize(
        objective,
        start,
        jac=True,
        method="L-BFGS-B",
        bounds=[(None, 1.0 + K_UPPER_SLACK)] * start.size,
        options={"maxiter": 20000, "maxfun": 40000, "gtol": 1e-12, "ftol": 1e-15},
    )
    logger.info("Grid oracle finished after %s iterations: %s", result.nit, result.message)

    k = np.concatenate([[k_start], result.x, [k_end]])
    energy, _ = energy_and_gradient(result.x)
    return GridOracleResult(times, k, energy, int(result.nit), bool(result.success))
