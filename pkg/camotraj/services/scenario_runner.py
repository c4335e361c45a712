"""Scenario dispatch and data export for solvers and simulators."""

from __future__ import annotations

import asyncio
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
import json
import logging
import math
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike
import pandas as pd

from camotraj.config import settings
from camotraj.exceptions import ScenarioConfigError
from camotraj.schemas.reports import EnergyReport, RunSummary
from camotraj.schemas.scenario import ScenarioConfig
from camotraj.services.elode import OdeConfig, orthogonality_residual, solve_el_ode
from camotraj.services.energy import compare_energy, energy_of, infer_engagement, uniform_times
from camotraj.services.geometry import as_vec3, spherical_acceleration
from camotraj.services.guidance import AccelRecord, simulate_mcpn
from camotraj.services.kpath_analytic import (
    Engagement,
    KPath,
    k_const_velocity,
    k_finite_horizon,
    k_infinity,
    k_range_linear,
    reconstruct_shadower,
)
from camotraj.services.targets import (
    ConstantVelocityTarget,
    ReactiveTarget,
    SampledTarget,
    TargetModel,
    circular_target,
    load_sampled_target,
)
from camotraj.services.trajectory import Trajectory

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
TRAJECTORY_COLUMNS = [
    "t", "dx", "dy", "dz", "tx", "ty", "tz", "k", "k_dot",
    "vdx", "vdy", "vdz", "a_r", "a_theta", "J_cum",
]


@dataclass(slots=True)
class ScenarioResult:
    """Everything one scenario run produced, in memory and on disk."""

    config: ScenarioConfig
    summary: RunSummary
    trajectory: Trajectory
    output_dir: Path
    files: list[Path] = field(default_factory=list)
    accelerations: list[AccelRecord] | None = None
    baseline: Trajectory | None = None
    energy_report: EnergyReport | None = None
    ccl_count: int = 0


@dataclass(slots=True)
class _Outcome:
    trajectory: Trajectory
    capture_time: float | None
    ccl_target: TargetModel | None = None
    accelerations: list[AccelRecord] | None = None
    baseline: Trajectory | None = None
    energy_report: EnergyReport | None = None


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load a scenario file, resolving sample files relative to it."""

    path = Path(path)
    config = ScenarioConfig.model_validate_json(path.read_text(encoding="utf-8"))
    if config.target is not None and config.target.kind == "sampled":
        samples = Path(config.target.path)
        if not samples.is_absolute():
            target = config.target.model_copy(update={"path": str(path.parent / samples)})
            config = config.model_copy(update={"target": target})
    return config


def list_bundled(scenario_dir: str | Path | None = None) -> list[str]:
    """Return the names of bundled scenario files."""

    directory = Path(scenario_dir or settings.scenario_dir)
    return sorted(item.stem for item in directory.glob("*.json"))


def build_target(config: ScenarioConfig) -> TargetModel:
    """Return the target model a scenario describes."""

    if config.initial_conditions is not None:
        ic = config.initial_conditions
        return ConstantVelocityTarget(as_vec3(ic.target_position), as_vec3(ic.target_velocity))

    spec = config.target
    if spec is None:
        raise ScenarioConfigError(f"scenario {config.name} has no target")
    if spec.kind == "constant_velocity":
        return ConstantVelocityTarget(as_vec3(spec.position), as_vec3(spec.velocity))
    if spec.kind == "sampled":
        return load_sampled_target(spec.path)
    if spec.kind == "circular":
        return circular_target(spec.center, spec.radius, spec.omega, phase=spec.phase)
    return ReactiveTarget(as_vec3(spec.position), as_vec3(spec.velocity), gain=spec.gain)


def build_engagement(config: ScenarioConfig, target: TargetModel) -> Engagement:
    """Return the engagement for a static-point or infinity scenario."""

    if config.mode == "infinity":
        start = target.position(target.t0)
        direction = start - as_vec3(config.shadower_position)
        return Engagement(
            target=target,
            k0=1.0,
            k0_dot=config.k0_dot or 0.0,
            tf=config.tf,
            mode=config.boundary,
            infinity_direction=direction,
        )

    if config.initial_conditions is not None:
        ic = config.initial_conditions
        inferred = infer_engagement(
            ic.target_position,
            ic.target_velocity,
            ic.shadower_position,
            ic.shadower_velocity,
        )
        static_point, k0, k0_dot = inferred.static_point, inferred.k0, inferred.k0_dot
    else:
        static_point, k0, k0_dot = as_vec3(config.static_point), config.k0, config.k0_dot or 0.0

    return Engagement(
        target=target,
        k0=k0,
        k0_dot=k0_dot,
        tf=config.tf,
        mode=config.boundary,
        static_point=static_point,
    )


def effective_dt(config: ScenarioConfig, override: float | None = None) -> float:
    """Return the step: CLI override, then scenario, then settings default."""

    if override is not None:
        return override
    if config.dt is not None:
        return config.dt
    return settings.guidance_dt if config.mode == "guidance" else settings.ode_dt


def _truncated_grid(kpath: KPath, tf: float, dt: float) -> tuple[np.ndarray, float | None]:
    capture = kpath.capture_time()
    end = capture if capture is not None and capture > kpath.t0 else tf
    return uniform_times(kpath.t0, end, dt), capture


def _solve_analytic(config: ScenarioConfig, dt: float) -> _Outcome:
    target = build_target(config)
    if not isinstance(target, ConstantVelocityTarget):
        raise ScenarioConfigError("analytic mode needs a constant-velocity target; use mode 'ode' instead")
    engagement = build_engagement(config, target)
    p = engagement.static_point

    if config.boundary == "capture":
        if config.solution == "range-linear":
            kpath: KPath = k_range_linear(p, target, engagement.k0, tf=config.tf)
        else:
            kpath = k_finite_horizon(p, target, engagement.k0, config.tf)
    elif config.solution == "range-linear":
        kpath = replace(k_range_linear(p, target, engagement.k0, k0_dot=engagement.k0_dot), tf=config.tf)
    else:
        kpath = k_const_velocity(p, target, engagement.k0, engagement.k0_dot, tf=config.tf)

    if config.boundary == "capture":
        times, capture = uniform_times(kpath.t0, config.tf, dt), config.tf
    else:
        times, capture = _truncated_grid(kpath, config.tf, dt)
    trajectory = reconstruct_shadower(engagement, kpath, times)
    return _Outcome(trajectory, capture, ccl_target=target)


def _solve_ode(config: ScenarioConfig, dt: float) -> _Outcome:
    target = build_target(config)
    engagement = build_engagement(config, target)
    kpath = solve_el_ode(
        engagement.static_point,
        target,
        engagement.k0,
        engagement.k0_dot,
        OdeConfig(dt=dt, tf=config.tf, t0=target.t0),
    )

    nodes = kpath.times
    if kpath.capture_event is not None and nodes.size > 2:
        step = nodes[1] - nodes[0]
        if abs((nodes[-1] - nodes[-2]) - step) > 1e-9 * step:
            nodes = nodes[:-1]
    trajectory = reconstruct_shadower(engagement, kpath, nodes)
    return _Outcome(trajectory, kpath.capture_event, ccl_target=target)


def _solve_infinity(config: ScenarioConfig, dt: float) -> _Outcome:
    target = build_target(config)
    engagement = build_engagement(config, target)
    kpath = k_infinity(
        engagement.infinity_direction,
        target,
        config.boundary,
        k0_dot=config.k0_dot,
        tf=config.tf,
    )
    if config.boundary == "open":
        times, capture = _truncated_grid(kpath, config.tf, dt)
    else:
        times = uniform_times(kpath.t0, config.tf, dt)
        capture = config.tf if config.boundary == "capture" else None
    trajectory = reconstruct_shadower(engagement, kpath, times)
    return _Outcome(trajectory, capture)


def _simulate(config: ScenarioConfig, dt: float) -> _Outcome:
    target = build_target(config)
    engagement = build_engagement(config, target)
    gain = config.gain
    if isinstance(target, ReactiveTarget) and gain is None:
        gain = target.gain if target.gain is not None else settings.tpn_gain

    result = simulate_mcpn(
        engagement,
        gain,
        OdeConfig(dt=dt, tf=config.tf),
        integrator=config.integrator,
        capture_epsilon=settings.capture_epsilon,
        loss_tolerance=settings.camouflage_loss_tolerance,
    )
    trajectory = result.trajectory
    ccl_target = None
    if config.ccl_interval is not None:
        ccl_target = SampledTarget(trajectory.times, trajectory.rt)
    return _Outcome(trajectory, result.capture_time, ccl_target=ccl_target, accelerations=result.accelerations)


def _compare(config: ScenarioConfig, dt: float) -> _Outcome:
    ic = config.initial_conditions
    comparison = compare_energy(
        ic.target_position,
        ic.target_velocity,
        ic.shadower_position,
        ic.shadower_velocity,
        tf=config.tf,
        dt=dt,
    )
    report = comparison.report
    return _Outcome(
        comparison.optimal,
        report.interception_time if report.capture_source == "open" else None,
        ccl_target=comparison.engagement.target,
        baseline=comparison.baseline,
        energy_report=report,
    )


_DISPATCH = {
    "analytic": _solve_analytic,
    "ode": _solve_ode,
    "infinity": _solve_infinity,
    "guidance": _simulate,
    "energy-compare": _compare,
}


def ccl_times(t_end: float, interval: float, t0: float = 0.0) -> np.ndarray:
    """Return ``t0, t0 + interval, ...`` up to ``t_end`` inclusive."""

    count = math.floor((t_end - t0) / interval + 1e-9) + 1
    return t0 + interval * np.arange(count)


def export_ccls(
    p: ArrayLike | None,
    target: TargetModel,
    times: ArrayLike,
    path: str | Path,
) -> Path:
    """Write one constraint-line segment ``p -> rT(t)`` per time as CSV."""

    if p is None:
        raise ScenarioConfigError(
            "constraint lines at infinity are parallel; export the direction e instead of CCL segments"
        )
    p = as_vec3(p)
    times = np.asarray(times, dtype=np.float64)
    positions = target.evaluate_many(times).position
    frame = pd.DataFrame(
        {
            "t": times,
            "px": np.full(times.size, p[0]),
            "py": np.full(times.size, p[1]),
            "pz": np.full(times.size, p[2]),
            "tx": positions[:, 0],
            "ty": positions[:, 1],
            "tz": positions[:, 2],
        }
    )
    path = Path(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote %s constraint lines to %s", times.size, path)
    return path


def line_of_sight_components(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Return the shadower's radial and transverse acceleration at every sample.

    About a static point these are the e_r and e_theta components of the
    spherical frame; at infinity they are the components along and across e.
    """

    accel = traj.ad
    if traj.direction is not None:
        unit = traj.direction / np.linalg.norm(traj.direction)
        radial = accel @ unit
        transverse = np.linalg.norm(accel - radial[:, None] * unit, axis=1)
        return radial, transverse

    radial = np.zeros(len(traj))
    transverse = np.zeros(len(traj))
    for index, (rd, ad) in enumerate(zip(traj.rd, accel)):
        # Left at zero where the shadower sits on the static point.
        if np.any(rd != traj.static_point):
            radial[index], transverse[index], _ = spherical_acceleration(traj.static_point, rd, ad)
    return radial, transverse


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    """Return the trajectory as a frame in the published column order."""

    radial, transverse = line_of_sight_components(traj)
    data = {
        "t": traj.times,
        "dx": traj.rd[:, 0],
        "dy": traj.rd[:, 1],
        "dz": traj.rd[:, 2],
        "tx": traj.rt[:, 0],
        "ty": traj.rt[:, 1],
        "tz": traj.rt[:, 2],
        "k": traj.k,
        "k_dot": traj.k_dot,
        "vdx": traj.vd[:, 0],
        "vdy": traj.vd[:, 1],
        "vdz": traj.vd[:, 2],
        "a_r": radial,
        "a_theta": transverse,
        "J_cum": traj.cumulative_energy,
    }
    return pd.DataFrame(data, columns=TRAJECTORY_COLUMNS)


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def run_scenario(
    config: ScenarioConfig,
    *,
    output_dir: str | Path | None = None,
    dt: float | None = None,
    ccls_only: bool = False,
) -> ScenarioResult:
    """Run one scenario and write its data files.

    Files land in ``<output_dir>/<scenario name>/``: ``trajectory.csv``,
    ``summary.json`` and, when applicable, ``accelerations.csv``,
    ``ccls.csv``, ``baseline.csv`` and ``energy_report.txt``.
    """

    step = effective_dt(config, dt)
    base = Path(output_dir or config.output_dir or settings.output_dir)
    directory = base / config.name
    directory.mkdir(parents=True, exist_ok=True)
    logger.info("Running scenario %s (mode=%s, dt=%s)", config.name, config.mode, step)

    outcome = _DISPATCH[config.mode](config, step)
    trajectory = outcome.trajectory
    files: list[Path] = []

    ccl_count = 0
    if config.ccl_interval is not None:
        if outcome.ccl_target is None or trajectory.static_point is None:
            raise ScenarioConfigError(f"scenario {config.name} cannot export constraint lines")
        times = ccl_times(float(trajectory.times[-1]), config.ccl_interval, float(trajectory.times[0]))
        files.append(export_ccls(trajectory.static_point, outcome.ccl_target, times, directory / "ccls.csv"))
        ccl_count = int(times.size)

    residual = orthogonality_residual(trajectory) if len(trajectory) >= 3 else None
    summary = RunSummary(
        scenario=config.name,
        mode=config.mode,
        capture_time=outcome.capture_time,
        final_speed_shadower=trajectory.final_speed,
        energy_J=energy_of(trajectory),
        max_orthogonality_cos=0.0 if residual is None else residual.max_orthogonality_cos,
        max_collinearity_dev=0.0 if residual is None else residual.max_collinearity_dev,
        ratio=None if outcome.energy_report is None else outcome.energy_report.ratio,
    )

    if not ccls_only:
        files.append(_write_frame(trajectory_frame(trajectory), directory / "trajectory.csv"))
        if outcome.accelerations is not None:
            accel_frame = pd.DataFrame(
                [
                    (record.t, record.a_r, record.a_theta, record.target_a_r, record.target_a_theta)
                    for record in outcome.accelerations
                ],
                columns=["t", "a_r", "a_theta", "target_a_r", "target_a_theta"],
            )
            files.append(_write_frame(accel_frame, directory / "accelerations.csv"))
        if outcome.baseline is not None:
            files.append(_write_frame(trajectory_frame(outcome.baseline), directory / "baseline.csv"))
        if outcome.energy_report is not None:
            report_path = directory / "energy_report.txt"
            report_path.write_text(outcome.energy_report.as_text_block(), encoding="utf-8")
            files.append(report_path)
        summary_path = directory / "summary.json"
        summary_path.write_text(json.dumps(summary.to_payload(), indent=2) + "\n", encoding="utf-8")
        files.append(summary_path)

    logger.info("Scenario %s finished: capture_time=%s, %s files", config.name, outcome.capture_time, len(files))
    return ScenarioResult(
        config=config,
        summary=summary,
        trajectory=trajectory,
        output_dir=directory,
        files=files,
        accelerations=outcome.accelerations,
        baseline=outcome.baseline,
        energy_report=outcome.energy_report,
        ccl_count=ccl_count,
    )


async def run_batch(
    configs: Sequence[ScenarioConfig],
    *,
    output_dir: str | Path | None = None,
    dt: float | None = None,
    ccls_only: bool = False,
) -> list[ScenarioResult | BaseException]:
    """Run scenarios concurrently in worker threads; failures are returned, not raised."""

    names = [config.name for config in configs]
    if len(set(names)) != len(names):
        raise ScenarioConfigError("batch scenarios must have distinct names so outputs never collide")

    tasks = [
        asyncio.to_thread(run_scenario, config, output_dir=output_dir, dt=dt, ccls_only=ccls_only)
        for config in configs
    ]
    return list(await asyncio.gather(*tasks, return_exceptions=True))


__all__ = [
    "ScenarioResult",
    "build_engagement",
    "build_target",
    "ccl_times",
    "effective_dt",
    "export_ccls",
    "list_bundled",
    "load_scenario",
    "run_batch",
    "run_scenario",
    "trajectory_frame",
]
