"""Unit tests for target trajectory models."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from camotraj.exceptions import HorizonError, ReactiveTargetError, ScenarioConfigError
from camotraj.services.targets import (
    ConstantVelocityTarget,
    ReactiveTarget,
    SampledTarget,
    TargetState,
    circular_target,
    eval_target,
    load_sampled_target,
    sampled_from_function,
)


def test_constant_velocity_position_at_twelve_seconds(capture_target: ConstantVelocityTarget) -> None:
    """The capture engagement's target reaches (2430, -180, 870) at 12 s."""

    state = eval_target(capture_target, 12.0)

    assert isinstance(state, TargetState)
    np.testing.assert_allclose(state.position, [2430.0, -180.0, 870.0])
    np.testing.assert_allclose(state.velocity, [200.0, -20.0, 60.0])
    assert not np.any(state.acceleration)


def test_evaluate_many_returns_row_aligned_arrays(capture_target: ConstantVelocityTarget) -> None:
    """Batched evaluation returns one row per time."""

    states = capture_target.evaluate_many(np.linspace(0.0, 2.0, 5))

    assert states.position.shape == (5, 3)
    assert states.velocity.shape == (5, 3)
    np.testing.assert_allclose(states.position[-1], [430.0, 20.0, 270.0])


def test_evaluation_outside_horizon_raises_with_time() -> None:
    """Times past tf raise HorizonError carrying the offending time."""

    target = ConstantVelocityTarget([0.0, 0.0], [1.0, 0.0], tf=5.0)

    with pytest.raises(HorizonError) as excinfo:
        target.evaluate(6.0)

    assert excinfo.value.time == 6.0
    with pytest.raises(HorizonError):
        ConstantVelocityTarget([0.0, 0.0], [1.0, 0.0], t0=2.0, tf=1.0)


def test_sampled_target_reproduces_a_straight_line(data_dir: Path) -> None:
    """A natural spline through collinear samples is the line itself."""

    target = load_sampled_target(data_dir / "straight_target.csv")
    state = target.evaluate(6.5)

    assert target.t0 == 0.0
    assert target.tf == 12.0
    np.testing.assert_allclose(state.position, [1330.0, -70.0, 540.0], atol=1e-9)
    np.testing.assert_allclose(state.velocity, [200.0, -20.0, 60.0], atol=1e-9)
    np.testing.assert_allclose(state.acceleration, [0.0, 0.0, 0.0], atol=1e-9)


def test_sampled_target_rejects_short_or_unordered_samples() -> None:
    """C2 interpolation needs four strictly increasing samples."""

    with pytest.raises(ScenarioConfigError, match="at least 4"):
        SampledTarget(np.array([0.0, 1.0, 2.0]), np.zeros((3, 3)))

    with pytest.raises(ScenarioConfigError, match="increasing"):
        SampledTarget(np.array([0.0, 1.0, 1.0, 2.0]), np.zeros((4, 3)))


def test_load_sampled_target_accepts_whitespace_planar_files(tmp_path: Path) -> None:
    """Whitespace-separated t, x, y rows load with z = 0."""

    path = tmp_path / "planar.txt"
    path.write_text("# t x y\n0 0 0\n1 1 2\n2 2 4\n3 3 6\n", encoding="utf-8")

    target = load_sampled_target(path)

    np.testing.assert_allclose(target.position(1.5), [1.5, 3.0, 0.0], atol=1e-12)


def test_load_sampled_target_rejects_wrong_column_count(tmp_path: Path) -> None:
    """Only three or four columns describe a target."""

    path = tmp_path / "wide.csv"
    path.write_text("\n".join("0,1,2,3,4" for _ in range(4)), encoding="utf-8")

    with pytest.raises(ScenarioConfigError, match="columns"):
        load_sampled_target(path)


def test_circular_target_kinematics() -> None:
    """A circling target has speed r * omega and centripetal acceleration r * omega^2."""

    target = circular_target((10.0, 20.0), 5.0, 2.0)
    state = target.evaluate(0.7)

    np.testing.assert_allclose(target.position(0.0), [15.0, 20.0, 0.0])
    assert np.linalg.norm(state.velocity) == pytest.approx(10.0)
    assert np.linalg.norm(state.acceleration) == pytest.approx(20.0)
    assert float(state.velocity @ (state.position - np.array([10.0, 20.0, 0.0]))) == pytest.approx(0.0, abs=1e-9)


def test_sampled_from_function_matches_the_function() -> None:
    """Sampling a smooth function densely reproduces it between samples."""

    target = sampled_from_function(lambda t: (math.sin(t), math.cos(t), 0.0), 0.0, 2.0, 201)

    np.testing.assert_allclose(target.position(1.005), [math.sin(1.005), math.cos(1.005), 0.0], atol=1e-7)

    with pytest.raises(ScenarioConfigError):
        sampled_from_function(lambda t: (t, t, t), 0.0, 1.0, 3)


def test_reactive_target_cannot_be_evaluated_standalone() -> None:
    """A reactive target's path only exists inside the guidance loop."""

    target = ReactiveTarget([30.0, 60.0], [200.0, -20.0], gain=3.0)

    with pytest.raises(ReactiveTargetError):
        target.evaluate(0.0)
