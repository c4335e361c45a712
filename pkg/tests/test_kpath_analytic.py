"""Tests for closed-form k paths and shadower reconstruction."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.integrate import quad

from camotraj.exceptions import (
    CamouflageViolationError,
    DegenerateGeometryError,
    HorizonError,
    SingularityError,
)
from camotraj.services import kpath_analytic
from camotraj.services.geometry import collinearity_deviation, to_spherical
from camotraj.services.kpath_analytic import (
    Engagement,
    PerturbedKPath,
    SampledKPath,
    k_const_velocity,
    k_finite_horizon,
    k_infinity,
    k_quasi3d,
    k_range_linear,
    k_tpn_engagement,
    reconstruct_shadower,
    tpn_constants,
)
from camotraj.services.targets import ConstantVelocityTarget, circular_target

CAPTURE_K = [0.23983, 0.39215, 0.53495, 0.65299, 0.74400, 0.81269, 0.86481, 0.90503, 0.93667, 0.96206, 0.98279]


def test_finite_horizon_capture_constants(capture_point, capture_target) -> None:
    """Capture at 12 s fixes c2 and the whole k history."""

    path = k_finite_horizon(capture_point, capture_target, 0.1, 12.0)

    assert path.c1 == pytest.approx(0.1)
    assert path.c2 == pytest.approx(83858.50669, rel=1e-6)
    assert path.k(0.0) == pytest.approx(0.1)
    assert path.k(12.0) == pytest.approx(1.0, abs=1e-10)
    assert path.k_dot(0.0) == pytest.approx(0.1279306, rel=1e-5)
    assert path.k_dot(12.0) == pytest.approx(0.0157312, rel=1e-4)
    np.testing.assert_allclose(path.k(np.arange(1.0, 12.0)), CAPTURE_K, atol=1e-4)
    assert path.capture_time() == pytest.approx(12.0, abs=1e-6)


def test_finite_horizon_reconstruction_meets_the_target(capture_engagement, capture_point, capture_target) -> None:
    """At tf the shadower coincides with the target and every sample stays on its line."""

    path = k_finite_horizon(capture_point, capture_target, 0.1, 12.0)
    times = np.linspace(0.0, 12.0, 1201)
    traj = reconstruct_shadower(capture_engagement, path, times)

    initial_range = float(np.linalg.norm(capture_point - capture_target.position(0.0)))
    np.testing.assert_allclose(traj.rd[-1], [2430.0, -180.0, 870.0], atol=1e-6 * initial_range)
    assert traj.ranges[-1] <= 1e-6 * initial_range
    for rd, rt in zip(traj.rd, traj.rt):
        axis = float(np.linalg.norm(rt - capture_point))
        assert collinearity_deviation(capture_point, rt, rd) <= 1e-8 * axis


def test_stationary_path_acceleration_is_normal_to_line_of_sight(capture_engagement, capture_point, capture_target) -> None:
    """The optimal shadower only ever accelerates across its line of sight."""

    path = k_finite_horizon(capture_point, capture_target, 0.1, 12.0)
    traj = reconstruct_shadower(capture_engagement, path, np.linspace(0.0, 12.0, 241))

    los = capture_point - traj.rd
    cosines = np.abs(np.einsum("ij,ij->i", traj.ad, los)) / (
        np.linalg.norm(traj.ad, axis=1) * np.linalg.norm(los, axis=1)
    )
    assert cosines.max() < 1e-8
    assert np.linalg.norm(traj.ad[0]) == pytest.approx(49.0, abs=0.1)
    assert np.linalg.norm(traj.ad[-1]) == pytest.approx(2.11, abs=0.01)


def test_open_path_pursuit_captures_in_finite_time(capture_point, capture_target) -> None:
    """k0 = 0.1 and k0_dot = 0.2 rise monotonically and capture near 4.22 s."""

    path = k_const_velocity(capture_point, capture_target, 0.1, 0.2)
    capture = path.capture_time()

    assert path.c2 == pytest.approx(131100.0)
    assert capture == pytest.approx(4.224714488, rel=1e-8)
    values = path.k(np.linspace(0.0, capture, 200))
    assert np.all(np.diff(values) > 0.0)
    assert path.k(capture) == pytest.approx(1.0, abs=1e-9)


def test_open_path_escape_never_captures(capture_point, capture_target) -> None:
    """A negative k0_dot drives k below zero and the shadower never closes."""

    path = k_const_velocity(capture_point, capture_target, 0.1, -0.2)

    assert path.capture_time() is None
    assert path.k(2.0) == pytest.approx(-0.3567, abs=1e-3)
    assert path.k(12.0) == pytest.approx(-1.3070, abs=1e-3)


def test_stationary_target_gives_linear_k() -> None:
    """Against a stationary target k grows linearly from its initial data."""

    target = ConstantVelocityTarget([0.0, 0.0, 0.0], [0.0, 0.0, 0.0])
    p = [10.0, 0.0, 0.0]
    open_path = k_const_velocity(p, target, 0.2, 0.1)
    capture_path = k_finite_horizon(p, target, 0.0, 5.0)

    assert open_path.k(3.0) == pytest.approx(0.5)
    assert open_path.capture_time() == pytest.approx(8.0)
    assert capture_path.k(2.5) == pytest.approx(0.5)


def test_riding_the_target_is_stationary(capture_point, capture_target) -> None:
    """k0 = 1 with no rate keeps the shadower on the target and captures at once."""

    path = k_const_velocity(capture_point, capture_target, 1.0, 0.0)

    np.testing.assert_allclose(path.k(np.linspace(0.0, 10.0, 11)), 1.0)
    assert path.capture_time() == 0.0


def test_k_above_one_is_a_violation(capture_point, capture_target) -> None:
    """Evaluating past capture reports the first time k exceeds one."""

    path = k_const_velocity(capture_point, capture_target, 0.1, 0.2, tf=12.0)

    with pytest.raises(CamouflageViolationError) as excinfo:
        path.evaluate(np.linspace(0.0, 12.0, 121))

    assert excinfo.value.time == pytest.approx(4.3, abs=0.1)
    with pytest.raises(CamouflageViolationError):
        k_const_velocity(capture_point, capture_target, 1.2, 0.0)


def test_path_outside_domain_raises(capture_point, capture_target) -> None:
    """Finite paths refuse times past their horizon."""

    path = k_finite_horizon(capture_point, capture_target, 0.1, 12.0)

    with pytest.raises(HorizonError):
        path.k(13.0)
    assert path.domain == (0.0, 12.0)


def test_target_through_static_point_is_degenerate() -> None:
    """A target that crosses the static point breaks the constraint line."""

    target = ConstantVelocityTarget([0.0, 0.0, 0.0], [10.0, 0.0, 0.0])

    with pytest.raises(DegenerateGeometryError) as excinfo:
        k_finite_horizon([100.0, 0.0, 0.0], target, 0.1, 20.0)

    assert excinfo.value.time == pytest.approx(10.0)


def test_closed_forms_need_constant_velocity(capture_point) -> None:
    """Accelerating targets go to the numerical solver instead."""

    with pytest.raises(TypeError):
        k_const_velocity(capture_point, circular_target((0.0, 0.0), 100.0, 0.5), 0.1, 0.1)


def test_range_linear_path_constants(capture_point, capture_target) -> None:
    """The range-linear comparison path meets the same capture data."""

    path = k_range_linear(capture_point, capture_target, 0.1, tf=4.0)

    assert path.c1 == pytest.approx(204.189, abs=1e-3)
    assert path.c2 == pytest.approx(80.963, abs=1e-3)
    assert path.k(4.0) == pytest.approx(1.0, abs=1e-10)
    assert path.k(np.linspace(0.0, 4.0, 401)).max() <= 1.0 + 1e-9

    with pytest.raises(ValueError):
        k_range_linear(capture_point, capture_target, 0.1)


def test_range_linear_capture_rejects_a_chord_that_passes_the_target(capture_point, capture_target) -> None:
    """Over 12 s the linear k * range overtakes the range itself before tf."""

    with pytest.raises(CamouflageViolationError, match="exceeds 1") as excinfo:
        k_range_linear(capture_point, capture_target, 0.1, tf=12.0)

    assert excinfo.value.time == pytest.approx(5.674, abs=0.02)


def test_infinity_capture_closes_the_gap() -> None:
    """Camouflage at infinity with capture brings the agents together at tf."""

    target = ConstantVelocityTarget([-30.0, 150.0, 150.0], [200.0, -20.0, 60.0])
    e = target.position(0.0) - np.zeros(3)
    path = k_infinity(e, target, "capture", tf=6.0)
    engagement = Engagement(target=target, k0=1.0, tf=6.0, mode="capture", infinity_direction=e)
    traj = reconstruct_shadower(engagement, path, np.linspace(0.0, 6.0, 601))

    assert path.k(0.0) == pytest.approx(1.0)
    assert path.k(6.0) == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(traj.rd[0], [0.0, 0.0, 0.0], atol=1e-9)
    assert traj.ranges[-1] <= 1e-6 * np.linalg.norm(e)
    assert path.capture_time() == pytest.approx(6.0)


def test_infinity_tracking_holds_constant_distance(capture_target) -> None:
    """Tracking keeps the separation at |e| for the whole run."""

    e = capture_target.position(0.0)
    path = k_infinity(e, capture_target, "track", tf=12.0)
    engagement = Engagement(target=capture_target, k0=1.0, tf=12.0, mode="track", infinity_direction=e)
    traj = reconstruct_shadower(engagement, path, np.linspace(0.0, 12.0, 121))

    np.testing.assert_allclose(traj.ranges, np.linalg.norm(e), rtol=1e-6)
    np.testing.assert_allclose(traj.k, 1.0, atol=1e-12)


def test_infinity_open_path_moves_at_its_initial_rate(capture_target) -> None:
    """Against a constant-velocity target the open path is linear in time."""

    e = np.array([30.0, 60.0, 150.0])
    path = k_infinity(e, capture_target, "open", k0_dot=-0.25)

    assert path.k_dot(0.0) == pytest.approx(-0.25)
    assert path.k(2.0) == pytest.approx(0.5)
    assert path.capture_time() == pytest.approx(4.0)


def test_infinity_rejects_coincident_agents_and_accelerating_tracking(capture_target) -> None:
    """A zero direction is undefined and tracking needs constant velocity."""

    with pytest.raises(DegenerateGeometryError):
        k_infinity([0.0, 0.0, 0.0], capture_target, "capture", tf=6.0)

    with pytest.raises(TypeError):
        k_infinity([1.0, 0.0, 0.0], circular_target((0.0, 0.0), 10.0, 1.0), "track", tf=6.0)


def test_quasi3d_path_with_constant_range() -> None:
    """A target at constant range gives k linear in time."""

    path = k_quasi3d(0.2, 50.0, lambda t: 10.0, tf=10.0)

    assert path.k(1.0) == pytest.approx(0.7)
    assert path.k_dot(3.0) == pytest.approx(0.5)
    assert path.k_ddot(3.0) == pytest.approx(0.0, abs=1e-6)
    assert path.capture_time() == pytest.approx(1.6, abs=1e-9)


def test_quasi3d_path_with_linearly_growing_range() -> None:
    """A range R + v t integrates to k = c1 + c2 (1/R - 1/(R + v t)) / v."""

    c1, c2, start, rate = 0.1, 500.0, 100.0, 20.0
    path = k_quasi3d(c1, c2, lambda t: start + rate * t, tf=10.0, range_rate_fn=lambda t: rate)
    times = np.linspace(0.0, 10.0, 11)
    ranges = start + rate * times

    np.testing.assert_allclose(path.k(times), c1 + c2 * (1.0 / start - 1.0 / ranges) / rate, rtol=0.0, atol=1e-10)
    np.testing.assert_allclose(path.k_dot(times), c2 / ranges**2, rtol=1e-12)
    np.testing.assert_allclose(path.k_ddot(times), -2.0 * c2 * rate / ranges**3, rtol=1e-12)
    assert path.capture_time() is None


def test_quasi3d_quadrature_reads_the_configured_tolerance(monkeypatch: pytest.MonkeyPatch) -> None:
    """Without an explicit abs_tol the integral uses settings.quadrature_abs_tol."""

    tolerances: list[float] = []

    def recording_quad(func, a, b, **kwargs):
        tolerances.append(kwargs["epsabs"])
        return quad(func, a, b, **kwargs)

    monkeypatch.setattr(kpath_analytic, "quad", recording_quad)
    monkeypatch.setattr(kpath_analytic.settings, "quadrature_abs_tol", 1e-7)

    k_quasi3d(0.1, 500.0, lambda t: 100.0 + 20.0 * t, tf=10.0).k(2.0)
    assert tolerances == [1e-7]

    k_quasi3d(0.1, 500.0, lambda t: 100.0 + 20.0 * t, tf=10.0, abs_tol=1e-11).k(2.0)
    assert tolerances[-1] == 1e-11


def test_quasi3d_rejects_vanishing_range() -> None:
    """A zero target range is a singularity."""

    with pytest.raises(SingularityError):
        k_quasi3d(0.1, 1.0, lambda t: 0.0)


def test_tpn_constants_match_initial_polar_rates() -> None:
    """A and B reproduce the target's initial range rate and transverse speed."""

    p = np.array([2000.0, -1650.0, 0.0])
    polar0 = to_spherical(p, [30.0, 60.0, 0.0], [200.0, -20.0, 0.0])
    r0_dot = -356.423
    A, B = tpn_constants(polar0, 3.0, r0_dot)

    assert A == pytest.approx(912.526, abs=0.01)
    assert B == pytest.approx(-2.29927, abs=1e-4)
    assert A * np.cos(polar0.theta + B) + 3.0 * r0_dot == pytest.approx(polar0.r_dot)
    assert -A * np.sin(polar0.theta + B) == pytest.approx(polar0.r * polar0.theta_dot)


def test_tpn_engagement_path_rises_to_capture() -> None:
    """Against a TPN target k rises monotonically and reaches one."""

    p = np.array([2000.0, -1650.0, 0.0])
    polar0 = to_spherical(p, [30.0, 60.0, 0.0], [200.0, -20.0, 0.0])
    k0, k0_dot = 0.1, 0.08
    target_rate = polar0.r_dot
    r0_dot = (1.0 - k0) * target_rate - k0_dot * polar0.r
    path = k_tpn_engagement(polar0, 3.0, k0, k0_dot * polar0.r**2, r0_dot=r0_dot, tf=7.0)

    assert r0_dot == pytest.approx(-356.423, abs=1e-3)
    assert path.k_dot(0.0) == pytest.approx(k0_dot, rel=1e-9)
    values = path.k(np.linspace(0.0, 6.0, 61))
    assert np.all(np.diff(values) > 0.0)
    assert path.capture_time() == pytest.approx(6.6767, abs=0.01)


def test_perturbed_path_keeps_endpoints(capture_point, capture_target) -> None:
    """The bump vanishes at both ends of the domain."""

    base = k_finite_horizon(capture_point, capture_target, 0.1, 12.0)
    perturbed = PerturbedKPath(base, 0.02)

    assert perturbed.k(0.0) == pytest.approx(base.k(0.0))
    assert perturbed.k(12.0) == pytest.approx(base.k(12.0), abs=1e-12)
    assert perturbed.k(6.0) == pytest.approx(base.k(6.0) + 0.02)

    with pytest.raises(HorizonError):
        PerturbedKPath(k_const_velocity(capture_point, capture_target, 0.1, -0.2), 0.01)


def test_sample_returns_interpolating_spline(capture_point, capture_target) -> None:
    """A sampled copy agrees with the closed form between its nodes."""

    base = k_finite_horizon(capture_point, capture_target, 0.1, 12.0)
    sampled = base.sample(np.linspace(0.0, 12.0, 241))

    assert isinstance(sampled, SampledKPath)
    assert sampled.k(5.025) == pytest.approx(base.k(5.025), abs=1e-9)
    assert sampled.capture_time() == pytest.approx(12.0, abs=1e-6)


def test_engagement_validation(capture_target) -> None:
    """An engagement needs one geometry, a finite capture horizon and tracking only at infinity."""

    with pytest.raises(DegenerateGeometryError):
        Engagement(target=capture_target)
    with pytest.raises(DegenerateGeometryError):
        Engagement(target=capture_target, static_point=[0.0, 0.0, 0.0], infinity_direction=[1.0, 0.0, 0.0])
    with pytest.raises(HorizonError):
        Engagement(target=capture_target, mode="capture", static_point=[0.0, 0.0, 0.0])
    with pytest.raises(DegenerateGeometryError):
        Engagement(target=capture_target, tf=5.0, mode="track", static_point=[0.0, 0.0, 0.0])
