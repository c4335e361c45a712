"""Closed-form camouflage ratio paths and shadower reconstruction.

A :class:`KPath` is an evaluable k(t) with its first two derivatives. The
static-point families keep ``k <= 1`` on their domain (capture is k = 1);
the infinity family measures ``rT - rD = k e`` and captures at k = 0.

For a constant-velocity target the stationary path of the energy integral
is ``k = c1 + c2 * I(t)`` with ``I(t) = int_0^t ds / |p - rT(s)|^2``. The
integral has a closed form in the angle swept by ``p - rT``, so no
quadrature is needed there.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass, field
import logging
import math
from typing import ClassVar, Literal, NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.optimize import brentq

from camotraj.config import settings
from camotraj.exceptions import (
    CamouflageViolationError,
    DegenerateGeometryError,
    HorizonError,
    SingularityError,
)
from camotraj.services.geometry import K_UPPER_SLACK, SphericalState, Vec3, as_vec3
from camotraj.services.targets import HORIZON_SLACK, ConstantVelocityTarget, TargetModel
from camotraj.services.trajectory import Trajectory

logger = logging.getLogger(__name__)

TPN_DT = 1e-3
SIN_SINGULARITY = 1e-12
CAPTURE_SCAN_POINTS = 1025

EngagementMode = Literal["open", "capture", "track"]


class KSamples(NamedTuple):
    """k, k_dot and k_ddot evaluated on a common time grid."""

    k: NDArray[np.float64]
    k_dot: NDArray[np.float64]
    k_ddot: NDArray[np.float64]


def _unwrap(values: NDArray[np.float64], scalar: bool) -> float | NDArray[np.float64]:
    return float(values[0]) if scalar else values


class KPath(ABC):
    """Evaluable camouflage ratio on the domain ``[t0, tf]``."""

    __slots__ = ()

    upper_bound: ClassVar[float | None] = 1.0
    capture_level: ClassVar[float] = 1.0
    capture_from_below: ClassVar[bool] = True

    t0: float
    tf: float

    @property
    def domain(self) -> tuple[float, float]:
        return (self.t0, self.tf)

    def k(self, t: float | ArrayLike) -> float | NDArray[np.float64]:
        """Return k at ``t``; raise if the path leaves its domain or exceeds one."""

        times, scalar = self._times(t)
        values = self._k(times)
        self._check_bound(times, values)
        return _unwrap(values, scalar)

    def k_dot(self, t: float | ArrayLike) -> float | NDArray[np.float64]:
        """Return the first time derivative of k at ``t``."""

        times, scalar = self._times(t)
        return _unwrap(self._k_dot(times), scalar)

    def k_ddot(self, t: float | ArrayLike) -> float | NDArray[np.float64]:
        """Return the second time derivative of k at ``t``."""

        times, scalar = self._times(t)
        return _unwrap(self._k_ddot(times), scalar)

    def evaluate(self, times: ArrayLike) -> KSamples:
        """Return k and its derivatives on ``times`` with the bound checked."""

        times, _ = self._times(times)
        values = self._k(times)
        self._check_bound(times, values)
        return KSamples(values, self._k_dot(times), self._k_ddot(times))

    def sample(self, times: ArrayLike) -> SampledKPath:
        """Return a spline copy of this path through ``times``."""

        samples = self.evaluate(times)
        return SampledKPath(
            np.asarray(times, dtype=np.float64),
            samples.k,
            samples.k_dot,
            samples.k_ddot,
            capture_event=self.capture_time(),
        )

    def capture_time(self) -> float | None:
        """Return the first time k reaches its capture level, or None.

        The default scans the domain and refines the first crossing with
        Brent's method, so it needs a finite horizon.
        """

        if not math.isfinite(self.tf):
            return None

        sign = 1.0 if self.capture_from_below else -1.0

        def gap(t: float) -> float:
            return sign * (float(self._k(np.array([t]))[0]) - self.capture_level)

        grid = np.linspace(self.t0, self.tf, CAPTURE_SCAN_POINTS)
        gaps = sign * (self._k(grid) - self.capture_level)
        reached = np.flatnonzero(gaps >= -K_UPPER_SLACK)
        if reached.size == 0:
            return None

        index = int(reached[0])
        if index == 0 or gaps[index] <= 0.0:
            return float(grid[index])
        return float(brentq(gap, grid[index - 1], grid[index], xtol=1e-14, rtol=1e-14))

    def _times(self, t: float | ArrayLike) -> tuple[NDArray[np.float64], bool]:
        scalar = np.ndim(t) == 0
        times = np.atleast_1d(np.asarray(t, dtype=np.float64))
        outside = (times < self.t0 - HORIZON_SLACK) | (times > self.tf + HORIZON_SLACK)
        if np.any(outside):
            raise HorizonError(
                f"{type(self).__name__} is defined on [{self.t0:g}, {self.tf:g}] s",
                time=float(times[np.argmax(outside)]),
            )
        return times, scalar

    def _check_bound(self, times: NDArray[np.float64], values: NDArray[np.float64]) -> None:
        if self.upper_bound is None:
            return
        above = values > self.upper_bound + K_UPPER_SLACK
        if np.any(above):
            index = int(np.argmax(above))
            raise CamouflageViolationError(
                f"k = {values[index]:.12g} exceeds 1; the shadower would pass the target",
                time=float(times[index]),
            )

    @abstractmethod
    def _k(self, times: NDArray[np.float64]) -> NDArray[np.float64]: ...

    @abstractmethod
    def _k_dot(self, times: NDArray[np.float64]) -> NDArray[np.float64]: ...

    @abstractmethod
    def _k_ddot(self, times: NDArray[np.float64]) -> NDArray[np.float64]: ...


def _sweep_integral(
    alpha0: Vec3,
    v: Vec3,
    tau: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Return ``int_0^tau ds / |alpha0 - v s|^2`` in closed form.

    With ``h = |alpha0 x v|`` the integral equals the angle swept by the
    line of sight divided by ``h``; for radial motion it is ``tau / (alpha0 . alpha)``.
    """

    h = float(np.linalg.norm(np.cross(alpha0, v)))
    alpha = alpha0[None, :] - tau[:, None] * v[None, :]
    projection = alpha @ alpha0
    if h > 0.0:
        return np.arctan2(tau * h, projection) / h
    return tau / projection


@dataclass(frozen=True, slots=True)
class ConstantVelocityKPath(KPath):
    """Stationary path ``k = c1 + c2 I(t)`` against a constant-velocity target."""

    p: Vec3
    target: ConstantVelocityTarget
    c1: float
    c2: float
    t0: float = 0.0
    tf: float = math.inf
    alpha0: Vec3 = field(init=False, repr=False)
    sweep_rate: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        p = as_vec3(self.p)
        alpha0 = p - self.target.position(self.t0)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "alpha0", alpha0)
        object.__setattr__(self, "sweep_rate", float(np.linalg.norm(np.cross(alpha0, self.target.v))))
        _check_target_misses_point(alpha0, self.target.v, self.t0, self.tf)

    def _tau(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        return times - self.t0

    def _alpha(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.alpha0[None, :] - self._tau(times)[:, None] * self.target.v[None, :]

    def _k(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.c1 + self.c2 * _sweep_integral(self.alpha0, self.target.v, self._tau(times))

    def _k_dot(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        alpha = self._alpha(times)
        return self.c2 / np.einsum("ij,ij->i", alpha, alpha)

    def _k_ddot(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        alpha = self._alpha(times)
        alpha_sq = np.einsum("ij,ij->i", alpha, alpha)
        return 2.0 * self.c2 * (alpha @ self.target.v) / (alpha_sq * alpha_sq)

    def capture_time(self) -> float | None:
        """Return the capture time from the swept-angle closed form, or None."""

        if self.c1 >= 1.0:
            return self.t0
        if self.c2 <= 0.0:
            return None

        target_sweep = (1.0 - self.c1) / self.c2
        alpha0_sq = float(self.alpha0 @ self.alpha0)
        closing = float(self.alpha0 @ self.target.v)
        if self.sweep_rate > 0.0:
            angle = self.sweep_rate * target_sweep
            if angle >= math.pi:
                return None
            denominator = self.sweep_rate * math.cos(angle) + closing * math.sin(angle)
            if denominator <= 0.0:
                return None
            tau = alpha0_sq * math.sin(angle) / denominator
        else:
            denominator = 1.0 + target_sweep * closing
            if denominator <= 0.0:
                return None
            tau = target_sweep * alpha0_sq / denominator

        capture = self.t0 + tau
        if capture > self.tf + HORIZON_SLACK:
            return None
        return min(capture, self.tf)


@dataclass(frozen=True, slots=True)
class RangeLinearKPath(KPath):
    """Camouflaged comparison path with ``k |p - rT|`` linear in time.

    It meets the same boundary data as the stationary path but does not
    keep the shadower's acceleration normal to the line of sight, so its
    energy is higher.
    """

    p: Vec3
    target: ConstantVelocityTarget
    c1: float
    c2: float
    t0: float = 0.0
    tf: float = math.inf

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", as_vec3(self.p))
        alpha0 = self.p - self.target.position(self.t0)
        _check_target_misses_point(alpha0, self.target.v, self.t0, self.tf)

    def _range_terms(self, times: NDArray[np.float64]):
        tau = times - self.t0
        alpha = (self.p - self.target.position(self.t0))[None, :] - tau[:, None] * self.target.v[None, :]
        s = np.linalg.norm(alpha, axis=1)
        if np.any(s == 0.0):
            raise SingularityError("target crosses the static point", time=float(times[np.argmin(s)]))
        speed_sq = float(self.target.v @ self.target.v)
        s_dot = -(alpha @ self.target.v) / s
        s_ddot = (speed_sq - s_dot * s_dot) / s
        return self.c1 * tau + self.c2, s, s_dot, s_ddot

    def _k(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        u, s, _, _ = self._range_terms(times)
        return u / s

    def _k_dot(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        u, s, s_dot, _ = self._range_terms(times)
        return self.c1 / s - u * s_dot / (s * s)

    def _k_ddot(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        u, s, s_dot, s_ddot = self._range_terms(times)
        return (-2.0 * self.c1 * s_dot - u * s_ddot) / (s * s) + 2.0 * u * s_dot * s_dot / s**3


@dataclass(frozen=True, slots=True)
class InfinityKPath(KPath):
    """Path for camouflage at infinity, ``k (e . e) = rT . e + c1 (t - t0) + c2``."""

    upper_bound: ClassVar[float | None] = None
    capture_level: ClassVar[float] = 0.0
    capture_from_below: ClassVar[bool] = False

    e: Vec3
    target: TargetModel
    c1: float
    c2: float
    t0: float = 0.0
    tf: float = math.inf

    def __post_init__(self) -> None:
        object.__setattr__(self, "e", as_vec3(self.e))

    @property
    def e_sq(self) -> float:
        return float(self.e @ self.e)

    def _k(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        position = self.target.evaluate_many(times).position
        return (position @ self.e + self.c1 * (times - self.t0) + self.c2) / self.e_sq

    def _k_dot(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        velocity = self.target.evaluate_many(times).velocity
        return (velocity @ self.e + self.c1) / self.e_sq

    def _k_ddot(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        return (self.target.evaluate_many(times).acceleration @ self.e) / self.e_sq

    def capture_time(self) -> float | None:
        """Return the time the agents coincide (k = 0), or None."""

        if not isinstance(self.target, ConstantVelocityTarget):
            return KPath.capture_time(self)

        start = float(self._k(np.array([self.t0]))[0])
        slope = (float(self.target.v @ self.e) + self.c1) / self.e_sq
        if start <= 0.0:
            return self.t0
        if slope >= 0.0:
            return None
        capture = self.t0 - start / slope
        if capture > self.tf + HORIZON_SLACK:
            return None
        return min(capture, self.tf)


@dataclass(frozen=True, slots=True)
class Quasi3DKPath(KPath):
    """Path ``k = c1 + c2 int_t0^t ds / rT(s)^2`` for a known target range history."""

    c1: float
    c2: float
    range_fn: Callable[[float], float]
    range_rate_fn: Callable[[float], float] | None = None
    t0: float = 0.0
    tf: float = math.inf
    abs_tol: float | None = None

    def _range(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        ranges = np.asarray([float(self.range_fn(float(t))) for t in times])
        bad = ~(ranges > 0.0) | ~np.isfinite(ranges)
        if np.any(bad):
            raise SingularityError("target range from the static point vanished", time=float(times[np.argmax(bad)]))
        return ranges

    def _integrand(self, s: float) -> float:
        r = float(self.range_fn(s))
        if not r > 0.0 or not math.isfinite(r):
            raise SingularityError("target range from the static point vanished", time=s)
        return 1.0 / (r * r)

    def integral(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        """Return ``int_t0^t ds / rT(s)^2`` at each time, accumulated piecewise."""

        times = np.atleast_1d(np.asarray(times, dtype=np.float64))
        order = np.argsort(times, kind="stable")
        accumulated = np.empty(times.size)
        tolerance = settings.quadrature_abs_tol if self.abs_tol is None else self.abs_tol
        previous, total = self.t0, 0.0
        for position, index in enumerate(order):
            t = float(times[index])
            if t > previous:
                total += quad(self._integrand, previous, t, epsabs=tolerance, limit=200)[0]
                previous = t
            accumulated[position] = total

        result = np.empty(times.size)
        result[order] = accumulated
        return result

    def _k(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.c2 == 0.0:
            return np.full(times.size, self.c1)
        return self.c1 + self.c2 * self.integral(times)

    def _k_dot(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        ranges = self._range(times)
        return self.c2 / (ranges * ranges)

    def _k_ddot(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        ranges = self._range(times)
        if self.range_rate_fn is not None:
            rates = np.asarray([float(self.range_rate_fn(float(t))) for t in times])
            return -2.0 * self.c2 * rates / ranges**3

        step = 1e-6
        upper = np.minimum(times + step, self.tf)
        lower = np.maximum(times - step, self.t0)
        return (self._k_dot(upper) - self._k_dot(lower)) / (upper - lower)

    def capture_time(self) -> float | None:
        """Return the time k reaches 1; k is monotone so one bracket suffices."""

        if self.c1 >= 1.0:
            return self.t0
        if self.c2 <= 0.0 or not math.isfinite(self.tf):
            return None

        def gap(t: float) -> float:
            return float(self._k(np.array([t]))[0]) - 1.0

        end_gap = gap(self.tf)
        if end_gap < -K_UPPER_SLACK:
            return None
        if end_gap <= 0.0:
            return self.tf
        return float(brentq(gap, self.t0, self.tf, xtol=1e-12, rtol=1e-14))


@dataclass(frozen=True, slots=True, kw_only=True)
class TpnKPath(Quasi3DKPath):
    """Quasi-3D path against a target flying true proportional navigation.

    The target's polar state about the static point follows
    ``rT' = A cos(theta + B) + gain * r0_dot`` and
    ``rT theta' = -A sin(theta + B)``; the range history is kept as a spline.
    """

    A: float
    B: float
    gain: float
    r0_dot: float
    polar0: SphericalState


@dataclass(frozen=True, slots=True)
class SampledKPath(KPath):
    """Cubic Hermite interpolant through samples of k and k_dot."""

    times: NDArray[np.float64]
    k_values: NDArray[np.float64]
    k_dot_values: NDArray[np.float64]
    k_ddot_values: NDArray[np.float64] | None = None
    capture_event: float | None = None
    _spline: CubicHermiteSpline = field(init=False, repr=False, compare=False)
    _rate_spline: CubicHermiteSpline | None = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        k_values = np.asarray(self.k_values, dtype=np.float64).reshape(-1)
        k_dot_values = np.asarray(self.k_dot_values, dtype=np.float64).reshape(-1)
        if times.size < 2 or np.any(np.diff(times) <= 0):
            raise HorizonError("a sampled k path needs at least two strictly increasing times")

        object.__setattr__(self, "times", times)
        object.__setattr__(self, "k_values", k_values)
        object.__setattr__(self, "k_dot_values", k_dot_values)
        object.__setattr__(self, "_spline", CubicHermiteSpline(times, k_values, k_dot_values))
        rate_spline = None
        if self.k_ddot_values is not None:
            k_ddot_values = np.asarray(self.k_ddot_values, dtype=np.float64).reshape(-1)
            object.__setattr__(self, "k_ddot_values", k_ddot_values)
            rate_spline = CubicHermiteSpline(times, k_dot_values, k_ddot_values)
        object.__setattr__(self, "_rate_spline", rate_spline)

    @property
    def t0(self) -> float:  # type: ignore[override]
        return float(self.times[0])

    @property
    def tf(self) -> float:  # type: ignore[override]
        return float(self.times[-1])

    def _k(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        return self._spline(times)

    def _k_dot(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        return self._spline(times, 1)

    def _k_ddot(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        if self._rate_spline is not None:
            return self._rate_spline(times, 1)
        return self._spline(times, 2)

    def capture_time(self) -> float | None:
        return self.capture_event


@dataclass(frozen=True, slots=True)
class PerturbedKPath(KPath):
    """``base + eps * sin(pi (t - t0) / (tf - t0))``, a bump vanishing at both ends."""

    base: KPath
    eps: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.base.tf):
            raise HorizonError("perturbations need a finite horizon")

    @property
    def t0(self) -> float:  # type: ignore[override]
        return self.base.t0

    @property
    def tf(self) -> float:  # type: ignore[override]
        return self.base.tf

    @property
    def _rate(self) -> float:
        return math.pi / (self.tf - self.t0)

    def bump(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        """Return the endpoint-vanishing bump at ``times``."""

        return np.sin(self._rate * (times - self.t0))

    def _k(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.base._k(times) + self.eps * self.bump(times)

    def _k_dot(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.base._k_dot(times) + self.eps * self._rate * np.cos(self._rate * (times - self.t0))

    def _k_ddot(self, times: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.base._k_ddot(times) - self.eps * self._rate**2 * self.bump(times)


@dataclass(frozen=True, slots=True)
class Engagement:
    """A full scenario: geometry, target, initial ratio data and horizon."""

    target: TargetModel
    k0: float = 0.0
    k0_dot: float = 0.0
    tf: float = math.inf
    mode: EngagementMode = "open"
    static_point: Vec3 | None = None
    infinity_direction: Vec3 | None = None
    t0: float = 0.0

    def __post_init__(self) -> None:
        if (self.static_point is None) == (self.infinity_direction is None):
            raise DegenerateGeometryError("an engagement needs exactly one of static_point or infinity_direction")
        if self.static_point is not None:
            object.__setattr__(self, "static_point", as_vec3(self.static_point))
        if self.infinity_direction is not None:
            object.__setattr__(self, "infinity_direction", as_vec3(self.infinity_direction))
        if self.mode == "capture" and not math.isfinite(self.tf):
            raise HorizonError("capture engagements need a finite horizon")
        if self.mode == "track" and self.infinity_direction is None:
            raise DegenerateGeometryError("constant-distance tracking is defined for camouflage at infinity only")

    @property
    def is_infinity(self) -> bool:
        return self.infinity_direction is not None


def _require_constant_velocity(target: TargetModel) -> ConstantVelocityTarget:
    if not isinstance(target, ConstantVelocityTarget):
        raise TypeError(f"a constant-velocity target is required, got {type(target).__name__}")
    return target


def _check_target_misses_point(alpha0: Vec3, v: Vec3, t0: float, tf: float) -> None:
    """Raise when the target passes through the static point on ``[t0, tf]``."""

    if not np.any(alpha0):
        raise DegenerateGeometryError("target starts on the static point; the constraint line is undefined", time=t0)
    if np.linalg.norm(np.cross(alpha0, v)) > 0.0:
        return

    closing = float(alpha0 @ v)
    if closing <= 0.0:
        return
    crossing = t0 + float(alpha0 @ alpha0) / closing
    if crossing <= tf:
        raise DegenerateGeometryError("target passes through the static point", time=crossing)


def _check_k0(k0: float) -> None:
    if k0 > 1.0 + K_UPPER_SLACK:
        raise CamouflageViolationError(f"initial ratio k0 = {k0:g} places the shadower beyond the target")


def k_const_velocity(
    p: ArrayLike,
    target: TargetModel,
    k0: float,
    k0_dot: float,
    *,
    tf: float | None = None,
) -> ConstantVelocityKPath:
    """Return the open-ended stationary path with ``k(t0) = k0`` and ``k'(t0) = k0_dot``."""

    target = _require_constant_velocity(target)
    _check_k0(k0)
    p = as_vec3(p)
    alpha0 = p - target.position(target.t0)
    c2 = k0_dot * float(alpha0 @ alpha0)
    logger.debug("Open constant-velocity path c1=%s c2=%s", k0, c2)
    return ConstantVelocityKPath(p, target, k0, c2, t0=target.t0, tf=target.tf if tf is None else tf)


def k_finite_horizon(
    p: ArrayLike,
    target: TargetModel,
    k0: float,
    tf: float,
) -> ConstantVelocityKPath:
    """Return the stationary path with ``k(t0) = k0`` that captures at ``tf``."""

    target = _require_constant_velocity(target)
    _check_k0(k0)
    if not tf > target.t0:
        raise HorizonError(f"capture horizon must follow t0 = {target.t0:g}, got {tf:g}")

    p = as_vec3(p)
    alpha0 = p - target.position(target.t0)
    _check_target_misses_point(alpha0, target.v, target.t0, tf)
    sweep = float(_sweep_integral(alpha0, target.v, np.array([tf - target.t0]))[0])
    c2 = (1.0 - k0) / sweep
    logger.debug("Finite-horizon path c1=%s c2=%s tf=%s", k0, c2, tf)
    return ConstantVelocityKPath(p, target, k0, c2, t0=target.t0, tf=tf)


def k_range_linear(
    p: ArrayLike,
    target: TargetModel,
    k0: float,
    *,
    k0_dot: float | None = None,
    tf: float | None = None,
) -> RangeLinearKPath:
    """Return the comparison path with ``k |p - rT|`` linear in time.

    Give ``k0_dot`` for an open-ended path or ``tf`` for capture at ``tf``.
    """

    if (k0_dot is None) == (tf is None):
        raise ValueError("give exactly one of k0_dot (open) or tf (capture)")

    target = _require_constant_velocity(target)
    _check_k0(k0)
    p = as_vec3(p)
    alpha0 = p - target.position(target.t0)
    range0 = float(np.linalg.norm(alpha0))
    if range0 == 0.0:
        raise DegenerateGeometryError("target starts on the static point", time=target.t0)

    c2 = k0 * range0
    if k0_dot is not None:
        c1 = k0_dot * range0 - k0 * float(target.v @ alpha0) / range0
        return RangeLinearKPath(p, target, c1, c2, t0=target.t0, tf=target.tf)

    if not tf > target.t0:
        raise HorizonError(f"capture horizon must follow t0 = {target.t0:g}, got {tf:g}")
    range_final = float(np.linalg.norm(p - target.position(tf)))
    c1 = (range_final - c2) / (tf - target.t0)
    path = RangeLinearKPath(p, target, c1, c2, t0=target.t0, tf=tf)
    # The chord can overtake the range before tf; such a path passes the target.
    path.k(np.linspace(target.t0, tf, CAPTURE_SCAN_POINTS))
    return path


def k_infinity(
    e: ArrayLike,
    target: TargetModel,
    mode: EngagementMode,
    *,
    k0_dot: float | None = None,
    tf: float | None = None,
) -> InfinityKPath:
    """Return the camouflage-at-infinity path with ``k(t0) = 1``.

    ``open`` matches ``k0_dot``, ``capture`` brings the agents together at
    ``tf`` and ``track`` holds them at the constant separation ``|e|``.
    """

    e = as_vec3(e)
    e_sq = float(e @ e)
    if e_sq == 0.0:
        raise DegenerateGeometryError("agents coincide at the start; the direction e is undefined")

    t0 = target.t0
    start = target.evaluate(t0)
    c2 = e_sq - float(start.position @ e)
    horizon = target.tf if tf is None else tf

    if mode == "open":
        if k0_dot is None:
            raise ValueError("open camouflage at infinity needs k0_dot")
        c1 = k0_dot * e_sq - float(start.velocity @ e)
    elif mode == "capture":
        if tf is None or not math.isfinite(tf) or tf <= t0:
            raise HorizonError("capture at infinity needs a finite tf after t0")
        c1 = (-float(target.position(tf) @ e) - c2) / (tf - t0)
    elif mode == "track":
        c1 = -float(_require_constant_velocity(target).v @ e)
    else:
        raise ValueError(f"unknown engagement mode {mode!r}")

    logger.debug("Infinity path mode=%s c1=%s c2=%s", mode, c1, c2)
    return InfinityKPath(e, target, c1, c2, t0=t0, tf=horizon)


def k_quasi3d(
    c1: float,
    c2: float,
    range_fn: Callable[[float], float],
    *,
    t0: float = 0.0,
    tf: float = math.inf,
    range_rate_fn: Callable[[float], float] | None = None,
    abs_tol: float | None = None,
) -> Quasi3DKPath:
    """Return ``k = c1 + c2 int 1/rT^2`` evaluated by adaptive quadrature."""

    start_range = float(range_fn(t0))
    if not start_range > 0.0:
        raise SingularityError("target range from the static point vanished", time=t0)
    return Quasi3DKPath(c1, c2, range_fn, range_rate_fn, t0=t0, tf=tf, abs_tol=abs_tol)


def tpn_constants(polar0: SphericalState, gain: float, r0_dot: float) -> tuple[float, float]:
    """Return (A, B) so the TPN closed forms match the target's initial polar rates."""

    lateral = polar0.r * polar0.theta_dot
    denominator = gain * r0_dot - polar0.r_dot
    if denominator == 0.0:
        raise DegenerateGeometryError(
            "gain * r0_dot equals the target range rate; cos(theta0 + B) vanishes and A is undefined"
        )

    B = math.atan(lateral / denominator) - polar0.theta
    A = (polar0.r_dot - gain * r0_dot) / math.cos(polar0.theta + B)
    if A == 0.0:
        raise DegenerateGeometryError("A = 0 describes a purely radial engagement")
    return A, B


def k_tpn_engagement(
    polar0: SphericalState,
    gain: float,
    c1: float,
    c2: float,
    *,
    r0_dot: float,
    tf: float,
    t0: float = 0.0,
    dt: float = TPN_DT,
    abs_tol: float | None = None,
) -> TpnKPath:
    """Return the quasi-3D path for a target flying TPN against the shadower.

    ``r0_dot`` is the signed initial shadower-target range rate. The target's
    range and bearing are integrated with fixed-step RK4 and splined.
    """

    if not tf > t0:
        raise HorizonError(f"TPN horizon must follow t0 = {t0:g}, got {tf:g}")
    A, B = tpn_constants(polar0, gain, r0_dot)
    radial_bias = gain * r0_dot
    logger.debug("TPN closed-form constants A=%s B=%s", A, B)

    def rates(r: float, theta: float) -> tuple[float, float]:
        return A * math.cos(theta + B) + radial_bias, -A * math.sin(theta + B) / r

    steps = max(1, math.ceil((tf - t0) / dt - 1e-9))
    h = (tf - t0) / steps
    times = t0 + h * np.arange(steps + 1)
    times[-1] = tf
    ranges = np.empty(steps + 1)
    r, theta = polar0.r, polar0.theta

    for index in range(steps + 1):
        t = t0 + index * h
        if abs(math.sin(theta + B)) < SIN_SINGULARITY:
            raise SingularityError("sin(theta + B) vanished in the TPN closed form", time=t)
        if not r > 0.0:
            raise SingularityError("target reached the static point", time=t)
        ranges[index] = r
        if index == steps:
            break

        k1r, k1t = rates(r, theta)
        k2r, k2t = rates(r + 0.5 * h * k1r, theta + 0.5 * h * k1t)
        k3r, k3t = rates(r + 0.5 * h * k2r, theta + 0.5 * h * k2t)
        k4r, k4t = rates(r + h * k3r, theta + h * k3t)
        r += h * (k1r + 2.0 * k2r + 2.0 * k3r + k4r) / 6.0
        theta += h * (k1t + 2.0 * k2t + 2.0 * k3t + k4t) / 6.0

    range_spline = CubicSpline(times, ranges)
    return TpnKPath(
        c1,
        c2,
        range_spline,
        range_spline.derivative(),
        t0=t0,
        tf=tf,
        abs_tol=abs_tol,
        A=A,
        B=B,
        gain=gain,
        r0_dot=r0_dot,
        polar0=polar0,
    )


def reconstruct_shadower(engagement: Engagement, kpath: KPath, times: ArrayLike) -> Trajectory:
    """Return the shadower history implied by ``kpath`` on ``times``.

    Static point: ``rD = p - k (p - rT)``; at infinity: ``rD = rT - k e``.
    """

    times = np.asarray(times, dtype=np.float64).reshape(-1)
    states = engagement.target.evaluate_many(times)
    k, k_dot, k_ddot = kpath.evaluate(times)
    k_col, k_dot_col, k_ddot_col = k[:, None], k_dot[:, None], k_ddot[:, None]

    if engagement.is_infinity:
        e = engagement.infinity_direction
        rd = states.position - k_col * e
        vd = states.velocity - k_dot_col * e
        ad = states.acceleration - k_ddot_col * e
    else:
        p = engagement.static_point
        alpha = p - states.position
        rd = p - k_col * alpha
        vd = k_col * states.velocity - k_dot_col * alpha
        ad = k_col * states.acceleration + 2.0 * k_dot_col * states.velocity - k_ddot_col * alpha

    return Trajectory.build(
        times,
        rd=rd,
        vd=vd,
        ad=ad,
        rt=states.position,
        vt=states.velocity,
        k=k,
        k_dot=k_dot,
        static_point=engagement.static_point,
        direction=engagement.infinity_direction,
    )
