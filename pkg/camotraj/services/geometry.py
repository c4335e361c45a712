"""Cartesian and spherical kinematics for camouflage constraint lines."""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import TypeAlias

import numpy as np
from numpy.typing import ArrayLike, NDArray

from camotraj.config import settings
from camotraj.exceptions import CamouflageViolationError, DegenerateGeometryError

Vec3: TypeAlias = NDArray[np.float64]

# Allowed rounding above k = 1 before a ratio counts as beyond the target.
K_UPPER_SLACK = 1e-9


def as_vec3(values: ArrayLike) -> Vec3:
    """Return a float64 3-vector, padding planar input with z = 0."""

    vector = np.asarray(values, dtype=np.float64).reshape(-1)
    if vector.shape == (2,):
        vector = np.append(vector, 0.0)
    if vector.shape != (3,):
        raise ValueError(f"expected 2 or 3 components, got {vector.shape[0]}")
    return vector


def as_vec3_array(values: ArrayLike) -> NDArray[np.float64]:
    """Return an (n, 3) float64 array, padding planar rows with z = 0."""

    array = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if array.shape[1] == 2:
        array = np.column_stack([array, np.zeros(array.shape[0])])
    if array.ndim != 2 or array.shape[1] != 3:
        raise ValueError(f"expected rows of 2 or 3 components, got shape {array.shape}")
    return array


@dataclass(frozen=True, slots=True)
class SphericalState:
    """Position and rates of a point in the frame centred on the static point."""

    r: float
    theta: float
    phi: float
    r_dot: float
    theta_dot: float
    phi_dot: float


def collinearity_deviation(p: ArrayLike, rt: ArrayLike, rd: ArrayLike) -> float:
    """Return the distance from ``rd`` to the infinite line through ``p`` and ``rt``."""

    p, rt, rd = as_vec3(p), as_vec3(rt), as_vec3(rd)
    axis = rt - p
    axis_norm = float(np.linalg.norm(axis))
    if axis_norm == 0.0:
        raise DegenerateGeometryError("target sits on the static point; the constraint line is undefined")

    return float(np.linalg.norm(np.cross(rd - p, axis))) / axis_norm


def camouflage_ratio(
    p: ArrayLike,
    rt: ArrayLike,
    rd: ArrayLike,
    *,
    tolerance: float | None = None,
) -> float:
    """Return k with ``p - rd = k (p - rt)`` for a shadower on the constraint line.

    ``tolerance`` is relative to the target range and defaults to the
    configured collinearity tolerance.
    """

    if tolerance is None:
        tolerance = settings.collinearity_tolerance
    p, rt, rd = as_vec3(p), as_vec3(rt), as_vec3(rd)
    deviation = collinearity_deviation(p, rt, rd)
    axis = p - rt
    axis_sq = float(axis @ axis)
    if deviation > tolerance * math.sqrt(axis_sq):
        raise CamouflageViolationError(
            f"shadower is {deviation:.3g} off the constraint line (tolerance {tolerance:g} relative)"
        )

    k = float((p - rd) @ axis) / axis_sq
    if k > 1.0 + K_UPPER_SLACK:
        raise CamouflageViolationError(f"camouflage ratio {k:.12g} places the shadower beyond the target")
    return k


def point_on_ccl(p: ArrayLike, rt: ArrayLike, k: float) -> Vec3:
    """Return the point with camouflage ratio ``k`` on the line through ``p`` and ``rt``."""

    p, rt = as_vec3(p), as_vec3(rt)
    return p - k * (p - rt)


def angular_velocity(rd: ArrayLike, vd: ArrayLike) -> Vec3:
    """Return ``(rd x vd) / |rd|^2`` for a position measured from the static point."""

    rd, vd = as_vec3(rd), as_vec3(vd)
    r_sq = float(rd @ rd)
    if r_sq == 0.0:
        raise DegenerateGeometryError("agent sits on the static point; angular velocity is undefined")
    return np.cross(rd, vd) / r_sq


def los_rate(r_rel: ArrayLike, v_rel: ArrayLike) -> float:
    """Return the signed planar rate of the line of sight along ``r_rel``."""

    r_rel, v_rel = as_vec3(r_rel), as_vec3(v_rel)
    r_sq = r_rel[0] ** 2 + r_rel[1] ** 2
    if r_sq == 0.0:
        raise DegenerateGeometryError("agents coincide in the engagement plane; line of sight is undefined")
    return float((r_rel[0] * v_rel[1] - r_rel[1] * v_rel[0]) / r_sq)


def spherical_basis(theta: float, phi: float) -> tuple[Vec3, Vec3, Vec3]:
    """Return the unit vectors (e_r, e_theta, e_phi) at the given angles."""

    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cos_p, sin_p = math.cos(phi), math.sin(phi)
    e_r = np.array([cos_p * cos_t, cos_p * sin_t, sin_p])
    e_theta = np.array([-sin_t, cos_t, 0.0])
    e_phi = np.array([-sin_p * cos_t, -sin_p * sin_t, cos_p])
    return e_r, e_theta, e_phi


def to_spherical(p: ArrayLike, r: ArrayLike, v: ArrayLike) -> SphericalState:
    """Return the spherical coordinates and rates of ``r`` about origin ``p``.

    ``theta`` is measured in the x-y plane from +x and ``phi`` is the elevation
    above that plane. On the polar axis the angular rates are reported as 0.
    """

    rel = as_vec3(r) - as_vec3(p)
    v = as_vec3(v)
    radius = float(np.linalg.norm(rel))
    if radius == 0.0:
        raise DegenerateGeometryError("point coincides with the frame origin")

    x, y, z = rel
    rho_sq = x * x + y * y
    rho = math.sqrt(rho_sq)
    theta = math.atan2(y, x)
    phi = math.atan2(z, rho)
    r_dot = float(rel @ v) / radius

    if rho == 0.0:
        return SphericalState(radius, theta, phi, r_dot, 0.0, 0.0)

    theta_dot = (x * v[1] - y * v[0]) / rho_sq
    phi_dot = (rho_sq * v[2] - z * (x * v[0] + y * v[1])) / (rho * radius * radius)
    return SphericalState(radius, theta, phi, r_dot, float(theta_dot), float(phi_dot))


def from_spherical(p: ArrayLike, state: SphericalState) -> tuple[Vec3, Vec3]:
    """Return the Cartesian position and velocity described by ``state`` about ``p``."""

    e_r, e_theta, e_phi = spherical_basis(state.theta, state.phi)
    position = as_vec3(p) + state.r * e_r
    velocity = (
        state.r_dot * e_r
        + state.r * math.cos(state.phi) * state.theta_dot * e_theta
        + state.r * state.phi_dot * e_phi
    )
    return position, velocity


def spherical_acceleration(p: ArrayLike, r: ArrayLike, a: ArrayLike) -> tuple[float, float, float]:
    """Return the (e_r, e_theta, e_phi) components of acceleration ``a`` at ``r``."""

    rel = as_vec3(r) - as_vec3(p)
    if not np.any(rel):
        raise DegenerateGeometryError("point coincides with the frame origin")

    theta = math.atan2(rel[1], rel[0])
    phi = math.atan2(rel[2], math.hypot(rel[0], rel[1]))
    a = as_vec3(a)
    e_r, e_theta, e_phi = spherical_basis(theta, phi)
    return float(a @ e_r), float(a @ e_theta), float(a @ e_phi)
