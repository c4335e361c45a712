"""Time-sampled record of shadower and target states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import cumulative_trapezoid

from camotraj.exceptions import HorizonError
from camotraj.services.geometry import Vec3, as_vec3, as_vec3_array


@dataclass(frozen=True, slots=True)
class Trajectory:
    """Row-aligned shadower/target history with cumulative energy (unit mass).

    Exactly one of ``static_point`` and ``direction`` is set; it tells the
    diagnostics which line-of-sight convention the record follows.
    """

    times: NDArray[np.float64]
    rd: NDArray[np.float64]
    vd: NDArray[np.float64]
    ad: NDArray[np.float64]
    rt: NDArray[np.float64]
    vt: NDArray[np.float64]
    k: NDArray[np.float64]
    k_dot: NDArray[np.float64]
    cumulative_energy: NDArray[np.float64]
    static_point: Vec3 | None = None
    direction: Vec3 | None = None

    @classmethod
    def build(
        cls,
        times: ArrayLike,
        *,
        rd: ArrayLike,
        vd: ArrayLike,
        ad: ArrayLike,
        rt: ArrayLike,
        vt: ArrayLike,
        k: ArrayLike,
        k_dot: ArrayLike,
        static_point: ArrayLike | None = None,
        direction: ArrayLike | None = None,
    ) -> Trajectory:
        """Return a trajectory with the running energy integrated from ``vd``."""

        times = np.asarray(times, dtype=np.float64).reshape(-1)
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise HorizonError("trajectory times must be strictly increasing")

        vd = as_vec3_array(vd)
        power = 0.5 * np.einsum("ij,ij->i", vd, vd)
        if times.size > 1:
            cumulative = cumulative_trapezoid(power, times, initial=0.0)
        else:
            cumulative = np.zeros(times.size)

        return cls(
            times=times,
            rd=as_vec3_array(rd),
            vd=vd,
            ad=as_vec3_array(ad),
            rt=as_vec3_array(rt),
            vt=as_vec3_array(vt),
            k=np.asarray(k, dtype=np.float64).reshape(-1),
            k_dot=np.asarray(k_dot, dtype=np.float64).reshape(-1),
            cumulative_energy=cumulative,
            static_point=None if static_point is None else as_vec3(static_point),
            direction=None if direction is None else as_vec3(direction),
        )

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def speeds(self) -> NDArray[np.float64]:
        """Return the shadower speed at every sample."""

        return np.linalg.norm(self.vd, axis=1)

    @property
    def final_speed(self) -> float:
        return float(self.speeds[-1])

    @property
    def initial_speed(self) -> float:
        return float(self.speeds[0])

    @property
    def ranges(self) -> NDArray[np.float64]:
        """Return the shadower-to-target distance at every sample."""

        return np.linalg.norm(self.rt - self.rd, axis=1)

    def head(self, count: int) -> Trajectory:
        """Return the first ``count`` samples with the energy re-integrated."""

        return Trajectory.build(
            self.times[:count],
            rd=self.rd[:count],
            vd=self.vd[:count],
            ad=self.ad[:count],
            rt=self.rt[:count],
            vt=self.vt[:count],
            k=self.k[:count],
            k_dot=self.k_dot[:count],
            static_point=self.static_point,
            direction=self.direction,
        )

    def is_uniform(self, *, rtol: float = 1e-9) -> bool:
        """Return whether the samples are evenly spaced in time."""

        if self.times.size < 3:
            return True
        steps = np.diff(self.times)
        return bool(np.allclose(steps, steps[0], rtol=rtol, atol=0.0))
