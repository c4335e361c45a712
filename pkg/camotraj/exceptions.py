"""Error types raised by the trajectory engine.

Every error derives from :class:`CamouflageError`, itself a ``ValueError``, so
callers that only care about "the engagement is not solvable" can catch one
type. Errors tied to a moment of the engagement carry it in ``time``.
"""

from __future__ import annotations


class CamouflageError(ValueError):
    """Base class for every engagement, geometry and solver error."""

    def __init__(self, message: str, *, time: float | None = None) -> None:
        self.time = time
        if time is not None:
            message = f"{message} (t={time:.6g} s)"
        super().__init__(message)


class DegenerateGeometryError(CamouflageError):
    """Raised when a constraint line, frame or linear system is undefined."""


class CamouflageViolationError(CamouflageError):
    """Raised when a state is off its constraint line or has k above one."""


class HorizonError(CamouflageError):
    """Raised when a model or path is evaluated outside its time domain."""


class ReactiveTargetError(CamouflageError):
    """Raised when a reactive target is evaluated outside the guidance loop."""


class SingularityError(CamouflageError):
    """Raised when an ODE or closed form hits a singular point."""


class ScenarioConfigError(CamouflageError):
    """Raised for scenario problems that pass schema validation."""
