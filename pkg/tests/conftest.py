"""Shared pytest fixtures for settings-driven tests and the reference engagements."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from camotraj.services.kpath_analytic import Engagement
from camotraj.services.targets import ConstantVelocityTarget

ROOT_DIR = Path(__file__).resolve().parents[1]
SCENARIO_DIR = ROOT_DIR / "scenarios"
DATA_DIR = Path(__file__).resolve().parent / "data"

TEST_ENV_VARS = {
    "APP_ENV": "development",
    "APP_PORT": "8000",
    "LOG_LEVEL": "info",
    "CAMO_SCENARIO_DIR": str(SCENARIO_DIR),
    "CAMO_ODE_DT": "0.001",
    "CAMO_GUIDANCE_DT": "0.0001",
    "CAMO_TPN_GAIN": "3.0",
}


@pytest.fixture
def configured_env(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> dict[str, str]:
    """Populate a complete environment for each test and return the values."""

    values = {**TEST_ENV_VARS, "CAMO_OUTPUT_DIR": str(tmp_path / "outputs")}
    for key in values:
        monkeypatch.delenv(key, raising=False)

    for key, value in values.items():
        monkeypatch.setenv(key, value)

    return values.copy()


@pytest.fixture
def capture_point() -> np.ndarray:
    """Static point of the three-dimensional capture engagement (cm)."""

    return np.array([200.0, -650.0, 500.0])


@pytest.fixture
def capture_target() -> ConstantVelocityTarget:
    """Constant-velocity target of the three-dimensional capture engagement."""

    return ConstantVelocityTarget([30.0, 60.0, 150.0], [200.0, -20.0, 60.0])


@pytest.fixture
def capture_engagement(capture_point: np.ndarray, capture_target: ConstantVelocityTarget) -> Engagement:
    """Capture at 12 s from k0 = 0.1."""

    return Engagement(target=capture_target, k0=0.1, tf=12.0, mode="capture", static_point=capture_point)


@pytest.fixture
def planar_target() -> ConstantVelocityTarget:
    """Non-maneuvering planar target used by the guidance runs."""

    return ConstantVelocityTarget([30.0, 60.0], [200.0, -20.0])


@pytest.fixture
def scenario_dir() -> Path:
    return SCENARIO_DIR


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR
