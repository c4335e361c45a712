"""Tests for environment-driven settings."""

from __future__ import annotations

import importlib
import sys

from pydantic import ValidationError
import pytest


def reload_config_module():
    """Reload the config module so each test sees fresh environment state."""

    sys.modules.pop("camotraj.config", None)
    return importlib.import_module("camotraj.config")


def test_settings_loads_from_environment(configured_env: dict[str, str]) -> None:
    """The settings singleton should read values directly from the environment."""

    settings = reload_config_module().settings

    assert settings.app_env == configured_env["APP_ENV"]
    assert settings.app_port == 8000
    assert settings.log_level == configured_env["LOG_LEVEL"]
    assert settings.output_dir == configured_env["CAMO_OUTPUT_DIR"]
    assert settings.scenario_dir == configured_env["CAMO_SCENARIO_DIR"]
    assert settings.ode_dt == 1e-3
    assert settings.guidance_dt == 1e-4
    assert settings.tpn_gain == 3.0


def test_numerical_defaults_apply_without_environment(configured_env: dict[str, str], monkeypatch) -> None:
    """Unset numerical knobs should fall back to their documented defaults."""

    for key in ("CAMO_ODE_DT", "CAMO_GUIDANCE_DT", "CAMO_TPN_GAIN"):
        monkeypatch.delenv(key, raising=False)
    settings = reload_config_module().settings

    assert settings.ode_dt == 1e-3
    assert settings.guidance_dt == 1e-4
    assert settings.tpn_gain == 3.0
    assert settings.collinearity_tolerance == 1e-6
    assert settings.capture_epsilon == 1e-6
    assert settings.camouflage_loss_tolerance == 1e-3
    assert settings.quadrature_abs_tol == 1e-9


def test_environment_overrides_tolerances(configured_env: dict[str, str], monkeypatch) -> None:
    """Tolerances and gains should be tunable through their CAMO_ variables."""

    monkeypatch.setenv("CAMO_TPN_GAIN", "4.5")
    monkeypatch.setenv("CAMO_LOSS_TOL", "0.01")
    monkeypatch.setenv("CAMO_CAPTURE_EPS", "1e-8")
    settings = reload_config_module().settings

    assert settings.tpn_gain == 4.5
    assert settings.camouflage_loss_tolerance == 0.01
    assert settings.capture_epsilon == 1e-8


def test_non_positive_step_is_rejected(configured_env: dict[str, str], monkeypatch) -> None:
    """A zero or negative default step must fail validation at import."""

    monkeypatch.setenv("CAMO_ODE_DT", "0")

    with pytest.raises(ValidationError):
        reload_config_module()

    monkeypatch.setenv("CAMO_ODE_DT", "0.001")
    reload_config_module()
