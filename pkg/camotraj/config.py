"""Application settings loaded from environment variables.

This module centralizes configuration so the solvers, the CLI and the HTTP
service read numerical defaults from a single validated settings object
instead of scattered environment access.
"""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Validated configuration loaded from `.env` and the process environment."""

    # Load values from a local `.env` file during development while still letting
    # real environment variables override them.
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    app_env: str = Field(default="development", validation_alias="APP_ENV")
    app_port: int = Field(default=8000, validation_alias="APP_PORT")
    log_level: str = Field(default="info", validation_alias="LOG_LEVEL")

    output_dir: str = Field(default="outputs", validation_alias="CAMO_OUTPUT_DIR")
    scenario_dir: str = Field(default="scenarios", validation_alias="CAMO_SCENARIO_DIR")

    # Numerical defaults. A scenario's own dt wins over these, and the CLI
    # --dt flag wins over both.
    ode_dt: float = Field(default=1e-3, gt=0, validation_alias="CAMO_ODE_DT")
    guidance_dt: float = Field(default=1e-4, gt=0, validation_alias="CAMO_GUIDANCE_DT")
    collinearity_tolerance: float = Field(
        default=1e-6,
        gt=0,
        validation_alias="CAMO_COLLINEARITY_TOL",
    )
    capture_epsilon: float = Field(default=1e-6, gt=0, validation_alias="CAMO_CAPTURE_EPS")
    camouflage_loss_tolerance: float = Field(default=1e-3, gt=0, validation_alias="CAMO_LOSS_TOL")
    tpn_gain: float = Field(default=3.0, gt=0, validation_alias="CAMO_TPN_GAIN")
    quadrature_abs_tol: float = Field(default=1e-9, gt=0, validation_alias="CAMO_QUAD_TOL")


# Export a singleton settings object so modules reuse one validated
# configuration instance instead of re-reading environment variables.
settings = Settings()
