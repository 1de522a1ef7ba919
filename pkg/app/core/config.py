# Pydantic settings

from pydantic_settings import BaseSettings, SettingsConfigDict
import os


class Settings(BaseSettings):
    """Numerical defaults for the toolkit"""

    # App
    app_name: str = "edgespec"
    log_level: str = "INFO"

    # Transverse grid (band functions)
    grid_spacing: float = 1.0 / 400.0
    truncation_margin: float = 14.0
    tail_tolerance: float = 1e-12

    # Band minimum
    minimum_tol: float = 1e-10
    stencil_step: float = 1e-3
    sigma_scan_min: float = -5.0
    sigma_scan_max: float = 20.0
    sigma_scan_step: float = 0.25
    coarse_spacing: float = 1.0 / 20.0

    # Edge quantization
    geometry_samples: int = 512
    guard_modes: int = 64

    # Lanczos
    lanczos_krylov: int = 120
    lanczos_restarts: int = 5
    lanczos_tol: float = 1e-10

    # Strip operator
    strip_eta: float = 0.25
    strip_t_halfwidth: float = 10.0
    strip_t_spacing: float = 0.05
    strip_modes: int = 24

    # Runs
    out_dir: str = "out"
    threads: int = 0  # 0 = logical cores

    model_config = SettingsConfigDict(
        # Use .env.local if it exists (for local dev), otherwise .env
        env_file=".env.local" if os.path.exists(".env.local") else ".env",
        env_prefix="EDGESPEC_",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()
