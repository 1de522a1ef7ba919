# Run configuration: flags over a key = value config file

from typing import Literal

from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from app.core.config import settings
from app.schemas.band import ModelParams, TransverseGrid
from app.schemas.geometry import CurveSpec


class RunConfig(BaseSettings):
    """Validated inputs of one CLI invocation"""

    a: float = -0.5
    h: float | None = Field(None, gt=0)
    hbars: list[float] = Field(default_factory=lambda: [4e-3, 1e-3, 2.5e-4])
    E: float | None = None
    Eplus: float | None = None

    curve: Literal["circle", "ellipse", "fourier"] = "ellipse"
    params: list[float] = Field(default_factory=lambda: [1.0, 0.6])
    samples: int = Field(settings.geometry_samples, ge=64)

    sigmas: list[float] = Field(default_factory=lambda: [x * 0.25 for x in range(-8, 25)])
    levels: int = Field(1, ge=1)
    n: int = Field(2, ge=1)
    modes: int | None = Field(None, ge=1)
    theta: float | None = Field(None, ge=0)

    grid_spacing: float = Field(settings.grid_spacing, gt=0)
    strip_eta: float = Field(settings.strip_eta, gt=0, lt=0.5)
    strip_t_halfwidth: float = Field(settings.strip_t_halfwidth, gt=0)
    strip_t_spacing: float = Field(settings.strip_t_spacing, gt=0)
    strip_modes: int = Field(settings.strip_modes, ge=1)

    out: str = settings.out_dir
    threads: int = Field(settings.threads, ge=0)

    model_config = SettingsConfigDict(env_prefix="", case_sensitive=False, extra="forbid")

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # flags first, then the config file; the process environment is ignored
        return init_settings, dotenv_settings

    @field_validator('a')
    @classmethod
    def validate_a(cls, v: float) -> float:
        if not -1.0 <= v <= 1.0 or v == 0.0:
            raise ValueError('a must lie in [-1, 1] and be non-zero')
        return v

    @field_validator('hbars')
    @classmethod
    def validate_hbars(cls, v: list[float]) -> list[float]:
        if not v or any(x <= 0 for x in v):
            raise ValueError('hbars must be a non-empty list of positive values')
        return v

    @model_validator(mode='after')
    def validate_curve(self) -> "RunConfig":
        self.curve_spec()
        return self

    def model_params(self) -> ModelParams:
        return ModelParams(a=self.a, h=self.h, E=self.E, Eplus=self.Eplus)

    def curve_spec(self) -> CurveSpec:
        return CurveSpec(kind=self.curve, params=self.params, samples=self.samples)

    def strip_grid(self) -> TransverseGrid:
        return TransverseGrid.uniform(self.strip_t_halfwidth, self.strip_t_spacing)
