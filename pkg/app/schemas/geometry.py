# Curve geometry schemas

from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator


class CurveSpec(BaseModel):
    """Parametric description of the edge curve"""

    kind: Literal["circle", "ellipse", "fourier"]
    params: list[float] = Field(..., min_length=1)
    samples: int = Field(512, ge=64)

    @model_validator(mode='after')
    def validate_params(self) -> "CurveSpec":
        if self.kind == "circle" and len(self.params) != 1:
            raise ValueError('circle takes params = [R]')
        if self.kind == "ellipse" and len(self.params) != 2:
            raise ValueError('ellipse takes params = [p, q]')
        if self.kind == "fourier" and len(self.params) < 2:
            raise ValueError('fourier takes params = [R, eps_2, eps_3, ...]')
        if self.params[0] <= 0 or (self.kind == "ellipse" and self.params[1] <= 0):
            raise ValueError('curve radii must be positive')
        return self


class CurveGeometry(BaseModel):
    """Arc-length samples of the curvature of a closed curve of length 2L"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    L: float = Field(..., gt=0)
    area: float = Field(..., ge=0)
    s_samples: np.ndarray
    k_samples: np.ndarray
    kind: str = "custom"

    @field_validator('s_samples', 'k_samples', mode='before')
    @classmethod
    def as_float_array(cls, v: Any) -> np.ndarray:
        return np.asarray(v, dtype=float).ravel()

    @model_validator(mode='after')
    def validate_samples(self) -> "CurveGeometry":
        if self.s_samples.size != self.k_samples.size:
            raise ValueError('s and k samples must have equal length')
        return self

    @computed_field
    @property
    def gamma0(self) -> float:
        return self.area / (2.0 * self.L)

    @property
    def n_samples(self) -> int:
        return int(self.s_samples.size)

    @property
    def ds(self) -> float:
        return 2.0 * self.L / self.n_samples

    def total_curvature(self) -> float:
        return float(np.sum(self.k_samples) * self.ds)


class CurvatureMax(BaseModel):
    """Location and shape of the curvature maximum"""

    s_max: float
    k_max: float
    k_pp: float = Field(..., lt=0)
    # 2 for reflection-symmetric curves: harmonic levels come in near-degenerate pairs
    multiplicity: int = Field(1, ge=1, le=2)


class FluxOffsets(BaseModel):
    """theta(hbar), its integer index and alpha_h"""

    h: float = Field(..., gt=0)
    theta: float = Field(..., ge=0)
    m_index: int
    alpha_h: float | None = None
    period: float = Field(..., gt=0)

    @model_validator(mode='after')
    def validate_reduction(self) -> "FluxOffsets":
        if not self.theta < self.period:
            raise ValueError('theta must lie in [0, hbar*pi/L)')
        return self
