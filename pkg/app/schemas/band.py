# Band-function schemas

import math
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import settings


class ModelParams(BaseModel):
    """Field ratio, semiclassical parameter and energy window"""

    a: float = Field(..., ge=-1.0, le=1.0)
    h: float | None = Field(None, gt=0)
    E: float | None = None
    Eplus: float | None = None

    @field_validator('a')
    @classmethod
    def validate_nonzero(cls, v: float) -> float:
        if v == 0.0:
            raise ValueError('Field ratio a must be non-zero')
        return v

    @model_validator(mode='after')
    def validate_window(self) -> "ModelParams":
        if self.E is not None and not 0 < self.E < abs(self.a):
            raise ValueError('E must lie in (0, |a|)')
        if self.Eplus is not None:
            if not self.Eplus < abs(self.a):
                raise ValueError('Eplus must be below |a|')
            if self.E is not None and not self.E < self.Eplus:
                raise ValueError('E must be below Eplus')
        return self

    @property
    def hbar(self) -> float | None:
        return math.sqrt(self.h) if self.h is not None else None

    def step(self, t: np.ndarray) -> np.ndarray:
        """Step profile: 1 on t >= 0, a on t < 0"""
        return np.where(np.asarray(t) < 0, self.a, 1.0)

    def window(self, beta_a: float) -> tuple[float, float]:
        """Energy window [beta_a, Eplus]"""
        upper = self.Eplus if self.Eplus is not None else 0.5 * (beta_a + abs(self.a))
        if not beta_a < upper < abs(self.a):
            raise ValueError('Eplus must lie in (beta_a, |a|)')
        return beta_a, upper


class TransverseGrid(BaseModel):
    """Symmetric grid on [-T, T] with a node at t = 0"""

    model_config = ConfigDict(frozen=True)

    T: float = Field(..., gt=0)
    N: int = Field(..., ge=5)

    @field_validator('N')
    @classmethod
    def validate_odd(cls, v: int) -> int:
        if v % 2 == 0:
            raise ValueError('N must be odd so that t = 0 is a node')
        return v

    @property
    def spacing(self) -> float:
        return 2.0 * self.T / (self.N - 1)

    @property
    def center(self) -> int:
        return (self.N - 1) // 2

    def nodes(self) -> np.ndarray:
        half = self.center
        return np.arange(-half, half + 1) * self.spacing

    def refined(self) -> "TransverseGrid":
        """Same domain, half the spacing"""
        return TransverseGrid(T=self.T, N=2 * self.N - 1)

    @classmethod
    def uniform(cls, T: float, spacing: float) -> "TransverseGrid":
        half = max(2, math.ceil(T / spacing))
        return cls(T=half * spacing, N=2 * half + 1)

    @classmethod
    def for_band(cls, a: float, sigma: float, spacing: float | None = None) -> "TransverseGrid":
        """Grid covering both wells of (sigma - b_a t)^2 plus a decay margin"""
        weak = min(abs(a), 1.0)
        T = abs(sigma) / weak + settings.truncation_margin / math.sqrt(weak)
        return cls.uniform(T, spacing or settings.grid_spacing)


class BandPoint(BaseModel):
    """Band value mu_a^[n](sigma)"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    a: float
    sigma: float
    level: int = Field(..., ge=1)
    mu: float
    error: float = 0.0
    groundstate: np.ndarray | None = None
    t: np.ndarray | None = None

    def to_row(self) -> dict[str, Any]:
        return {"a": self.a, "sigma": self.sigma, "level": self.level, "mu": self.mu}


class BandMinimum(BaseModel):
    """Non-degenerate minimum of the first band"""

    a: float
    sigma_a: float
    beta_a: float
    mu_pp: float
    tol: float
    beta_error: float = 0.0
    mu_pp_error: float = 0.0
    iterations: int = 0

    @model_validator(mode='after')
    def validate_minimum(self) -> "BandMinimum":
        if not 0 < self.beta_a < abs(self.a):
            raise ValueError('beta_a must lie in (0, |a|)')
        if self.sigma_a <= 0:
            raise ValueError('sigma_a must be positive')
        if self.mu_pp <= 0:
            raise ValueError('mu_pp must be positive')
        return self

    def to_row(self) -> dict[str, Any]:
        return {"a": self.a, "sigma_a": self.sigma_a, "beta_a": self.beta_a, "mu_pp": self.mu_pp}
