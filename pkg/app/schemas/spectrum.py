# Spectral result schemas

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.band import ModelParams, TransverseGrid
from app.schemas.geometry import CurveGeometry
from app.schemas.operators import HermitianMatrix


class EdgeOperator(BaseModel):
    """Fourier-basis matrix of an operator on 2L-periodic functions"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    hbar: float
    theta: float
    L: float
    n_modes: int = Field(..., ge=1)
    m_center: int = 0
    matrix: HermitianMatrix

    def modes(self) -> np.ndarray:
        return self.m_center + np.arange(-self.n_modes, self.n_modes + 1)


class SpectrumResult(BaseModel):
    """Ordered eigenvalues with diagnostics"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    params: ModelParams | None = None
    eigenvalues: np.ndarray
    count_below_E: int | None = None
    converged: bool = True
    diagnostics: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode='after')
    def validate_order(self) -> "SpectrumResult":
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ValueError('eigenvalues must be non-decreasing')
        return self


class HarmonicPrediction(BaseModel):
    """Two-term edge prediction and its full-operator form"""

    hbar: float
    level: int
    edge_value: float
    full_value: float
    spacing: float


class WeylCount(BaseModel):
    """Lattice count of edge states against the Weyl prediction"""

    h: float
    E: float
    count: int = Field(..., ge=0)
    prediction: float
    sigma_minus: float
    sigma_plus: float

    @property
    def ratio(self) -> float:
        return self.count / self.prediction if self.prediction > 0 else float("nan")

    def to_row(self) -> dict[str, Any]:
        return {"h": self.h, "E": self.E, "count": self.count,
                "prediction": self.prediction, "ratio": self.ratio}


class StripOperatorSpec(BaseModel):
    """Discretization of the rescaled tubular-coordinate operator"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    params: ModelParams
    geom: CurveGeometry
    theta: float = Field(..., ge=0)
    eta: float = Field(0.25, gt=0, lt=0.5)
    Ns: int = Field(..., ge=1)
    grid_t: TransverseGrid
    m_center: int | None = None

    @model_validator(mode='after')
    def validate_hbar(self) -> "StripOperatorSpec":
        if self.params.h is None:
            raise ValueError('strip operator needs h')
        return self
