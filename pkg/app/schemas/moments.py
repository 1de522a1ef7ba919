# Moment and universal-constant schemas

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class MomentSet(BaseModel):
    """Weighted moments M_0..M_4 of the ground state at sigma(a)"""

    a: float
    sigma: float
    values: tuple[float, float, float, float, float]
    quadrature_error: float = Field(..., ge=0)
    phi0: float
    dphi0: float

    def to_row(self) -> dict[str, Any]:
        row: dict[str, Any] = {"a": self.a}
        row.update({f"M{n}": v for n, v in enumerate(self.values)})
        row["quad_err"] = self.quadrature_error
        return row


class IdentityReport(BaseModel):
    """Residuals of the moment identities"""

    a: float
    residuals: dict[str, float]

    def worst(self) -> float:
        return max(abs(v) for v in self.residuals.values())


class DeGennesData(BaseModel):
    """Neumann half-line model: Theta0, xi0, f0 and half-line moments"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    Theta0: float = Field(..., gt=0)
    xi0: float = Field(..., gt=0)
    t: np.ndarray
    f0: np.ndarray
    f0_at_0: float
    halfmoments: tuple[float, float, float, float, float]
    sigma_numeric: float
    spacing: float

    @model_validator(mode='after')
    def validate_model(self) -> "DeGennesData":
        if abs(self.xi0 ** 2 - self.Theta0) > 1e-12:
            raise ValueError('xi0 must equal sqrt(Theta0)')
        if self.f0_at_0 <= 0:
            raise ValueError('f0(0) must be positive')
        tiny = 1e-12 * float(np.max(np.abs(self.f0)))
        if np.any(self.f0 < -tiny):
            raise ValueError('f0 must not change sign')
        return self


class GConstants(BaseModel):
    """Closed-form and direct values of the constant G"""

    G_closed: float
    G_closed_alt: float
    G_direct: float
    G_printed: float
    G_printed_alt: float
    resolvent_dirichlet: float
    resolvent_deflated: float
    polynomial: float

    @property
    def deflation_gap(self) -> float:
        return abs(self.resolvent_dirichlet - self.resolvent_deflated)

    @property
    def printed_gap(self) -> float:
        """The two printed forms differ only through the M4 identity"""
        return abs(self.G_printed - self.G_printed_alt)


class UniversalConstants(BaseModel):
    """C(a), G and C0 = -1/4 + G"""

    a: float
    C_of_a: float
    G: float
    C0: float
    G_direct: float
    G_printed: float

    def to_report(self) -> dict[str, Any]:
        return {
            "a": self.a,
            "C": self.C_of_a,
            "G_closed": self.G,
            "G_direct": self.G_direct,
            "C0": self.C0,
        }
