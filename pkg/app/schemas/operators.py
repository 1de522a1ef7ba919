# Linear-algebra carriers

from typing import Any, Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class TridiagonalOperator(BaseModel):
    """Real symmetric tridiagonal matrix on a uniform grid"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    diag: np.ndarray
    offdiag: np.ndarray
    spacing: float = Field(1.0, gt=0)

    @field_validator('diag', 'offdiag', mode='before')
    @classmethod
    def as_float_array(cls, v: Any) -> np.ndarray:
        return np.asarray(v, dtype=float).ravel()

    @model_validator(mode='after')
    def check_shape(self) -> "TridiagonalOperator":
        if self.diag.size < 2:
            raise ValueError('Tridiagonal operator needs at least 2 rows')
        if self.offdiag.size != self.diag.size - 1:
            raise ValueError('offdiag must have length N-1')
        return self

    @property
    def order(self) -> int:
        return int(self.diag.size)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.offdiag * x[1:]
        y[1:] += self.offdiag * x[:-1]
        return y

    def gershgorin(self) -> tuple[float, float]:
        """Enclosing interval of the spectrum"""
        radius = np.zeros_like(self.diag)
        radius[:-1] += np.abs(self.offdiag)
        radius[1:] += np.abs(self.offdiag)
        return float(np.min(self.diag - radius)), float(np.max(self.diag + radius))

    def norm(self) -> float:
        lo, hi = self.gershgorin()
        return max(abs(lo), abs(hi))

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


class HermitianMatrix(BaseModel):
    """Dense complex Hermitian matrix"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray

    @field_validator('entries', mode='before')
    @classmethod
    def as_complex_square(cls, v: Any) -> np.ndarray:
        arr = np.asarray(v, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError('Hermitian matrix must be square')
        return arr

    @property
    def order(self) -> int:
        return int(self.entries.shape[0])

    def hermiticity_residual(self) -> float:
        """max |M - M^H| relative to the largest entry"""
        scale = float(np.max(np.abs(self.entries))) or 1.0
        return float(np.max(np.abs(self.entries - self.entries.conj().T))) / scale


class SparseHermitianOperator(BaseModel):
    """Matrix-free Hermitian operator"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    order: int = Field(..., ge=1)
    apply: Callable[[np.ndarray], np.ndarray]
    structure: dict[str, Any] = Field(default_factory=dict)
    # shift -> solver for (A - shift)^{-1}
    shift_invert: Callable[[float], Callable[[np.ndarray], np.ndarray]] | None = None
    lower_bound: float | None = None
    dtype: str = "complex"


class EigenPairs(BaseModel):
    """Lowest eigenpairs from an iterative solver"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    values: np.ndarray
    vectors: np.ndarray | None = None
    residuals: np.ndarray
    converged: bool
    restarts: int = 0
