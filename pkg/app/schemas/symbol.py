# Effective-symbol schemas

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator


class SymbolCoefficients(BaseModel):
    """k-independent parts of q1 and of the second-order energy block"""

    a: float
    sigma: float
    z: float
    g1: float
    g1_prime_sigma: float
    g2: float
    resolvent: float
    polynomial: float


class ReducedSymbol(BaseModel):
    """Samples of the quadratic reduced symbol on the edge s-grid"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a: float
    mu_pp: float
    sigma_a: float
    beta_a: float
    L: float
    s_samples: np.ndarray
    k_samples: np.ndarray
    c1_samples: np.ndarray
    lin_samples: np.ndarray
    quad_samples: np.ndarray

    @model_validator(mode='after')
    def validate_shared_grid(self) -> "ReducedSymbol":
        n = self.s_samples.size
        for arr in (self.k_samples, self.c1_samples, self.lin_samples, self.quad_samples):
            if arr.size != n:
                raise ValueError('All samples must share the s-grid')
        return self
