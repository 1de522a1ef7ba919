"""Curvature corrections to the band symbol from the Grushin reduction."""

import numpy as np
import structlog

from app.schemas.band import BandMinimum, ModelParams, TransverseGrid
from app.schemas.geometry import CurveGeometry
from app.schemas.symbol import ReducedSymbol, SymbolCoefficients
from app.services.band1d import (
    assemble_transverse,
    band_minimum,
    band_value,
    eigenpair,
    interior_nodes,
    richardson,
    split_integral,
)
from app.services.eigcore import deflated_solve

logger = structlog.get_logger()

SIGMA_STEP = 1e-4


def n1_weight(sigma: float, t: np.ndarray, b: np.ndarray) -> np.ndarray:
    """k-free factor of the first-order term: 2t(sigma - bt)^2 + bt^2(sigma - bt)"""
    return 2 * t * (sigma - b * t) ** 2 + b * t ** 2 * (sigma - b * t)


def n2_weight(sigma: float, t: np.ndarray, b: np.ndarray) -> np.ndarray:
    """k^2-free polynomial of the second-order term, without the constant -1/4"""
    return 3 * t ** 2 * (sigma - b * t) ** 2 + 2 * b * t ** 3 * (sigma - b * t) + 0.25 * b ** 2 * t ** 4


def _n1_on_grid(a: float, sigma: float, grid: TransverseGrid) -> float:
    _, u = eigenpair(a, sigma, 1, grid)
    return split_integral(a, interior_nodes(grid), lambda t, b, u: n1_weight(sigma, t, b) * u ** 2, u)


def n1_element(a: float, sigma: float, grid: TransverseGrid | None = None) -> float:
    """<(2t(sigma - bt)^2 + bt^2(sigma - bt)) u_sigma, u_sigma>"""
    grid = grid or TransverseGrid.for_band(a, sigma)
    value, _ = richardson(_n1_on_grid(a, sigma, grid), _n1_on_grid(a, sigma, grid.refined()))
    return value


def q1_pm(a: float, sigma: float, grid: TransverseGrid | None = None) -> tuple[float, float]:
    """g1 = q1/k and its sigma-derivative"""
    grid = grid or TransverseGrid.for_band(a, abs(sigma) + 1.0)
    g1 = -n1_element(a, sigma, grid)

    def central(d: float) -> float:
        return -(n1_element(a, sigma + d, grid) - n1_element(a, sigma - d, grid)) / (2 * d)

    g1_prime, _ = richardson(central(SIGMA_STEP), central(SIGMA_STEP / 2))
    return g1, g1_prime


def resolvent_term(a: float, sigma: float, z: float, grid: TransverseGrid) -> tuple[float, float]:
    """<q_{0,z} w, w> with w = n1 u, and <n2 u, u>, both on a single grid"""
    _, u = eigenpair(a, sigma, 1, grid)
    t = interior_nodes(grid)
    w = n1_weight(sigma, t, ModelParams(a=a).step(t)) * u
    v = deflated_solve(assemble_transverse(a, sigma, grid), z, u, w)
    resolvent = float(grid.spacing * np.sum(v * w))
    polynomial = split_integral(a, t, lambda t, b, u: n2_weight(sigma, t, b) * u ** 2, u)
    return resolvent, polynomial


def q2_pm(a: float, sigma: float, z: float, grid: TransverseGrid | None = None) -> tuple[float, float, float]:
    """k^2 energy coefficient g2 = <n2 u, u> - 1/4 - <q_{0,z} n1 u, n1 u>; returns (g2, resolvent, polynomial)"""
    grid = grid or TransverseGrid.for_band(a, sigma)
    r_coarse, p_coarse = resolvent_term(a, sigma, z, grid)
    r_fine, p_fine = resolvent_term(a, sigma, z, grid.refined())
    resolvent, _ = richardson(r_coarse, r_fine)
    polynomial, _ = richardson(p_coarse, p_fine)
    return polynomial - 0.25 - resolvent, resolvent, polynomial


def symbol_coefficients(a: float, minimum: BandMinimum | None = None,
                        grid: TransverseGrid | None = None) -> SymbolCoefficients:
    """g1, dg1/dsigma and g2 at sigma(a), z = beta_a"""
    minimum = minimum or band_minimum(a)
    sigma, z = minimum.sigma_a, minimum.beta_a
    g1, g1_prime = q1_pm(a, sigma, grid)
    g2, resolvent, polynomial = q2_pm(a, sigma, z, grid)
    logger.info("symbol_coefficients", a=a, g1=g1, g1_prime_sigma=g1_prime, g2=g2)
    return SymbolCoefficients(
        a=a,
        sigma=sigma,
        z=z,
        g1=g1,
        g1_prime_sigma=g1_prime,
        g2=g2,
        resolvent=resolvent,
        polynomial=polynomial,
    )


def reduced_symbol(
    a: float,
    geom: CurveGeometry,
    minimum: BandMinimum | None = None,
    coeffs: SymbolCoefficients | None = None,
) -> ReducedSymbol:
    """Samples of lin, c1 and quad along the edge"""
    minimum = minimum or band_minimum(a)
    coeffs = coeffs or symbol_coefficients(a, minimum)
    k = geom.k_samples
    mu_pp = minimum.mu_pp
    return ReducedSymbol(
        a=a,
        mu_pp=mu_pp,
        sigma_a=minimum.sigma_a,
        beta_a=minimum.beta_a,
        L=geom.L,
        s_samples=geom.s_samples,
        k_samples=k,
        c1_samples=k * coeffs.g1_prime_sigma / mu_pp,
        lin_samples=k * coeffs.g1,
        quad_samples=k ** 2 * coeffs.g2 - (k * coeffs.g1_prime_sigma) ** 2 / (2 * mu_pp),
    )


def effective_symbol_table(
    a: float,
    geom: CurveGeometry,
    sigmas: np.ndarray,
    hbar: float,
    minimum: BandMinimum | None = None,
) -> np.ndarray:
    """p_eff(s, sigma) = mu_a(sigma) - hbar k g1(sigma) + hbar^2 k^2 g2(sigma), rows over s"""
    minimum = minimum or band_minimum(a)
    k = geom.k_samples[:, None]
    columns = []
    for sigma in np.asarray(sigmas, dtype=float):
        grid = TransverseGrid.for_band(a, sigma)
        mu = band_value(a, sigma, 1, grid).mu
        g1 = -n1_element(a, sigma, grid)
        g2, _, _ = q2_pm(a, sigma, minimum.beta_a, grid)
        columns.append((mu, g1, g2))
    mu, g1, g2 = (np.array(c)[None, :] for c in zip(*columns))
    return mu - hbar * k * g1 + hbar ** 2 * k ** 2 * g2
