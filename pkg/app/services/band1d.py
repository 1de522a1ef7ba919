"""Band functions of the fibered transverse family -d^2/dt^2 + (sigma - b_a(t) t)^2."""

from typing import Callable

import numpy as np
import structlog
from scipy.optimize import brentq, minimize_scalar

from app.core.config import settings
from app.core.errors import ConvergenceError, EnlargeDomainError, NoMinimumError, RejectedInputError
from app.schemas.band import BandMinimum, BandPoint, ModelParams, TransverseGrid
from app.schemas.operators import TridiagonalOperator
from app.services.eigcore import tridiag_eigvec, tridiag_lowest

logger = structlog.get_logger()


def interior_nodes(grid: TransverseGrid) -> np.ndarray:
    """Unknowns of the Dirichlet problem: every node except +-T"""
    return grid.nodes()[1:-1]


def assemble_transverse(a: float, sigma: float, grid: TransverseGrid) -> TridiagonalOperator:
    t = interior_nodes(grid)
    h = grid.spacing
    potential = (sigma - ModelParams(a=a).step(t) * t) ** 2
    return TridiagonalOperator(
        diag=2.0 / h ** 2 + potential,
        offdiag=np.full(t.size - 1, -1.0 / h ** 2),
        spacing=h,
    )


def split_integral(a: float, t: np.ndarray, fn: Callable[..., np.ndarray], *fields: np.ndarray) -> float:
    """Trapezoid of fn(t, b, *fields) on each half-line; b_a jumps at the node t = 0"""
    t = np.asarray(t)
    zero = int(np.argmin(np.abs(t)))
    total = 0.0
    for part, b in ((slice(0, zero + 1), a), (slice(zero, None), 1.0)):
        ts = t[part]
        values = fn(ts, np.full(ts.size, b), *(f[part] for f in fields))
        total += np.trapezoid(values, ts)
    return float(total)


def richardson(coarse: float, fine: float) -> tuple[float, float]:
    """Second-order extrapolation over spacing ratio 2, with error estimate"""
    return (4.0 * fine - coarse) / 3.0, abs(fine - coarse) / 3.0


def _check_tail(u: np.ndarray, a: float, sigma: float) -> None:
    tail = max(abs(u[0]), abs(u[-1])) / float(np.max(np.abs(u)))
    if tail > settings.tail_tolerance:
        logger.error("truncation_check_failed", a=a, sigma=sigma, tail=tail)
        raise EnlargeDomainError("eigenfunction does not vanish at the truncation boundary",
                                 a=a, sigma=sigma, tail=tail)


def eigenpair(a: float, sigma: float, n: int, grid: TransverseGrid) -> tuple[float, np.ndarray]:
    """n-th eigenvalue and spacing-normalized eigenvector on one grid"""
    T = assemble_transverse(a, sigma, grid)
    values = tridiag_lowest(T, n)
    u = tridiag_eigvec(T, float(values[-1]))
    _check_tail(u, a, sigma)
    return float(values[-1]), u


def fh_slope(a: float, sigma: float, u: np.ndarray, grid: TransverseGrid) -> float:
    """Feynman-Hellmann derivative 2 <(sigma - b t) u, u>"""
    t = interior_nodes(grid)
    return float(2.0 * grid.spacing * np.sum((sigma - ModelParams(a=a).step(t) * t) * u ** 2))


def band_value(a: float, sigma: float, n: int = 1, grid: TransverseGrid | None = None) -> BandPoint:
    """Richardson-extrapolated band value mu_a^[n](sigma)"""
    if n < 1:
        raise RejectedInputError("band level must be >= 1", n=n)
    ModelParams(a=a)
    grid = grid or TransverseGrid.for_band(a, sigma)

    coarse, _ = eigenpair(a, sigma, n, grid)
    fine_grid = grid.refined()
    fine, u = eigenpair(a, sigma, n, fine_grid)
    mu, error = richardson(coarse, fine)

    return BandPoint(
        a=a,
        sigma=sigma,
        level=n,
        mu=mu,
        error=error,
        groundstate=u if n == 1 else None,
        t=interior_nodes(fine_grid) if n == 1 else None,
    )


def _scan_minimum(a: float) -> tuple[float, float, float]:
    """Coarse bracket of the band minimum on the scan interval"""
    sigmas = np.arange(settings.sigma_scan_min, settings.sigma_scan_max + 0.5 * settings.sigma_scan_step,
                       settings.sigma_scan_step)
    grid = TransverseGrid.for_band(a, max(abs(sigmas[0]), abs(sigmas[-1])), settings.coarse_spacing)

    def mu(s: float) -> float:
        return float(tridiag_lowest(assemble_transverse(a, s, grid), 1)[0])

    values = np.array([mu(s) for s in sigmas])
    i = int(np.argmin(values))
    if i == 0 or i == sigmas.size - 1 or values[i] >= abs(a) - 1e-6:
        logger.error("band_minimum_not_bracketed", a=a, index=i, mu=float(values[i]))
        raise NoMinimumError("band minimum not bracketed in the scan interval", a=a)

    found = minimize_scalar(
        mu,
        bracket=(sigmas[i - 1], sigmas[i], sigmas[i + 1]),
        method="golden",
        options={"xtol": 1e-3},
    )
    return float(found.x), float(found.fun), float(sigmas[i + 1] - sigmas[i - 1])


def _newton_minimum(a: float, sigma: float, grid: TransverseGrid, tol: float,
                    max_iter: int = 30) -> tuple[float, float, int]:
    """Newton on the Feynman-Hellmann slope; returns (sigma, mu, iterations)"""
    delta = 1e-4
    for it in range(1, max_iter + 1):
        mu, u = eigenpair(a, sigma, 1, grid)
        slope = fh_slope(a, sigma, u, grid)
        _, u_plus = eigenpair(a, sigma + delta, 1, grid)
        _, u_minus = eigenpair(a, sigma - delta, 1, grid)
        curvature = (fh_slope(a, sigma + delta, u_plus, grid) - fh_slope(a, sigma - delta, u_minus, grid)) / (2 * delta)
        if curvature <= 0:
            raise NoMinimumError("band is not convex near the bracketed minimum", a=a, sigma=sigma)
        step = slope / curvature
        sigma -= step
        if abs(slope) <= tol or abs(step) <= 1e-12 * max(1.0, abs(sigma)):
            mu, _ = eigenpair(a, sigma, 1, grid)
            return sigma, mu, it

    logger.error("band_minimum_newton_failed", a=a, sigma=sigma)
    raise ConvergenceError("Newton iteration for the band minimum did not converge", a=a)


def curvature_at(a: float, sigma: float, grid: TransverseGrid, step: float | None = None) -> float:
    """mu'' from the 5-point first-derivative stencil on Feynman-Hellmann slopes"""
    d = step or settings.stencil_step
    slopes = []
    for j in (-2, -1, 1, 2):
        s = sigma + j * d
        _, u = eigenpair(a, s, 1, grid)
        slopes.append(fh_slope(a, s, u, grid))
    return (slopes[0] - 8 * slopes[1] + 8 * slopes[2] - slopes[3]) / (12 * d)


def band_minimum(a: float, grid: TransverseGrid | None = None, tol: float | None = None) -> BandMinimum:
    """Locate sigma(a), beta_a and mu''_a(sigma(a))"""
    ModelParams(a=a)
    tol = tol or settings.minimum_tol
    guess, _, width = _scan_minimum(a)
    grid = grid or TransverseGrid.for_band(a, abs(guess) + width)

    try:
        s_coarse, b_coarse, it_coarse = _newton_minimum(a, guess, grid, tol)
        fine_grid = grid.refined()
        s_fine, b_fine, it_fine = _newton_minimum(a, s_coarse, fine_grid, tol)
    except (NoMinimumError, ConvergenceError) as e:
        logger.error("band_minimum_failed", a=a, error=str(e))
        raise

    sigma_a, _ = richardson(s_coarse, s_fine)
    beta_a, beta_error = richardson(b_coarse, b_fine)
    mu_pp, mu_pp_error = richardson(curvature_at(a, s_coarse, grid), curvature_at(a, s_fine, fine_grid))

    logger.info("band_minimum_found", a=a, sigma_a=sigma_a, beta_a=beta_a,
                mu_pp=mu_pp, iterations=it_coarse + it_fine)
    return BandMinimum(
        a=a,
        sigma_a=sigma_a,
        beta_a=beta_a,
        mu_pp=mu_pp,
        tol=tol,
        beta_error=beta_error,
        mu_pp_error=mu_pp_error,
        iterations=it_coarse + it_fine,
    )


def band_level_set(
    a: float,
    E: float,
    minimum: BandMinimum,
    grid: TransverseGrid | None = None,
) -> tuple[float, float]:
    """Endpoints of mu_a^{-1}([beta_a, E])"""
    if not minimum.beta_a < E < abs(a):
        raise RejectedInputError("E must lie in (beta_a, |a|)", E=E, beta_a=minimum.beta_a)

    spacing = grid.spacing if grid is not None else settings.grid_spacing

    def excess(s: float) -> float:
        return band_value(a, s, 1, TransverseGrid.for_band(a, s, spacing)).mu - E

    center = minimum.sigma_a
    if excess(center) >= 0:
        return center, center

    def bracket(direction: float) -> tuple[float, float]:
        inner, d = center, 0.25
        for _ in range(12):
            outer = center + direction * d
            if excess(outer) > 0:
                return (outer, inner) if direction < 0 else (inner, outer)
            inner, d = outer, 2 * d
        raise ConvergenceError("level set not bracketed", a=a, E=E, direction=direction)

    lo, hi = bracket(-1.0)
    sigma_minus = brentq(excess, lo, hi, xtol=1e-10)
    lo, hi = bracket(1.0)
    sigma_plus = brentq(excess, lo, hi, xtol=1e-10)

    logger.debug("band_level_set", a=a, E=E, sigma_minus=sigma_minus, sigma_plus=sigma_plus)
    return float(sigma_minus), float(sigma_plus)


def band_table(a: float, sigmas: np.ndarray, levels: int = 1,
               grid_spacing: float | None = None) -> list[BandPoint]:
    """Band values for a list of sigma and the lowest levels"""
    points = []
    for s in sigmas:
        grid = TransverseGrid.for_band(a, float(s), grid_spacing)
        for n in range(1, levels + 1):
            p = band_value(a, float(s), n, grid)
            points.append(p.model_copy(update={"groundstate": None, "t": None}))
    return points
