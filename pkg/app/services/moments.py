"""Moments of the band ground state, the Neumann half-line model and the constants C(a), G, C0."""

import math

import numpy as np
import structlog
from scipy.linalg import solve_banded
from scipy.optimize import minimize_scalar

from app.core.config import settings
from app.core.errors import ConvergenceError, EnlargeDomainError, NoMinimumError, RejectedInputError
from app.schemas.band import BandMinimum, TransverseGrid
from app.schemas.moments import DeGennesData, GConstants, IdentityReport, MomentSet, UniversalConstants
from app.schemas.operators import TridiagonalOperator
from app.services.band1d import band_minimum, eigenpair, interior_nodes, richardson, split_integral
from app.services.eigcore import deflated_solve, tridiag_eigvec, tridiag_lowest

logger = structlog.get_logger()


def _boundary_derivative(t: np.ndarray, u: np.ndarray, spacing: float) -> tuple[float, float]:
    """u(0) and the average of the two one-sided second-order differences at t = 0"""
    i = int(np.argmin(np.abs(t)))
    right = (-3 * u[i] + 4 * u[i + 1] - u[i + 2]) / (2 * spacing)
    left = (3 * u[i] - 4 * u[i - 1] + u[i - 2]) / (2 * spacing)
    return float(u[i]), 0.5 * (left + right)


def _ground_quantities(a: float, sigma: float, grid: TransverseGrid) -> dict[str, float]:
    _, u = eigenpair(a, sigma, 1, grid)
    t = interior_nodes(grid)
    q: dict[str, float] = {}
    for n in range(5):
        q[f"M{n}"] = split_integral(a, t, lambda t, b, u, n=n: (b * t - sigma) ** n / b * u ** 2, u)
    q["tau_sq"] = split_integral(a, t, lambda t, b, u: t * (sigma - b * t) ** 2 * u ** 2, u)
    q["b_tau_sq"] = split_integral(a, t, lambda t, b, u: b * t ** 2 * (sigma - b * t) * u ** 2, u)
    q["phi0"], q["dphi0"] = _boundary_derivative(t, u, grid.spacing)
    return q


def _extrapolated(a: float, sigma: float, grid: TransverseGrid) -> tuple[dict[str, float], float]:
    coarse = _ground_quantities(a, sigma, grid)
    fine = _ground_quantities(a, sigma, grid.refined())
    values, error = {}, 0.0
    for key in coarse:
        values[key], err = richardson(coarse[key], fine[key])
        if key.startswith("M"):
            error = max(error, err)
    return values, error


def moments(a: float, minimum: BandMinimum, grid: TransverseGrid | None = None) -> MomentSet:
    """M_n(a) = int b^-1 (b t - sigma(a))^n |phi_a|^2, n = 0..4"""
    if abs(a) < 1e-6:
        raise RejectedInputError("moment weight 1/b_a is singular", a=a)
    grid = grid or TransverseGrid.for_band(a, minimum.sigma_a)
    values, error = _extrapolated(a, minimum.sigma_a, grid)
    return MomentSet(
        a=a,
        sigma=minimum.sigma_a,
        values=tuple(values[f"M{n}"] for n in range(5)),
        quadrature_error=error,
        phi0=values["phi0"],
        dphi0=values["dphi0"],
    )


def check_moment_identities(
    a: float,
    minimum: BandMinimum | None = None,
    grid: TransverseGrid | None = None,
) -> IdentityReport:
    minimum = minimum or band_minimum(a)
    grid = grid or TransverseGrid.for_band(a, minimum.sigma_a)
    q, _ = _extrapolated(a, minimum.sigma_a, grid)
    sigma, beta = minimum.sigma_a, minimum.beta_a
    phi, dphi = q["phi0"], q["dphi0"]
    jump, jump_sq = 1.0 / a - 1.0, 1.0 / a ** 2 - 1.0
    # vanishes at the minimum; couples M1 to the values at t = 0
    energy = sigma ** 2 * phi ** 2 - dphi ** 2 - beta * phi ** 2

    residuals = {
        "M1": q["M1"],
        "M1_boundary": 2 * q["M1"] - jump_sq * energy,
        "M2": q["M2"] - (0.5 * beta * q["M0"] + 0.25 * jump * phi * dphi - 0.25 * sigma * jump_sq * energy),
        "M3": q["M3"] - (-jump * sigma * phi * dphi / 3.0 + 4 * beta * q["M1"] / 6.0
                         + sigma ** 2 * jump_sq * energy / 6.0),
        "tau_sq": q["tau_sq"] - (q["M3"] + sigma * q["M2"]),
        "b_tau_sq": q["b_tau_sq"] - (-q["M3"] - 2 * sigma * q["M2"] - sigma ** 2 * q["M1"]),
        "n1": 2 * q["tau_sq"] + q["b_tau_sq"] - q["M3"],
    }
    report = IdentityReport(a=a, residuals=residuals)
    logger.info("moment_identities_checked", a=a, worst=report.worst())
    return report


def constant_C(a: float, minimum: BandMinimum | None = None, grid: TransverseGrid | None = None) -> float:
    """C(a) = -M_3(a)"""
    minimum = minimum or band_minimum(a)
    return -moments(a, minimum, grid).values[3]


# Neumann half-line model


def _halfline_operator(sigma: float, spacing: float, n: int) -> TridiagonalOperator:
    """Ghost-node Neumann stencil at t = 0, symmetrized with the half trapezoid weight"""
    t = np.arange(n) * spacing
    offdiag = np.full(n - 1, -1.0 / spacing ** 2)
    offdiag[0] = -math.sqrt(2.0) / spacing ** 2
    return TridiagonalOperator(diag=2.0 / spacing ** 2 + (sigma - t) ** 2, offdiag=offdiag, spacing=spacing)


def _trapezoid_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = 0.5
    return w


def _halfline_ground(sigma: float, spacing: float, n: int) -> tuple[float, np.ndarray]:
    T = _halfline_operator(sigma, spacing, n)
    mu = float(tridiag_lowest(T, 1)[0])
    y = tridiag_eigvec(T, mu)
    f = y / np.sqrt(_trapezoid_weights(n))
    tail = abs(f[-1]) / float(np.max(np.abs(f)))
    if tail > settings.tail_tolerance:
        raise EnlargeDomainError("half-line ground state does not vanish at T", sigma=sigma, tail=tail)
    return mu, f


def _halfline_integral(values: np.ndarray, spacing: float) -> float:
    return float(spacing * np.sum(_trapezoid_weights(values.size) * values))


def _halfline_minimum(spacing: float, n: int, guess: float) -> tuple[float, float]:
    """Newton on the Feynman-Hellmann slope of the half-line band"""
    t = np.arange(n) * spacing

    def slope(s: float) -> float:
        _, f = _halfline_ground(s, spacing, n)
        return 2.0 * _halfline_integral((s - t) * f ** 2, spacing)

    sigma, d = guess, 1e-4
    for _ in range(30):
        s = slope(sigma)
        step = s / ((slope(sigma + d) - slope(sigma - d)) / (2 * d))
        sigma -= step
        if abs(s) <= settings.minimum_tol or abs(step) <= 1e-10 * max(1.0, abs(sigma)):
            return sigma, _halfline_ground(sigma, spacing, n)[0]
    raise ConvergenceError("Newton iteration for Theta0 did not converge")


def degennes(spacing: float | None = None, T: float | None = None) -> DeGennesData:
    """Theta0, xi0, f0 and half-line moments of -d^2/dt^2 + (sigma - t)^2 with Neumann at 0"""
    dt = spacing or settings.grid_spacing
    T = T or 1.0 + settings.truncation_margin
    n = int(math.ceil(T / dt))

    scan = np.arange(0.0, 2.0 + 1e-9, 0.05)
    coarse_mu = [float(tridiag_lowest(_halfline_operator(s, 1 / 20, int(T * 20)), 1)[0]) for s in scan]
    i = int(np.argmin(coarse_mu))
    if i == 0 or i == scan.size - 1:
        raise NoMinimumError("half-line band minimum not bracketed")
    guess = minimize_scalar(
        lambda s: float(tridiag_lowest(_halfline_operator(s, dt, n), 1)[0]),
        bracket=(scan[i - 1], scan[i], scan[i + 1]),
        method="golden",
        options={"xtol": 1e-3},
    ).x

    s_coarse, theta_coarse = _halfline_minimum(dt, n, guess)
    s_fine, theta_fine = _halfline_minimum(dt / 2, 2 * n, s_coarse)
    Theta0, _ = richardson(theta_coarse, theta_fine)
    sigma_numeric, _ = richardson(s_coarse, s_fine)
    xi0 = math.sqrt(Theta0)

    per_grid = []
    for h, m in ((dt, n), (dt / 2, 2 * n)):
        _, f = _halfline_ground(xi0, h, m)
        t = np.arange(m) * h
        per_grid.append((t, f, [_halfline_integral((xi0 - t) ** k * f ** 2, h) for k in range(5)]))

    (_, f_c, m_c), (t_f, f_f, m_f) = per_grid
    halfmoments = tuple(richardson(c, f)[0] for c, f in zip(m_c, m_f))
    f0_at_0, _ = richardson(f_c[0], f_f[0])

    logger.info("degennes_computed", Theta0=Theta0, xi0=xi0, sigma_numeric=sigma_numeric)
    return DeGennesData(
        Theta0=Theta0,
        xi0=xi0,
        t=t_f,
        f0=f_f,
        f0_at_0=f0_at_0,
        halfmoments=halfmoments,
        sigma_numeric=sigma_numeric,
        spacing=dt / 2,
    )


def degennes_resolvent_closed_form(dg: DeGennesData) -> np.ndarray:
    """v = (t f0 + (Theta0 - (xi0 - t)^2) f0') / 6 solves the Dirichlet resolvent problem at Theta0"""
    df = np.gradient(dg.f0, dg.spacing, edge_order=2)
    df[0] = 0.0
    return (dg.t * dg.f0 + (dg.Theta0 - (dg.xi0 - dg.t) ** 2) * df) / 6.0


def _g_pieces(dg: DeGennesData, spacing: float) -> dict[str, float]:
    n = int(round((dg.t[-1] + dg.spacing) / spacing))
    xi0, theta = dg.xi0, dg.Theta0
    _, f = _halfline_ground(xi0, spacing, n)
    t = np.arange(n) * spacing
    w = (2 * t * (xi0 - t) ** 2 + t ** 2 * (xi0 - t)) * f
    polynomial = _halfline_integral((3 * t ** 2 * (xi0 - t) ** 2 + 2 * t ** 3 * (xi0 - t) + 0.25 * t ** 4) * f ** 2,
                                    spacing)

    # Dirichlet at 0: unknowns t_1..t_{n-1}
    ti, wi = t[1:], w[1:]
    D = TridiagonalOperator(
        diag=2.0 / spacing ** 2 + (xi0 - ti) ** 2,
        offdiag=np.full(ti.size - 1, -1.0 / spacing ** 2),
        spacing=spacing,
    )
    ab = np.zeros((3, ti.size))
    ab[0, 1:] = D.offdiag
    ab[1] = D.diag - theta
    ab[2, :-1] = D.offdiag
    v_dirichlet = solve_banded((1, 1), ab, wi)
    v_deflated = deflated_solve(D, theta, f[1:], wi)

    return {
        "polynomial": polynomial,
        "resolvent_dirichlet": float(spacing * np.sum(v_dirichlet * wi)),
        "resolvent_deflated": float(spacing * np.sum(v_deflated * wi)),
    }


def constant_G(dg: DeGennesData) -> GConstants:
    """Closed forms and the direct resolvent route for G"""
    M0, M1, M2, M3, M4 = dg.halfmoments
    xi0, theta = dg.xi0, dg.Theta0

    coarse = _g_pieces(dg, 2 * dg.spacing)
    fine = _g_pieces(dg, dg.spacing)
    pieces = {key: richardson(coarse[key], fine[key])[0] for key in coarse}
    G_direct = pieces["polynomial"] - pieces["resolvent_dirichlet"]

    result = GConstants(
        G_closed=(2.0 / 3.0) * M4 - (5.0 / 6.0) * xi0 * M3 - theta ** 2 / 4.0,
        G_closed_alt=0.25 + (2.0 / 3.0) * xi0 * M3,
        G_direct=G_direct,
        G_printed=-7.0 * M4 + 1.5 * xi0 * M3 + 1.5 * theta ** 2,
        G_printed_alt=-21.0 / 8.0 - (9.0 / 8.0) * theta ** 2 - (57.0 / 4.0) * xi0 * M3,
        **pieces,
    )
    if result.deflation_gap > 1e-8:
        logger.info("resolvent_routes_differ", gap=result.deflation_gap)
    if result.printed_gap > 1e-5:
        logger.warning("printed_forms_differ", gap=result.printed_gap)
    return result


def universal_constants(
    a: float,
    minimum: BandMinimum | None = None,
    dg: DeGennesData | None = None,
) -> UniversalConstants:
    dg = dg or degennes()
    G = constant_G(dg)
    C = constant_C(a, minimum)
    return UniversalConstants(
        a=a,
        C_of_a=C,
        G=G.G_closed,
        C0=-0.25 + G.G_closed,
        G_direct=G.G_direct,
        G_printed=G.G_printed,
    )
