"""Fourier-basis quantization of edge operators, harmonic predictions and the Weyl count."""

import math
from typing import Callable

import numpy as np
import structlog
from scipy.linalg import eigvalsh

from app.core.config import settings
from app.core.errors import AliasingError, ConvergenceError, HypothesisError, RejectedInputError
from app.schemas.band import BandMinimum, ModelParams
from app.schemas.geometry import CurvatureMax, CurveGeometry
from app.schemas.operators import HermitianMatrix
from app.schemas.spectrum import EdgeOperator, HarmonicPrediction, SpectrumResult, WeylCount
from app.schemas.symbol import ReducedSymbol
from app.services.band1d import band_level_set, band_value
from app.services.eigcore import dense_hermitian_eigs
from app.services.geometry import curvature_max, flux_offsets

logger = structlog.get_logger()


def fourier_coefficients(samples: np.ndarray) -> np.ndarray:
    """c_m of f = sum c_m e^{i pi m s / L} from samples on s_j = -L + 2Lj/N"""
    N = samples.size
    return (-1.0) ** np.fft.fftfreq(N, 1.0 / N) * np.fft.fft(samples) / N


def convolution_matrix(samples: np.ndarray, modes: np.ndarray) -> np.ndarray:
    """Matrix of multiplication by f in the orthonormal basis e^{i pi m s / L} / sqrt(2L)"""
    N = samples.size
    if N <= 2 * (modes[-1] - modes[0]):
        raise AliasingError("s-grid too coarse for the requested modes", samples=N, modes=int(modes.size))
    c = fourier_coefficients(samples)
    return c[np.subtract.outer(modes, modes) % N]


def default_modes(rs: ReducedSymbol, hbar: float, E_plus: float | None = None) -> int:
    """Kinetic window (mu''/2) p^2 <= E+ - beta_a plus guard modes"""
    upper = E_plus if E_plus is not None else ModelParams(a=rs.a).window(rs.beta_a)[1]
    width = math.sqrt(2 * (upper - rs.beta_a) / rs.mu_pp)
    return int(math.ceil(width * rs.L / (math.pi * hbar))) + settings.guard_modes


def quantize_reduced(
    rs: ReducedSymbol,
    hbar: float,
    theta: float,
    n_modes: int | None = None,
    m_center: int | None = None,
) -> EdgeOperator:
    """Op^w of (mu''/2)(sigma + theta - sigma_a - hbar c1)^2 - hbar lin + hbar^2 quad"""
    n_modes = n_modes or default_modes(rs, hbar)
    if m_center is None:
        m_center = int(round((rs.sigma_a - theta) * rs.L / (math.pi * hbar)))
    m = m_center + np.arange(-n_modes, n_modes + 1)

    K = np.diag(hbar * math.pi * m / rs.L + theta - rs.sigma_a).astype(complex)
    K -= hbar * convolution_matrix(rs.c1_samples, m)
    matrix = (0.5 * rs.mu_pp) * (K @ K)
    matrix -= hbar * convolution_matrix(rs.lin_samples, m)
    matrix += hbar ** 2 * convolution_matrix(rs.quad_samples, m)

    logger.debug("edge_operator_assembled", hbar=hbar, theta=theta, modes=int(m.size))
    return EdgeOperator(hbar=hbar, theta=theta, L=rs.L, n_modes=n_modes, m_center=m_center,
                        matrix=HermitianMatrix(entries=matrix))


def spectrum_lowest(op: EdgeOperator, n: int, E: float | None = None,
                    params: ModelParams | None = None) -> SpectrumResult:
    values, vectors = dense_hermitian_eigs(op.matrix, n, vectors=True)
    edge_mass = float(np.max(np.abs(vectors[0]) ** 2 + np.abs(vectors[-1]) ** 2))
    count = None
    if E is not None:
        count = int(eigvalsh(op.matrix.entries, subset_by_value=(-np.inf, E)).size)

    diagnostics = {
        "hermiticity_residual": op.matrix.hermiticity_residual(),
        "edge_mode_mass": edge_mass,
        "truncation_ok": edge_mass <= 1e-10,
        "modes": 2 * op.n_modes + 1,
    }
    if edge_mass > 1e-10:
        logger.warning("mode_truncation_suspect", edge_mass=edge_mass, modes=2 * op.n_modes + 1)
    return SpectrumResult(params=params, eigenvalues=np.asarray(values), count_below_E=count,
                          converged=True, diagnostics=diagnostics)


def harmonic_prediction(
    a: float,
    geom: CurveGeometry,
    minimum: BandMinimum,
    C: float,
    hbar: float,
    n: int = 1,
    cmax: CurvatureMax | None = None,
) -> HarmonicPrediction:
    """-C k_max hbar + (n - 1/2) hbar^{3/2} sqrt(C mu'' |k''|) and its h-scale form"""
    cmax = cmax or curvature_max(geom)
    if cmax.k_pp >= 0:
        raise HypothesisError("curvature maximum is degenerate", k_pp=cmax.k_pp)
    if C <= 0:
        raise HypothesisError("harmonic regime needs C(a) > 0", a=a, C=C)

    root = math.sqrt(C * minimum.mu_pp * abs(cmax.k_pp))
    h = hbar ** 2
    return HarmonicPrediction(
        hbar=hbar,
        level=n,
        edge_value=-C * cmax.k_max * hbar + (n - 0.5) * hbar ** 1.5 * root,
        full_value=minimum.beta_a * h - C * cmax.k_max * h ** 1.5 + (n - 0.5) * h ** 1.75 * root,
        spacing=hbar ** 1.5 * root,
    )


def a_minus1_operator(
    geom: CurveGeometry,
    h: float,
    C0: float,
    mu_pp: float,
    sigma_m1: float,
    n_modes: int = 96,
    alpha: float | None = None,
) -> EdgeOperator:
    """(mu''/2)(D_s + alpha_h)^2 + C0 k(s)^2 with periodic conditions on [-L, L)"""
    if alpha is None:
        alpha = flux_offsets(geom, h, sigma_m1).alpha_h
    m_center = int(round(-alpha * geom.L / math.pi))
    m = m_center + np.arange(-n_modes, n_modes + 1)
    matrix = np.diag(0.5 * mu_pp * (math.pi * m / geom.L + alpha) ** 2).astype(complex)
    matrix += C0 * convolution_matrix(geom.k_samples ** 2, m)
    return EdgeOperator(hbar=math.sqrt(h), theta=alpha, L=geom.L, n_modes=n_modes, m_center=m_center,
                        matrix=HermitianMatrix(entries=matrix))


def a_minus1_full_prediction(h: float, gamma: np.ndarray, beta_m1: float) -> np.ndarray:
    """beta_{-1} h + h^2 gamma_n"""
    return beta_m1 * h + h ** 2 * np.asarray(gamma)


def _lattice_edge(inside: Callable[[int], bool], start: int, direction: int, stop: int) -> int:
    """Last lattice index from start, walking in direction, with inside(m) true"""
    m = start
    for _ in range(64):
        if inside(m + direction):
            m += direction
        elif (m - stop) * direction >= 0 and not inside(m):
            m -= direction
        else:
            return m
    raise ConvergenceError("lattice edge of the level set not found", start=start)


def weyl_count(
    a: float,
    geom: CurveGeometry,
    minimum: BandMinimum,
    E: float,
    h: float,
    sigma_pm: tuple[float, float] | None = None,
) -> WeylCount:
    """#{m : mu_a(hbar pi m / L + theta) <= E} against L(sigma+ - sigma-)/(pi hbar)"""
    if not minimum.beta_a < E < abs(a):
        raise RejectedInputError("E must lie in (beta_a, |a|)", E=E)
    hbar = math.sqrt(h)
    theta = flux_offsets(geom, h).theta
    sigma_minus, sigma_plus = sigma_pm or band_level_set(a, E, minimum)
    scale = geom.L / (math.pi * hbar)

    cache: dict[int, bool] = {}

    def inside(m: int) -> bool:
        if m not in cache:
            cache[m] = band_value(a, theta + m / scale).mu <= E
        return cache[m]

    # one run of lattice points: the band is unimodal
    lo_guess = math.ceil((sigma_minus - theta) * scale)
    hi_guess = math.floor((sigma_plus - theta) * scale)
    hi = _lattice_edge(inside, hi_guess, 1, lo_guess)
    lo = _lattice_edge(inside, lo_guess, -1, hi)
    count = hi - lo + 1 if inside(lo) and inside(hi) else 0
    prediction = (sigma_plus - sigma_minus) * scale

    logger.info("weyl_count", a=a, E=E, h=h, count=count, prediction=prediction, evaluations=len(cache))
    return WeylCount(h=h, E=E, count=max(count, 0), prediction=prediction,
                     sigma_minus=sigma_minus, sigma_plus=sigma_plus)
