"""Edge-curve geometry: arc length, curvature, area and flux offsets."""

import math
from typing import NamedTuple

import numpy as np
import structlog
from scipy.interpolate import CubicSpline, PchipInterpolator

from app.core.errors import HypothesisError, RejectedInputError
from app.schemas.geometry import CurvatureMax, CurveGeometry, CurveSpec, FluxOffsets

logger = structlog.get_logger()

OVERSAMPLING = 8


class Derivatives(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    ddx: np.ndarray
    ddy: np.ndarray


def parametrize(spec: CurveSpec, phi: np.ndarray) -> Derivatives:
    """Position and first two derivatives in the curve parameter, counterclockwise"""
    c, s = np.cos(phi), np.sin(phi)
    if spec.kind == "ellipse":
        p, q = spec.params
        return Derivatives(p * c, q * s, -p * s, q * c, -p * c, -q * s)

    R = spec.params[0]
    r, dr, ddr = R * np.ones_like(phi), np.zeros_like(phi), np.zeros_like(phi)
    if spec.kind == "fourier":
        for j, eps in enumerate(spec.params[1:], start=2):
            r = r + R * eps * np.cos(j * phi)
            dr = dr - R * eps * j * np.sin(j * phi)
            ddr = ddr - R * eps * j ** 2 * np.cos(j * phi)
        if np.any(r <= 0):
            raise RejectedInputError("fourier amplitudes make the radius non-positive")
    return Derivatives(
        r * c,
        r * s,
        dr * c - r * s,
        dr * s + r * c,
        ddr * c - 2 * dr * s - r * c,
        ddr * s + 2 * dr * c - r * s,
    )


def curvature_of(d: Derivatives) -> np.ndarray:
    return (d.dx * d.ddy - d.dy * d.ddx) / (d.dx ** 2 + d.dy ** 2) ** 1.5


class _ArcLength:
    """Spectral primitive of the speed |M'(phi)|, with s(0) = 0"""

    def __init__(self, spec: CurveSpec, M: int):
        phi = -math.pi + 2 * math.pi * np.arange(M) / M
        d = parametrize(spec, phi)
        coeffs = np.fft.fft(np.hypot(d.dx, d.dy)) / M
        k = np.fft.fftfreq(M, 1.0 / M)
        # undo the -pi origin of the sample grid
        coeffs = coeffs * np.exp(1j * k * math.pi)
        coeffs[M // 2] = 0.0
        self.mean = coeffs[0].real
        primitive = np.zeros(M, dtype=complex)
        primitive[k != 0] = coeffs[k != 0] / (1j * k[k != 0])
        self.primitive, self.k = primitive, k
        self.offset = float(np.sum(primitive).real)
        self.phi, self.d = phi, d

    @property
    def half_length(self) -> float:
        return math.pi * self.mean

    def on_grid(self) -> np.ndarray:
        M = self.phi.size
        waves = M * np.fft.ifft(self.primitive * np.exp(-1j * self.k * math.pi))
        return self.mean * self.phi + waves.real - self.offset

    def __call__(self, phi: np.ndarray) -> np.ndarray:
        phi = np.asarray(phi)
        waves = np.exp(1j * np.outer(phi, self.k)) @ self.primitive
        return self.mean * phi + waves.real - self.offset


def curve_geometry(spec: CurveSpec, N: int | None = None) -> CurveGeometry:
    """Resample the curvature of a parametric curve on the uniform arc-length grid"""
    N = N or spec.samples
    if N < 64:
        raise RejectedInputError("at least 64 samples are required", samples=N)

    arc = _ArcLength(spec, OVERSAMPLING * N)
    L = arc.half_length
    d = arc.d
    area = 0.5 * float(np.sum(d.x * d.dy - d.y * d.dx)) * (2 * math.pi / arc.phi.size)
    if area <= 0:
        raise RejectedInputError("curve must be counterclockwise and enclose positive area", area=area)

    s_target = -L + 2 * L * np.arange(N) / N
    s_grid = arc.on_grid()
    inverse = PchipInterpolator(np.append(s_grid, s_grid[0] + 2 * L), np.append(arc.phi, math.pi))
    phi = inverse(s_target)
    for _ in range(6):
        dd = parametrize(spec, phi)
        correction = (arc(phi) - s_target) / np.hypot(dd.dx, dd.dy)
        phi = phi - correction
        if np.max(np.abs(correction)) < 1e-14:
            break

    k = curvature_of(parametrize(spec, phi))
    geom = CurveGeometry(L=L, area=area, s_samples=s_target, k_samples=k, kind=spec.kind)

    turning = geom.total_curvature() / (2 * math.pi)
    if abs(turning - 1.0) > 1e-6:
        logger.error("curve_rejected", kind=spec.kind, turning=turning)
        raise RejectedInputError("curve is not simple with rotation index 1", turning=turning)

    logger.debug("curve_geometry_built", kind=spec.kind, L=L, area=area, samples=N)
    return geom


def flat_geometry(L: float, N: int, area: float = 0.0) -> CurveGeometry:
    """Synthetic straight edge of length 2L (k = 0), for the fibration check"""
    return CurveGeometry(
        L=L,
        area=area,
        s_samples=-L + 2 * L * np.arange(N) / N,
        k_samples=np.zeros(N),
        kind="flat",
    )


def periodic_spline(geom: CurveGeometry) -> CubicSpline:
    s = np.append(geom.s_samples, geom.s_samples[0] + 2 * geom.L)
    k = np.append(geom.k_samples, geom.k_samples[0])
    return CubicSpline(s, k, bc_type="periodic", extrapolate="periodic")


def curvature_max(geom: CurveGeometry) -> CurvatureMax:
    k = geom.k_samples
    scale = max(float(np.max(np.abs(k))), 1.0)
    if np.ptp(k) < 1e-9 * scale:
        raise HypothesisError("constant curvature has no unique maximum", kind=geom.kind)

    is_peak = (k >= np.roll(k, 1)) & (k >= np.roll(k, -1))
    peaks = np.flatnonzero(is_peak)
    top = float(np.max(k))
    leaders = peaks[k[peaks] >= top - 1e-9 * scale]
    if leaders.size > 1:
        # reflection-symmetric curves: two maxima half a period apart
        gap = abs(geom.s_samples[leaders[-1]] - geom.s_samples[leaders[0]])
        if leaders.size != 2 or abs(gap - geom.L) > 2 * geom.ds:
            logger.error("curvature_max_not_unique", maxima=leaders.size)
            raise HypothesisError("curvature maximum is not unique", maxima=int(leaders.size))
        leaders = leaders[np.argsort(np.abs(geom.s_samples[leaders]))]

    i = int(leaders[0])
    left, mid, right = k[i - 1], k[i], k[(i + 1) % k.size]
    denom = left - 2 * mid + right
    shift = 0.5 * (left - right) / denom if denom != 0 else 0.0
    s_max = float(geom.s_samples[i] + shift * geom.ds)

    spline = periodic_spline(geom)
    d = geom.ds
    f = spline(s_max + d * np.arange(-2, 3))
    k_pp = float((-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * d ** 2))
    if k_pp >= 0:
        raise HypothesisError("curvature maximum is degenerate", k_pp=k_pp)
    return CurvatureMax(s_max=s_max, k_max=float(spline(s_max)), k_pp=k_pp, multiplicity=int(leaders.size))


def flux_offsets(geom: CurveGeometry, h: float, sigma_m1: float | None = None) -> FluxOffsets:
    """theta(hbar) = gamma0/hbar reduced modulo hbar*pi/L, and alpha_h when sigma(-1) is given"""
    if h <= 0:
        raise RejectedInputError("h must be positive", h=h)
    hbar = math.sqrt(h)
    period = hbar * math.pi / geom.L
    x = geom.gamma0 / hbar
    m = math.floor(x / period)
    theta = x - m * period
    if theta >= period:
        m, theta = m + 1, theta - period
    elif theta < 0:
        m, theta = m - 1, theta + period

    alpha_h = None
    if sigma_m1 is not None:
        alpha_h = geom.area / (2 * geom.L * h) - sigma_m1 / hbar
    return FluxOffsets(h=h, theta=max(theta, 0.0), m_index=m, alpha_h=alpha_h, period=period)
