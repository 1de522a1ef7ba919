import math

import numpy as np
import pytest

from app.core.errors import HypothesisError, RejectedInputError
from app.schemas.geometry import CurveSpec
from app.services.geometry import (
    curvature_max,
    curvature_of,
    curve_geometry,
    flat_geometry,
    flux_offsets,
    parametrize,
)


def test_circle_geometry():
    """Radius 2: L = 2 pi, k = 1/2, area 4 pi"""
    geom = curve_geometry(CurveSpec(kind="circle", params=[2.0], samples=128))
    assert abs(geom.L - 2 * math.pi) < 1e-12
    assert np.allclose(geom.k_samples, 0.5, atol=1e-12)
    assert abs(geom.area - 4 * math.pi) < 1e-10
    assert abs(geom.gamma0 - 1.0) < 1e-10


def test_gauss_bonnet(ellipse):
    """Total curvature 2 pi"""
    assert abs(ellipse.total_curvature() - 2 * math.pi) < 1e-10


def test_ellipse_area_and_grid(ellipse):
    """pi p q and the uniform arc-length grid starting at -L"""
    assert abs(ellipse.area - math.pi * 0.6) < 1e-10
    assert ellipse.s_samples[0] == pytest.approx(-ellipse.L)
    assert np.allclose(np.diff(ellipse.s_samples), ellipse.ds)


def test_ellipse_curvature_maximum(ellipse):
    """k_max = p/q^2 and k'' = -3p(p^2 - q^2)/q^6 at the end of the major axis"""
    cmax = curvature_max(ellipse)
    assert abs(cmax.s_max) < 1e-9
    assert abs(cmax.k_max - 1.0 / 0.36) < 1e-8
    assert cmax.k_pp == pytest.approx(-3 * (1 - 0.36) / 0.6 ** 6, rel=1e-3)
    # both ends of the major axis
    assert cmax.multiplicity == 2


def test_fourier_curvature_second_derivative():
    """k_ss = k_phiphi / |M'|^2 at a symmetric maximum"""
    eps = 0.01
    spec = CurveSpec(kind="fourier", params=[1.0, eps], samples=1024)
    cmax = curvature_max(curve_geometry(spec))

    d = 1e-3
    derivs = parametrize(spec, np.array([-d, 0.0, d]))
    k = curvature_of(derivs)
    speed = math.hypot(derivs.dx[1], derivs.dy[1])
    k_ss = (k[0] - 2 * k[1] + k[2]) / d ** 2 / speed ** 2

    assert cmax.k_max == pytest.approx(k[1], rel=1e-8)
    assert cmax.k_pp == pytest.approx(k_ss, rel=1e-3)
    # first-order estimate -12 eps ignores the stretching of arc length
    assert cmax.k_pp == pytest.approx(-12 * eps, rel=0.1)


def test_circle_has_no_unique_maximum(unit_circle):
    """Constant curvature"""
    with pytest.raises(HypothesisError):
        curvature_max(unit_circle)


def test_rejected_curves():
    """Non-positive radius and too few samples"""
    with pytest.raises(RejectedInputError):
        curve_geometry(CurveSpec(kind="fourier", params=[1.0, 1.5]))
    with pytest.raises(RejectedInputError):
        curve_geometry(CurveSpec(kind="circle", params=[1.0]), N=32)


def test_flux_offsets_reduction(ellipse):
    """theta in [0, hbar pi / L) and gamma0/hbar = theta + m * period"""
    for h in (1e-2, 1e-4, 1e-6):
        fo = flux_offsets(ellipse, h)
        hbar = math.sqrt(h)
        assert 0 <= fo.theta < fo.period
        assert fo.period == pytest.approx(hbar * math.pi / ellipse.L)
        assert fo.theta + fo.m_index * fo.period == pytest.approx(ellipse.gamma0 / hbar, rel=1e-12)


def test_alpha_h(unit_circle):
    """alpha_h = |Omega| / (2 L h) - sigma / hbar"""
    fo = flux_offsets(unit_circle, 1e-4, sigma_m1=0.77)
    assert fo.alpha_h == pytest.approx(math.pi / (2 * math.pi * 1e-4) - 0.77 / 1e-2)
    with pytest.raises(RejectedInputError):
        flux_offsets(unit_circle, -1.0)


def test_flat_geometry():
    """k = 0 with zero flux"""
    geom = flat_geometry(3.0, 64)
    assert geom.total_curvature() == 0.0
    assert flux_offsets(geom, 0.01).theta == 0.0
