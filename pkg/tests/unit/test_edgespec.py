import math

import numpy as np
import pytest

from app.core.errors import AliasingError, HypothesisError, RejectedInputError
from app.schemas.geometry import CurveGeometry
from app.schemas.symbol import ReducedSymbol
from app.services import edgespec
from app.services.edgespec import (
    a_minus1_full_prediction,
    a_minus1_operator,
    convolution_matrix,
    fourier_coefficients,
    harmonic_prediction,
    quantize_reduced,
    spectrum_lowest,
    weyl_count,
)
from app.services.effsymbol import reduced_symbol
from app.services.geometry import curvature_max, flux_offsets
from app.services.moments import moments


def synthetic_symbol(geom: CurveGeometry, g1=0.2, g1p=0.3, g2=-0.1, mu_pp=1.2) -> ReducedSymbol:
    k = geom.k_samples
    return ReducedSymbol(
        a=-0.5, mu_pp=mu_pp, sigma_a=0.8, beta_a=0.3, L=geom.L,
        s_samples=geom.s_samples, k_samples=k,
        c1_samples=k * g1p / mu_pp,
        lin_samples=k * g1,
        quad_samples=k ** 2 * g2 - (k * g1p) ** 2 / (2 * mu_pp),
    )


@pytest.fixture(scope="module")
def ellipse_symbol(ellipse, minimum_half):
    return reduced_symbol(-0.5, ellipse, minimum_half)


@pytest.mark.parametrize("N", [64, 65])
def test_fourier_coefficients_of_cosine(N):
    """cos(pi s / L) has c_{+-1} = 1/2 on either parity of N"""
    L = 2.0
    s = -L + 2 * L * np.arange(N) / N
    c = fourier_coefficients(np.cos(math.pi * s / L) + 0.25)
    assert abs(c[0] - 0.25) < 1e-14
    assert abs(c[1] - 0.5) < 1e-14
    assert abs(c[-1] - 0.5) < 1e-14
    assert np.max(np.abs(c[2:-1])) < 1e-14


def test_convolution_of_constant_is_diagonal():
    """Multiplication by 3"""
    modes = np.arange(-5, 6)
    assert np.allclose(convolution_matrix(np.full(64, 3.0), modes), 3 * np.eye(11), atol=1e-14)


def test_convolution_aliasing_is_detected():
    """Mode range must be below half the sample count"""
    with pytest.raises(AliasingError):
        convolution_matrix(np.ones(32), np.arange(-8, 9))


def test_constant_coefficient_quantization_is_exact(unit_circle):
    """Circle: eigenvalues are the closed form on the mode lattice"""
    rs = synthetic_symbol(unit_circle)
    hbar, theta = 0.05, 0.013
    op = quantize_reduced(rs, hbar, theta, n_modes=40)
    values = spectrum_lowest(op, 5).eigenvalues

    m = op.modes()
    c1, lin, quad = rs.c1_samples[0], rs.lin_samples[0], rs.quad_samples[0]
    closed = 0.5 * rs.mu_pp * (hbar * math.pi * m / rs.L + theta - rs.sigma_a - hbar * c1) ** 2
    closed = np.sort(closed - hbar * lin + hbar ** 2 * quad)[:5]
    assert np.allclose(values, closed, atol=1e-12)


def test_gauge_periodicity(ellipse):
    """theta -> theta + hbar pi / L leaves the spectrum unchanged"""
    rs = synthetic_symbol(ellipse)
    hbar, theta = 0.01, 0.004
    base = spectrum_lowest(quantize_reduced(rs, hbar, theta, n_modes=96), 4).eigenvalues
    shifted = spectrum_lowest(quantize_reduced(rs, hbar, theta + hbar * math.pi / rs.L, n_modes=96), 4).eigenvalues
    assert np.allclose(base, shifted, atol=1e-10)


def test_truncation_is_converged(ellipse):
    """96 and 192 modes agree on the lowest eigenvalues"""
    rs = synthetic_symbol(ellipse)
    small = spectrum_lowest(quantize_reduced(rs, 0.01, 0.0, n_modes=96), 3)
    large = spectrum_lowest(quantize_reduced(rs, 0.01, 0.0, n_modes=192), 3)
    assert np.allclose(small.eigenvalues, large.eigenvalues, atol=1e-10)
    assert large.diagnostics["truncation_ok"]
    assert large.diagnostics["hermiticity_residual"] < 1e-12


def test_count_below_E(unit_circle):
    """count_below_E counts every eigenvalue up to E"""
    rs = synthetic_symbol(unit_circle)
    op = quantize_reduced(rs, 0.05, 0.0, n_modes=40)
    res = spectrum_lowest(op, 3, E=0.01)
    all_values = np.linalg.eigvalsh(op.matrix.entries)
    assert res.count_below_E == int(np.sum(all_values <= 0.01))


def test_curvature_lowers_the_ground_state(ellipse, ellipse_symbol):
    """C(a) > 0 gives lambda_1 < 0 on the ellipse"""
    hbar = 0.02
    op = quantize_reduced(ellipse_symbol, hbar, flux_offsets(ellipse, hbar ** 2).theta, n_modes=96)
    assert spectrum_lowest(op, 1).eigenvalues[0] < 0


def test_harmonic_prediction_scaling(ellipse, minimum_half):
    """First term is homogeneous in hbar, levels are equidistant"""
    C = -moments(-0.5, minimum_half).values[3]
    cmax = curvature_max(ellipse)
    p1 = harmonic_prediction(-0.5, ellipse, minimum_half, C, 1e-3, 1, cmax)
    p2 = harmonic_prediction(-0.5, ellipse, minimum_half, C, 1e-3, 2, cmax)
    assert p2.edge_value - p1.edge_value == pytest.approx(p1.spacing)
    assert p1.spacing == pytest.approx(1e-3 ** 1.5 * math.sqrt(C * minimum_half.mu_pp * abs(cmax.k_pp)))

    first = -C * cmax.k_max
    q1 = harmonic_prediction(-0.5, ellipse, minimum_half, C, 2e-3, 1, cmax)
    assert (q1.edge_value - 0.5 * q1.spacing) / (p1.edge_value - 0.5 * p1.spacing) == pytest.approx(2.0)
    assert p1.edge_value - 0.5 * p1.spacing == pytest.approx(first * 1e-3)


def test_harmonic_oscillator_rederivation(ellipse, minimum_half):
    """A D^2 + B s^2 with A = mu'' hbar^2 / 2, B = hbar C |k''| / 2 gives (2n - 1) sqrt(AB)"""
    C = -moments(-0.5, minimum_half).values[3]
    cmax = curvature_max(ellipse)
    hbar = 1e-3
    A = 0.5 * minimum_half.mu_pp * hbar ** 2
    B = 0.5 * hbar * C * abs(cmax.k_pp)
    p = harmonic_prediction(-0.5, ellipse, minimum_half, C, hbar, 1, cmax)
    assert p.spacing == pytest.approx(2 * math.sqrt(A * B))


def test_harmonic_prediction_needs_positive_C(ellipse, minimum_half):
    with pytest.raises(HypothesisError):
        harmonic_prediction(-0.5, ellipse, minimum_half, -0.1, 1e-3)


def test_harmonic_residual_decreases(ellipse, ellipse_symbol, minimum_half):
    """|r(hbar)| shrinks along the hbar sweep"""
    C = -moments(-0.5, minimum_half).values[3]
    cmax = curvature_max(ellipse)
    residuals = []
    for hbar in (4e-3, 1e-3):
        op = quantize_reduced(ellipse_symbol, hbar, flux_offsets(ellipse, hbar ** 2).theta, n_modes=96)
        lam = spectrum_lowest(op, 1).eigenvalues[0]
        p = harmonic_prediction(-0.5, ellipse, minimum_half, C, hbar, 1, cmax)
        residuals.append((lam - p.edge_value) / hbar ** 1.5)
    assert abs(residuals[1]) < abs(residuals[0])


def test_a_minus1_circle_closed_form(unit_circle):
    """gamma = (mu''/2)(pi m / L + alpha)^2 + C0 / R^2"""
    mu_pp, C0, alpha = 1.1, -0.07, 0.37
    op = a_minus1_operator(unit_circle, 1e-4, C0, mu_pp, 0.77, n_modes=30, alpha=alpha)
    values = spectrum_lowest(op, 4).eigenvalues

    m = op.modes()
    closed = np.sort(0.5 * mu_pp * (math.pi * m / unit_circle.L + alpha) ** 2 + C0)[:4]
    assert np.allclose(values, closed, atol=1e-10)


def test_a_minus1_alpha_periodicity(ellipse):
    """alpha -> alpha + pi / L leaves the spectrum unchanged"""
    a = a_minus1_operator(ellipse, 1e-4, -0.07, 1.1, 0.77, n_modes=60, alpha=0.2)
    b = a_minus1_operator(ellipse, 1e-4, -0.07, 1.1, 0.77, n_modes=60, alpha=0.2 + math.pi / ellipse.L)
    assert np.allclose(spectrum_lowest(a, 4).eigenvalues, spectrum_lowest(b, 4).eigenvalues, atol=1e-10)


def test_a_minus1_cross_route(ellipse):
    """lambda_n(Op b) / hbar^2 against gamma_n(h) through the flux reduction"""
    g2, mu_pp, sigma = -0.07, 1.1, 0.77
    k = ellipse.k_samples
    rs = ReducedSymbol(
        a=-1.0, mu_pp=mu_pp, sigma_a=sigma, beta_a=0.59, L=ellipse.L,
        s_samples=ellipse.s_samples, k_samples=k,
        c1_samples=np.zeros_like(k), lin_samples=np.zeros_like(k), quad_samples=g2 * k ** 2,
    )
    for hbar in (1e-2, 5e-3):
        h = hbar ** 2
        lam = spectrum_lowest(quantize_reduced(rs, hbar, flux_offsets(ellipse, h).theta, n_modes=96), 3).eigenvalues
        gamma = spectrum_lowest(a_minus1_operator(ellipse, h, g2, mu_pp, sigma, n_modes=96), 3).eigenvalues
        assert np.allclose(lam / h, gamma, atol=1e-6)
        assert np.allclose(a_minus1_full_prediction(h, gamma, 0.59), 0.59 * h + h ** 2 * gamma)


def test_weyl_count(unit_circle, minimum_half):
    """Lattice count against L(sigma+ - sigma-)/(pi hbar)"""
    E = 0.5 * (minimum_half.beta_a + 0.5)
    wc = weyl_count(-0.5, unit_circle, minimum_half, E, 1e-4)
    assert wc.prediction >= 40
    assert abs(wc.count - wc.prediction) <= 2
    assert 0.95 <= wc.ratio <= 1.05

    quarter = weyl_count(-0.5, unit_circle, minimum_half, E, 0.25e-4, (wc.sigma_minus, wc.sigma_plus))
    assert quarter.prediction / wc.prediction == pytest.approx(2.0, rel=1e-12)


def test_weyl_count_monotone_in_E(unit_circle, minimum_half):
    """Level sets are nested"""
    counts = [weyl_count(-0.5, unit_circle, minimum_half, E, 1e-4).count
              for E in np.linspace(minimum_half.beta_a + 0.02, 0.48, 4)]
    assert counts == sorted(counts)


def test_weyl_count_rejects_energy(unit_circle, minimum_half):
    with pytest.raises(RejectedInputError):
        weyl_count(-0.5, unit_circle, minimum_half, 0.7, 1e-4)


def test_weyl_count_follows_the_band(unit_circle, minimum_half, monkeypatch):
    """Raising mu_a shrinks the count while the prediction is held fixed"""
    E = 0.5 * (minimum_half.beta_a + 0.5)
    reference = weyl_count(-0.5, unit_circle, minimum_half, E, 1e-4)
    level_set = (reference.sigma_minus, reference.sigma_plus)

    original = edgespec.band_value

    def raised(a, sigma, n=1, grid=None):
        point = original(a, sigma, n, grid)
        return point.model_copy(update={"mu": point.mu + 0.01})

    monkeypatch.setattr(edgespec, "band_value", raised)
    shifted = weyl_count(-0.5, unit_circle, minimum_half, E, 1e-4, level_set)

    assert shifted.prediction == reference.prediction
    assert shifted.count <= reference.count - 4
