import numpy as np
import pytest

from app.core.errors import EnlargeDomainError, RejectedInputError
from app.schemas.band import TransverseGrid
from app.services.band1d import (
    assemble_transverse,
    band_level_set,
    band_minimum,
    band_table,
    band_value,
    curvature_at,
    fh_slope,
    eigenpair,
)
from app.services.eigcore import tridiag_window

THETA0 = 0.5901061249


def test_uniform_field_is_flat_harmonic():
    """a = 1: mu^[n](sigma) = 2n - 1 for every sigma"""
    for sigma in (-1.0, 0.0, 2.5):
        assert abs(band_value(1.0, sigma, 1).mu - 1.0) < 1e-8
        assert abs(band_value(1.0, sigma, 2).mu - 3.0) < 1e-7


def test_band_value_rejects_zero_level():
    """Levels start at 1"""
    with pytest.raises(RejectedInputError):
        band_value(-0.5, 1.0, 0)


def test_second_band_above_threshold(minimum_half):
    """mu^[2] > |a| at the minimum of the first band"""
    assert band_value(-0.5, minimum_half.sigma_a, 2).mu > 0.5


def test_oscillation_count_matches_level():
    """Eigenvalue count below mu^[n] + eps on the same grid is n"""
    grid = TransverseGrid.for_band(-0.5, 1.0, 1 / 100)
    T = assemble_transverse(-0.5, 1.0, grid)
    for n in (1, 2, 3):
        mu, _ = eigenpair(-0.5, 1.0, n, grid)
        assert tridiag_window(T, T.gershgorin()[0] - 1.0, mu + 1e-9).size == n


def test_minimum_is_interior_and_stationary(minimum_half):
    """0 < beta_a < |a|, sigma_a > 0 and the Feynman-Hellmann slope vanishes"""
    m = minimum_half
    assert 0 < m.beta_a < 0.5
    assert m.sigma_a > 0
    assert m.mu_pp > 0

    grid = TransverseGrid.for_band(-0.5, m.sigma_a)
    _, u = eigenpair(-0.5, m.sigma_a, 1, grid)
    assert abs(fh_slope(-0.5, m.sigma_a, u, grid)) < 1e-4

    for d in (-0.05, 0.05):
        assert band_value(-0.5, m.sigma_a + d).mu > m.beta_a


def test_curvature_matches_quadratic_model(minimum_half):
    """mu(sigma_a + d) - beta_a ~ mu''/2 d^2"""
    m = minimum_half
    d = 1e-2
    rise = band_value(-0.5, m.sigma_a + d).mu - m.beta_a
    assert abs(rise / (0.5 * m.mu_pp * d ** 2) - 1.0) < 0.05

    grid = TransverseGrid.for_band(-0.5, m.sigma_a)
    assert abs(curvature_at(-0.5, m.sigma_a, grid) / m.mu_pp - 1.0) < 1e-3


def test_symmetric_case_reaches_degennes_value(minimum_symmetric):
    """a = -1: beta_{-1} = Theta0 at sigma = sqrt(Theta0)"""
    assert abs(minimum_symmetric.beta_a - THETA0) < 1e-6
    assert abs(minimum_symmetric.sigma_a - np.sqrt(THETA0)) < 1e-4


def test_level_set_endpoints(minimum_half):
    """mu(sigma_-) = mu(sigma_+) = E with sigma_- < sigma_a < sigma_+"""
    E = 0.5 * (minimum_half.beta_a + 0.5)
    lo, hi = band_level_set(-0.5, E, minimum_half)

    assert lo < minimum_half.sigma_a < hi
    for s in (lo, hi):
        assert abs(band_value(-0.5, s, 1, TransverseGrid.for_band(-0.5, s)).mu - E) < 1e-7


def test_level_set_rejects_energy_outside_window(minimum_half):
    """E must lie in (beta_a, |a|)"""
    with pytest.raises(RejectedInputError):
        band_level_set(-0.5, 0.6, minimum_half)
    with pytest.raises(RejectedInputError):
        band_level_set(-0.5, 0.5 * minimum_half.beta_a, minimum_half)


def test_small_domain_is_reported():
    """Truncation at T = 2 leaves a visible tail"""
    with pytest.raises(EnlargeDomainError):
        eigenpair(-0.5, 1.0, 1, TransverseGrid.uniform(2.0, 0.01))


def test_band_table_rows():
    """One row per (sigma, level) with the published columns"""
    points = band_table(-0.5, np.array([0.0, 1.0]), levels=2, grid_spacing=1 / 100)
    assert [(p.sigma, p.level) for p in points] == [(0.0, 1), (0.0, 2), (1.0, 1), (1.0, 2)]
    assert all(p.groundstate is None for p in points)
    assert list(points[0].to_row()) == ["a", "sigma", "level", "mu"]


def test_limits_of_first_band():
    """mu -> |a| as sigma -> +inf and grows as sigma -> -inf"""
    assert abs(band_value(-0.5, 8.0, 1, TransverseGrid.for_band(-0.5, 8.0, 1 / 100)).mu - 0.5) < 1e-3
    assert band_value(-0.5, -3.0, 1, TransverseGrid.for_band(-0.5, -3.0, 1 / 100)).mu > 5.0


def test_symmetric_ground_state_tail_on_refined_grid():
    """a = -1 at its band minimum: the refined-grid eigenvector decays to the boundary"""
    sigma = 0.768183652977867
    grid = TransverseGrid.for_band(-1.0, sigma).refined()
    assert grid.N > 20000

    mu, u = eigenpair(-1.0, sigma, 1, grid)
    assert abs(mu - THETA0) < 1e-4
    assert max(abs(u[0]), abs(u[-1])) < 1e-14 * np.max(np.abs(u))
    assert abs(grid.spacing * np.sum(u ** 2) - 1.0) < 1e-12


def test_transverse_potential_follows_field_profile():
    """b_a = a left of the interface and 1 from t = 0 on"""
    grid = TransverseGrid.uniform(2.0, 0.5)
    T = assemble_transverse(-0.5, 1.0, grid)
    expected = 8.0 + np.array([0.0625, 0.25, 0.5625, 1.0, 0.25, 0.0, 0.25])
    assert np.allclose(T.diag, expected)
    assert np.allclose(T.offdiag, -4.0)
