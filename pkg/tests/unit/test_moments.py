import numpy as np
import pytest
from scipy.linalg import solve_banded

from app.core.errors import RejectedInputError
from app.schemas.band import ModelParams, TransverseGrid
from app.services.band1d import eigenpair, interior_nodes
from app.services.moments import (
    check_moment_identities,
    constant_C,
    constant_G,
    degennes,
    degennes_resolvent_closed_form,
    moments,
    universal_constants,
)

THETA0 = 0.5901061249


def test_degennes_constants(degennes_data):
    """Theta0 and xi0 = sqrt(Theta0)"""
    dg = degennes_data
    assert abs(dg.Theta0 - 0.59) < 5e-3
    assert abs(dg.Theta0 - THETA0) < 1e-6
    assert abs(dg.xi0 ** 2 - dg.Theta0) < 1e-12
    assert abs(dg.sigma_numeric - dg.xi0) < 1e-4


def test_degennes_converges_on_coarse_grid():
    """Direct call with a coarser spacing still locates Theta0"""
    dg = degennes(spacing=1 / 200)
    assert abs(dg.Theta0 - THETA0) < 1e-5
    assert dg.f0_at_0 > 0


def test_degennes_moment_suite(degennes_data):
    """M2 = Theta0/2, M4 identity, -6 M3 = f0(0)^2 and its bracket"""
    dg = degennes_data
    M0, M1, M2, M3, M4 = dg.halfmoments
    assert abs(M0 - 1.0) < 1e-8
    assert abs(M1) < 1e-6
    assert abs(M2 - 0.5 * dg.Theta0) < 1e-6
    assert abs(M4 - 0.375 * (1 + dg.Theta0 ** 2 + 6 * dg.xi0 * M3)) < 1e-6
    assert abs(-6 * M3 - dg.f0_at_0 ** 2) < 1e-4
    assert 0.85 <= -6 * M3 <= 0.90


def test_resolvent_closed_form_solves_dirichlet_problem(degennes_data):
    """(t f0 + (Theta0 - (xi0 - t)^2) f0') / 6 against a banded solve"""
    dg = degennes_data
    t, f, h = dg.t, dg.f0, dg.spacing
    w = (2 * t * (dg.xi0 - t) ** 2 + t ** 2 * (dg.xi0 - t)) * f

    ti, wi = t[1:], w[1:]
    ab = np.zeros((3, ti.size))
    ab[0, 1:] = -1.0 / h ** 2
    ab[1] = 2.0 / h ** 2 + (dg.xi0 - ti) ** 2 - dg.Theta0
    ab[2, :-1] = -1.0 / h ** 2
    v = solve_banded((1, 1), ab, wi)

    closed = degennes_resolvent_closed_form(dg)[1:]
    assert np.max(np.abs(v - closed)) < 1e-4 * np.max(np.abs(closed))


def test_constant_G_routes(degennes_data):
    """Two closed forms agree, the direct route matches, C0 < 0"""
    G = constant_G(degennes_data)
    assert abs(G.G_closed - G.G_closed_alt) < 1e-6
    assert abs(G.G_direct - G.G_closed) < 1e-4 * abs(G.G_closed)
    assert G.G_closed > 0
    assert -0.25 + G.G_closed < 0


def test_printed_forms_agree(degennes_data):
    """Both printed expressions for G coincide through the M4 identity"""
    G = constant_G(degennes_data)
    _, _, _, M3, _ = degennes_data.halfmoments
    xi0, theta = degennes_data.xi0, degennes_data.Theta0

    assert G.G_printed_alt == pytest.approx(-21 / 8 - 9 / 8 * theta ** 2 - 57 / 4 * xi0 * M3)
    assert G.printed_gap < 1e-5
    assert G.G_printed < 0


@pytest.mark.parametrize("a", [-1.0, -0.75, -0.5, -0.25])
def test_moment_identities(a):
    """Residuals of the virial and boundary identities"""
    report = check_moment_identities(a)
    assert report.worst() < 1e-6


def test_moments_at_half(minimum_half):
    """M0 against a direct Riemann sum, M1 = 0 and C(a) = -M3 > 0"""
    ms = moments(-0.5, minimum_half)

    grid = TransverseGrid.for_band(-0.5, minimum_half.sigma_a, 1 / 800)
    _, u = eigenpair(-0.5, minimum_half.sigma_a, 1, grid)
    b = ModelParams(a=-0.5).step(interior_nodes(grid))
    direct = grid.spacing * np.sum(u ** 2 / b)
    # the weight 1/b is -2 where the ground state concentrates
    assert direct < 0
    assert ms.values[0] == pytest.approx(direct, abs=1e-2)
    assert abs(ms.values[1]) < 1e-6
    assert ms.values[3] < 0
    assert ms.quadrature_error < 1e-4
    assert constant_C(-0.5, minimum_half) == pytest.approx(-ms.values[3])
    assert list(ms.to_row()) == ["a", "M0", "M1", "M2", "M3", "M4", "quad_err"]


def test_symmetric_case_has_no_first_order_term(minimum_symmetric):
    """C(-1) = 0"""
    assert abs(constant_C(-1.0, minimum_symmetric)) < 1e-6


def test_uniform_field_rejected_from_moments_weight():
    """a too close to 0 makes 1/b singular"""
    from app.schemas.band import BandMinimum

    fake = BandMinimum(a=1e-8, sigma_a=1.0, beta_a=1e-9, mu_pp=1.0, tol=1e-10)
    with pytest.raises(RejectedInputError):
        moments(1e-8, fake)


def test_universal_constants_report(minimum_symmetric, degennes_data):
    """Report keys and the sign of C0 at a = -1"""
    consts = universal_constants(-1.0, minimum_symmetric, degennes_data)
    report = consts.to_report()
    assert set(report) == {"a", "C", "G_closed", "G_direct", "C0"}
    assert abs(report["C"]) < 1e-6
    assert report["C0"] < 0
    assert report["C0"] == pytest.approx(-0.25 + report["G_closed"])
