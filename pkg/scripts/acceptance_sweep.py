#!/usr/bin/env python3
"""
Acceptance sweep for the numerical constants and asymptotic checks

Prints a pass/fail table and exits 1 when any check fails.

Usage:
    python scripts/acceptance_sweep.py [--with-strip]
"""

import math
import sys
import time
from pathlib import Path

import numpy as np

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.core.logging import configure_logging
from app.schemas.band import ModelParams
from app.schemas.geometry import CurveSpec
from app.services.band1d import band_minimum
from app.services.edgespec import (
    a_minus1_operator,
    harmonic_prediction,
    quantize_reduced,
    spectrum_lowest,
    weyl_count,
)
from app.services.effsymbol import q1_pm, reduced_symbol, symbol_coefficients
from app.services.geometry import curvature_max, curve_geometry, flux_offsets
from app.services.moments import check_moment_identities, constant_G, degennes, moments
from app.services.strip2d import strip_lowest, strip_spec


def check_degennes(results: list):
    dg = degennes()
    M = dg.halfmoments
    results.append(("Theta0 near 0.59", abs(dg.Theta0 - 0.59) < 5e-3, f"{dg.Theta0:.10f}"))
    results.append(("M2 = Theta0/2", abs(M[2] - 0.5 * dg.Theta0) < 1e-6, f"{M[2] - 0.5 * dg.Theta0:.2e}"))
    m4 = 0.375 * (1 + dg.Theta0 ** 2 + 6 * dg.xi0 * M[3])
    results.append(("M4 identity", abs(M[4] - m4) < 1e-6, f"{M[4] - m4:.2e}"))
    results.append(("-6 M3 = f0(0)^2", abs(-6 * M[3] - dg.f0_at_0 ** 2) < 1e-4, f"{-6 * M[3]:.8f}"))
    results.append(("3C1 bracket", 0.85 <= -6 * M[3] <= 0.90, f"{-6 * M[3]:.6f}"))

    G = constant_G(dg)
    results.append(("G closed forms agree", abs(G.G_closed - G.G_closed_alt) < 1e-6,
                    f"{G.G_closed - G.G_closed_alt:.2e}"))
    rel = abs(G.G_direct - G.G_closed) / abs(G.G_closed)
    results.append(("G direct vs closed", rel < 1e-4, f"{rel:.2e}"))
    results.append(("C0 < 0", -0.25 + G.G_closed < 0, f"{-0.25 + G.G_closed:.8f}"))
    return dg


def check_moments(results: list, minima: dict):
    for a in (-1.0, -0.75, -0.5, -0.25):
        report = check_moment_identities(a, minima[a])
        results.append((f"moment identities a={a}", report.worst() < 1e-6, f"{report.worst():.2e}"))
    for a in (-0.75, -0.5):
        g1, _ = q1_pm(a, minima[a].sigma_a)
        M3 = moments(a, minima[a]).values[3]
        results.append((f"q1/k = -M3 at a={a}", abs(g1 + M3) < 1e-6, f"{g1 + M3:.2e}"))
    g1, g1p = q1_pm(-1.0, minima[-1.0].sigma_a)
    results.append(("q1 and its slope vanish at a=-1", max(abs(g1), abs(g1p)) < 1e-6,
                    f"{max(abs(g1), abs(g1p)):.2e}"))


def check_harmonic(results: list, minimum):
    a = -0.5
    geom = curve_geometry(CurveSpec(kind="ellipse", params=[1.0, 0.6], samples=2048))
    rs = reduced_symbol(a, geom, minimum)
    C = -moments(a, minimum).values[3]
    cmax = curvature_max(geom)
    residuals = []
    for hbar in (4e-3, 1e-3, 2.5e-4):
        op = quantize_reduced(rs, hbar, flux_offsets(geom, hbar ** 2).theta, n_modes=256)
        lam = spectrum_lowest(op, cmax.multiplicity + 1).eigenvalues
        pred = harmonic_prediction(a, geom, minimum, C, hbar, 1, cmax)
        root = pred.spacing / hbar ** 1.5
        residuals.append((lam[0] + C * cmax.k_max * hbar) / hbar ** 1.5 - 0.5 * root)
    r = np.abs(residuals)
    results.append(("harmonic residual decreases", bool(np.all(np.diff(r) < 0)), ", ".join(f"{x:.3e}" for x in r)))
    results.append(("harmonic residual small", r[-1] < 0.1 * root, f"{r[-1] / root:.3e}"))
    gap_rel = abs((lam[cmax.multiplicity] - lam[0]) - pred.spacing) / pred.spacing
    results.append(("harmonic gap", gap_rel < 0.05, f"{gap_rel:.3e}"))


def check_a_minus1(results: list, minimum):
    geom = curve_geometry(CurveSpec(kind="ellipse", params=[1.0, 0.6], samples=1024))
    rs = reduced_symbol(-1.0, geom, minimum)
    C0 = symbol_coefficients(-1.0, minimum).g2
    worst = 0.0
    for hbar in (1e-2, 5e-3):
        h = hbar ** 2
        lam = spectrum_lowest(quantize_reduced(rs, hbar, flux_offsets(geom, h).theta, n_modes=192), 3).eigenvalues
        gamma = spectrum_lowest(a_minus1_operator(geom, h, C0, minimum.mu_pp, minimum.sigma_a, 192), 3).eigenvalues
        worst = max(worst, float(np.max(np.abs(lam / h - gamma))))
    results.append(("a=-1 cross-route", worst < 1e-6, f"{worst:.2e}"))


def check_weyl(results: list, minimum):
    a = -0.5
    geom = curve_geometry(CurveSpec(kind="circle", params=[1.0]))
    E = 0.5 * (minimum.beta_a + abs(a))
    wc = weyl_count(a, geom, minimum, E, 1e-4)
    results.append(("Weyl ratio", 0.95 <= wc.ratio <= 1.05 and wc.prediction >= 40,
                    f"{wc.count}/{wc.prediction:.2f}"))


def check_strip(results: list, minimum):
    a = -0.5
    circle = curve_geometry(CurveSpec(kind="circle", params=[1.0], samples=256))
    C = -moments(a, minimum).values[3]
    for hbar in (0.1, 0.05):
        h = hbar ** 2
        spec = strip_spec(ModelParams(a=a, h=h), circle, flux_offsets(circle, h).theta, 0.25, 24, 10.0, 0.05)
        lam = strip_lowest(spec, 1).eigenvalues[0]
        results.append((f"strip |lambda1 - beta| at hbar={hbar}", abs(lam - minimum.beta_a) <= 2 * C * hbar,
                        f"{lam - minimum.beta_a:.4e}"))


def main():
    configure_logging("WARNING")
    with_strip = "--with-strip" in sys.argv[1:]
    results: list[tuple[str, bool, str]] = []
    start = time.time()

    check_degennes(results)
    minima = {a: band_minimum(a) for a in (-1.0, -0.75, -0.5, -0.25)}
    check_moments(results, minima)
    check_harmonic(results, minima[-0.5])
    check_a_minus1(results, minima[-1.0])
    check_weyl(results, minima[-0.5])
    if with_strip:
        check_strip(results, minima[-0.5])

    print(f"\n{'Check':<40} {'Result':>8}  Value")
    print(f"{'-' * 70}")
    for name, ok, value in results:
        print(f"{name:<40} {'PASS' if ok else 'FAIL':>8}  {value}")
    print(f"{'-' * 70}")
    print(f"{sum(ok for _, ok, _ in results)}/{len(results)} passed in {time.time() - start:.1f}s\n")

    if not all(ok for _, ok, _ in results):
        sys.exit(1)


if __name__ == "__main__":
    main()
