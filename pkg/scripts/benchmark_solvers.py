#!/usr/bin/env python3
"""
Benchmark Script for the eigen-kernels

Times the tridiagonal, dense Hermitian and shift-invert Lanczos paths
on the operators the toolkit actually builds.

Usage:
    python scripts/benchmark_solvers.py [repeats]
"""

import math
import statistics
import sys
import time
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.core.logging import configure_logging
from app.schemas.band import ModelParams, TransverseGrid
from app.schemas.geometry import CurveSpec
from app.services.band1d import assemble_transverse, band_minimum
from app.services.edgespec import quantize_reduced
from app.services.effsymbol import reduced_symbol
from app.services.eigcore import dense_hermitian_eigs, lanczos_lowest, tridiag_lowest
from app.services.geometry import curve_geometry, flux_offsets
from app.services.strip2d import assemble_strip, strip_spec


def timed(fn, repeats: int) -> list[float]:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append((time.perf_counter() - start) * 1000)
    return times


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    configure_logging("WARNING")
    a = -0.5

    print("\n" + "=" * 60)
    print("EDGESPEC - SOLVER BENCHMARK")
    print("=" * 60)

    minimum = band_minimum(a)
    geom = curve_geometry(CurveSpec(kind="ellipse", params=[1.0, 0.6], samples=1024))
    rs = reduced_symbol(a, geom, minimum)
    T = assemble_transverse(a, minimum.sigma_a, TransverseGrid.for_band(a, minimum.sigma_a))

    hbar = 0.01
    edge = quantize_reduced(rs, hbar, flux_offsets(geom, hbar ** 2).theta, n_modes=192)

    h = 0.1 ** 2
    circle = curve_geometry(CurveSpec(kind="circle", params=[1.0], samples=256))
    theta = flux_offsets(circle, h).theta
    center = round((minimum.sigma_a - theta) * circle.L / (math.pi * 0.1))
    spec = strip_spec(ModelParams(a=a, h=h), circle, theta, 0.25, 16, 10.0, 0.05, m_center=center)
    strip = assemble_strip(spec)

    cases = [
        (f"tridiagonal ({T.order})", lambda: tridiag_lowest(T, 3)),
        (f"dense edge ({edge.matrix.order})", lambda: dense_hermitian_eigs(edge.matrix, 3)),
        (f"strip lanczos ({strip.order})", lambda: lanczos_lowest(strip, 3, shift=strip.lower_bound - 0.1)),
    ]

    print(f"\n{'Solver':<28} {'P50':>10} {'Min':>10} {'Max':>10}")
    print(f"{'-' * 60}")
    for name, fn in cases:
        times = timed(fn, repeats)
        print(f"{name:<28} {statistics.median(times):>8.1f}ms {min(times):>8.1f}ms {max(times):>8.1f}ms")
    print(f"{'=' * 60}\n")


if __name__ == "__main__":
    main()
