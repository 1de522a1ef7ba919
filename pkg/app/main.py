import functools
import json
import math
from pathlib import Path

import click
import numpy as np
import structlog
from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import ConvergenceError, EdgeSpecError, HypothesisError, RejectedInputError
from app.core.logging import configure_logging
from app.schemas.band import TransverseGrid
from app.schemas.run import RunConfig
from app.services import artifacts
from app.services.band1d import band_minimum, band_table
from app.services.edgespec import (
    a_minus1_operator,
    default_modes,
    harmonic_prediction,
    quantize_reduced,
    spectrum_lowest,
    weyl_count,
)
from app.services.effsymbol import reduced_symbol, symbol_coefficients
from app.services.geometry import curvature_max, curve_geometry, flux_offsets
from app.services.moments import check_moment_identities, degennes, moments, universal_constants
from app.services.strip2d import strip_lowest, strip_spec
from app.services.sweep import run_pool

logger = structlog.get_logger()


def _float_list(ctx, param, value):
    if value is None:
        return None
    try:
        text = value.strip()
        return json.loads(text) if text.startswith("[") else [float(x) for x in text.split(",") if x]
    except ValueError:
        raise click.BadParameter(f"expected a list of numbers, got {value!r}")


def run_options(fn):
    """Flags shared by the numerical subcommands; unset flags fall back to the config file"""
    options = [
        click.option("--a", "a", type=float, help="Field ratio a in [-1, 1] \\ {0}"),
        click.option("--h", "h", type=float, help="Semiclassical parameter h"),
        click.option("--hbars", "hbars", callback=_float_list, help="hbar sweep, e.g. 4e-3,1e-3"),
        click.option("--E", "E", type=float, help="Energy level in (beta_a, |a|)"),
        click.option("--curve", type=click.Choice(["circle", "ellipse", "fourier"])),
        click.option("--params", callback=_float_list, help="Curve parameters, e.g. 1.0,0.6"),
        click.option("--samples", type=int, help="Arc-length samples"),
        click.option("--sigmas", callback=_float_list, help="sigma list for the band table"),
        click.option("--levels", type=int),
        click.option("--n", "n", type=int, help="Number of eigenvalues"),
        click.option("--modes", type=int, help="Fourier half-width of the mode window"),
        click.option("--theta", type=float),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def command(fn):
    """Builds RunConfig, maps failures to exit codes"""

    @functools.wraps(fn)
    @click.pass_context
    def wrapper(ctx, **flags):
        group = ctx.obj or {}
        flags.update({k: v for k, v in group.items() if k != "config"})
        flags = {k: v for k, v in flags.items() if v is not None}
        try:
            cfg = RunConfig(_env_file=group.get("config"), **flags)
            out = Path(cfg.out)
            out.mkdir(parents=True, exist_ok=True)
            fn(cfg, out)
        except ValidationError as e:
            logger.error(f"{ctx.info_name}_failed", error=str(e))
            click.echo(f"Error: invalid configuration\n{e}", err=True)
            ctx.exit(2)
        except EdgeSpecError as e:
            logger.error(f"{ctx.info_name}_failed", error=str(e), **e.context)
            click.echo(f"Error: {e}", err=True)
            ctx.exit(e.exit_code)

    return wrapper


@click.group()
@click.option("--config", type=click.Path(dir_okay=False), help="key = value run configuration")
@click.option("--out", type=click.Path(file_okay=False), help="Output directory (default ./out)")
@click.option("--threads", type=int, help="Worker threads for sweeps (0 = logical cores)")
@click.option("--log-level", default=settings.log_level, show_default=True)
@click.pass_context
def cli(ctx, config, out, threads, log_level):
    """Semiclassical spectra of magnetic Laplacians with a field-jump edge"""
    configure_logging(log_level)
    if config is not None and not Path(config).exists():
        raise click.BadParameter(f"config file not found: {config}", param_hint="--config")
    ctx.obj = {"config": config, "out": out, "threads": threads}


@cli.command()
@run_options
@command
def band(cfg: RunConfig, out: Path):
    """Band functions mu_a^[n](sigma) on a sigma list"""
    rows = run_pool(
        lambda s: band_table(cfg.a, np.array([s]), cfg.levels, cfg.grid_spacing),
        cfg.sigmas,
        cfg.threads,
    )
    artifacts.write_csv(out / "band.csv", [p.to_row() for chunk in rows for p in chunk],
                        ["a", "sigma", "level", "mu"])


@cli.command()
@run_options
@command
def minimize(cfg: RunConfig, out: Path):
    """sigma(a), beta_a and mu''(sigma(a))"""
    minimum = band_minimum(cfg.a)
    artifacts.write_csv(out / "minimum.csv", [minimum.to_row()], ["a", "sigma_a", "beta_a", "mu_pp"])


@cli.command("moments")
@run_options
@command
def moments_cmd(cfg: RunConfig, out: Path):
    """Moments M_0..M_4 and the residuals of their identities"""
    minimum = band_minimum(cfg.a)
    ms = moments(cfg.a, minimum)
    report = check_moment_identities(cfg.a, minimum)
    artifacts.write_csv(out / "moments.csv", [ms.to_row()], ["a", "M0", "M1", "M2", "M3", "M4", "quad_err"])
    artifacts.write_json(out / "identities.json", report.model_dump())


@cli.command("degennes")
@run_options
@command
def degennes_cmd(cfg: RunConfig, out: Path):
    """Neumann half-line constants Theta0, xi0 and their moment checks"""
    dg = degennes()
    M = dg.halfmoments
    artifacts.write_json(out / "degennes.json", {
        "Theta0": dg.Theta0,
        "xi0": dg.xi0,
        "f0_at_0": dg.f0_at_0,
        "halfmoments": list(M),
        "M2_minus_half_Theta0": M[2] - 0.5 * dg.Theta0,
        "M4_identity": M[4] - 0.375 * (1 + dg.Theta0 ** 2 + 6 * dg.xi0 * M[3]),
        "M3_boundary": -6 * M[3] - dg.f0_at_0 ** 2,
        "three_C1": -6 * M[3],
    })


@cli.command()
@run_options
@command
def constants(cfg: RunConfig, out: Path):
    """C(a), G and C0"""
    consts = universal_constants(cfg.a, band_minimum(cfg.a))
    artifacts.write_json(out / "constants.json", consts.to_report())


@cli.command()
@run_options
@command
def geometry(cfg: RunConfig, out: Path):
    """Arc-length curvature profile of the edge curve"""
    geom = curve_geometry(cfg.curve_spec())
    artifacts.write_csv(out / "geometry.csv",
                        ({"s": s, "k": k} for s, k in zip(geom.s_samples, geom.k_samples)), ["s", "k"])
    summary = {"kind": geom.kind, "L": geom.L, "area": geom.area, "gamma0": geom.gamma0,
               "total_curvature": geom.total_curvature()}
    try:
        summary.update(curvature_max(geom).model_dump())
    except HypothesisError as e:
        logger.info("curvature_max_skipped", reason=str(e))
    artifacts.write_json(out / "geometry.json", summary)


@cli.command()
@run_options
@command
def effective(cfg: RunConfig, out: Path):
    """Samples of the reduced edge symbol"""
    geom = curve_geometry(cfg.curve_spec())
    minimum = band_minimum(cfg.a)
    coeffs = symbol_coefficients(cfg.a, minimum)
    rs = reduced_symbol(cfg.a, geom, minimum, coeffs)
    rows = ({"s": s, "k": k, "lin": l, "c1": c, "quad": q}
            for s, k, l, c, q in zip(rs.s_samples, rs.k_samples, rs.lin_samples, rs.c1_samples, rs.quad_samples))
    artifacts.write_csv(out / "effsym.csv", rows, ["s", "k", "lin", "c1", "quad"])
    artifacts.write_json(out / "symbol.json", coeffs.model_dump())


def _geometry_for_modes(cfg: RunConfig, n_modes: int):
    """Curve samples fine enough for the widest mode window of a sweep"""
    needed = 4 * n_modes + 2
    samples = max(cfg.samples, 1 << math.ceil(math.log2(needed)))
    return curve_geometry(cfg.curve_spec(), samples)


@cli.command()
@run_options
@command
def asymptotics(cfg: RunConfig, out: Path):
    """hbar sweep of the edge operator against the harmonic or a = -1 predictions"""
    minimum = band_minimum(cfg.a)
    coarse = curve_geometry(cfg.curve_spec())
    coeffs = symbol_coefficients(cfg.a, minimum)
    sample_symbol = reduced_symbol(cfg.a, coarse, minimum, coeffs)
    widths = {hb: cfg.modes or default_modes(sample_symbol, hb) for hb in cfg.hbars}
    geom = _geometry_for_modes(cfg, max(widths.values()))
    rs = reduced_symbol(cfg.a, geom, minimum, coeffs)
    cmax = curvature_max(geom) if cfg.a != -1.0 else None
    # symmetric curves pair their wells, the gap is taken across the pair
    count = max(cfg.n, cmax.multiplicity + 1) if cmax else cfg.n

    def edge_spectrum(hbar: float):
        theta = cfg.theta if cfg.theta is not None else flux_offsets(geom, hbar ** 2).theta
        op = quantize_reduced(rs, hbar, theta, widths[hbar])
        return theta, spectrum_lowest(op, count, params=cfg.model_params())

    results = run_pool(edge_spectrum, cfg.hbars, cfg.threads)
    spectrum_rows, residual_rows = [], []
    for hbar, (theta, spec) in zip(cfg.hbars, results):
        for n, lam in enumerate(spec.eigenvalues[:cfg.n], start=1):
            spectrum_rows.append({"hbar": hbar, "theta": theta, "n": n, "lambda": lam})

    if cfg.a == -1.0:
        consts = universal_constants(cfg.a, minimum)
        for hbar, (_, spec) in zip(cfg.hbars, results):
            h = hbar ** 2
            op = a_minus1_operator(geom, h, consts.C0, minimum.mu_pp, minimum.sigma_a, widths[hbar])
            gamma = spectrum_lowest(op, cfg.n).eigenvalues
            for n, (lam, g) in enumerate(zip(spec.eigenvalues, gamma), start=1):
                residual_rows.append({"hbar": hbar, "n": n, "lambda_over_h": lam / h, "gamma": g,
                                      "r": lam / h - g})
        columns = ["hbar", "n", "lambda_over_h", "gamma", "r"]
    else:
        C = -moments(cfg.a, minimum).values[3]
        for hbar, (_, spec) in zip(cfg.hbars, results):
            pred = harmonic_prediction(cfg.a, geom, minimum, C, hbar, 1, cmax)
            root = pred.spacing / hbar ** 1.5
            lam = spec.eigenvalues
            residual_rows.append({
                "hbar": hbar,
                "lambda1": lam[0],
                "prediction": pred.edge_value,
                "r": (lam[0] + C * cmax.k_max * hbar) / hbar ** 1.5 - 0.5 * root,
                "gap": lam[cmax.multiplicity] - lam[0],
                "gap_prediction": pred.spacing,
            })
        columns = ["hbar", "lambda1", "prediction", "r", "gap", "gap_prediction"]

    artifacts.write_csv(out / "spectrum.csv", spectrum_rows, ["hbar", "theta", "n", "lambda"])
    artifacts.write_csv(out / "residuals.csv", residual_rows, columns)


@cli.command()
@run_options
@command
def weyl(cfg: RunConfig, out: Path):
    """Edge-state count below E h against the Weyl prediction"""
    if cfg.h is None:
        raise RejectedInputError("weyl needs --h")
    minimum = band_minimum(cfg.a)
    E = cfg.E if cfg.E is not None else 0.5 * (minimum.beta_a + abs(cfg.a))
    geom = curve_geometry(cfg.curve_spec())
    wc = weyl_count(cfg.a, geom, minimum, E, cfg.h)
    artifacts.write_csv(out / "weyl.csv", [wc.to_row()], ["h", "E", "count", "prediction", "ratio"])


@cli.command()
@run_options
@command
def strip2d(cfg: RunConfig, out: Path):
    """Lowest eigenvalues of the tubular-coordinate strip operator"""
    if cfg.h is None:
        raise RejectedInputError("strip2d needs --h")
    geom = curve_geometry(cfg.curve_spec())
    hbar = math.sqrt(cfg.h)
    theta = cfg.theta if cfg.theta is not None else flux_offsets(geom, cfg.h).theta
    spec = strip_spec(cfg.model_params(), geom, theta, cfg.strip_eta, cfg.modes or cfg.strip_modes,
                      cfg.strip_t_halfwidth, cfg.strip_t_spacing)
    result = strip_lowest(spec, cfg.n)
    tails = result.diagnostics["tail_mass"]
    rows = [{"hbar": hbar, "theta": theta, "n": n, "lambda": lam, "tail_mass": tail}
            for n, (lam, tail) in enumerate(zip(result.eigenvalues, tails), start=1)]
    artifacts.write_csv(out / "strip.csv", rows, ["hbar", "theta", "n", "lambda", "tail_mass"])
    if not result.converged:
        raise ConvergenceError("strip Lanczos did not converge", wanted=cfg.n)


@cli.command()
@run_options
@command
def report(cfg: RunConfig, out: Path):
    """Aggregate every JSON artifact of the output directory"""
    artifacts.write_json(out / "report.json", artifacts.collect_reports(out))


@cli.command()
@click.argument("csv_path", type=click.Path(dir_okay=False))
@click.option("--x", "x", required=True, help="Column on the horizontal axis")
@click.option("--y", "y", required=True, help="Column on the vertical axis")
@click.option("--output", "output", type=click.Path(dir_okay=False), help="SVG path (default: CSV name)")
@click.option("--log", "log", is_flag=True, help="Logarithmic axes")
@click.pass_context
def plot(ctx, csv_path, x, y, output, log):
    """Polyline SVG of one CSV column against another"""
    csv_path = Path(csv_path)
    target = Path(output) if output else csv_path.with_suffix(".svg")
    try:
        artifacts.plot_csv(csv_path, x, y, target, log)
    except EdgeSpecError as e:
        logger.error("plot_failed", error=str(e), **e.context)
        click.echo(f"Error: {e}", err=True)
        ctx.exit(e.exit_code)


def run(argv: list[str] | None = None) -> int:
    """Entry point returning the process exit code"""
    try:
        rv = cli.main(args=argv, prog_name="edgespec", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        return 1
    return rv if isinstance(rv, int) else 0
