"""Rescaled tubular-coordinate operator on (R/2LZ) x R: Fourier in s, finite differences in t."""

import math

import numpy as np
import structlog
from scipy.linalg import lu_factor, lu_solve

from app.core.errors import RejectedInputError
from app.schemas.band import ModelParams, TransverseGrid
from app.schemas.geometry import CurveGeometry
from app.schemas.operators import SparseHermitianOperator
from app.schemas.spectrum import SpectrumResult, StripOperatorSpec
from app.services.band1d import band_minimum, interior_nodes
from app.services.edgespec import convolution_matrix
from app.services.eigcore import lanczos_lowest

logger = structlog.get_logger()

TAIL_CUT = 8.0


def smootherstep(y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """S(y) = 35y^4 - 84y^5 + 70y^6 - 20y^7 and its first two derivatives"""
    S = y ** 4 * (35 - 84 * y + 70 * y ** 2 - 20 * y ** 3)
    dS = 140 * y ** 3 * (1 - y) ** 3
    ddS = 420 * y ** 2 * (1 - y) ** 2 * (1 - 2 * y)
    return S, dS, ddS


def cutoff(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """c = 1 on |x| <= 1, 0 on |x| >= 2, with exact c' and c''"""
    x = np.asarray(x, dtype=float)
    y = np.clip(np.abs(x) - 1.0, 0.0, 1.0)
    S, dS, ddS = smootherstep(y)
    inside = (np.abs(x) > 1.0) & (np.abs(x) < 2.0)
    c = 1.0 - S
    dc = np.where(inside, -dS * np.sign(x), 0.0)
    ddc = np.where(inside, -ddS, 0.0)
    return c, dc, ddc


def jacobian_fields(geom: CurveGeometry, t: np.ndarray, hbar: float, eta: float) -> dict[str, np.ndarray]:
    """m, dm/dt, d2m/dt2 and c on the (t, s) tensor grid"""
    mu = hbar ** (2 * eta)
    c, dc, ddc = cutoff(mu * t)
    k = geom.k_samples[None, :]
    t2 = t[:, None]
    c2, dc2, ddc2 = c[:, None], dc[:, None], ddc[:, None]
    return {
        "m": 1.0 - hbar * c2 * t2 * k,
        "dm": -hbar * k * (c2 + mu * t2 * dc2),
        "d2m": -hbar * k * (2 * mu * dc2 + mu ** 2 * t2 * ddc2),
        "c": c,
    }


def _center(spec: StripOperatorSpec, hbar: float) -> int:
    if spec.m_center is not None:
        return spec.m_center
    sigma_a = band_minimum(spec.params.a).sigma_a
    return int(round((sigma_a - spec.theta) * spec.geom.L / (math.pi * hbar)))


def assemble_strip(spec: StripOperatorSpec) -> SparseHermitianOperator:
    """Block-tridiagonal (in t) matrix-free operator with Fourier blocks in s"""
    a, hbar = spec.params.a, spec.params.hbar
    geom = spec.geom
    t = interior_nodes(spec.grid_t)
    dt = spec.grid_t.spacing
    modes = _center(spec, hbar) + np.arange(-spec.Ns, spec.Ns + 1)

    fields = jacobian_fields(geom, t, hbar, spec.eta)
    m = fields["m"]
    if np.min(m) < 0.5:
        logger.error("strip_jacobian_violated", min_m=float(np.min(m)), hbar=hbar)
        raise RejectedInputError("Jacobian m drops below 1/2 on the cutoff support", min_m=float(np.min(m)))
    W = -fields["dm"] ** 2 / (4 * m ** 2) + fields["d2m"] / (2 * m)

    b = spec.params.step(t)
    kinetic = hbar * math.pi * modes / geom.L + spec.theta
    K = convolution_matrix(geom.k_samples, modes)
    nm = modes.size
    blocks = np.empty((t.size, nm, nm), dtype=complex)
    for i in range(t.size):
        half = convolution_matrix(m[i] ** -0.5, modes)
        T = np.diag(kinetic - b[i] * t[i]).astype(complex)
        T += hbar * fields["c"][i] * 0.5 * b[i] * t[i] ** 2 * K
        S = half @ T @ half
        B = S @ S + convolution_matrix(W[i], modes) + (2.0 / dt ** 2) * np.eye(nm)
        blocks[i] = 0.5 * (B + B.conj().T)

    def apply(x: np.ndarray) -> np.ndarray:
        X = x.reshape(t.size, nm)
        Y = np.einsum("ijk,ik->ij", blocks, X)
        Y[1:] -= X[:-1] / dt ** 2
        Y[:-1] -= X[1:] / dt ** 2
        return Y.ravel()

    def shift_invert(shift: float):
        """Block-Thomas factorization of A - shift"""
        eye = np.eye(nm)
        factors = []
        D = blocks[0] - shift * eye
        for i in range(t.size):
            if i:
                D = blocks[i] - shift * eye - lu_solve(factors[-1], eye) / dt ** 4
            factors.append(lu_factor(D))

        def solve(r: np.ndarray) -> np.ndarray:
            R = r.reshape(t.size, nm).astype(complex)
            Z = np.empty_like(R)
            Z[0] = R[0]
            for i in range(1, t.size):
                Z[i] = R[i] + lu_solve(factors[i - 1], Z[i - 1]) / dt ** 2
            X = np.empty_like(R)
            X[-1] = lu_solve(factors[-1], Z[-1])
            for i in range(t.size - 2, -1, -1):
                X[i] = lu_solve(factors[i], Z[i] + X[i + 1] / dt ** 2)
            return X.ravel()

        return solve

    logger.info("strip_assembled", order=t.size * nm, modes=nm, t_nodes=t.size, hbar=hbar)
    return SparseHermitianOperator(
        order=t.size * nm,
        apply=apply,
        structure={"blocks": blocks, "dt": dt, "t": t, "modes": modes},
        shift_invert=shift_invert,
        lower_bound=float(np.min(W)),
        dtype="complex",
    )


def strip_to_dense(op: SparseHermitianOperator) -> np.ndarray:
    blocks, dt = op.structure["blocks"], op.structure["dt"]
    nt, nm, _ = blocks.shape
    A = np.zeros((nt * nm, nt * nm), dtype=complex)
    off = -np.eye(nm) / dt ** 2
    for i in range(nt):
        A[i * nm:(i + 1) * nm, i * nm:(i + 1) * nm] = blocks[i]
        if i + 1 < nt:
            A[i * nm:(i + 1) * nm, (i + 1) * nm:(i + 2) * nm] = off
            A[(i + 1) * nm:(i + 2) * nm, i * nm:(i + 1) * nm] = off
    return A


def tail_mass(op: SparseHermitianOperator, vector: np.ndarray, cut: float = TAIL_CUT) -> float:
    t = op.structure["t"]
    X = np.abs(vector.reshape(t.size, -1)) ** 2
    total = float(np.sum(X))
    return float(np.sum(X[np.abs(t) > cut])) / total if total > 0 else 0.0


def strip_lowest(spec: StripOperatorSpec, n: int = 1, op: SparseHermitianOperator | None = None) -> SpectrumResult:
    """Lowest eigenvalues of the strip operator by shift-invert Lanczos"""
    op = op or assemble_strip(spec)
    pairs = lanczos_lowest(op, n, shift=op.lower_bound - 0.1)
    tails = [tail_mass(op, v) for v in pairs.vectors] if pairs.vectors is not None else []
    if not pairs.converged:
        logger.warning("strip_lowest_not_converged", wanted=n, found=int(pairs.values.size))

    return SpectrumResult(
        params=spec.params,
        eigenvalues=pairs.values,
        converged=pairs.converged,
        diagnostics={
            "tail_mass": tails,
            "residuals": pairs.residuals.tolist(),
            "restarts": pairs.restarts,
            "order": op.order,
        },
    )


def strip_spec(
    params: ModelParams,
    geom: CurveGeometry,
    theta: float,
    eta: float,
    Ns: int,
    t_halfwidth: float,
    t_spacing: float,
    m_center: int | None = None,
) -> StripOperatorSpec:
    return StripOperatorSpec(
        params=params,
        geom=geom,
        theta=theta,
        eta=eta,
        Ns=Ns,
        grid_t=TransverseGrid.uniform(t_halfwidth, t_spacing),
        m_center=m_center,
    )
