"""Symmetric and Hermitian eigen-kernels shared by every other service."""

from typing import Callable

import numpy as np
import structlog
from scipy import sparse
from scipy.linalg import LinAlgError, eigh, eigh_tridiagonal, eigvalsh_tridiagonal
from scipy.sparse.linalg import spsolve

from app.core.config import settings
from app.core.errors import ConvergenceError, IllPosedError, RejectedInputError
from app.schemas.operators import EigenPairs, HermitianMatrix, SparseHermitianOperator, TridiagonalOperator

logger = structlog.get_logger()

HERMITIAN_TOL = 1e-13


def _check_finite(T: TridiagonalOperator) -> None:
    if not (np.all(np.isfinite(T.diag)) and np.all(np.isfinite(T.offdiag))):
        raise RejectedInputError("tridiagonal entries must be finite")


def spectral_width(T: TridiagonalOperator) -> float:
    lo, hi = T.gershgorin()
    return hi - lo


def tridiag_lowest(T: TridiagonalOperator, k: int) -> np.ndarray:
    """k smallest eigenvalues by Sturm-sequence bisection"""
    if not 1 <= k <= T.order:
        raise RejectedInputError("k out of range", k=k, order=T.order)
    _check_finite(T)

    # twice the underflow threshold: bisection to full attainable accuracy
    tol = 2 * np.finfo(float).tiny
    values = eigvalsh_tridiagonal(
        T.diag, T.offdiag,
        select="i", select_range=(0, k - 1),
        lapack_driver="stebz", tol=tol,
    )
    return np.sort(values)


def tridiag_window(T: TridiagonalOperator, lo: float, hi: float) -> np.ndarray:
    """Eigenvalues of T inside (lo, hi]"""
    _check_finite(T)
    return eigvalsh_tridiagonal(
        T.diag, T.offdiag, select="v", select_range=(lo, hi), lapack_driver="stebz"
    )


def tridiag_eigvec(T: TridiagonalOperator, lam: float) -> np.ndarray:
    """Eigenvector for lam from LAPACK bisection plus inverse iteration.

    The result is normalized so that spacing * sum(v**2) == 1 and its
    largest-magnitude entry is positive.
    """
    _check_finite(T)
    norm = max(T.norm(), np.finfo(float).tiny)
    delta = 1e3 * np.finfo(float).eps * norm
    try:
        values, vectors = eigh_tridiagonal(
            T.diag, T.offdiag, select="v", select_range=(lam - delta, lam + delta)
        )
    except LinAlgError as exc:
        logger.error("eigvec_failed", lam=lam, order=T.order)
        raise ConvergenceError("eigenvector computation failed", lam=lam) from exc
    if values.size == 0:
        logger.error("eigvec_failed", lam=lam, order=T.order)
        raise ConvergenceError("no eigenvalue near the requested value", lam=lam)

    x = vectors[:, int(np.argmin(np.abs(values - lam)))]
    x = x / np.linalg.norm(x)
    if x[int(np.argmax(np.abs(x)))] < 0:
        x = -x
    return x / np.sqrt(T.spacing)


def deflated_solve(
    T: TridiagonalOperator,
    z: float,
    u: np.ndarray,
    w: np.ndarray,
) -> np.ndarray:
    """Solve (T - z) v = w - <w,u> u with <v,u> = 0.

    Inner products are spacing-weighted. The bordered system
    [[T - z, u], [u^T, 0]] is factorized directly; it is regular as long as
    z avoids every eigenvalue except the one deflated by u.
    """
    _check_finite(T)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if u.size != T.order or w.size != T.order:
        raise RejectedInputError("u and w must match the operator order")

    u_hat = u / np.linalg.norm(u)
    width = max(spectral_width(T), 1.0)
    delta = 1e-10 * max(1.0, abs(z))
    near = tridiag_window(T, z - delta, z + delta)
    if near.size:
        rayleigh = float(u_hat @ T.matvec(u_hat))
        foreign = near[np.abs(near - rayleigh) > 1e-8 * width]
        if near.size > 1 or foreign.size:
            logger.error("deflated_solve_ill_posed", z=z, eigenvalues=near.tolist())
            raise IllPosedError("shift lies on a non-deflated eigenvalue", z=z)

    n = T.order
    body = sparse.diags(
        [T.offdiag, T.diag - z, T.offdiag], offsets=[-1, 0, 1], shape=(n, n), format="csc"
    )
    column = sparse.csc_matrix(u_hat.reshape(-1, 1))
    bordered = sparse.bmat([[body, column], [column.T, None]], format="csc")
    rhs = np.concatenate([w, [0.0]])
    solution = spsolve(bordered, rhs)
    v = solution[:n]

    target = w - (u_hat @ w) * u_hat
    residual = np.linalg.norm(T.matvec(v) - z * v - target)
    scale = max(np.linalg.norm(w), np.finfo(float).tiny)
    if residual > 1e-8 * scale:
        logger.warning("deflated_solve_residual", residual=residual / scale, z=z)
    return v


def dense_hermitian_eigs(
    M: HermitianMatrix,
    k: int,
    vectors: bool = False,
) -> np.ndarray | tuple[np.ndarray, np.ndarray]:
    """k smallest eigenvalues of a dense Hermitian matrix"""
    if not 1 <= k <= M.order:
        raise RejectedInputError("k out of range", k=k, order=M.order)
    residual = M.hermiticity_residual()
    if residual > HERMITIAN_TOL:
        raise RejectedInputError("matrix is not Hermitian", residual=residual)

    A = 0.5 * (M.entries + M.entries.conj().T)
    if vectors:
        values, vecs = eigh(A, subset_by_index=[0, k - 1], driver="evr")
        return values, vecs
    return eigh(A, eigvals_only=True, subset_by_index=[0, k - 1], driver="evr")


def _lanczos_run(
    apply: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    steps: int,
    locked: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One Lanczos pass with full reorthogonalization against basis and locked vectors"""
    n = start.size
    steps = min(steps, n - (0 if locked is None else locked.shape[0]))
    Q = np.zeros((steps, n), dtype=start.dtype)
    alpha = np.zeros(steps)
    beta = np.zeros(steps)

    def orthogonalize(r: np.ndarray, upto: int) -> np.ndarray:
        for _ in range(2):
            if locked is not None:
                r = r - locked.T @ (locked.conj() @ r)
            if upto:
                r = r - Q[:upto].T @ (Q[:upto].conj() @ r)
        return r

    q = orthogonalize(start, 0)
    q = q / np.linalg.norm(q)
    used = steps
    for j in range(steps):
        Q[j] = q
        r = apply(q)
        alpha[j] = float(np.vdot(q, r).real)
        r = orthogonalize(r, j + 1)
        beta[j] = float(np.linalg.norm(r))
        if beta[j] <= 1e-14 * max(1.0, abs(alpha[j])):
            used = j + 1
            beta[j] = 0.0
            break
        q = r / beta[j]

    theta, S = eigh_tridiagonal(alpha[:used], beta[:used - 1])
    ritz = S.T @ Q[:used]
    residuals = np.abs(beta[used - 1] * S[-1, :])
    return theta, ritz, residuals


def lanczos_lowest(
    A: SparseHermitianOperator,
    k: int,
    tol: float | None = None,
    krylov: int | None = None,
    max_restarts: int | None = None,
    shift: float | None = None,
    seed: int = 0,
) -> EigenPairs:
    """k smallest eigenvalues by restarted Lanczos with locking.

    With ``shift`` the iteration runs on -(A - shift)^{-1}, which requires
    ``A.shift_invert`` and a shift below the spectrum.
    """
    tol = tol if tol is not None else settings.lanczos_tol
    max_restarts = max_restarts if max_restarts is not None else settings.lanczos_restarts
    krylov = krylov or settings.lanczos_krylov
    if not 1 <= k < A.order:
        raise RejectedInputError("k out of range", k=k, order=A.order)

    if shift is not None:
        if A.shift_invert is None:
            raise RejectedInputError("operator has no shift-invert solver")
        solve = A.shift_invert(shift)

        def op(x: np.ndarray) -> np.ndarray:
            return -solve(x)
    else:
        op = A.apply

    rng = np.random.default_rng(seed)

    def random_start() -> np.ndarray:
        x = rng.standard_normal(A.order)
        if A.dtype == "complex":
            x = x + 1j * rng.standard_normal(A.order)
        return x

    locked_vals: list[float] = []
    locked_vecs: list[np.ndarray] = []
    start = random_start()
    verified = False
    restarts = 0

    for restarts in range(max_restarts + 1):
        locked = np.array(locked_vecs) if locked_vecs else None
        theta, ritz, residuals = _lanczos_run(op, start, krylov, locked)
        top = max(locked_vals) if len(locked_vals) == k else np.inf

        # a full locked set is accepted once a run orthogonal to it finds nothing lower
        if top < np.inf and (theta.size == 0 or theta[0] >= top - tol * max(1.0, abs(top))):
            verified = True
            break

        fresh = 0
        for i in range(theta.size):
            if theta[i] >= top or fresh >= k:
                break
            if residuals[i] > tol * max(1.0, abs(theta[i])):
                break
            locked_vals.append(float(theta[i]))
            locked_vecs.append(ritz[i])
            fresh += 1

        if len(locked_vals) > k:
            keep = np.argsort(locked_vals)[:k]
            locked_vals = [locked_vals[i] for i in keep]
            locked_vecs = [locked_vecs[i] for i in keep]
        logger.debug("lanczos_restart", restart=restarts, locked=len(locked_vals), fresh=fresh)

        start = random_start()
        if fresh < theta.size and len(locked_vals) < k:
            # restart from the lowest unconverged Ritz vector
            start = ritz[fresh] + 1e-3 * start / np.linalg.norm(start)

    values = np.array(sorted(locked_vals))
    order = np.argsort(locked_vals)
    vectors = np.array([locked_vecs[i] for i in order]) if locked_vecs else None
    if shift is not None and values.size:
        values = shift - 1.0 / values

    residual_norms = np.array(
        [float(np.linalg.norm(A.apply(v) - lam * v)) for lam, v in zip(values, vectors)]
        if vectors is not None else []
    )
    converged = verified and values.size == k
    if not converged:
        logger.warning("lanczos_not_converged", locked=int(values.size), wanted=k, restarts=restarts)
    return EigenPairs(
        values=values,
        vectors=vectors,
        residuals=residual_norms,
        converged=converged,
        restarts=restarts,
    )
