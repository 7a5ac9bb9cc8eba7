"""Linear solvers for the nonsymmetric FVM system.

The Krylov method is a hand-written right-preconditioned BiCGStab with a
Jacobi (diagonal) preconditioner; scipy is used only for compressed-row
storage and its matrix-vector product. A dense LU fallback is available for
small systems.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .exceptions import SolverError

__all__ = ["SolveReport", "solve", "bicgstab", "DENSE_LIMIT", "as_csr"]

#: Largest dimension accepted by the dense LU fallback.
DENSE_LIMIT = 5000


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a linear solve.

    Attributes
    ----------
    method : str
    iterations : int
    residual : float
        ``||b - A x|| / ||b||`` recomputed from the returned iterate.
    wall_time : float
        Seconds.
    restarts : int
    """

    method: str
    iterations: int
    residual: float
    wall_time: float
    restarts: int = 0

    def as_dict(self):
        return dict(method=self.method, iterations=self.iterations,
                    residual=self.residual, wall_time=self.wall_time,
                    restarts=self.restarts)


def as_csr(matrix):
    """Canonical CSR copy: sorted, duplicate-free column indices."""
    A = sp.csr_matrix(matrix, dtype=float, copy=True)
    A.sum_duplicates()
    A.sort_indices()
    if A.shape[0] != A.shape[1]:
        raise SolverError(f"matrix must be square, got {A.shape}")
    return A


def _relres(A, x, b):
    nb = np.linalg.norm(b)
    r = np.linalg.norm(b - A @ x)
    return r / nb if nb > 0 else r


def bicgstab(A, b, rtol=1e-10, maxiter=None, x0=None):
    """Jacobi-preconditioned BiCGStab.

    Parameters
    ----------
    A : sparse matrix, shape (n, n)
    b : ndarray, shape (n,)
    rtol : float
        Target for ``||b - A x|| / ||b||``.
    maxiter : int, optional
        Defaults to ``10 n``.
    x0 : ndarray, optional

    Returns
    -------
    x : ndarray
    iterations : int
    restarts : int

    Raises
    ------
    SolverError
        On a second breakdown or when ``maxiter`` is exhausted. The error
        carries ``best`` (the iterate with the smallest true residual seen)
        and ``residual``.
    """
    n = A.shape[0]
    maxiter = 10 * n if maxiter is None else int(maxiter)
    d = A.diagonal().copy()
    if np.any(d == 0.0):
        raise SolverError("zero diagonal entry: Jacobi preconditioner undefined")
    dinv = 1.0 / d
    b = np.asarray(b, dtype=float)
    nb = np.linalg.norm(b)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if nb == 0.0:
        return np.zeros(n), 0, 0
    r = b - A @ x
    if np.linalg.norm(r) <= rtol * nb:
        return x, 0, 0
    r_hat = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros(n)
    p = np.zeros(n)
    restarts = 0
    best, best_res = x.copy(), np.linalg.norm(r) / nb
    it = 0
    while it < maxiter:
        it += 1
        rho_new = r_hat @ r
        if abs(rho_new) < 1e-300 or omega == 0.0:
            if restarts >= 1:
                err = SolverError(f"BiCGStab breakdown at iteration {it}")
                err.best, err.residual = best, best_res
                raise err
            restarts += 1
            r = b - A @ x
            r_hat = r.copy()
            rho = alpha = omega = 1.0
            v[:] = 0.0
            p[:] = 0.0
            continue
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        p = r + beta * (p - omega * v)
        ph = dinv * p
        v = A @ ph
        denom = r_hat @ v
        if denom == 0.0:
            omega = 0.0
            continue
        alpha = rho / denom
        s = r - alpha * v
        if np.linalg.norm(s) <= rtol * nb:
            x = x + alpha * ph
            if _relres(A, x, b) <= rtol:
                return x, it, restarts
        sh = dinv * s
        t = A @ sh
        tt = t @ t
        omega = (t @ s) / tt if tt > 0 else 0.0
        x = x + alpha * ph + omega * sh
        r = s - omega * t
        rn = np.linalg.norm(r) / nb
        if rn <= rtol:
            true = _relres(A, x, b)
            if true <= rtol:
                return x, it, restarts
            r = b - A @ x  # drifted recursion residual: resync
            rn = true
        if rn < best_res:
            best, best_res = x.copy(), rn
    err = SolverError(f"BiCGStab did not reach rtol={rtol:g} in {maxiter} iterations "
                      f"(best residual {best_res:.3e})")
    err.best, err.residual = best, best_res
    raise err


def solve(system, method="bicgstab", rtol=1e-12, maxiter=None):
    """Solve ``A x = b`` for a :class:`~qfvm.assembly.GlobalSystem` or a pair.

    Parameters
    ----------
    system : GlobalSystem or tuple (A, b)
    method : {"bicgstab", "lu"}
    rtol : float in (0, 1)
    maxiter : int, optional

    Returns
    -------
    x : ndarray
    report : SolveReport

    Raises
    ------
    SolverError
        If the recomputed residual exceeds ``rtol``, on breakdown, or when
        ``lu`` is requested above :data:`DENSE_LIMIT`.
    """
    if isinstance(system, tuple):
        A, b = system
    else:
        A, b = system.matrix, system.rhs
    if not 0.0 < rtol < 1.0:
        raise ValueError("rtol must lie in (0, 1)")
    A = as_csr(A)
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if b.shape != (n,):
        raise SolverError(f"rhs has shape {b.shape}, expected ({n},)")
    t0 = time.perf_counter()
    if method == "lu":
        if n > DENSE_LIMIT:
            raise SolverError(f"dense LU refused for n={n} > {DENSE_LIMIT}")
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
                x = scipy.linalg.lu_solve(scipy.linalg.lu_factor(A.toarray()), b)
        except (np.linalg.LinAlgError, ValueError, scipy.linalg.LinAlgWarning) as exc:
            raise SolverError(f"dense LU failed: {exc}") from None
        its, restarts = 1, 0
    elif method == "bicgstab":
        x, its, restarts = bicgstab(A, b, rtol=rtol, maxiter=maxiter)
    else:
        raise ValueError(f"unknown method {method!r}")
    res = _relres(A, x, b)
    wall = time.perf_counter() - t0
    if not np.isfinite(res) or res > rtol:
        err = SolverError(f"{method}: recomputed residual {res:.3e} exceeds rtol={rtol:g}")
        err.best, err.residual = x, res
        raise err
    return x, SolveReport(method, its, float(res), wall, restarts)
