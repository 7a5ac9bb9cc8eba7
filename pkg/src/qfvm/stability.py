"""Element stability analysis and the minimum V-angle threshold search.

The element flux matrix ``A_{K,1}`` is transferred to the test side with
``S`` (``A_{K,lam} = S A_{K,1}``), reduced to the 9x9 gradient space with
the Moore-Penrose pair ``(G, T)``, symmetrised, and finally split by the
congruence ``C2`` into a 3x3 block ``s1 M`` and a 6x6 block ``N`` whenever
the surface orthogonality condition holds. ``N`` is linear in the cotangent
weights, so for a tetrahedron described by five plane angles it is
evaluated from the scale-free ratios ``r_jk / R_K``.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .assembly import closed_form_A, v1_vector, v2_vector
from .exceptions import ParameterError, StabilityError
from .geometry import (
    EDGES,
    REGULAR_TET,
    TetGeometry,
    r_over_circumradius_batch,
    reconstruct_batch,
    tet_geometry,
    v_angles_from_plane,
)
from .scheme import lambda_range, mapping_matrix_S, scheme_constants

__all__ = [
    "StabilityKit",
    "build_kit",
    "discrete_norm",
    "ElementStabilityMatrices",
    "element_stability",
    "stability_from_r",
    "m_matrix",
    "c3_matrix",
    "c1_matrix",
    "c2_matrix",
    "eta_parameters",
    "n_matrix_formula",
    "n_basis",
    "n_tilde",
    "n_tilde_batch",
    "q_v_membership",
    "theta5_grid",
    "VStarResult",
    "vstar_search",
    "lambda_grid",
    "lambda_sweep",
    "regular_tet_minors",
    "DEFAULT_PRIMES",
    "PD_TOL",
]

#: Relative eigenvalue tolerance for positive definiteness.
PD_TOL = 1e-12
#: Division numbers of the default search grids.
DEFAULT_PRIMES = (3, 5, 7, 11, 13, 17)
#: Tolerance on ``s*`` for treating a scheme as surface-orthogonal.
S_STAR_TOL = 1e-12

_E = {e: k for k, e in enumerate(EDGES)}


def _ri(a, b):
    """Edge index of the 1-based vertex pair ``(a, b)``."""
    return _E[(min(a, b) - 1, max(a, b) - 1)]


_G = np.array([
    [-1, 0, 0, -3, 0, 0, 0, 4, 0, 0],
    [0, -1, 0, -3, 0, 0, 0, 0, 4, 0],
    [0, 0, -1, -3, 0, 0, 0, 0, 0, 4],
    [2, 0, 0, 2, 0, 0, 0, -4, 0, 0],
    [0, 2, 0, 2, 0, 0, 0, 0, -4, 0],
    [0, 0, 2, 2, 0, 0, 0, 0, 0, -4],
    [0, 0, 0, 4, 4, 0, 0, 0, -4, -4],
    [0, 0, 0, 4, 0, 4, 0, -4, 0, -4],
    [0, 0, 0, 4, 0, 0, 4, -4, -4, 0],
], dtype=float)

_T40 = np.array([
    [30, -10, -10, 33, -7, -7, -1, -1, -1],
    [-10, 30, -10, -7, 33, -7, -1, -1, -1],
    [-10, -10, 30, -7, -7, 33, -1, -1, -1],
    [-10, -10, -10, -7, -7, -7, -1, -1, -1],
    [-10, 10, 10, -7, 3, 3, 9, -1, -1],
    [10, -10, 10, 3, -7, 3, -1, 9, -1],
    [10, 10, -10, 3, 3, -7, -1, -1, 9],
    [10, -10, -10, 3, -7, -7, -1, -1, -1],
    [-10, 10, -10, -7, 3, -7, -1, -1, -1],
    [-10, -10, 10, -7, -7, 3, -1, -1, -1],
], dtype=float)

_W120 = np.array([
    [20, 0, 0, 10, 0, 0, 0, 5, 5],
    [0, 20, 0, 0, 10, 0, 5, 0, 5],
    [0, 0, 20, 0, 0, 10, 5, 5, 0],
    [10, 0, 0, 8, 0, 0, 0, 2, 2],
    [0, 10, 0, 0, 8, 0, 2, 0, 2],
    [0, 0, 10, 0, 0, 8, 2, 2, 0],
    [0, 5, 5, 0, 2, 2, 4, 1, 1],
    [5, 0, 5, 2, 0, 2, 1, 4, 1],
    [5, 5, 0, 2, 2, 0, 1, 1, 4],
], dtype=float)


@dataclass(frozen=True)
class StabilityKit:
    """Constant matrices of the reduction.

    Attributes
    ----------
    G : ndarray, shape (9, 10)
        Maps nodal values to the coefficients of the non-constant monomials
        ``L1, L2, L3, L1^2, L2^2, L3^2, L2L3, L1L3, L1L2``.
    T : ndarray, shape (10, 9)
        Moore-Penrose inverse of ``G``.
    W : ndarray, shape (9, 9)
        Gram matrix of the reference gradients in the monomial coefficients.
    """

    G: np.ndarray
    T: np.ndarray
    W: np.ndarray

    @staticmethod
    def eta(params):
        """``(eta1, eta2)`` of the block-diagonalising congruence."""
        return eta_parameters(params)


@lru_cache(maxsize=1)
def build_kit():
    """The matrices ``G``, ``T = (1/40) T40`` and ``W = (1/120) W120``."""
    G, T, W = _G.copy(), _T40 / 40.0, _W120 / 120.0
    for a in (G, T, W):
        a.setflags(write=False)
    return StabilityKit(G, T, W)


def discrete_norm(geom, u):
    """``h_K ||G u_K||^2``, equivalent to the squared H1 seminorm on ``K``."""
    Gu = build_kit().G @ np.asarray(u, dtype=float)
    return float(geom.h_K * Gu @ Gu)


# --------------------------------------------------------------------------
# building blocks


def m_matrix(r):
    """``M = [[R1, -r34, -r24], [-r34, R2, -r14], [-r24, -r14, R3]]``."""
    r = np.asarray(r, dtype=float)
    R = _R(r)
    M = np.empty(r.shape[:-1] + (3, 3))
    M[..., 0, 0], M[..., 1, 1], M[..., 2, 2] = R[..., 0], R[..., 1], R[..., 2]
    M[..., 0, 1] = M[..., 1, 0] = -r[..., _ri(3, 4)]
    M[..., 0, 2] = M[..., 2, 0] = -r[..., _ri(2, 4)]
    M[..., 1, 2] = M[..., 2, 1] = -r[..., _ri(1, 4)]
    return M


def c3_matrix():
    """All-ones 3x3 matrix with zero diagonal."""
    return np.ones((3, 3)) - np.eye(3)


def c1_matrix():
    """Congruence used for the regular-tetrahedron leading minors."""
    C = np.zeros((9, 9))
    C[:3, :3] = np.eye(3)
    C[3:, 3:] = [
        [1, 0, 0, 0, 0, 0],
        [-1, 1, 0, 0, 0, 0],
        [0, -1, 1, 0, 0, 0],
        [0, 0, 1, 1, 0, 0],
        [0, -2, 2, -1, 1, 0],
        [0, 2, 0, 0, -1, 1],
    ]
    return C


def eta_parameters(params):
    c = scheme_constants(params)
    q = 2.0 * c.s2 + c.s3
    return q / (4.0 * c.s1) - 0.75, -q / (8.0 * c.s1) - 0.125


def c2_matrix(params, eta=None):
    """Block congruence ``[[E3, 0, 0], [eta1 E3, E6], [eta2 C, ...]]``."""
    e1, e2 = eta_parameters(params) if eta is None else eta
    C = np.eye(9)
    C[3:6, :3] = e1 * np.eye(3)
    C[6:9, :3] = e2 * c3_matrix()
    return C


def _R(r):
    # R_i sums the three weights of edges not touching vertex i
    r = np.asarray(r)
    return np.stack([r[..., [k for k, e in enumerate(EDGES) if i not in e]].sum(axis=-1)
                     for i in range(4)], axis=-1)


def _a_lambda(r, params):
    c = scheme_constants(params)
    A1 = closed_form_A(r, c.t) - v1_vector(params)[:, None] * v2_vector(r)[..., None, :]
    return mapping_matrix_S(params.lam) @ A1, A1


def _b_bar(A_lam):
    kit = build_kit()
    B = kit.T.T @ A_lam @ kit.T
    return B, 0.5 * (B + np.swapaxes(B, -1, -2))


# --------------------------------------------------------------------------
# element analysis


@dataclass(frozen=True)
class ElementStabilityMatrices:
    """Reduction chain of one element and its verdict.

    Attributes
    ----------
    A_K1, A_Klam : ndarray (10, 10)
    B, B_bar : ndarray (9, 9)
    M : ndarray (3, 3)
    N : ndarray (6, 6) or None
        Present only for surface-orthogonal schemes.
    offdiag_residual : float or None
        Largest entry of the coupling blocks after the ``C2`` congruence,
        relative to ``||B_bar||``.
    lambda_min : float
        Smallest eigenvalue of ``B_bar / h_K``.
    stable : bool
        Verdict of the direct 9x9 check.
    stable_reduced : bool or None
        Verdict of the ``M (+) N`` route when available.
    """

    A_K1: np.ndarray = field(repr=False)
    A_Klam: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    B_bar: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)
    N: np.ndarray | None = field(repr=False)
    offdiag_residual: float | None
    lambda_min: float
    stable: bool
    stable_reduced: bool | None
    h_K: float = 1.0

    @property
    def is_stable(self):
        return self.stable


def _is_pd(S, tol=PD_TOL):
    w = np.linalg.eigvalsh(S)
    scale = np.max(np.abs(w)) if w.size else 0.0
    return bool(w[0] > tol * scale), float(w[0])


def stability_from_r(r, params, h=1.0):
    """Stability matrices from cotangent weights ``r`` (EDGES order)."""
    r = np.asarray(r, dtype=float)
    A_lam, A1 = _a_lambda(r, params)
    B, Bb = _b_bar(A_lam)
    M = m_matrix(r)
    ok, lmin = _is_pd(Bb / h)
    c = scheme_constants(params)
    N = resid = reduced = None
    if abs(c.s_star) <= S_STAR_TOL:
        C2 = c2_matrix(params)
        X = C2 @ Bb @ C2.T
        N = X[3:, 3:].copy()
        resid = float(np.max(np.abs(X[:3, 3:])) / np.linalg.norm(Bb))
        reduced = _is_pd(c.s1 * M / h)[0] and _is_pd(N / h)[0]
    return ElementStabilityMatrices(A1, A_lam, B, Bb, M, N, resid, lmin, ok,
                                    reduced, h)


def element_stability(geom, params):
    """Positive definiteness of ``B_bar / h_K`` for one element.

    Parameters
    ----------
    geom : TetGeometry or array_like (4, 3)
    params : SchemeParams

    Returns
    -------
    ElementStabilityMatrices
        For surface-orthogonal schemes both the direct and the reduced
        verdicts are filled in.
    """
    if not isinstance(geom, TetGeometry):
        geom = tet_geometry(geom)
    return stability_from_r(geom.r, params, geom.h_K)


def congruence_offdiag(r, params, eta=None):
    """Coupling blocks of ``C2 B_bar C2^T`` (rows 0..2, columns 3..8)."""
    A_lam, _ = _a_lambda(np.asarray(r, dtype=float), params)
    _, Bb = _b_bar(A_lam)
    C2 = c2_matrix(params, eta)
    X = C2 @ Bb @ C2.T
    return X[..., :3, 3:], Bb


def n_matrix_formula(r, params):
    """``N`` assembled from the printed block formulas (independent route).

    Uses the ``L``, ``J``, ``D`` and ``Q`` blocks together with the
    congruence parameters; valid for any scheme (``s*`` terms included).
    """
    r = np.asarray(r, dtype=float)
    c = scheme_constants(params)
    s0, s1, s2, s3, ss = c.s0, c.s1, c.s2, c.s3, c.s_star
    e1, e2 = eta_parameters(params)
    R = _R(r)
    x = lambda a, b: r[_ri(a, b)]  # noqa: E731
    M = m_matrix(r)
    C = c3_matrix()
    J1 = np.tile(R[:3], (3, 1))
    J2 = np.tile([x(1, 4), x(2, 4), x(3, 4)], (3, 1))
    D1 = np.diag(R[:3])
    D2 = np.diag([x(1, 4), x(2, 4), x(3, 4)])
    D3 = np.diag([x(2, 3), x(1, 3), x(1, 2)])
    D4 = np.array([[0, x(1, 2), x(1, 3)], [x(1, 2), 0, x(2, 3)], [x(1, 3), x(2, 3), 0]])
    Q1 = np.array([
        [-2 * R[0], x(1, 3) + x(1, 4), x(1, 2) + x(1, 4)],
        [x(2, 3) + x(2, 4), -2 * R[1], x(1, 2) + x(2, 4)],
        [x(2, 3) + x(3, 4), x(1, 3) + x(3, 4), -2 * R[2]],
    ])
    Q2 = np.array([
        [-2 * x(1, 4) - x(2, 4) - x(3, 4), R[0] + x(2, 4), R[0] + x(3, 4)],
        [R[1] + x(1, 4), -x(1, 4) - 2 * x(2, 4) - x(3, 4), R[1] + x(3, 4)],
        [R[2] + x(1, 4), R[2] + x(2, 4), -x(1, 4) - x(2, 4) - 2 * x(3, 4)],
    ])
    MC, CM, CMC = M @ C, C @ M, C @ M @ C
    L1 = (s1 / 2 - (s2 + s3) / 2) * M + (3 * s1 / 20 - (s2 + s3) / 2) * J1 + s3 * D1 + ss / 2 * Q1
    L2 = (s1 / 4 - (s2 + s3) / 4) * MC - (3 * s1 / 20 - s2 / 2) * J2 + s3 / 2 * D2 + ss / 4 * Q2
    L3 = s2 / 2 * CM - s1 / 20 * J1 + s2 / 2 * D1 - (s2 - s3) / 2 * D3
    L4 = s2 / 4 * CMC + (s1 / 20 - s2 / 4) * J2 + s2 / 4 * D2 - (s2 - s3) / 4 * D4
    q = 2 * s2 + s3
    Lt1 = L1 + ((1.5 + e1) * s1 - q / 2) * e1 * M + ss / 2 * e1 * Q1
    Lt2 = L2 + (s1 / 4 * e1 + ((1 + e1) * s1 - q / 2) * e2) * MC + ss / 4 * e1 * Q2
    Lt3 = L3 + (s1 / 2 * e2 + (e2 * s1 + q / 4) * e1) * CM + ss / 2 * e2 * (C @ Q1)
    Lt4 = L4 + (s1 / 4 * e2 + (e2 * s1 + q / 4) * e2) * CMC + ss / 4 * e2 * (C @ Q2)
    b11 = Lt1 - 6 * s0 * J1
    b12 = Lt2 + 6 * s0 * J2
    b21 = Lt3 + 2 * s0 * J1
    b22 = Lt4 - 2 * s0 * J2
    return 0.5 * np.block([[b11 + b11.T, b12 + b21.T], [b21 + b12.T, b22 + b22.T]])


def _n_from_r(r, params):
    A_lam, _ = _a_lambda(np.asarray(r, dtype=float), params)
    _, Bb = _b_bar(A_lam)
    C2 = c2_matrix(params)
    return (C2 @ Bb @ C2.T)[..., 3:, 3:]


def _require_surface_orthogonal(params):
    if abs(scheme_constants(params).s_star) > S_STAR_TOL:
        raise ParameterError("the reduced 6x6 matrix needs a surface-orthogonal scheme (s* = 0)")


def n_basis(params):
    """``(6, 6, 6)`` stack with ``N(r) = sum_e r_e * basis[e]``."""
    _require_surface_orthogonal(params)
    return _n_from_r(np.eye(6), params)


def n_tilde_batch(t5, params, basis=None):
    """``N`` evaluated at the ratios ``r_jk / R_K`` of many angle sets.

    Returns
    -------
    N : ndarray, shape (..., 6, 6)
    feasible : ndarray of bool
    """
    plane, dih, ok = reconstruct_batch(t5)
    ratios = r_over_circumradius_batch(plane, dih)
    basis = n_basis(params) if basis is None else basis
    return np.einsum("...e,eij->...ij", ratios, basis), ok


def n_tilde(t5, params):
    """Scale-free reduced matrix ``N(Theta5)`` of a realizable angle set.

    Raises
    ------
    GeometryError
        If ``t5`` is not realizable.
    """
    from .geometry import reconstruct_from_theta5, r_over_circumradius

    _require_surface_orthogonal(params)
    reconstruct_from_theta5(t5)  # raises when infeasible
    return _n_from_r(r_over_circumradius(t5), params)


# --------------------------------------------------------------------------
# the angle set Q_v and the threshold search

_VTOL = 1e-9  # degrees


def _q_v_mask(t5_deg, v):
    t = np.asarray(t5_deg, dtype=float)
    a1P1, a2P1, a1P2, a2P2, a3P2 = np.moveaxis(t, -1, 0)
    ok = np.all(t > 0, axis=-1)
    ok &= (a1P1 + a1P2 < 180.0) & (a2P1 + a2P2 < 180.0) & (a1P2 + a2P2 + a3P2 < 360.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        plane, dih, feas = reconstruct_batch(np.radians(t))
        ok &= feas
        va = np.degrees(v_angles_from_plane(plane)).min(axis=-1)
    ok &= va >= v - _VTOL
    return ok, plane, dih


def q_v_membership(t5, v):
    """Whether a five-angle set (degrees) lies in ``Q_v``.

    Parameters
    ----------
    t5 : array_like, shape (..., 5)
        Angles in degrees.
    v : float
        V-angle bound in degrees.
    """
    ok, _, _ = _q_v_mask(t5, v)
    return ok if np.ndim(ok) else bool(ok)


def theta5_grid(v, n):
    """Grid ``v + (180 - 3v)/n * i`` per coordinate, ``i = 0..n`` (degrees)."""
    return v + (180.0 - 3.0 * v) / n * np.arange(n + 1)


def _map(fun, items, threads):
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fun(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fun, items))


@lru_cache(maxsize=48)
def _grid_ratios(v, n, threads=None):
    """``r/R_K`` at the grid points inside ``Q_v`` (depends on angles only)."""
    g = theta5_grid(v, n)
    tail = np.stack(np.meshgrid(g, g, g, g, indexing="ij"), axis=-1).reshape(-1, 4)

    def slab(a):  # one slab per first coordinate keeps memory bounded
        t = np.column_stack([np.full(len(tail), a), tail])
        ok, plane, dih = _q_v_mask(t, v)
        return r_over_circumradius_batch(plane[ok], dih[ok])

    out = _map(slab, list(g), threads)
    ratios = np.concatenate(out) if out else np.empty((0, 6))
    ratios.setflags(write=False)
    return ratios


def _grid_positive(v, n, basis, chunk, threads=None):
    ratios = _grid_ratios(float(v), int(n), threads)
    starts = list(range(0, len(ratios), chunk))

    def positive(s):
        N = np.einsum("pe,eij->pij", ratios[s:s + chunk], basis)
        return not np.any(np.linalg.det(N) <= 0.0)

    return all(_map(positive, starts, threads)), len(ratios)


@dataclass(frozen=True)
class VStarResult:
    """Outcome of the threshold bisection (degrees)."""

    vstar: float
    lower: float
    lam: float
    primes: tuple
    precision: float
    evaluations: int
    wall_time: float

    def as_dict(self):
        return dict(lam=self.lam, vstar_degrees=self.vstar, lower=self.lower,
                    primes=list(self.primes), precision=self.precision,
                    evaluations=self.evaluations, wall_time=self.wall_time)


def vstar_search(params, primes=DEFAULT_PRIMES, precision=0.1, chunk=200_000,
                 threads=None):
    """Bisection for the smallest V-angle bound keeping ``det N > 0``.

    For a candidate ``v`` the determinant is checked on the grids of each
    division number in ``primes`` (in order), restricted to ``Q_v``; ``v`` is
    accepted when every sampled determinant is positive.

    Parameters
    ----------
    params : SchemeParams
        Surface-orthogonal scheme with ``lam`` inside the regular-tetrahedron
        stability interval.
    primes : sequence of int
        Increasing division numbers.
    precision : float
        Bisection stops once the bracket is at most this wide (degrees).
    chunk : int
        Grid points per batched determinant evaluation.
    threads : int, optional
        Worker threads for grid construction and determinant batches. The
        verdict for each ``v`` is a conjunction, so it does not depend on
        scheduling.

    Returns
    -------
    VStarResult
        ``vstar`` is the upper end of the final bracket.
    """
    if precision <= 0:
        raise ParameterError("precision must be positive")
    lo_l, hi_l = lambda_range(params.alpha, params.beta)
    if not lo_l < params.lam < hi_l:
        raise ParameterError(
            f"lambda={params.lam:g} outside the admissible interval ({lo_l:.6f}, {hi_l:.6f})"
        )
    basis = n_basis(params)
    primes = tuple(int(p) for p in primes)
    t0_clock = time.perf_counter()
    t0, t1 = 0.0, 60.0
    evals = 0
    while t1 - t0 > precision:
        v0 = 0.5 * (t0 + t1)
        good = True
        for n in primes:
            good, cnt = _grid_positive(v0, n, basis, chunk, threads)
            evals += cnt
            if not good:
                break
        if good:
            t1 = v0
        else:
            t0 = v0
    return VStarResult(t1, t0, params.lam, primes, precision, evals,
                       time.perf_counter() - t0_clock)


def lambda_grid(params, step, span=None):
    """Equally spaced ``lam`` values through the default ``1/(1 - 3 alpha beta)``.

    Points lie at ``lam0 + k * step`` strictly inside the admissible interval,
    optionally limited to ``|lam - lam0| <= span``.
    """
    if step <= 0:
        raise ParameterError("step must be positive")
    lo, hi = lambda_range(params.alpha, params.beta)
    lam0 = 1.0 / (1.0 - 3.0 * params.alpha * params.beta)
    kmin = int(np.floor((lo - lam0) / step)) + 1
    kmax = int(np.ceil((hi - lam0) / step)) - 1
    lams = lam0 + step * np.arange(kmin, kmax + 1)
    lams = lams[(lams > lo) & (lams < hi)]
    if span is not None:
        lams = lams[np.abs(lams - lam0) <= span + 1e-12]
    return lams


def lambda_sweep(params, lams, primes=DEFAULT_PRIMES, precision=0.1, warn=None,
                 threads=None):
    """``v*`` over a list of ``lam`` values.

    Values outside the admissible interval are dropped; ``warn`` (a callable)
    receives a message naming them.

    Returns
    -------
    list of VStarResult
    """
    lo, hi = lambda_range(params.alpha, params.beta)
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    bad = lams[(lams <= lo) | (lams >= hi)]
    if bad.size and warn is not None:
        warn(f"dropping lambda values outside ({lo:.6f}, {hi:.6f}): "
             + ", ".join(f"{x:g}" for x in bad))
    return [vstar_search(params.with_lambda(float(lam)), primes, precision,
                         threads=threads)
            for lam in lams if lo < lam < hi]


# --------------------------------------------------------------------------
# regular tetrahedron regression


def regular_tet_minors(params):
    """Leading minors of order 3..9 of ``C1^T (B_bar/h) C1`` on a regular tet.

    Returns
    -------
    numeric, closed : ndarray, shape (7,)
        Determinants computed from the matrices and from the closed forms in
        ``c = r/h``, ``phi1`` and ``phi2``.
    """
    g = tet_geometry(REGULAR_TET)
    st = element_stability(g, params)
    C1 = c1_matrix()
    X = C1.T @ (st.B_bar / g.h_K) @ C1
    numeric = np.array([np.linalg.det(X[:k, :k]) for k in range(3, 10)])
    c = float(g.r[0] / g.h_K)
    k = scheme_constants(params)
    s0, s2, s3 = k.s0, k.s2, k.s3
    phi1 = 2.0 / 27.0 * (-3.0 * (2 * s2 + s3) ** 2 + (2 * s2 + 5 * s3) - 1.0 / 12.0)
    phi2 = -240.0 * s0 - 20.0 * s2 - 10.0 * s3 + 1.0
    d = s2 - s3
    closed = np.array([
        2.0 * c**3 / 27.0,
        c**4 * phi1,
        8 * c**5 * d * phi1,
        81 / 4 * c**6 * d * phi1**2,
        243 / 8 * c**7 * d**2 * phi1**2,
        2187 / 32 * c**8 * d**2 * phi1**3,
        729 / 1280 * c**9 * d**2 * phi1**3 * phi2,
    ])
    return numeric, closed
