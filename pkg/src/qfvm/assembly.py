"""Element flux matrices, dual-cell right-hand sides and global assembly.

Local node order is ``P1..P4, M23, M13, M12, M14, M24, M34``. The element
matrix has entries

    a_mn = - integral over (boundary of cell m inside K) of kappa grad(phi_n) . n

with ``n`` the outward normal of cell ``m``. Only the internal faces of the
dual partition contribute; the portions of cell boundaries lying on ``∂K``
are interior to the global control volume and cancel between elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .dual import DualComplex, build_dual, reference_dual
from .exceptions import QFVMError
from .geometry import EDGES, OPPOSITE_EDGE, TetGeometry, geometry_batch, tet_geometry
from .quadrature import tet_rule, triangle_rule
from .scheme import MIDPOINT_EDGES, SchemeParams, mapping_matrix_S, scheme_constants

__all__ = [
    "ElementMatrix",
    "GlobalSystem",
    "basis_eval",
    "basis_dL",
    "basis_grad",
    "v1_vector",
    "v2_vector",
    "closed_form_A",
    "element_matrix_closed_form",
    "element_matrix_quadrature",
    "element_matrices_batch",
    "rhs_element",
    "rhs_batch",
    "assemble",
    "dump_coo",
    "as_field",
]

_EDGE_OF = {}
for _e, (_a, _b) in enumerate(EDGES):
    _EDGE_OF[(_a, _b)] = _EDGE_OF[(_b, _a)] = _e


class CoefficientError(QFVMError, ValueError):
    """Diffusion coefficient not strictly positive."""


# --------------------------------------------------------------------------
# basis functions


def basis_eval(L):
    """Values of the ten quadratic Lagrange basis functions.

    Parameters
    ----------
    L : array_like, shape (..., 4)
        Barycentric coordinates.

    Returns
    -------
    ndarray, shape (..., 10)
    """
    L = np.asarray(L, dtype=float)
    out = np.empty(L.shape[:-1] + (10,))
    out[..., :4] = L * (2.0 * L - 1.0)
    for m, (j, k) in enumerate(MIDPOINT_EDGES):
        out[..., 4 + m] = 4.0 * L[..., j] * L[..., k]
    return out


def basis_dL(L):
    """Partial derivatives ``d phi_n / d L_i``, shape ``(..., 10, 4)``."""
    L = np.asarray(L, dtype=float)
    out = np.zeros(L.shape[:-1] + (10, 4))
    for i in range(4):
        out[..., i, i] = 4.0 * L[..., i] - 1.0
    for m, (j, k) in enumerate(MIDPOINT_EDGES):
        out[..., 4 + m, j] = 4.0 * L[..., k]
        out[..., 4 + m, k] = 4.0 * L[..., j]
    return out


def basis_grad(geom, L):
    """Physical gradients of the basis at barycentric points ``L``.

    Returns
    -------
    ndarray, shape (..., 10, 3)
    """
    return basis_dL(L) @ np.asarray(geom.grad_L)


def v1_vector(params):
    """Cell volumes divided by ``6|K|``."""
    abg = params.alpha * params.beta * params.gamma
    return np.array([abg / 6.0] * 4 + [(1.0 - 4.0 * abg) / 36.0] * 6)


def v2_vector(r):
    """``6|K|`` times the (constant) Laplacians of the basis, from ``r``.

    ``r`` may carry leading batch axes.
    """
    r = np.asarray(r, dtype=float)
    R = _R_from_r(r)
    mid = np.stack([-2.0 * r[..., OPPOSITE_EDGE[_EDGE_OF[e]]] for e in MIDPOINT_EDGES],
                   axis=-1)
    return 4.0 * np.concatenate([R, mid], axis=-1)


def _R_from_r(r):
    return np.stack([sum(r[..., e] for e, (a, b) in enumerate(EDGES) if i not in (a, b))
                     for i in range(4)], axis=-1)


# --------------------------------------------------------------------------
# closed form


def closed_form_A(r, t):
    """The symbolic matrix ``A`` (before the rank-one correction).

    Entries are linear in the cotangent weights; the four blocks follow the
    vertex/vertex, vertex/midpoint, midpoint/vertex and midpoint/midpoint
    patterns, with ``t = (t1, t2, t3, t4)``.

    Parameters
    ----------
    r : array_like, shape (..., 6)
    t : sequence of 4 floats

    Returns
    -------
    ndarray, shape (..., 10, 10)
    """
    r = np.asarray(r, dtype=float)
    t1, t2, t3, t4 = t
    R = _R_from_r(r)
    A = np.zeros(r.shape[:-1] + (10, 10))

    def rr(a, b):
        return r[..., _EDGE_OF[(a, b)]]

    def comp(a, b):
        return r[..., OPPOSITE_EDGE[_EDGE_OF[(a, b)]]]

    # vertex rows, vertex columns
    for m in range(4):
        for n in range(4):
            if m == n:
                A[..., m, n] = (3 * t1 - 2 * t2) * R[..., m]
            else:
                A[..., m, n] = 4 * t2 * R[..., n] + (t1 - 2 * t2) * comp(m, n)
    for a, (j, k) in enumerate(MIDPOINT_EDGES):
        row = 4 + a
        for m in range(4):
            if m in (j, k):
                # vertex row m, midpoint column of edge jk (4 times)
                A[..., m, row] = 4 * (t2 * R[..., m] - (t1 + t2) * comp(j, k))
                # midpoint row jk, vertex column m
                A[..., row, m] = (2 * t3 - t4) * (R[..., m] - comp(j, k))
            else:
                A[..., m, row] = -4 * t2 * (R[..., j] + R[..., k] - rr(m, j) - rr(m, k))
                A[..., row, m] = (2 * t3 + t4) * R[..., m] - (2 * t3 - 3 * t4) * rr(j, k)
        for b, (x, y) in enumerate(MIDPOINT_EDGES):
            col = 4 + b
            shared = {j, k} & {x, y}
            if a == b:
                p, q = [v for v in range(4) if v not in (j, k)]
                val = t3 * (R[..., p] + R[..., q] - 2 * rr(j, k))
            elif not shared:
                val = -t4 * (R[..., x] + R[..., y])
            else:
                (s,) = shared
                ja = j if k == s else k
                xb = x if y == s else y
                val = t4 * rr(ja, xb) - t3 * (R[..., xb] - rr(j, k))
            A[..., row, col] = 4 * val
    return A


@dataclass(frozen=True)
class ElementMatrix:
    """A 10x10 element flux matrix in local node order."""

    matrix: np.ndarray
    label: str = ""

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    @property
    def row_sums(self):
        return self.matrix.sum(axis=1)

    @property
    def col_sums(self):
        return self.matrix.sum(axis=0)


def _geom_r(geom):
    return np.asarray(geom.r if isinstance(geom, TetGeometry) else tet_geometry(geom).r)


def element_matrix_closed_form(geom, params):
    """Closed-form element matrix ``A_{K,1} = A - v1 v2^T`` for unit diffusion.

    Parameters
    ----------
    geom : TetGeometry or array_like, shape (4, 3)
    params : SchemeParams

    Returns
    -------
    ElementMatrix
    """
    r = _geom_r(geom)
    c = scheme_constants(params)
    M = closed_form_A(r, c.t) - np.outer(v1_vector(params), v2_vector(r))
    return ElementMatrix(M, "closed form")


# --------------------------------------------------------------------------
# quadrature


def as_field(f):
    """Wrap scalars as constant fields; callables are returned unchanged.

    Fields receive an array of points of shape ``(..., 3)`` and must return
    values of shape ``(...)``.
    """
    if callable(f):
        return f
    value = float(f)

    def const(x):
        return np.full(np.shape(x)[:-1], value)

    const.constant = value
    return const


@dataclass(frozen=True)
class _FluxKernel:
    bary: np.ndarray      # (48, q, 4) quadrature points
    weights: np.ndarray   # (q,)
    dL: np.ndarray        # (48, q, 10, 4)
    dLw: np.ndarray       # (48, 10, 4) weight-summed
    tri_bary: np.ndarray  # (48, 3, 4)
    incidence: np.ndarray  # (48, 10): -1 left, +1 right


def _flux_kernel(ref, degree):
    key = (id(ref), degree)
    cache = _flux_kernel.cache
    if key not in cache:
        bq, wq = triangle_rule(degree)
        tb = ref.points[ref.internal_tris]
        bary = np.einsum("qa,tai->tqi", bq, tb)
        dL = basis_dL(bary)
        inc = np.zeros((len(tb), 10))
        inc[np.arange(len(tb)), ref.tri_left] = -1.0
        inc[np.arange(len(tb)), ref.tri_right] = 1.0
        cache[key] = (ref, _FluxKernel(bary, wq, dL, np.einsum("q,tqni->tni", wq, dL),
                                       tb, inc))
    return cache[key][1]


_flux_kernel.cache = {}


def element_matrices_batch(points, params, kappa=1.0, degree=4, chunk=4096):
    """Quadrature flux matrices for a stack of elements.

    Parameters
    ----------
    points : ndarray, shape (E, 4, 3)
    params : SchemeParams
    kappa : float or callable
        Diffusion coefficient; callables are evaluated at the surface
        quadrature points.
    degree : int
        Triangle rule degree on the internal faces.
    chunk : int
        Elements processed per vectorised block.

    Returns
    -------
    ndarray, shape (E, 10, 10)

    Raises
    ------
    CoefficientError
        If ``kappa`` is not strictly positive at some quadrature point.
    """
    X = np.asarray(points, dtype=float)
    ref = reference_dual(params)
    ker = _flux_kernel(ref, degree)
    kap = as_field(kappa)
    const = getattr(kap, "constant", None)
    if const is not None and const <= 0:
        raise CoefficientError("diffusion coefficient must be positive")
    out = np.empty((X.shape[0], 10, 10))
    for s in range(0, X.shape[0], chunk):
        Xe = X[s:s + chunk]
        g = geometry_batch(Xe)
        orient = np.sign(g["signed_volume"])
        tri = np.einsum("tai,eij->etaj", ker.tri_bary, Xe)
        nvec = 0.5 * np.cross(tri[:, :, 1] - tri[:, :, 0], tri[:, :, 2] - tri[:, :, 0])
        nvec *= orient[:, None, None]
        gn = np.einsum("eij,etj->eti", g["grad_L"], nvec)
        if const is not None:
            flux = const * np.einsum("tni,eti->etn", ker.dLw, gn)
        else:
            xq = np.einsum("tqi,eij->etqj", ker.bary, Xe)
            kv = np.asarray(kap(xq), dtype=float)
            if np.any(kv <= 0) or not np.all(np.isfinite(kv)):
                raise CoefficientError("diffusion coefficient must be positive")
            kw = kv * ker.weights
            flux = np.einsum("etq,tqni,eti->etn", kw, ker.dL, gn, optimize=True)
        out[s:s + chunk] = np.einsum("tm,etn->emn", ker.incidence, flux)
    return out


def element_matrix_quadrature(geom, complex_=None, kappa=1.0, degree=4, params=None):
    """Flux matrix of one element by surface quadrature.

    Parameters
    ----------
    geom : TetGeometry or array_like, shape (4, 3)
    complex_ : DualComplex, optional
        Supplies the dual parameters; otherwise ``params`` must be given.
    kappa : float or callable
    degree : int
    params : SchemeParams, optional

    Returns
    -------
    ElementMatrix
    """
    if not isinstance(geom, TetGeometry):
        geom = tet_geometry(geom)
    if complex_ is not None:
        ref = complex_.ref
        params = (ref.alpha, ref.beta, ref.gamma)
    elif params is None:
        raise ValueError("need a dual complex or scheme parameters")
    if not isinstance(params, SchemeParams):
        params = SchemeParams(*params, lam=1.0)
    M = element_matrices_batch(np.asarray(geom.points)[None], params, kappa, degree)[0]
    return ElementMatrix(M, "quadrature")


# --------------------------------------------------------------------------
# right-hand side


def _rhs_kernel(ref, degree):
    key = (id(ref), degree)
    cache = _rhs_kernel.cache
    if key not in cache:
        bq, wq = tet_rule(degree)
        cb = ref.points[ref.cone_tets]                       # (nc, 4, 4)
        bary = np.einsum("qa,cai->cqi", bq, cb).reshape(-1, 4)
        w = (ref.cone_volume[:, None] * wq[None, :]).ravel()
        owner = np.repeat(ref.cone_owner, len(wq))
        cache[key] = (ref, bary, w, owner)
    return cache[key][1:]


_rhs_kernel.cache = {}


def rhs_batch(points, params, f, degree=4, chunk=1024):
    """Integrals of ``f`` over the ten dual cells of each element.

    Returns
    -------
    ndarray, shape (E, 10)
    """
    X = np.asarray(points, dtype=float)
    ref = reference_dual(params)
    bary, w, owner = _rhs_kernel(ref, degree)
    P = np.zeros((len(w), 10))
    P[np.arange(len(w)), owner] = w                          # (nq, 10)
    fun = as_field(f)
    vol = np.abs(np.linalg.det(X[:, 1:] - X[:, :1])) / 6.0
    out = np.empty((X.shape[0], 10))
    for s in range(0, X.shape[0], chunk):
        Xe = X[s:s + chunk]
        xq = np.einsum("qi,eij->eqj", bary, Xe)
        fv = np.asarray(fun(xq), dtype=float)
        out[s:s + chunk] = (fv @ P) * vol[s:s + chunk, None]
    return out


def rhs_element(complex_, f, degree=4):
    """Integrals of ``f`` over the ten dual cells of one element."""
    ref = complex_.ref
    params = SchemeParams(ref.alpha, ref.beta, ref.gamma, 1.0)
    return rhs_batch(np.asarray(complex_.geom.points)[None], params, f, degree)[0]


# --------------------------------------------------------------------------
# global system


@dataclass
class GlobalSystem:
    """Sparse linear system of the scheme on a mesh.

    Attributes
    ----------
    matrix : scipy.sparse.csr_matrix
        Assembled matrix with Dirichlet rows replaced by identity rows.
    rhs : ndarray
    dirichlet : ndarray of bool
        Boundary-node mask.
    dof_map : ndarray, shape (E, 10)
        Global node of each local node of each element.
    raw_matrix : scipy.sparse.csr_matrix
        Matrix before the boundary rows were replaced.
    raw_rhs : ndarray
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    dirichlet: np.ndarray
    dof_map: np.ndarray
    raw_matrix: sp.csr_matrix = field(repr=False)
    raw_rhs: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.matrix.shape[0]


def assemble(mesh, params, kappa=1.0, f=0.0, surface_degree=4, volume_degree=4):
    """Assemble the global system with homogeneous Dirichlet conditions.

    Parameters
    ----------
    mesh : Mesh
    params : SchemeParams
    kappa, f : float or callable
        Diffusion coefficient and source term.
    surface_degree, volume_degree : int
        Quadrature degrees for fluxes and for the source integrals.

    Returns
    -------
    GlobalSystem
    """
    X = mesh.element_points()
    dofs = mesh.element_dofs()
    n = mesh.n_nodes
    if dofs.min() < 0 or dofs.max() >= n:
        raise QFVMError("inconsistent DOF map")
    Ae = element_matrices_batch(X, params, kappa, surface_degree)
    be = rhs_batch(X, params, f, volume_degree)
    rows = np.repeat(dofs, 10, axis=1).ravel()
    cols = np.tile(dofs, (1, 10)).ravel()
    raw = sp.coo_matrix((Ae.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    raw.sum_duplicates()
    raw.sort_indices()
    b = np.zeros(n)
    np.add.at(b, dofs.ravel(), be.ravel())

    mask = np.asarray(mesh.boundary, dtype=bool)
    A = _replace_rows(raw, mask)
    rhs = np.where(mask, 0.0, b)
    return GlobalSystem(A, rhs, mask, dofs, raw, b)


def _replace_rows(raw, mask):
    """Identity rows at ``mask``; the sparsity pattern of ``raw`` is kept."""
    A = raw.copy()
    rows = np.repeat(np.arange(A.shape[0]), np.diff(A.indptr))
    hit = mask[rows]
    A.data[hit] = 0.0
    A.data[hit & (A.indices == rows)] = 1.0
    return A


def dump_coo(matrix, path=None):
    """Coordinate listing ``i j value`` (1-based) of a sparse matrix."""
    C = sp.coo_matrix(matrix)
    order = np.lexsort((C.col, C.row))
    lines = [f"{C.shape[0]} {C.shape[1]} {C.nnz}"]
    lines += [f"{C.row[k] + 1} {C.col[k] + 1} {C.data[k]:.17g}" for k in order]
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
