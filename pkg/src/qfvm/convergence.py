"""Manufactured solutions, discrete error norms and convergence studies."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import assemble, basis_eval, basis_dL
from .exceptions import MeshError, QFVMError
from .geometry import geometry_batch
from .mesh import audit, generate_structured, perturb
from .quadrature import tet_rule
from .solver import solve

__all__ = [
    "ManufacturedCase",
    "CASES",
    "get_case",
    "error_norms",
    "interpolate",
    "ConvergenceRow",
    "ConvergenceReport",
    "run_convergence",
    "mesh_family",
]

_PI = math.pi


@dataclass(frozen=True)
class ManufacturedCase:
    """Closed-form exact solution with matching coefficient and source.

    All callables take points of shape ``(..., 3)``; ``grad`` returns
    ``(..., 3)``, the others ``(...)``.
    """

    name: str
    u: callable
    grad: callable
    kappa: callable
    f: callable
    kappa_constant: float | None = None

    @property
    def kappa_arg(self):
        """Scalar when the coefficient is constant, else the callable."""
        return self.kappa if self.kappa_constant is None else self.kappa_constant


def _sines(x):
    s = np.sin(_PI * x)
    c = np.cos(_PI * x)
    return s[..., 0], s[..., 1], s[..., 2], c[..., 0], c[..., 1], c[..., 2]


def _u(x):
    s1, s2, s3, *_ = _sines(x)
    return s1 * s2 * s3


def _grad(x):
    s1, s2, s3, c1, c2, c3 = _sines(x)
    return _PI * np.stack([c1 * s2 * s3, s1 * c2 * s3, s1 * s2 * c3], axis=-1)


def _kappa_exp(x):
    return np.exp(x[..., 0] + 2.0 * x[..., 1] + 3.0 * x[..., 2])


def _f_exp(x):
    # -div(k grad u) = -k (lap u + (1,2,3).grad u) since grad k = k (1,2,3)
    g = _grad(x)
    lap = -3.0 * _PI**2 * _u(x)
    return -_kappa_exp(x) * (lap + g[..., 0] + 2.0 * g[..., 1] + 3.0 * g[..., 2])


def _one(x):
    return np.ones(np.shape(x)[:-1])


def _f_poisson(x):
    return 3.0 * _PI**2 * _u(x)


#: Built-in manufactured cases on the unit cube.
CASES = {
    "exp-kappa-sine": ManufacturedCase("exp-kappa-sine", _u, _grad, _kappa_exp, _f_exp),
    "poisson-sine": ManufacturedCase("poisson-sine", _u, _grad, _one, _f_poisson, 1.0),
}


def get_case(name):
    try:
        return CASES[name]
    except KeyError:
        raise QFVMError(f"unknown case {name!r}; choose from {sorted(CASES)}") from None


def interpolate(mesh, fun):
    """Nodal values of ``fun`` at vertices and edge midpoints."""
    return np.asarray(fun(mesh.node_coords), dtype=float)


def error_norms(mesh, uh, case, degree=6, chunk=4096):
    """H1-seminorm and L2 errors of a quadratic nodal field.

    Parameters
    ----------
    mesh : Mesh
    uh : ndarray, shape (n_nodes,)
    case : ManufacturedCase or str
    degree : int
        Tetrahedron quadrature degree.

    Returns
    -------
    h1, l2 : float
    """
    if isinstance(case, str):
        case = get_case(case)
    uh = np.asarray(uh, dtype=float)
    if uh.shape != (mesh.n_nodes,):
        raise ValueError(f"solution has shape {uh.shape}, expected ({mesh.n_nodes},)")
    bq, wq = tet_rule(degree)
    phi = basis_eval(bq)                 # (q, 10)
    dphi = basis_dL(bq)                  # (q, 10, 4)
    X = mesh.element_points()
    dofs = mesh.element_dofs()
    h1 = l2 = 0.0
    for s in range(0, len(X), chunk):
        Xe = X[s:s + chunk]
        g = geometry_batch(Xe)
        vol = np.abs(g["signed_volume"])
        ue = uh[dofs[s:s + chunk]]                               # (e, 10)
        xq = np.einsum("qi,eij->eqj", bq, Xe)
        val = ue @ phi.T                                         # (e, q)
        gL = np.einsum("qni,eij->eqnj", dphi, g["grad_L"])       # (e, q, 10, 3)
        grad = np.einsum("en,eqnj->eqj", ue, gL)
        eu = case.u(xq) - val
        eg = case.grad(xq) - grad
        l2 += float(np.sum(vol * (eu**2 @ wq)))
        h1 += float(np.sum(vol * (np.sum(eg**2, axis=-1) @ wq)))
    return math.sqrt(h1), math.sqrt(l2)


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    h: float
    h1_error: float = math.nan
    h1_order: float = math.nan
    l2_error: float = math.nan
    l2_order: float = math.nan
    iterations: int = 0
    wall_time: float = 0.0
    min_vangle: float = math.nan
    error: str | None = None

    @property
    def ok(self):
        return self.error is None


@dataclass
class ConvergenceReport:
    """Per-refinement errors and observed orders.

    Orders use the ratio of successive ``N``:
    ``log(e_prev / e_cur) / log(N_cur / N_prev)``.
    """

    scheme: str
    case: str
    family: str
    rows: list = field(default_factory=list)

    @property
    def ok(self):
        return all(r.ok for r in self.rows)

    def row(self, N):
        for r in self.rows:
            if r.N == N:
                return r
        raise KeyError(N)

    COLUMNS = ("N", "h", "h1_error", "h1_order", "l2_error", "l2_order")

    def records(self):
        return [{k: getattr(r, k) for k in self.COLUMNS} for r in self.rows]

    def to_csv(self, path=None):
        """CSV text with scientific notation to six significant digits."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for rec in self.records():
            w.writerow([rec["N"]] + [_fmt(rec[k]) for k in self.COLUMNS[1:]])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
        return text

    def to_json(self):
        recs = [{k: (None if isinstance(v, float) and math.isnan(v) else v)
                 for k, v in rec.items()} for rec in self.records()]
        return json.dumps(dict(scheme=self.scheme, case=self.case,
                               family=self.family, rows=recs), indent=2)


def _fmt(v):
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.5e}"


def _order(prev, cur, Np, Nc):
    if prev is None or not (prev > 0 and cur > 0):
        return math.nan
    return math.log(prev / cur) / math.log(Nc / Np)


def mesh_family(N, perturb_rate=None, seed=0):
    """Structured mesh, optionally perturbed with amplitude ``perturb_rate / N``."""
    mesh = generate_structured(N)
    if perturb_rate:
        mesh = perturb(mesh, perturb_rate / N, seed=seed)
    return mesh


def run_convergence(params, Ns, case="exp-kappa-sine", perturb_rate=None, seed=0,
                    vangle_threshold=None, method="bicgstab", rtol=1e-12,
                    surface_degree=4, volume_degree=4, norm_degree=6, log=None):
    """Solve on a family of meshes and tabulate errors with observed orders.

    Parameters
    ----------
    params : SchemeParams
    Ns : sequence of int
        Subdivisions per axis, increasing.
    case : str or ManufacturedCase
    perturb_rate : float, optional
        Relative perturbation; vertices move by at most ``perturb_rate / N``.
    seed : int
    vangle_threshold : float, optional
        Minimum V-angle in degrees each mesh must satisfy. Skipped when None.
    method, rtol : solver settings.
    log : callable, optional
        Receives one progress string per row.

    Returns
    -------
    ConvergenceReport
        Rows that failed carry an ``error`` message; later rows still run.
    """
    if isinstance(case, str):
        case = get_case(case)
    family = "structured" if not perturb_rate else f"perturbed({perturb_rate:g}/N, seed={seed})"
    rep = ConvergenceReport(params.name, case.name, family)
    prev = None
    for N in Ns:
        t0 = time.perf_counter()
        try:
            mesh = mesh_family(N, perturb_rate, seed)
            q = audit(mesh)
            if vangle_threshold is not None:
                passed, off = q.check(vangle_threshold)
                if not passed:
                    raise MeshError(
                        f"{off.size} elements below V-angle {vangle_threshold:g} deg "
                        f"(first: {off[:5].tolist()})"
                    )
            system = assemble(mesh, params, case.kappa_arg, case.f,
                              surface_degree, volume_degree)
            uh, srep = solve(system, method=method, rtol=rtol)
            h1, l2 = error_norms(mesh, uh, case, norm_degree)
        except QFVMError as exc:
            rep.rows.append(ConvergenceRow(N, 1.0 / N, error=str(exc)))
            prev = None
            if log:
                log(f"N={N}: failed: {exc}")
            continue
        row = ConvergenceRow(
            N, mesh.h, h1,
            _order(prev and prev[1], h1, prev and prev[0], N),
            l2,
            _order(prev and prev[2], l2, prev and prev[0], N),
            srep.iterations, time.perf_counter() - t0, q.min_vangle,
        )
        rep.rows.append(row)
        prev = (N, h1, l2)
        if log:
            log(f"N={N}: h1={h1:.4e} l2={l2:.4e} its={srep.iterations} "
                f"t={row.wall_time:.1f}s")
    return rep
