"""Command-line interface.

Exit codes: 0 success, 1 runtime or solver failure, 2 bad arguments or
domain errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time

import numpy as np

from .assembly import assemble, closed_form_A, element_matrix_closed_form
from .convergence import CASES, error_norms, get_case, mesh_family, run_convergence
from .exceptions import GeometryError, MeshError, ParameterError, QFVMError
from .geometry import REGULAR_TET, min_v_angle, tet_geometry
from .mesh import audit, read_mesh, write_mesh
from .scheme import (
    PRESET_VSTAR,
    PRESETS,
    SchemeParams,
    default_lambda,
    lambda_range,
    orthogonality_residuals,
    preset,
    scheme_constants,
    solve_orthogonal,
)
from .solver import solve
from .stability import (
    DEFAULT_PRIMES,
    element_stability,
    lambda_grid,
    lambda_sweep,
)

log = logging.getLogger("qfvm")

#: Default margin (degrees) added to ``v*`` when auditing meshes.
DEFAULT_EPSILON = 0.5
#: Residual magnitude treated as zero when classifying orthogonality.
RESIDUAL_TOL = 1e-12

VSTAR_COLUMNS = ("lambda", "vstar_degrees", "primes", "precision", "wallclock")


class UsageError(QFVMError):
    """Invalid combination of command-line values."""


# --------------------------------------------------------------- helpers


def _int_list(text):
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return vals


def _float_list(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _rtol(text):
    v = _positive_float(text)
    if v >= 1:
        raise argparse.ArgumentTypeError("rtol must lie in (0, 1)")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _scheme_list(text):
    names = [x.strip() for x in text.split(",") if x.strip()]
    for n in names:
        key = n.lower().replace("-", "").replace("_", "")
        if key not in PRESETS:
            raise argparse.ArgumentTypeError(
                f"unknown scheme {n!r}; choose from {', '.join(sorted(PRESETS))}")
    return names


def _params_from(args, lam=None):
    """Scheme parameters from ``--scheme`` or ``--alpha [--beta --gamma]``."""
    lam = getattr(args, "lam", None) if lam is None else lam
    if getattr(args, "alpha", None) is not None:
        if args.beta is None and args.gamma is None:
            b, g = solve_orthogonal(args.alpha)
        elif args.beta is not None and args.gamma is not None:
            b, g = args.beta, args.gamma
        else:
            raise UsageError("give both --beta and --gamma, or neither")
        return SchemeParams(args.alpha, b, g, lam, name=f"alpha={args.alpha:g}")
    return preset(args.scheme or "qfvs1", lam)


def _mesh_from(args):
    if args.perturb is not None and args.perturb < 0:
        raise UsageError("--perturb must be non-negative")
    if args.mesh is not None:
        if args.perturb:
            raise UsageError("--perturb applies to structured meshes only")
        return read_mesh(args.mesh)
    if args.structured < 1:
        raise UsageError("--structured needs N >= 1")
    return mesh_family(args.structured, args.perturb, args.seed)


def _emit(args, text, payload):
    out = json.dumps(payload, indent=2, default=_jsonable) if args.json else text
    sys.stdout.write(out if out.endswith("\n") else out + "\n")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(type(x).__name__)


def _scheme_threshold(params, args):
    vstar = args.vstar if args.vstar is not None else PRESET_VSTAR.get(params.name)
    if vstar is None:
        raise UsageError("no tabulated v* for this scheme; pass --vstar")
    return vstar + args.epsilon


# --------------------------------------------------------------- commands


def cmd_params(args):
    p = _params_from(args)
    c = scheme_constants(p)
    surf, vol = orthogonality_residuals(p.alpha, p.beta, p.gamma)
    lo, hi = lambda_range(p.alpha, p.beta)
    if abs(surf) > RESIDUAL_TOL:
        kind = "non-orthogonal"
    elif abs(vol) > RESIDUAL_TOL:
        kind = "surface-only"
    else:
        kind = "orthogonal"
    data = dict(
        scheme=p.name, alpha=p.alpha, beta=p.beta, gamma=p.gamma, lam=p.lam,
        lam_default=default_lambda(p.alpha, p.beta), lambda_range=[lo, hi],
        t=[c.t1, c.t2, c.t3, c.t4], s=[c.s0, c.s1, c.s2, c.s3], s_star=c.s_star,
        surface_residual=surf, volume_residual=vol, orthogonality=kind,
        vstar_tabulated=PRESET_VSTAR.get(p.name),
    )
    lines = [
        f"scheme        {p.name}",
        f"alpha         {p.alpha:.15g}",
        f"beta          {p.beta:.15g}",
        f"gamma         {p.gamma:.15g}",
        f"lambda        {p.lam:.15g}",
        f"lambda range  ({lo:.6f}, {hi:.6f})",
        "t1..t4        " + " ".join(f"{x:.10e}" for x in data["t"]),
        "s0..s3        " + " ".join(f"{x:.10e}" for x in data["s"]),
        f"s*            {c.s_star:.3e}",
        f"residuals     surface {surf:.3e}  volume {vol:.3e}  [{kind}]",
    ]
    if data["vstar_tabulated"] is not None:
        lines.append(f"v* (tabulated) {data['vstar_tabulated']:g} deg")
    _emit(args, "\n".join(lines), data)
    return 0


def cmd_mesh(args):
    mesh = _mesh_from(args)
    write_mesh(mesh, args.output)
    q = audit(mesh)
    data = dict(path=args.output, n_vertices=mesh.n_vertices, n_tets=mesh.n_tets,
                n_nodes=mesh.n_nodes, h=mesh.h, min_vangle_degrees=q.min_vangle)
    _emit(args, f"wrote {args.output}: {mesh.n_vertices} vertices, {mesh.n_tets} tets, "
                f"min V-angle {q.min_vangle:.6f} deg", data)
    return 0


def cmd_audit(args):
    mesh = _mesh_from(args)
    q = audit(mesh)
    threshold = args.threshold
    if threshold is None and (args.scheme or args.alpha is not None):
        threshold = _scheme_threshold(_params_from(args), args)
    counts, edges = q.histogram(args.bins)
    data = dict(q.as_dict(), n_vertices=mesh.n_vertices, h=mesh.h,
                histogram=dict(edges=edges, counts=counts))
    lines = [
        f"elements          {mesh.n_tets}",
        f"min V-angle       {q.min_vangle:.6f} deg (element {q.worst_element})",
        f"max h/rho         {q.max_shape_ratio:.6f}",
        "V-angle histogram:",
    ]
    lines += [f"  [{a:5.1f}, {b:5.1f})  {n}" for a, b, n in zip(edges[:-1], edges[1:], counts)]
    code = 0
    if threshold is not None:
        passed, off = q.check(threshold)
        data.update(threshold=threshold, passed=passed, offending=off[:100])
        lines.append(f"threshold {threshold:g} deg: {'PASS' if passed else 'FAIL'}")
        if not passed:
            lines.append(f"offending elements ({off.size}): "
                         + " ".join(str(i) for i in off[:50])
                         + (" ..." if off.size > 50 else ""))
            code = 1
    _emit(args, "\n".join(lines), data)
    return code


def cmd_solve(args):
    params = _params_from(args)
    case = get_case(args.case)
    mesh = _mesh_from(args)
    t0 = time.perf_counter()
    system = assemble(mesh, params, case.kappa_arg, case.f,
                      args.surface_degree, args.volume_degree)
    uh, rep = solve(system, method=args.method, rtol=args.rtol)
    h1, l2 = error_norms(mesh, uh, case, args.norm_degree)
    free = np.flatnonzero(~system.dirichlet)
    data = dict(scheme=params.name, case=case.name, n_nodes=mesh.n_nodes,
                n_free=int(free.size), h=mesh.h, h1_error=h1, l2_error=l2,
                solver=rep.as_dict(), wall_time=time.perf_counter() - t0)
    lines = [
        f"nodes {mesh.n_nodes} (free {free.size}), h = {mesh.h:.6g}",
        f"{rep.method}: {rep.iterations} iterations, residual {rep.residual:.3e}",
        f"H1 error {h1:.6e}   L2 error {l2:.6e}",
    ]
    if free.size <= 10:
        data["free_values"] = [dict(node=int(i), x=mesh.node_coords[i], u=uh[i]) for i in free]
        for i in free:
            x = mesh.node_coords[i]
            lines.append(f"u({x[0]:g}, {x[1]:g}, {x[2]:g}) = {uh[i]:.15g}")
    if args.output:
        np.savetxt(args.output, np.column_stack([mesh.node_coords, uh]),
                   header="x y z u", fmt="%.17g")
        lines.append(f"wrote {args.output}")
    _emit(args, "\n".join(lines), data)
    return 0


def cmd_convergence(args):
    if args.perturb is not None and args.perturb < 0:
        raise UsageError("--perturb must be non-negative")
    Ns = sorted(set(args.structured))
    code = 0
    payload = []
    texts = []
    for name in args.scheme:
        params = preset(name)
        threshold = None
        if args.audit:
            threshold = (args.vstar if args.vstar is not None
                         else PRESET_VSTAR[params.name]) + args.epsilon
        rep = run_convergence(params, Ns, args.case, args.perturb, args.seed,
                              vangle_threshold=threshold, method=args.method,
                              rtol=args.rtol, surface_degree=args.surface_degree,
                              volume_degree=args.volume_degree,
                              norm_degree=args.norm_degree, log=log.info)
        text = rep.to_csv()
        if args.outdir:
            os.makedirs(args.outdir, exist_ok=True)
            path = os.path.join(args.outdir, f"{params.name}.csv")
            rep.to_csv(path)
            if args.json:
                with open(path[:-4] + ".json", "w") as fh:
                    fh.write(rep.to_json() + "\n")
        texts.append(f"# {params.name} {rep.case} {rep.family}\n{text}")
        payload.append(json.loads(rep.to_json()))
        for r in rep.rows:
            if not r.ok:
                sys.stderr.write(f"{params.name} N={r.N}: {r.error}\n")
                code = 1
    _emit(args, "".join(texts), payload if len(payload) > 1 else payload[0])
    return code


def cmd_vstar(args):
    params = _params_from(args)
    if args.lambdas is not None:
        lams = args.lambdas
    elif args.lambda_step is not None:
        lams = lambda_grid(params, args.lambda_step, args.lambda_span)
    else:
        lams = [params.lam]
    primes = tuple(args.primes)
    if any(b <= a for a, b in zip(primes, primes[1:])):
        raise UsageError("--primes must be increasing")
    res = lambda_sweep(params, lams, primes, args.precision,
                       warn=lambda m: sys.stderr.write(f"warning: {m}\n"),
                       threads=args.threads)
    if not res:
        raise ParameterError("no lambda value inside the admissible interval")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(VSTAR_COLUMNS)
    for r in res:
        w.writerow([f"{r.lam:.5e}", f"{r.vstar:.5e}", ";".join(map(str, r.primes)),
                    f"{r.precision:.5e}", f"{r.wall_time:.5e}"])
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
    rows = [dict(zip(VSTAR_COLUMNS, (r.lam, r.vstar, list(r.primes), r.precision,
                                     r.wall_time))) for r in res]
    _emit(args, text, dict(scheme=params.name, rows=rows))
    return 0


def _parse_tet(text):
    try:
        pts = np.array([[float(v) for v in p.split(",")] for p in text.split(";")])
    except ValueError:
        raise UsageError("--tet expects 'x,y,z;x,y,z;x,y,z;x,y,z'") from None
    if pts.shape != (4, 3):
        raise UsageError("--tet needs four points with three coordinates each")
    return pts


def cmd_element(args):
    params = _params_from(args)
    pts = REGULAR_TET if args.tet is None else _parse_tet(args.tet)
    g = tet_geometry(pts)
    st = element_stability(g, params)
    lo, hi = lambda_range(params.alpha, params.beta)
    A = element_matrix_closed_form(g, params).matrix
    c = scheme_constants(params)
    verdict = "stable" if st.stable else "not stable"
    data = dict(scheme=params.name, lam=params.lam, lambda_range=[lo, hi],
                volume=g.volume, h=g.h_K, min_vangle_degrees=math.degrees(min_v_angle(g)),
                A=closed_form_A(g.r, c.t), A_K1=A, A_Klam=st.A_Klam, B_bar=st.B_bar,
                N=st.N, lambda_min=st.lambda_min / g.h_K, stable=st.stable,
                stable_reduced=st.stable_reduced, offdiag_residual=st.offdiag_residual)
    fmt = dict(precision=6, suppress_small=True, max_line_width=160)
    parts = [f"scheme {params.name}, lambda = {params.lam:.6g}, "
             f"admissible lambda range ({lo:.6f}, {hi:.6f})",
             f"|K| = {g.volume:.6g}, h_K = {g.h_K:.6g}, "
             f"min V-angle = {data['min_vangle_degrees']:.4f} deg"]
    for label, key in (("A", "A"), ("A_{K,1}", "A_K1"), ("A_{K,lam}", "A_Klam"),
                       ("B_bar", "B_bar"), ("N", "N")):
        if data[key] is not None:
            parts.append(f"{label} =\n{np.array2string(np.asarray(data[key]), **fmt)}")
    parts.append(f"smallest eigenvalue of B_bar/h_K: {data['lambda_min']:.6e}")
    if st.stable_reduced is not None:
        parts.append(f"reduced check (M + N): {'stable' if st.stable_reduced else 'not stable'}")
    parts.append(verdict)
    _emit(args, "\n".join(parts), data)
    return 0


# --------------------------------------------------------------- parser


def _add_scheme(p, default="qfvs1"):
    g = p.add_argument_group("scheme")
    g.add_argument("--scheme", default=None, type=str,
                   help=f"named scheme ({', '.join(sorted(PRESETS))}); default {default}")
    g.add_argument("--alpha", type=float, help="edge parameter; beta and gamma solved if omitted")
    g.add_argument("--beta", type=float)
    g.add_argument("--gamma", type=float)
    g.add_argument("--lambda", dest="lam", type=float,
                   help="transfer parameter (default 1/(1-3*alpha*beta))")


def _add_mesh(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--structured", type=int, metavar="N", help="N^3 cubes, 6 tets each")
    g.add_argument("--mesh", metavar="FILE", help="native or Gmsh v2 ASCII mesh file")
    p.add_argument("--perturb", type=float, default=None, metavar="RATE",
                   help="random vertex displacement of at most RATE/N per coordinate")
    p.add_argument("--seed", type=int, default=0)


def _add_solver(p):
    p.add_argument("--case", default="exp-kappa-sine", choices=sorted(CASES))
    p.add_argument("--method", default="bicgstab", choices=("bicgstab", "lu"))
    p.add_argument("--rtol", type=_rtol, default=1e-12)
    p.add_argument("--surface-degree", type=int, default=4)
    p.add_argument("--volume-degree", type=int, default=4)
    p.add_argument("--norm-degree", type=int, default=6)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON instead of text/CSV")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads (default: all cores; 1 for serial runs)")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="qfvm", description=__doc__.splitlines()[0],
                                 parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", parents=[common], help="dual parameters and constants")
    _add_scheme(p)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("mesh", parents=[common], help="generate and write a mesh")
    _add_mesh(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("audit", parents=[common], help="mesh quality report")
    _add_mesh(p)
    _add_scheme(p)
    p.add_argument("--threshold", type=float, help="V-angle threshold in degrees")
    p.add_argument("--vstar", type=float, help="override the tabulated v* (degrees)")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                   help="margin added to v* (degrees)")
    p.add_argument("--bins", type=int, default=12)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("solve", parents=[common], help="single solve with error norms")
    _add_mesh(p)
    _add_scheme(p)
    _add_solver(p)
    p.add_argument("-o", "--output", help="write nodal values 'x y z u'")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("convergence", parents=[common], help="convergence table")
    p.add_argument("--scheme", type=_scheme_list, default=["qfvs1"],
                   help="comma-separated scheme names")
    p.add_argument("--structured", type=_int_list, required=True, metavar="N,N,...")
    p.add_argument("--perturb", type=float, default=None, metavar="RATE")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--audit", action="store_true",
                   help="require min V-angle >= v* + epsilon on every mesh")
    p.add_argument("--vstar", type=float)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--outdir", help="write <scheme>.csv (and .json with --json)")
    _add_solver(p)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("vstar", parents=[common], help="minimum V-angle threshold search")
    _add_scheme(p)
    p.add_argument("--lambdas", type=_float_list, metavar="L,L,...")
    p.add_argument("--lambda-step", type=_positive_float)
    p.add_argument("--lambda-span", type=_positive_float, default=None,
                   help="limit the grid to |lam - lam0| <= SPAN")
    p.add_argument("--primes", type=_int_list, default=list(DEFAULT_PRIMES))
    p.add_argument("--precision", type=_positive_float, default=0.1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_vstar)

    p = sub.add_parser("element", parents=[common], help="element matrices and stability")
    _add_scheme(p)
    p.add_argument("--tet", help="'x,y,z;x,y,z;x,y,z;x,y,z' (default: regular tet)")
    p.set_defaults(func=cmd_element)
    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    if args.threads < 1:
        sys.stderr.write("qfvm: error: --threads must be >= 1\n")
        return 2
    try:
        return args.func(args)
    except (ParameterError, GeometryError, MeshError, UsageError) as exc:
        sys.stderr.write(f"qfvm: error: {exc}\n")
        return 2
    except QFVMError as exc:
        sys.stderr.write(f"qfvm: failed: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
