import numpy as np

from qfvm.dual import face_partition_2d, reference_dual
from qfvm.geometry import geometry_batch
from qfvm.quadrature import tet_rule, triangle_rule
from qfvm.scheme import MIDPOINT_EDGES

NODES = np.zeros((10, 4))
NODES[:4] = np.eye(4)
for _m, (_j, _k) in enumerate(MIDPOINT_EDGES):
    NODES[4 + _m, [_j, _k]] = 0.5


def random_tets(rng, n, max_ratio=12.0):
    """``n`` random tetrahedra with ``h/rho`` below ``max_ratio``."""
    out = []
    while len(out) < n:
        X = rng.uniform(-1.0, 1.0, size=(4 * n, 4, 3))
        g = geometry_batch(X)
        ok = g["h_K"] / g["rho_K"] < max_ratio
        out.extend(X[ok])
    return np.array(out[:n])


def signed_area(poly, face):
    """Signed area of a barycentric polygon relative to its reference face."""
    keep = [i for i in range(4) if i != face][:2]
    x, y = poly[:, keep[0]], poly[:, keep[1]]
    return np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))


def face_moment(params, face, g, v):
    """Sum over the dual pieces of a face of the integral of g (v - v(owner)).

    ``g`` and ``v`` are linear functions given by their vertex values.
    """
    bq, wq = triangle_rule(2)
    tot = 0.0
    for owner, poly in face_partition_2d(face, params):
        sgn = np.sign(signed_area(poly, face))
        for i in range(1, len(poly) - 1):
            T = poly[[0, i, i + 1]]
            area = sgn * signed_area(T, face)  # fans of non-convex cells
            L = bq @ T
            tot += area * np.sum(wq * (L @ g) * (L @ v - NODES[owner] @ v))
    return tot


def volume_moment(params, g, v):
    """Volume counterpart of :func:`face_moment` over the dual cones."""
    ref = reference_dual(params)
    tb, tw = tet_rule(2)
    tot = 0.0
    for c, own in enumerate(ref.cone_owner):
        L = tb @ ref.points[ref.cone_tets[c]]
        tot += ref.cone_volume[c] * np.sum(tw * (L @ g) * (L @ v - NODES[own] @ v))
    return tot
