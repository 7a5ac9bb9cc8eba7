"""Element-local dual partition of a tetrahedron into ten control-volume cells.

Every dual point has fixed barycentric coordinates that depend only on
``(alpha, beta, gamma)``. The combinatorics is therefore built once per
parameter set as a :class:`ReferenceDual` and mapped affinely onto each
element.

Canonical point list (the index is the canonical point ID)::

    P[i]        4 vertices
    M[jk]       6 edge midpoints, in local node order M23, M13, M12, M14, M24, M34
    A[i][j]    12 edge points, fraction alpha from P_i towards P_j
    B[i][jk]   12 face points, fraction beta from P_i towards M_jk
    Qg[i]       4 interior points, fraction gamma from P_i towards F_i
    F[l]        4 face barycenters (F_l is the barycenter of the face opposite P_l)
    Qc          1 centroid

Internal faces separate pairs of cells:

* vertex/midpoint: the surface ``A[i][j], B[i][jk], Qg[i], B[i][jl]``
  between the cells of ``P_i`` and ``M_ij``. It is generally not planar and
  contains the segment ``A[i][j]-Qg[i]``, so it is the union of the two
  triangles sharing that segment.
* midpoint/midpoint: the planar quad ``B[i][jk], F_l, Qc, Qg[i]`` between
  the cells of ``M_ij`` and ``M_ik`` (``l`` is the fourth vertex).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import DualConstructionError
from .geometry import REGULAR_TET, TetGeometry, tet_geometry
from .quadrature import tet_rule, triangle_rule
from .scheme import MIDPOINT_EDGES, SchemeParams

__all__ = [
    "ReferenceDual",
    "DualPoints",
    "DualComplex",
    "reference_dual",
    "build_dual",
    "face_partition_2d",
    "internal_surface_quadrature",
    "point_labels",
    "export_obj",
    "NODE_LABELS",
]

NODE_LABELS = ("P1", "P2", "P3", "P4", "M23", "M13", "M12", "M14", "M24", "M34")

_MID_NODE = {}
for _m, (_j, _k) in enumerate(MIDPOINT_EDGES):
    _MID_NODE[(_j, _k)] = _MID_NODE[(_k, _j)] = 4 + _m


def midpoint_node(j, k):
    """Local node index (4..9) of the midpoint of edge ``{j, k}``."""
    return _MID_NODE[(j, k)]


def _point_table():
    """Canonical ordering of all dual points as ``(kind, key)`` tuples."""
    ids = []
    ids += [("P", (i,)) for i in range(4)]
    ids += [("M", e) for e in MIDPOINT_EDGES]
    ids += [("A", (i, j)) for i in range(4) for j in range(4) if j != i]
    for i in range(4):
        others = [v for v in range(4) if v != i]
        for a in range(3):
            for b in range(a + 1, 3):
                ids.append(("B", (i, others[a], others[b])))
    ids += [("Qg", (i,)) for i in range(4)]
    ids += [("F", (l,)) for l in range(4)]
    ids.append(("Qc", ()))
    return ids


_POINTS = _point_table()
_PID = {p: n for n, p in enumerate(_POINTS)}


def _pid(kind, *key):
    if kind == "B":
        i, j, k = key
        key = (i, min(j, k), max(j, k))
    if kind == "M":
        key = tuple(sorted(key))
        return _MID_NODE[key]
    return _PID[(kind, tuple(key))]


def point_labels():
    """Human-readable labels of the canonical points (1-based indices)."""
    out = []
    for kind, key in _POINTS:
        out.append(kind + "".join(str(k + 1) for k in key))
    return out


def _bary_points(alpha, beta, gamma):
    E = np.eye(4)
    pts = np.zeros((len(_POINTS), 4))
    for n, (kind, key) in enumerate(_POINTS):
        if kind == "P":
            pts[n] = E[key[0]]
        elif kind == "M":
            pts[n] = 0.5 * (E[key[0]] + E[key[1]])
        elif kind == "A":
            i, j = key
            pts[n] = (1 - alpha) * E[i] + alpha * E[j]
        elif kind == "B":
            i, j, k = key
            pts[n] = (1 - beta) * E[i] + beta * 0.5 * (E[j] + E[k])
        elif kind == "Qg":
            i = key[0]
            F = (np.ones(4) - E[i]) / 3.0
            pts[n] = (1 - gamma) * E[i] + gamma * F
        elif kind == "F":
            pts[n] = (np.ones(4) - E[key[0]]) / 3.0
        else:
            pts[n] = np.full(4, 0.25)
    return pts


def _tri_area_vec(X):
    """Area vectors of triangles with vertex coordinates ``X[..., 3, 3]``."""
    return 0.5 * np.cross(X[..., 1, :] - X[..., 0, :], X[..., 2, :] - X[..., 0, :])


@dataclass(frozen=True)
class ReferenceDual:
    """Dual partition of one element in barycentric coordinates.

    Attributes
    ----------
    alpha, beta, gamma : float
    points : ndarray, shape (43, 4)
        Barycentric coordinates of all canonical points.
    internal_faces : tuple
        24 entries ``(polygon, left, right)``; ``polygon`` lists point IDs
        oriented so that the normal points from cell ``left`` into ``right``.
    internal_tris : ndarray, shape (48, 3) of int
        Triangulation of the internal faces (point IDs), same orientation.
    tri_left, tri_right : ndarray, shape (48,)
    tri_face : ndarray, shape (48,)
        Internal face each triangle belongs to.
    boundary_patches : tuple
        24 entries ``(polygon, owner, host_face)``, oriented outward.
    boundary_tris, boundary_owner, boundary_face : ndarray
    cells : tuple of 10 lists
        For each local node, its boundary as ``(kind, index, sign)`` items.
    cone_tets : ndarray, shape (nc, 4) of int
        Point IDs of the tetrahedra filling each cell (apex first).
    cone_owner : ndarray, shape (nc,)
    cone_volume : ndarray, shape (nc,)
        Volumes as fractions of ``|K|``.
    """

    alpha: float
    beta: float
    gamma: float
    points: np.ndarray
    internal_faces: tuple
    internal_tris: np.ndarray
    tri_left: np.ndarray
    tri_right: np.ndarray
    tri_face: np.ndarray
    boundary_patches: tuple
    boundary_tris: np.ndarray
    boundary_owner: np.ndarray
    boundary_face: np.ndarray
    cells: tuple
    cone_tets: np.ndarray
    cone_owner: np.ndarray
    cone_volume: np.ndarray

    @property
    def cell_volume_fractions(self):
        """Volume of each of the ten cells divided by ``|K|``."""
        return np.bincount(self.cone_owner, self.cone_volume, minlength=10)

    def physical_points(self, X):
        """Canonical points mapped onto the element with vertices ``X``."""
        return self.points @ np.asarray(X, dtype=float)


def _fan(poly, pivot=None):
    """Fan triangulation of a polygon from ``pivot`` (default: smallest ID)."""
    poly = list(poly)
    if pivot is None:
        pivot = min(poly)
    s = poly.index(pivot)
    poly = poly[s:] + poly[:s]
    return [(poly[0], poly[t], poly[t + 1]) for t in range(1, len(poly) - 1)]


@lru_cache(maxsize=64)
def _reference_dual(alpha, beta, gamma):
    pts = _bary_points(alpha, beta, gamma)
    Xr = pts @ REGULAR_TET  # positively oriented embedding for orientation

    def orient(poly, direction):
        n = sum(_tri_area_vec(Xr[list(t)]) for t in _fan(poly))
        return list(poly) if n @ direction > 0 else list(reversed(poly))

    faces, tris = [], []
    # vertex/midpoint interfaces: two triangles sharing A[i][j] - Qg[i]
    for i in range(4):
        for j in range(4):
            if j == i:
                continue
            k, l = [v for v in range(4) if v not in (i, j)]
            a, q = _pid("A", i, j), _pid("Qg", i)
            b1, b2 = _pid("B", i, j, k), _pid("B", i, j, l)
            left, right = i, midpoint_node(i, j)
            poly = orient([a, b1, q, b2], Xr[right] - Xr[left])
            s = poly.index(a)
            poly = poly[s:] + poly[:s]
            faces.append((tuple(poly), left, right))
            f = len(faces) - 1
            tris += [((poly[0], poly[1], poly[2]), left, right, f),
                     ((poly[0], poly[2], poly[3]), left, right, f)]
    # midpoint/midpoint interfaces (planar quads)
    for l in range(4):
        face_v = [v for v in range(4) if v != l]
        for i in face_v:
            j, k = [v for v in face_v if v != i]
            poly0 = [_pid("B", i, j, k), _pid("F", l), _pid("Qc"), _pid("Qg", i)]
            left, right = midpoint_node(i, j), midpoint_node(i, k)
            poly = orient(poly0, Xr[right] - Xr[left])
            faces.append((tuple(poly), left, right))
            f = len(faces) - 1
            tris += [(t, left, right, f) for t in _fan(poly)]

    # boundary patches on each face T_l
    patches, btris = [], []
    for l in range(4):
        face_v = [v for v in range(4) if v != l]
        outward = Xr[face_v].mean(axis=0) - Xr[l]
        for i in face_v:
            j, k = [v for v in face_v if v != i]
            quad = [i, _pid("A", i, j), _pid("B", i, j, k), _pid("A", i, k)]
            patches.append((tuple(orient(quad, outward)), i, l))
        for i in face_v:
            j, k = [v for v in face_v if v != i]
            pent = [_pid("A", j, k), _pid("A", k, j), _pid("B", k, i, j),
                    _pid("F", l), _pid("B", j, i, k)]
            patches.append((tuple(orient(pent, outward)), midpoint_node(j, k), l))
    for p, (poly, owner, host) in enumerate(patches):
        btris += [(t, owner, host) for t in _fan(poly)]

    cells = [[] for _ in range(10)]
    for f, (_, left, right) in enumerate(faces):
        cells[left].append(("internal", f, +1))
        cells[right].append(("internal", f, -1))
    for p, (_, owner, _) in enumerate(patches):
        cells[owner].append(("boundary", p, +1))

    # cone every internal triangle from the node of each adjacent cell
    cone, owner = [], []
    for (a, b, c), left, right, _ in tris:
        cone.append((left, a, b, c))
        owner.append(left)
        cone.append((right, a, c, b))
        owner.append(right)
    cone = np.array(cone)
    owner = np.array(owner)
    D = Xr[cone[:, 1:]] - Xr[cone[:, :1]]
    vol_ref = np.linalg.det(D) / 6.0
    K_ref = abs(np.linalg.det(REGULAR_TET[1:] - REGULAR_TET[0])) / 6.0
    frac = vol_ref / K_ref
    if np.any(frac <= 0.0):
        bad = sorted({NODE_LABELS[o] for o in owner[frac <= 0.0]})
        raise DualConstructionError(
            f"cells {bad} are not star-shaped with respect to their nodes"
        )

    tri_arr = np.array([t for t, *_ in tris])
    for arr in (pts, tri_arr, cone, owner, frac):
        arr.setflags(write=False)
    return ReferenceDual(
        alpha=alpha, beta=beta, gamma=gamma, points=pts,
        internal_faces=tuple(faces), internal_tris=tri_arr,
        tri_left=np.array([t[1] for t in tris]),
        tri_right=np.array([t[2] for t in tris]),
        tri_face=np.array([t[3] for t in tris]),
        boundary_patches=tuple(patches),
        boundary_tris=np.array([t for t, *_ in btris]),
        boundary_owner=np.array([t[1] for t in btris]),
        boundary_face=np.array([t[2] for t in btris]),
        cells=tuple(tuple(c) for c in cells),
        cone_tets=cone, cone_owner=owner, cone_volume=frac,
    )


def reference_dual(params):
    """Cached :class:`ReferenceDual` for the dual parameters of ``params``.

    ``params`` may be a :class:`SchemeParams` or an ``(alpha, beta, gamma)``
    triple; ``lam`` plays no role in the dual geometry.
    """
    if isinstance(params, SchemeParams):
        a, b, g = params.alpha, params.beta, params.gamma
    else:
        a, b, g = (float(x) for x in params)
        SchemeParams(a, b, g, 1.0)  # range validation
    return _reference_dual(a, b, g)


@dataclass(frozen=True)
class DualPoints:
    """Physical coordinates of the dual points of one element."""

    A: np.ndarray   # (4, 4, 3); A[i][j], diagonal unused (NaN)
    B: dict         # (i, j, k) with j < k -> point
    Qg: np.ndarray  # (4, 3)
    F: np.ndarray   # (4, 3)
    Qc: np.ndarray  # (3,)


@dataclass(frozen=True)
class DualComplex:
    """Dual partition of one physical element.

    Attributes
    ----------
    geom : TetGeometry
    ref : ReferenceDual
    coords : ndarray, shape (43, 3)
        Physical coordinates of the canonical points.
    points : DualPoints
    orientation : int
        ``+1`` if the element is positively oriented, else ``-1``; internal
        face normals are multiplied by it so they always point left to right.
    """

    geom: TetGeometry
    ref: ReferenceDual
    coords: np.ndarray
    points: DualPoints
    orientation: int

    @property
    def internal_faces(self):
        return self.ref.internal_faces

    @property
    def boundary_patches(self):
        return self.ref.boundary_patches

    @property
    def cells(self):
        return self.ref.cells

    def internal_triangles(self):
        """Vertex coordinates ``(48, 3, 3)`` and area vectors ``(48, 3)``."""
        X = self.coords[self.ref.internal_tris]
        return X, self.orientation * _tri_area_vec(X)

    def boundary_triangles(self):
        X = self.coords[self.ref.boundary_tris]
        return X, self.orientation * _tri_area_vec(X)

    def cell_volumes(self):
        """Volumes of the ten cells (length^3)."""
        return self.ref.cell_volume_fractions * self.geom.volume

    def cell_area_vector_sums(self):
        """Sum of outward area vectors over each cell's closed boundary."""
        out = np.zeros((10, 3))
        _, n_int = self.internal_triangles()
        np.add.at(out, self.ref.tri_left, n_int)
        np.add.at(out, self.ref.tri_right, -n_int)
        _, n_bnd = self.boundary_triangles()
        np.add.at(out, self.ref.boundary_owner, n_bnd)
        return out

    def cone_tetrahedra(self):
        """Physical vertex coordinates ``(nc, 4, 3)`` and owner cells."""
        return self.coords[self.ref.cone_tets], self.ref.cone_owner

    def face_polygon(self, f):
        """Physical vertices of internal face ``f``."""
        return self.coords[list(self.ref.internal_faces[f][0])]


def build_dual(geom, params):
    """Dual complex of one element.

    Parameters
    ----------
    geom : TetGeometry or array_like, shape (4, 3)
    params : SchemeParams or (alpha, beta, gamma)

    Returns
    -------
    DualComplex

    Raises
    ------
    DualConstructionError
        If some cell is not star-shaped with respect to its node.
    """
    if not isinstance(geom, TetGeometry):
        geom = tet_geometry(geom)
    ref = reference_dual(params)
    X = np.asarray(geom.points)
    coords = ref.points @ X
    A = np.full((4, 4, 3), np.nan)
    Bd = {}
    for n, (kind, key) in enumerate(_POINTS):
        if kind == "A":
            A[key] = coords[n]
        elif kind == "B":
            Bd[key] = coords[n]
    pts = DualPoints(
        A=A, B=Bd,
        Qg=coords[[_pid("Qg", i) for i in range(4)]],
        F=coords[[_pid("F", l) for l in range(4)]],
        Qc=coords[_pid("Qc")],
    )
    d = X[1:] - X[0]
    orientation = 1 if np.linalg.det(d) > 0 else -1
    return DualComplex(geom=geom, ref=ref, coords=coords, points=pts,
                       orientation=orientation)


def face_partition_2d(face_index, params):
    """The six dual regions on face ``T_l`` in barycentric coordinates.

    Parameters
    ----------
    face_index : int
        0-based index ``l`` of the face opposite vertex ``P_{l+1}``.
    params : SchemeParams or (alpha, beta, gamma)

    Returns
    -------
    list of (owner_node, ndarray (n, 4))
        Three vertex quads followed by three midpoint pentagons, each a
        polygon given by barycentric vertex coordinates (entry ``l`` is zero).
    """
    if not 0 <= face_index < 4:
        raise IndexError("face index must be in 0..3")
    ref = reference_dual(params)
    return [(owner, ref.points[list(poly)])
            for poly, owner, host in ref.boundary_patches if host == face_index]


def internal_surface_quadrature(complex_, degree=4):
    """Quadrature on the triangulated internal faces of a dual complex.

    Parameters
    ----------
    complex_ : DualComplex
    degree : int
        Triangle rule degree, 1..7.

    Returns
    -------
    points : ndarray, shape (48, q, 3)
        Physical quadrature points per internal triangle.
    weights : ndarray, shape (48, q)
        Weights; each row sums to the triangle's area.
    normals : ndarray, shape (48, 3)
        Unit normals pointing from ``tri_left`` to ``tri_right``.
    """
    bq, wq = triangle_rule(degree)
    X, n = complex_.internal_triangles()
    area = np.linalg.norm(n, axis=1)
    pts = np.einsum("qa,tai->tqi", bq, X)
    return pts, area[:, None] * wq[None, :], n / area[:, None]


def export_obj(complex_, path=None):
    """OBJ-style listing of a dual complex (points and polygons).

    Internal faces are written as ``f`` records preceded by a comment with
    their ``left right`` node labels, boundary patches likewise with their
    owner and host face. Returns the text and optionally writes it.
    """
    labels = point_labels()
    lines = ["# dual complex: canonical points"]
    for lab, p in zip(labels, complex_.coords):
        lines.append(f"v {p[0]:.17g} {p[1]:.17g} {p[2]:.17g}  # {lab}")
    for poly, left, right in complex_.internal_faces:
        lines.append(f"# internal {NODE_LABELS[left]} {NODE_LABELS[right]}")
        lines.append("f " + " ".join(str(v + 1) for v in poly))
    for poly, owner, host in complex_.boundary_patches:
        lines.append(f"# boundary {NODE_LABELS[owner]} T{host + 1}")
        lines.append("f " + " ".join(str(v + 1) for v in poly))
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
