"""Per-tetrahedron geometric kernels.

Local conventions shared by the whole package:

* Vertices are ``P1..P4`` (0-based ``0..3`` in code).
* Edges follow the order ``(12, 13, 14, 23, 24, 34)``; see :data:`EDGES`.
* Face ``T_i`` is the face opposite vertex ``P_i``.
* The twelve plane angles are stored vertex-major, three per vertex, in the
  order of :data:`PLANE_ANGLES`. ``theta[3*i + m]`` is ``theta_{m+1,P_{i+1}}``.

Most kernels come in two flavours: a scalar API working on a single
:class:`Tet`, and a batched ``*_batch`` variant operating on stacked arrays
whose leading axis enumerates elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import GeometryError

__all__ = [
    "EDGES",
    "OPPOSITE_EDGE",
    "PLANE_ANGLES",
    "THETA5_INDEX",
    "Tet",
    "TetGeometry",
    "Theta5",
    "DEGENERACY_TOL",
    "tet_geometry",
    "geometry_batch",
    "v_angle",
    "min_v_angle",
    "v_angles_from_plane",
    "theta5",
    "reconstruct_from_theta5",
    "reconstruct_batch",
    "r_over_circumradius",
    "r_over_circumradius_batch",
    "tet_from_theta5",
    "REGULAR_TET",
]

#: Edge ``e`` joins vertices ``EDGES[e]``; order 12, 13, 14, 23, 24, 34.
EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

#: ``OPPOSITE_EDGE[e]`` is the index of the edge disjoint from edge ``e``.
OPPOSITE_EDGE = (5, 4, 3, 2, 1, 0)

#: Plane angle ``k`` is the angle at ``PLANE_ANGLES[k][0]`` between the rays
#: towards ``PLANE_ANGLES[k][1]`` and ``PLANE_ANGLES[k][2]``.
PLANE_ANGLES = (
    (0, 1, 3), (0, 1, 2), (0, 2, 3),
    (1, 0, 3), (1, 0, 2), (1, 2, 3),
    (2, 0, 3), (2, 0, 1), (2, 1, 3),
    (3, 0, 1), (3, 0, 2), (3, 1, 2),
)

#: Positions of the five Theta5 angles inside the 12-vector of plane angles.
THETA5_INDEX = (0, 1, 3, 4, 5)

#: Relative volume threshold below which a tetrahedron counts as degenerate.
DEGENERACY_TOL = 1e-14

#: Clamp window for arccos arguments in the reconstruction chain.
ACOS_TOL = 1e-12

_EDGE_INDEX = {e: k for k, e in enumerate(EDGES)}
_EDGE_INDEX.update({(b, a): k for (a, b), k in list(_EDGE_INDEX.items())})


def _edge(a, b):
    return _EDGE_INDEX[(a, b)]


def _plane_index(vertex, a, b):
    for k, (v, p, q) in enumerate(PLANE_ANGLES):
        if v == vertex and {p, q} == {a, b}:
            return k
    raise KeyError((vertex, a, b))


# For each edge (j, k): the two remaining vertices a, b and the plane-angle
# indices of the angles subtending the edge at a and at b.
_EDGE_SUBTENDED = []
for _j, _k in EDGES:
    _a, _b = [v for v in range(4) if v not in (_j, _k)]
    _EDGE_SUBTENDED.append((_plane_index(_a, _j, _k), _plane_index(_b, _j, _k)))
_EDGE_SUBTENDED = np.array(_EDGE_SUBTENDED)


@dataclass(frozen=True)
class Tet:
    """A tetrahedron given by its four vertices.

    Parameters
    ----------
    points : array_like, shape (4, 3)
        Coordinates of ``P1..P4``.
    tol : float, optional
        Degeneracy threshold relative to ``h_K**3``.

    Raises
    ------
    GeometryError
        If the vertices are (numerically) coplanar.
    """

    points: np.ndarray
    tol: float = DEGENERACY_TOL

    def __post_init__(self):
        p = np.array(self.points, dtype=float)
        if p.shape != (4, 3) or not np.all(np.isfinite(p)):
            raise GeometryError("a tetrahedron needs four finite 3-D points")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)
        vol = abs(signed_volume(p))
        h = max(np.linalg.norm(p[j] - p[k]) for j, k in EDGES)
        # compare on the unit scale so tiny or huge elements do not underflow
        if h == 0.0 or not abs(signed_volume((p - p[0]) / h)) >= self.tol:
            raise GeometryError(
                f"degenerate tetrahedron: |K| = {vol:.3e}, h_K = {h:.3e}"
            )

    @property
    def p1(self):
        return self.points[0]

    @property
    def p2(self):
        return self.points[1]

    @property
    def p3(self):
        return self.points[2]

    @property
    def p4(self):
        return self.points[3]

    @property
    def orientation(self):
        """``+1`` if ``det[P2-P1, P3-P1, P4-P1] > 0``, else ``-1``."""
        return 1 if signed_volume(self.points) > 0 else -1

    def scaled(self, s):
        return Tet(self.points * s, self.tol)


def signed_volume(points):
    """Signed volume ``det[P2-P1, P3-P1, P4-P1] / 6`` (batched on axis 0)."""
    p = np.asarray(points, dtype=float)
    d = p[..., 1:, :] - p[..., :1, :]
    with np.errstate(divide="ignore", invalid="ignore"):  # flat tets are caught by callers
        return np.linalg.det(d) / 6.0


@dataclass(frozen=True)
class TetGeometry:
    """Geometric quantities of one tetrahedron.

    Attributes
    ----------
    points : ndarray, shape (4, 3)
    volume : float
        ``|K|``.
    grad_L : ndarray, shape (4, 3)
        Gradients of the volume coordinates.
    r : ndarray, shape (6,)
        Cotangent weights ``r_jk = |P_jP_k| cot(theta_jk)`` in edge order.
    R : ndarray, shape (4,)
        ``R_i``, the sum of the three ``r_jk`` on edges not touching ``P_i``.
    T_areas : ndarray, shape (4,)
        Face areas, ``T_areas[i]`` for the face opposite ``P_i``.
    normals : ndarray, shape (4, 3)
        Outward unit normals of the faces.
    plane_angles : ndarray, shape (12,)
    dihedral : ndarray, shape (6,)
    edge_lengths : ndarray, shape (6,)
    h_K, rho_K, R_K : float
        Longest edge, inscribed-sphere diameter and circumradius.
    """

    points: np.ndarray
    volume: float
    grad_L: np.ndarray
    r: np.ndarray
    R: np.ndarray
    T_areas: np.ndarray
    normals: np.ndarray
    plane_angles: np.ndarray
    dihedral: np.ndarray
    edge_lengths: np.ndarray
    h_K: float
    rho_K: float
    R_K: float
    circumcenter: np.ndarray = field(repr=False)

    @property
    def shape_ratio(self):
        """``h_K / rho_K``."""
        return self.h_K / self.rho_K

    @property
    def centroid(self):
        return self.points.mean(axis=0)

    def theta5(self):
        return theta5(self)


def _norm(v):
    return np.sqrt(np.einsum("...i,...i->...", v, v))


def geometry_batch(points):
    """Vectorised geometry of a stack of tetrahedra.

    Parameters
    ----------
    points : array_like, shape (E, 4, 3)

    Returns
    -------
    dict of ndarray
        Keys match the :class:`TetGeometry` field names, each with a leading
        element axis.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 3 or X.shape[1:] != (4, 3):
        raise GeometryError("expected an array of shape (E, 4, 3)")
    svol = signed_volume(X)
    vol = np.abs(svol)

    # outward area vectors of the faces opposite each vertex
    area_vec = np.empty_like(X)
    for i in range(4):
        a, b, c = [v for v in range(4) if v != i]
        n = 0.5 * np.cross(X[:, b] - X[:, a], X[:, c] - X[:, a])
        side = np.einsum("ei,ei->e", n, X[:, i] - X[:, a])
        area_vec[:, i] = np.where((side > 0)[:, None], -n, n)
    areas = _norm(area_vec)
    normals = area_vec / areas[..., None]
    grad_L = -area_vec / (3.0 * vol)[:, None, None]

    edge_vec = np.stack([X[:, k] - X[:, j] for j, k in EDGES], axis=1)
    lengths = _norm(edge_vec)

    # dihedral at edge jk is between the faces opposite the other two vertices
    cos_d = np.empty(lengths.shape)
    sin_d = np.empty(lengths.shape)
    for e, (j, k) in enumerate(EDGES):
        a, b = [v for v in range(4) if v not in (j, k)]
        na, nb = normals[:, a], normals[:, b]
        cos_d[:, e] = -np.einsum("ei,ei->e", na, nb)
        sin_d[:, e] = _norm(np.cross(na, nb))
    dihedral = np.arctan2(sin_d, cos_d)
    r = lengths * cos_d / sin_d
    R = np.stack([r[:, [OPPOSITE_EDGE[_edge(a, b)] for a, b in _other_pairs(i)]]
                  .sum(axis=1) for i in range(4)], axis=1)

    plane = np.empty((X.shape[0], 12))
    for m, (v, a, b) in enumerate(PLANE_ANGLES):
        u = X[:, a] - X[:, v]
        w = X[:, b] - X[:, v]
        plane[:, m] = np.arctan2(_norm(np.cross(u, w)),
                                 np.einsum("ei,ei->e", u, w))

    # circumsphere: 2 (P_i - P_1) . c = |P_i|^2 - |P_1|^2 with P_1 moved to 0
    D = X[:, 1:] - X[:, :1]
    rhs = 0.5 * np.einsum("eki,eki->ek", D, D)
    cc = np.linalg.solve(D, rhs[..., None])[..., 0]
    R_K = _norm(cc)
    center = cc + X[:, 0]

    rho = 6.0 * vol / areas.sum(axis=1)
    return dict(
        points=X, volume=vol, signed_volume=svol, grad_L=grad_L, r=r, R=R,
        T_areas=areas, normals=normals, plane_angles=plane,
        dihedral=dihedral, edge_lengths=lengths, h_K=lengths.max(axis=1),
        rho_K=rho, R_K=R_K, circumcenter=center,
    )


def _other_pairs(i):
    """The three edges (as vertex pairs) that contain vertex ``i``."""
    return [(i, v) for v in range(4) if v != i]


def tet_geometry(tet):
    """All geometric quantities of a single tetrahedron.

    Parameters
    ----------
    tet : Tet or array_like, shape (4, 3)

    Returns
    -------
    TetGeometry

    Raises
    ------
    GeometryError
        For coplanar input.

    Examples
    --------
    >>> g = tet_geometry([[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]])
    >>> round(g.volume * 6, 12)
    1.0
    """
    if not isinstance(tet, Tet):
        tet = Tet(tet)
    d = geometry_batch(tet.points[None])
    kw = {k: (v[0] if np.ndim(v[0]) else float(v[0])) for k, v in d.items()
          if k != "signed_volume"}
    for v in kw.values():
        if isinstance(v, np.ndarray):
            v.setflags(write=False)
    return TetGeometry(**kw)


def v_angles_from_plane(plane):
    """V-angles of the four vertices from the 12 plane angles (batched).

    ``theta_P = theta_1 + theta_2 + theta_3 - 2 max(theta_1, theta_2, theta_3)``,
    i.e. the sum of the two smaller angles minus the largest.
    """
    p = np.asarray(plane, dtype=float)
    p = p.reshape(p.shape[:-1] + (4, 3))
    return p.sum(axis=-1) - 2.0 * p.max(axis=-1)


def v_angle(geom, vertex_index):
    """V-angle (radians) at vertex ``vertex_index`` (0-based)."""
    if not 0 <= vertex_index < 4:
        raise IndexError("vertex index must be in 0..3")
    return float(v_angles_from_plane(geom.plane_angles)[vertex_index])


def min_v_angle(geom):
    """Minimum V-angle ``theta_K`` (radians) of a tetrahedron."""
    return float(v_angles_from_plane(geom.plane_angles).min())


@dataclass(frozen=True)
class Theta5:
    """Five plane angles fixing a tetrahedron up to similarity (radians).

    Order: ``(theta_{1,P1}, theta_{2,P1}, theta_{1,P2}, theta_{2,P2},
    theta_{3,P2})``, i.e. ``angle P2P1P4, angle P2P1P3, angle P1P2P4,
    angle P1P2P3, angle P3P2P4``.
    """

    angles: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in np.asarray(self.angles, dtype=float).ravel())
        if len(a) != 5:
            raise GeometryError("Theta5 needs exactly five angles")
        if not all(0.0 < x < np.pi for x in a):
            raise GeometryError("Theta5 angles must lie in (0, pi)")
        object.__setattr__(self, "angles", a)

    @classmethod
    def from_degrees(cls, *deg):
        if len(deg) == 1:
            deg = deg[0]
        return cls(np.radians(np.asarray(deg, dtype=float)))

    @property
    def degrees(self):
        return np.degrees(self.angles)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.angles, dtype=dtype)


def theta5(geom):
    """The :class:`Theta5` of a tetrahedron."""
    return Theta5(np.asarray(geom.plane_angles)[list(THETA5_INDEX)])


def _acos(x, ok):
    """Arccos with clamping inside ``ACOS_TOL``; flags larger violations."""
    bad = np.abs(x) > 1.0 + ACOS_TOL
    ok &= ~bad
    return np.arccos(np.clip(x, -1.0, 1.0)), ok


def _face_to_dihedral(opp, adj1, adj2):
    """Dihedral along an edge from the three plane angles at one of its ends.

    ``adj1`` and ``adj2`` are the face angles at the vertex that contain the
    edge, ``opp`` the third one (spherical law of cosines).
    """
    return (np.cos(opp) - np.cos(adj1) * np.cos(adj2)) / (np.sin(adj1) * np.sin(adj2))


def reconstruct_batch(t5):
    """Complete angle set from Theta5 for many tetrahedra at once.

    Parameters
    ----------
    t5 : array_like, shape (..., 5)
        Angles in radians.

    Returns
    -------
    plane : ndarray, shape (..., 12)
    dihedral : ndarray, shape (..., 6)
    feasible : ndarray of bool, shape (...)
        False where ``t5`` does not describe a real tetrahedron; the
        corresponding angle entries are meaningless.
    """
    with np.errstate(invalid="ignore", divide="ignore"):
        return _reconstruct(np.asarray(t5, dtype=float))


def _reconstruct(t):
    a1P1, a2P1, a1P2, a2P2, a3P2 = np.moveaxis(t, -1, 0)
    ok = np.all((t > 0) & (t < np.pi), axis=-1)

    # triangle angle sums in faces P1P2P4 and P1P2P3
    a1P4 = np.pi - a1P1 - a1P2
    a2P3 = np.pi - a2P1 - a2P2
    ok &= (a1P4 > 0) & (a2P3 > 0)

    # the three face angles at P2 give the dihedrals at edges 12, 24, 23
    d12, ok = _acos(_face_to_dihedral(a3P2, a1P2, a2P2), ok)
    d24, ok = _acos(_face_to_dihedral(a2P2, a1P2, a3P2), ok)
    d23, ok = _acos(_face_to_dihedral(a1P2, a2P2, a3P2), ok)

    # third face angle at P1 from the dihedral at edge 12
    a3P1, ok = _acos(np.cos(d12) * np.sin(a1P1) * np.sin(a2P1)
                     + np.cos(a1P1) * np.cos(a2P1), ok)
    d14, ok = _acos(_face_to_dihedral(a2P1, a1P1, a3P1), ok)
    d13, ok = _acos(_face_to_dihedral(a1P1, a2P1, a3P1), ok)

    # at P4: side angle P1P4P2 with the dihedrals at edges 14 and 24 on its
    # ends determines angle P2P4P3 (four-part cotangent relation)
    num = np.cos(a1P4) * np.cos(d24) * np.sin(d14) + np.sin(d24) * np.cos(d14)
    a3P4 = np.arctan2(np.sin(a1P4) * np.sin(d14), num)
    a2P4, ok = _acos(np.cos(d24) * np.sin(a1P4) * np.sin(a3P4)
                     + np.cos(a1P4) * np.cos(a3P4), ok)
    d34, ok = _acos(_face_to_dihedral(a1P4, a2P4, a3P4), ok)

    # remaining angles at P3 by sums in faces P1P3P4 and P2P3P4
    a1P3 = np.pi - a3P1 - a2P4
    a3P3 = np.pi - a3P2 - a3P4
    ok &= (a1P3 > 0) & (a3P3 > 0)

    plane = np.stack([a1P1, a2P1, a3P1, a1P2, a2P2, a3P2,
                      a1P3, a2P3, a3P3, a1P4, a2P4, a3P4], axis=-1)
    dihedral = np.stack([d12, d13, d14, d23, d24, d34], axis=-1)
    return plane, dihedral, ok


def reconstruct_from_theta5(t5):
    """All 12 plane angles and 6 dihedral angles from Theta5.

    Parameters
    ----------
    t5 : Theta5 or array_like, shape (5,)

    Returns
    -------
    plane : ndarray, shape (12,)
    dihedral : ndarray, shape (6,)

    Raises
    ------
    GeometryError
        If ``t5`` is not realised by any tetrahedron.
    """
    plane, dihedral, ok = reconstruct_batch(np.asarray(t5, dtype=float))
    if not bool(ok):
        raise GeometryError("infeasible Theta5: no tetrahedron has these angles")
    return plane, dihedral


def r_over_circumradius_batch(plane, dihedral):
    """Scale-free weights ``r_jk / R_K`` from a complete angle set.

    Uses the edge-length/circumradius relation for each edge, whose two
    subtending face angles sit at the opposite vertices.
    """
    plane = np.asarray(plane, dtype=float)
    dihedral = np.asarray(dihedral, dtype=float)
    pa = plane[..., _EDGE_SUBTENDED[:, 0]]
    pb = plane[..., _EDGE_SUBTENDED[:, 1]]
    ca, cb = 1.0 / np.tan(pa), 1.0 / np.tan(pb)
    s, c = np.sin(dihedral), np.cos(dihedral)
    den = np.sqrt(s * s + ca * ca + cb * cb - 2.0 * ca * cb * c)
    return 2.0 * c / den


def r_over_circumradius(t5):
    """The six ratios ``r_jk / R_K`` of the tetrahedron with angles ``t5``."""
    plane, dihedral = reconstruct_from_theta5(t5)
    return r_over_circumradius_batch(plane, dihedral)


def tet_from_theta5(t5):
    """Coordinates of a tetrahedron realising ``t5`` with ``|P1P2| = 1``.

    ``P1`` sits at the origin, ``P2`` on the x-axis and ``P4`` in the
    xy-plane; ``P3`` is rotated out of that plane by the dihedral at edge 12.
    Independent of :func:`reconstruct_batch` apart from the P2 relation.
    """
    a1P1, a2P1, a1P2, a2P2, a3P2 = np.asarray(t5, dtype=float)
    if a1P1 + a1P2 >= np.pi or a2P1 + a2P2 >= np.pi:
        raise GeometryError("infeasible Theta5: triangle angle sum")
    c = _face_to_dihedral(a3P2, a1P2, a2P2)
    if abs(c) >= 1.0:
        raise GeometryError("infeasible Theta5: spherical triangle at P2")
    d12 = np.arccos(c)
    # law of sines in faces P1P2P4 and P1P2P3 for |P1P4| and |P1P3|
    l14 = np.sin(a1P2) / np.sin(a1P1 + a1P2)
    l13 = np.sin(a2P2) / np.sin(a2P1 + a2P2)
    p4 = l14 * np.array([np.cos(a1P1), np.sin(a1P1), 0.0])
    p3 = l13 * np.array([np.cos(a2P1), np.sin(a2P1) * np.cos(d12),
                         np.sin(a2P1) * np.sin(d12)])
    return np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], p3, p4])


#: Unit-edge regular tetrahedron.
REGULAR_TET = np.array([
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.5, np.sqrt(3.0) / 2.0, 0.0],
    [0.5, np.sqrt(3.0) / 6.0, np.sqrt(6.0) / 3.0],
])
