"""Tetrahedral meshes with quadratic node numbering.

Nodes are the mesh vertices followed by the edge midpoints. Edges are the
lexicographically sorted unique vertex pairs, so numbering depends only on
the connectivity and never on hashing order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations

import numpy as np

from .exceptions import GeometryError, MeshError
from .geometry import geometry_batch, signed_volume, v_angles_from_plane
from .scheme import MIDPOINT_EDGES

__all__ = [
    "Mesh",
    "QualityReport",
    "generate_structured",
    "single_tet_mesh",
    "perturb",
    "audit",
    "read_mesh",
    "write_mesh",
    "read_gmsh",
    "MESH_HEADER",
]

MESH_HEADER = "qfvm-mesh 1"

_FACES = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming tetrahedral mesh.

    Parameters
    ----------
    vertices : array_like, shape (nv, 3)
    tets : array_like of int, shape (nt, 4)
        0-based vertex indices. Negatively oriented tetrahedra are reordered
        by swapping their last two vertices.
    check : bool
        Run the conformity checks (default True).

    Raises
    ------
    MeshError
        For bad indices, degenerate elements or non-conforming connectivity.
    """

    vertices: np.ndarray
    tets: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        T = np.array(self.tets, dtype=np.int64)
        if V.ndim != 2 or V.shape[1] != 3:
            raise MeshError("vertices must have shape (nv, 3)")
        if T.ndim != 2 or T.shape[1] != 4 or len(T) == 0:
            raise MeshError("tets must have shape (nt, 4) with nt >= 1")
        if T.min() < 0 or T.max() >= len(V):
            raise MeshError("tetrahedron references a missing vertex")
        if np.any(np.sort(T, axis=1)[:, 1:] == np.sort(T, axis=1)[:, :-1]):
            raise MeshError("tetrahedron with repeated vertex")
        vol = signed_volume(V[T])
        neg = vol < 0
        T[neg] = T[neg][:, [0, 1, 3, 2]]
        h = np.max(np.linalg.norm(V[T][:, :, None] - V[T][:, None], axis=-1), axis=(1, 2))
        bad = np.flatnonzero(np.abs(vol) <= 1e-14 * h**3)
        if bad.size:
            raise MeshError(f"degenerate element {int(bad[0])} (zero volume)")
        V.setflags(write=False)
        T.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "tets", T)
        if self.check:
            self._check_conformity()

    # ---------------------------------------------------------------- topology
    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_tets(self):
        return len(self.tets)

    @cached_property
    def _edge_data(self):
        pairs = np.sort(self.tets[:, list(MIDPOINT_EDGES)], axis=2).reshape(-1, 2)
        edges, inv = np.unique(pairs, axis=0, return_inverse=True)
        return edges, inv.reshape(-1, 6)

    @property
    def edges(self):
        """Unique edges ``(ne, 2)``, sorted lexicographically."""
        return self._edge_data[0]

    @property
    def element_edges(self):
        """Global edge index of the local midpoints ``M23..M34`` per element."""
        return self._edge_data[1]

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_nodes(self):
        return self.n_vertices + self.n_edges

    @cached_property
    def node_coords(self):
        """Coordinates of all nodes: vertices then edge midpoints."""
        mid = 0.5 * (self.vertices[self.edges[:, 0]] + self.vertices[self.edges[:, 1]])
        return np.vstack([self.vertices, mid])

    def element_dofs(self):
        """Global node indices ``(nt, 10)`` in local node order."""
        return np.hstack([self.tets, self.n_vertices + self.element_edges])

    def element_points(self):
        """Vertex coordinates ``(nt, 4, 3)``."""
        return self.vertices[self.tets]

    @cached_property
    def _face_data(self):
        faces = np.sort(self.tets[:, _FACES], axis=2).reshape(-1, 3)
        uniq, inv, counts = np.unique(faces, axis=0, return_inverse=True,
                                      return_counts=True)
        return uniq, inv.reshape(-1, 4), counts

    @cached_property
    def boundary_faces(self):
        """Vertex triples of faces with exactly one incident element."""
        uniq, _, counts = self._face_data
        return uniq[counts == 1]

    @cached_property
    def boundary(self):
        """Boolean mask over nodes lying on the boundary surface."""
        mask = np.zeros(self.n_nodes, dtype=bool)
        bf = self.boundary_faces
        mask[bf.ravel()] = True
        bedges = np.sort(bf[:, [[0, 1], [0, 2], [1, 2]]], axis=2).reshape(-1, 2)
        idx = _row_index(self.edges, bedges)
        mask[self.n_vertices + idx] = True
        return mask

    @property
    def interior(self):
        return ~self.boundary

    @cached_property
    def volumes(self):
        return np.abs(signed_volume(self.element_points()))

    @cached_property
    def h(self):
        """Largest element diameter."""
        e = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return float(np.linalg.norm(e, axis=1).max())

    def _check_conformity(self):
        uniq, _, counts = self._face_data
        if np.any(counts > 2):
            f = uniq[np.argmax(counts)]
            raise MeshError(f"face {tuple(int(v) for v in f)} shared by more than two elements")
        bf = self.boundary_faces
        be = np.sort(bf[:, [[0, 1], [0, 2], [1, 2]]], axis=2).reshape(-1, 2)
        _, ecount = np.unique(be, axis=0, return_counts=True)
        if np.any(ecount != 2):
            raise MeshError("non-conforming mesh: boundary surface is not a closed manifold")
        # oriented boundary faces: enclosed volume must equal the element sum
        encl = 0.0
        for k, (a, b, c) in enumerate(_FACES):
            own = np.ones(self.n_tets, dtype=bool)
            fidx = self._face_data[1][:, k]
            own &= counts[fidx] == 1
            T = self.tets[own]
            P = self.vertices - self.vertices.mean(axis=0)  # centred for translation invariance
            # face opposite local vertex k, oriented outward
            sgn = -1.0 if k % 2 == 0 else 1.0
            encl += sgn * np.einsum("ei,ei->", P[T[:, a]],
                                    np.cross(P[T[:, b]], P[T[:, c]])) / 6.0
        total = self.volumes.sum()
        if abs(abs(encl) - total) > 1e-9 * max(total, 1e-300):
            raise MeshError(
                f"non-conforming mesh: elements cover volume {total:.12g} but the "
                f"boundary encloses {abs(encl):.12g} (overlap or mismatched faces)"
            )

    def __repr__(self):
        return f"Mesh(n_vertices={self.n_vertices}, n_tets={self.n_tets}, n_nodes={self.n_nodes})"


def _row_index(table, rows):
    """Indices of ``rows`` inside the lexicographically sorted ``table``."""
    key_t = table[:, 0] * (table.max() + 1) + table[:, 1]
    key_r = rows[:, 0] * (table.max() + 1) + rows[:, 1]
    idx = np.searchsorted(key_t, key_r)
    if np.any(idx >= len(key_t)) or np.any(key_t[np.minimum(idx, len(key_t) - 1)] != key_r):
        raise MeshError("edge lookup failed")
    return idx


def generate_structured(n):
    """Unit cube split into ``n**3`` subcubes of six Kuhn tetrahedra each.

    In every subcube the six tetrahedra are the regions where the local
    coordinates are ordered according to one permutation; all share the
    main diagonal of the subcube.

    Parameters
    ----------
    n : int
        Subdivisions per axis, ``n >= 1``.

    Returns
    -------
    Mesh
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    n = int(n)
    g = np.linspace(0.0, 1.0, n + 1)
    X, Y, Z = np.meshgrid(g, g, g, indexing="ij")
    verts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)

    def vid(i, j, k):
        return (i * (n + 1) + j) * (n + 1) + k

    I, J, K = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    base = np.stack([I.ravel(), J.ravel(), K.ravel()], axis=1)
    tets = []
    unit = np.eye(3, dtype=np.int64)
    for perm in permutations(range(3)):
        c0 = base
        c1 = c0 + unit[perm[0]]
        c2 = c1 + unit[perm[1]]
        c3 = c2 + unit[perm[2]]
        tets.append(np.stack([vid(*c.T) for c in (c0, c1, c2, c3)], axis=1))
    tets = np.stack(tets, axis=1).reshape(-1, 4)
    return Mesh(verts, tets, check=False)


def single_tet_mesh(points):
    """A mesh consisting of one tetrahedron."""
    return Mesh(np.asarray(points, dtype=float), [[0, 1, 2, 3]])


def perturb(mesh, rate, seed=0):
    """Randomly displace the vertices of a unit-cube mesh.

    Each coordinate receives an independent uniform sample from
    ``[-rate, rate]``, drawn for vertices in ascending index order with
    ``numpy.random.Generator(PCG64(seed))``. Cube corners stay fixed,
    vertices on cube edges move along their edge and vertices on cube faces
    stay in their face.

    Parameters
    ----------
    mesh : Mesh
    rate : float
        Absolute displacement bound (the experiments use ``0.2 / N``).
    seed : int

    Returns
    -------
    Mesh

    Raises
    ------
    MeshError
        If an element is inverted or flattened by the displacement.
    """
    if rate < 0:
        raise ValueError("rate must be non-negative")
    V = np.array(mesh.vertices)
    rng = np.random.Generator(np.random.PCG64(seed))
    d = rng.uniform(-rate, rate, size=V.shape)
    tol = 1e-12
    on_side = (np.abs(V) < tol) | (np.abs(V - 1.0) < tol)
    d[on_side] = 0.0
    newV = V + d
    vol = signed_volume(newV[mesh.tets])
    bad = np.flatnonzero(vol <= 0.0)
    if bad.size:
        raise MeshError(f"perturbation inverts element {int(bad[0])}")
    return Mesh(newV, mesh.tets, check=False)


@dataclass(frozen=True)
class QualityReport:
    """Shape statistics of a mesh.

    Attributes
    ----------
    min_vangle : float
        Smallest element V-angle ``theta_K`` in degrees.
    max_shape_ratio : float
        Largest ``h_K / rho_K``.
    worst_element : int
        Element attaining ``min_vangle``.
    vangles : ndarray
        Per-element ``theta_K`` in degrees.
    shape_ratios : ndarray
    """

    min_vangle: float
    max_shape_ratio: float
    worst_element: int
    vangles: np.ndarray = field(repr=False)
    shape_ratios: np.ndarray = field(repr=False)

    def histogram(self, bins=12):
        """Counts of ``theta_K`` over ``bins`` equal bins of [0, 60] degrees."""
        return np.histogram(self.vangles, bins=bins, range=(0.0, 60.0))

    def check(self, threshold):
        """Compare every element with a V-angle threshold (degrees).

        Returns
        -------
        passed : bool
        offending : ndarray of int
            Elements with ``theta_K < threshold``.
        """
        off = np.flatnonzero(self.vangles < threshold)
        return off.size == 0, off

    def as_dict(self):
        return dict(min_vangle_degrees=self.min_vangle,
                    max_shape_ratio=self.max_shape_ratio,
                    worst_element=self.worst_element,
                    n_elements=int(self.vangles.size))


def audit(mesh, chunk=20000):
    """V-angle and shape-ratio statistics of all elements."""
    va, sr = [], []
    X = mesh.element_points()
    for s in range(0, len(X), chunk):
        g = geometry_batch(X[s:s + chunk])
        va.append(np.degrees(v_angles_from_plane(g["plane_angles"]).min(axis=1)))
        sr.append(g["h_K"] / g["rho_K"])
    va = np.concatenate(va)
    sr = np.concatenate(sr)
    w = int(np.argmin(va))
    return QualityReport(float(va[w]), float(sr.max()), w, va, sr)


# ---------------------------------------------------------------- file I/O


def write_mesh(mesh, path):
    """Write the native text format (1-based indices)."""
    with open(path, "w", newline="\n") as fh:
        fh.write(MESH_HEADER + "\n")
        fh.write(f"{mesh.n_vertices} {mesh.n_tets}\n")
        for x, y, z in mesh.vertices:
            fh.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
        for t in mesh.tets + 1:
            fh.write(" ".join(str(int(v)) for v in t) + "\n")


def read_mesh(path):
    """Read a mesh in the native format, or Gmsh ASCII v2 by content sniffing.

    Raises
    ------
    MeshError
        On malformed input, with the offending line number.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    first = next((ln.strip() for ln in lines if ln.strip()), "")
    if first == "$MeshFormat":
        return read_gmsh(path, lines)
    return _parse_native(lines)


def _parse_native(lines):
    rows = [(k + 1, ln.split()) for k, ln in enumerate(lines)
            if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or " ".join(rows[0][1]) != MESH_HEADER:
        raise MeshError(f"line {rows[0][0] if rows else 1}: expected header '{MESH_HEADER}'")
    if len(rows) < 2 or len(rows[1][1]) != 2:
        raise MeshError(f"line {rows[1][0] if len(rows) > 1 else 2}: expected '<nv> <nt>'")
    try:
        nv, nt = (int(x) for x in rows[1][1])
    except ValueError:
        raise MeshError(f"line {rows[1][0]}: counts must be integers") from None
    if nv < 4 or nt < 1:
        raise MeshError(f"line {rows[1][0]}: need at least 4 vertices and 1 tetrahedron")
    body = rows[2:]
    if len(body) != nv + nt:
        raise MeshError(
            f"line {body[-1][0] if body else rows[1][0]}: expected {nv + nt} data lines, "
            f"found {len(body)}"
        )
    V = np.empty((nv, 3))
    for i, (ln, tok) in enumerate(body[:nv]):
        if len(tok) != 3:
            raise MeshError(f"line {ln}: vertex needs 3 coordinates")
        try:
            V[i] = [float(x) for x in tok]
        except ValueError:
            raise MeshError(f"line {ln}: bad coordinate") from None
    T = np.empty((nt, 4), dtype=np.int64)
    for i, (ln, tok) in enumerate(body[nv:]):
        if len(tok) != 4:
            raise MeshError(f"line {ln}: tetrahedron needs 4 vertex indices")
        try:
            idx = [int(x) for x in tok]
        except ValueError:
            raise MeshError(f"line {ln}: indices must be integers") from None
        if min(idx) < 1 or max(idx) > nv:
            raise MeshError(f"line {ln}: index out of range 1..{nv} (indices are 1-based)")
        T[i] = idx
    try:
        return Mesh(V, T - 1)
    except MeshError as exc:
        raise MeshError(f"invalid mesh: {exc}") from None


_GMSH_LOWER_DIM = {1, 2, 15}  # lines, triangles, points: boundary entities


def read_gmsh(path, lines=None):
    """Import tetrahedra (element type 4) from a Gmsh ASCII v2 file.

    Lower-dimensional entities (points, lines, triangles) are skipped; any
    other element type is rejected.
    """
    if lines is None:
        with open(path) as fh:
            lines = fh.read().splitlines()
    try:
        coords, tets = _parse_gmsh(lines)
    except StopIteration:
        raise MeshError("unexpected end of Gmsh file") from None
    V = np.array(coords)
    T = np.array(tets)
    used = np.unique(T)
    remap = -np.ones(len(V), dtype=np.int64)
    remap[used] = np.arange(len(used))
    return Mesh(V[used], remap[T])


def _parse_gmsh(lines):
    it = iter(enumerate(lines, start=1))

    def expect(tag):
        for ln, s in it:
            if s.strip() == tag:
                return ln
        raise MeshError(f"missing section {tag}")

    expect("$MeshFormat")
    ln, s = next(it)
    tok = s.split()
    if not tok or not tok[0].startswith("2") or (len(tok) > 1 and tok[1] != "0"):
        raise MeshError(f"line {ln}: only ASCII Gmsh format 2 is supported")
    expect("$Nodes")
    ln, s = next(it)
    nn = _gmsh_int(s, ln)
    ids, coords = [], []
    for _ in range(nn):
        ln, s = next(it)
        tok = s.split()
        if len(tok) < 4:
            raise MeshError(f"line {ln}: bad node record")
        try:
            ids.append(int(tok[0]))
            coords.append([float(x) for x in tok[1:4]])
        except ValueError:
            raise MeshError(f"line {ln}: bad node record") from None
    lookup = {g: k for k, g in enumerate(ids)}
    expect("$Elements")
    ln, s = next(it)
    ne = _gmsh_int(s, ln)
    tets = []
    for _ in range(ne):
        ln, s = next(it)
        try:
            tok = [int(x) for x in s.split()]
        except ValueError:
            raise MeshError(f"line {ln}: bad element record") from None
        if len(tok) < 3:
            raise MeshError(f"line {ln}: bad element record")
        etype, ntags = tok[1], tok[2]
        nodes = tok[3 + ntags:]
        if etype == 4:
            if len(nodes) != 4:
                raise MeshError(f"line {ln}: tetrahedron needs 4 nodes")
            try:
                tets.append([lookup[v] for v in nodes[:4]])
            except KeyError:
                raise MeshError(f"line {ln}: element references unknown node") from None
        elif etype not in _GMSH_LOWER_DIM:
            raise MeshError(f"line {ln}: unsupported element type {etype}")
    if not tets:
        raise MeshError("no tetrahedra (type 4) found")
    return coords, tets


def _gmsh_int(s, ln):
    try:
        return int(s)
    except ValueError:
        raise MeshError(f"line {ln}: expected a count, got {s.strip()!r}") from None

