"""Deterministic structured meshes and the plain-text mesh format.

Two generators: uniform triangulated rectangles (full-domain problems)
and O-grid annuli between a polygonized circular hole and a convex outer
boundary (exterior impedance problems).  Both are deterministic:
identical inputs produce byte-identical meshes.

File format (``emesh 1``)::

    emesh 1
    nodes N
    x y            # N lines
    tris M
    i j k          # M lines, 0-based, positive orientation
    bedges K
    i j marker     # marker 0=OUTER, 1=OBSTACLE

Whitespace separated, ``#`` starts a comment.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryClash, InvariantViolation, ParseError
from .geometry import ConvexPolygon, Disk

__all__ = ["OUTER", "OBSTACLE", "Mesh", "build_uniform", "build_ogrid",
           "fill_polygon_hole", "read_mesh", "write_mesh"]

OUTER = 0
OBSTACLE = 1


@dataclass(frozen=True)
class Mesh:
    """Conforming triangulation with marked boundary edges.

    nodes : (N, 2) float array
    triangles : (M, 3) int array, positively oriented
    boundary_edges : (K, 3) int array of (i, j, marker)
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.ascontiguousarray(self.nodes, float))
        object.__setattr__(self, "triangles", np.ascontiguousarray(self.triangles, np.int64))
        object.__setattr__(self, "boundary_edges",
                           np.ascontiguousarray(self.boundary_edges, np.int64))
        self.nodes.setflags(write=False)
        self.triangles.setflags(write=False)
        self.boundary_edges.setflags(write=False)

    # -- derived quantities ------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def boundary_nodes(self, marker: int) -> np.ndarray:
        sel = self.boundary_edges[self.boundary_edges[:, 2] == marker][:, :2]
        return np.unique(sel.ravel())

    def max_edge_length(self) -> float:
        p = self.nodes[self.triangles]
        lengths = [np.linalg.norm(p[:, a] - p[:, b], axis=1) for a, b in
                   ((0, 1), (1, 2), (2, 0))]
        return float(np.max(lengths))

    def validate(self) -> None:
        """Raise InvariantViolation unless areas, conformity and markers hold."""
        if self.triangles.min() < 0 or self.triangles.max() >= self.n_nodes:
            raise InvariantViolation("triangle index out of range")
        areas = self.signed_areas()
        if not (areas > 0).all():
            bad = int(np.argmin(areas))
            raise InvariantViolation(
                f"triangle {bad} has non-positive area {areas[bad]:.3e}")
        edge_count: dict = {}
        for tri in self.triangles:
            for a, b in ((0, 1), (1, 2), (2, 0)):
                key = (min(tri[a], tri[b]), max(tri[a], tri[b]))
                edge_count[key] = edge_count.get(key, 0) + 1
        if any(c > 2 for c in edge_count.values()):
            raise InvariantViolation("an edge is shared by more than two triangles")
        boundary = {k for k, c in edge_count.items() if c == 1}
        marked = {(min(i, j), max(i, j)) for i, j, _ in self.boundary_edges}
        if marked != boundary:
            raise InvariantViolation(
                f"markers cover {len(marked)} edges but the boundary has {len(boundary)}")
        if len(marked) != len(self.boundary_edges):
            raise InvariantViolation("duplicate boundary edge markers")


def build_uniform(rect, nx: int, ny: int) -> Mesh:
    """Uniform triangulation of an axis-aligned rectangle.

    rect = (x0, y0, x1, y1).  (nx+1)(ny+1) nodes, 2 nx ny triangles, all
    boundary edges marked OUTER.
    """
    if nx < 2 or ny < 2:
        raise ValueError("nx, ny must be >= 2")
    x0, y0, x1, y1 = map(float, rect)
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def nid(ix, iy):
        return iy * (nx + 1) + ix

    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    a = nid(ix, iy).ravel()
    b = nid(ix + 1, iy).ravel()
    c = nid(ix + 1, iy + 1).ravel()
    d = nid(ix, iy + 1).ravel()
    tris = np.empty((2 * nx * ny, 3), np.int64)
    tris[0::2] = np.column_stack([a, b, c])
    tris[1::2] = np.column_stack([a, c, d])

    bedges = []
    for i in range(nx):
        bedges.append((nid(i, 0), nid(i + 1, 0), OUTER))
        bedges.append((nid(i + 1, ny), nid(i, ny), OUTER))
    for j in range(ny):
        bedges.append((nid(nx, j), nid(nx, j + 1), OUTER))
        bedges.append((nid(0, j + 1), nid(0, j), OUTER))
    return Mesh(nodes, tris, np.array(bedges, np.int64))


def _outer_hit(outer, center: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Distance along rays from ``center`` (directions d, unit) to the
    outer boundary polygon."""
    if isinstance(outer, ConvexPolygon):
        nrm, c = outer._halfplanes()
    else:
        raise TypeError("outer boundary must be a ConvexPolygon")
    denom = d @ nrm.T                       # (n_t, E)
    num = c[None, :] - center @ nrm.T       # (E,) broadcast
    with np.errstate(divide="ignore", invalid="ignore"):
        t = num / denom
    t[denom <= 1e-14] = np.inf
    tmin = t.min(axis=1)
    if not np.isfinite(tmin).all():
        raise GeometryClash("a ray from the hole center misses the outer boundary")
    return tmin


def rectangle_polygon(rect) -> ConvexPolygon:
    x0, y0, x1, y1 = map(float, rect)
    return ConvexPolygon(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]))


def build_ogrid(outer: ConvexPolygon, hole: Disk, n_r: int, n_t: int) -> Mesh:
    """Block-structured annulus between a polygonized circle and a convex
    outer boundary, by transfinite interpolation along rays from the hole
    center.  n_t (n_r + 1) nodes, 2 n_r n_t triangles.
    """
    if n_r < 4:
        raise ValueError("n_r must be >= 4")
    if n_t < 16 or n_t % 4:
        raise ValueError("n_t must be >= 16 and divisible by 4")
    c = hole.center
    thetas = 2 * np.pi * np.arange(n_t) / n_t
    d = np.column_stack([np.cos(thetas), np.sin(thetas)])
    t_outer = _outer_hit(outer, c, d)
    clearance = t_outer.min() - hole.radius
    if clearance < hole.radius / 2 - 1e-12:
        raise GeometryClash(
            f"clearance {clearance:.4f} below hole.radius/2 = {hole.radius / 2:.4f}")
    inner = c + hole.radius * d
    outer_pts = c + t_outer[:, None] * d
    nodes = np.empty(((n_r + 1) * n_t, 2))
    for i in range(n_r + 1):
        nodes[i * n_t:(i + 1) * n_t] = inner + (i / n_r) * (outer_pts - inner)

    tris = np.empty((2 * n_r * n_t, 3), np.int64)
    idx = 0
    for i in range(n_r):
        for j in range(n_t):
            a = i * n_t + j
            b = i * n_t + (j + 1) % n_t
            cc = (i + 1) * n_t + (j + 1) % n_t
            dd = (i + 1) * n_t + j
            tris[idx] = (a, cc, b)
            tris[idx + 1] = (a, dd, cc)
            idx += 2

    bedges = [(j, (j + 1) % n_t, OBSTACLE) for j in range(n_t)]
    bedges += [(n_r * n_t + j, n_r * n_t + (j + 1) % n_t, OUTER) for j in range(n_t)]
    return Mesh(nodes, tris, np.array(bedges, np.int64))


@dataclass(frozen=True)
class FilledMesh:
    """O-grid plus a filled hole: the exterior mesh's nodes keep their
    indices, fill nodes are appended.  ``fill_elements`` indexes the
    triangles of ``full`` that cover the hole."""

    full: Mesh
    fill_elements: np.ndarray
    n_exterior_nodes: int


def fill_polygon_hole(ogrid: Mesh, hole: Disk, n_t: int, n_rings: int = 0) -> FilledMesh:
    """Companion full-domain mesh for an O-grid: triangulate the obstacle
    polygon with concentric rings plus a center fan.

    Used by background (no-obstacle) solves; the exterior part is shared
    element-for-element with the O-grid.
    """
    if n_rings <= 0:
        n_rings = max(2, int(round(n_t / (2 * np.pi))))
    c = hole.center
    thetas = 2 * np.pi * np.arange(n_t) / n_t
    d = np.column_stack([np.cos(thetas), np.sin(thetas)])
    new_nodes = []
    # rings at radius r * m/n_rings for m = n_rings-1 .. 1, then the center
    ring_ids = [np.arange(n_t)]          # ring 0: the existing polygon nodes
    nid = ogrid.n_nodes
    for m in range(n_rings - 1, 0, -1):
        pts = c + (hole.radius * m / n_rings) * d
        new_nodes.append(pts)
        ring_ids.append(np.arange(nid, nid + n_t))
        nid += n_t
    new_nodes.append(c[None, :])
    center_id = nid
    nodes = np.vstack([ogrid.nodes] + new_nodes)

    tris = [ogrid.triangles]
    fill = []
    for ring_a, ring_b in zip(ring_ids[:-1], ring_ids[1:]):
        for j in range(n_t):
            a = ring_a[j]
            b = ring_a[(j + 1) % n_t]
            aa = ring_b[j]
            bb = ring_b[(j + 1) % n_t]
            # inner ring is closer to the center: orient (outer, outer+1, inner)
            fill.append((a, b, bb))
            fill.append((a, bb, aa))
    last = ring_ids[-1]
    for j in range(n_t):
        fill.append((last[j], last[(j + 1) % n_t], center_id))
    fill = np.array(fill, np.int64)
    tris.append(fill)
    full_tris = np.vstack(tris)
    bedges = ogrid.boundary_edges[ogrid.boundary_edges[:, 2] == OUTER]
    full = Mesh(nodes, full_tris, bedges)
    fill_idx = np.arange(len(ogrid.triangles), len(full_tris))
    return FilledMesh(full=full, fill_elements=fill_idx,
                      n_exterior_nodes=ogrid.n_nodes)


# -- plain-text format -------------------------------------------------------

def write_mesh(mesh: Mesh, path) -> None:
    lines = ["emesh 1", f"nodes {mesh.n_nodes}"]
    lines += [f"{float(x)!r} {float(y)!r}" for x, y in mesh.nodes]
    lines.append(f"tris {len(mesh.triangles)}")
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles]
    lines.append(f"bedges {len(mesh.boundary_edges)}")
    lines += [f"{i} {j} {m}" for i, j, m in mesh.boundary_edges]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path) -> Mesh:
    """Parse and validate; raises ParseError (with line number) or
    InvariantViolation."""
    with open(path) as fh:
        raw = fh.readlines()
    tokens = []             # (line_no, fields)
    for no, line in enumerate(raw, start=1):
        body = line.split("#", 1)[0].strip()
        if body:
            tokens.append((no, body.split()))
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(tokens):
            last = tokens[-1][0] if tokens else 0
            raise ParseError("unexpected end of file", last + 1)
        t = tokens[pos]
        pos += 1
        return t

    no, fields = take()
    if fields != ["emesh", "1"]:
        raise ParseError("expected header 'emesh 1'", no)

    def section(name):
        no, fields = take()
        if len(fields) != 2 or fields[0] != name:
            raise ParseError(f"expected '{name} <count>'", no)
        try:
            return int(fields[1])
        except ValueError:
            raise ParseError(f"bad {name} count {fields[1]!r}", no) from None

    n = section("nodes")
    nodes = np.empty((n, 2))
    for i in range(n):
        no, fields = take()
        if len(fields) != 2:
            raise ParseError("node line must be 'x y'", no)
        try:
            nodes[i] = [float(fields[0]), float(fields[1])]
        except ValueError:
            raise ParseError("bad node coordinates", no) from None
    m = section("tris")
    tris = np.empty((m, 3), np.int64)
    for i in range(m):
        no, fields = take()
        if len(fields) != 3:
            raise ParseError("triangle line must be 'i j k'", no)
        try:
            tris[i] = [int(f) for f in fields]
        except ValueError:
            raise ParseError("bad triangle indices", no) from None
    k = section("bedges")
    bedges = np.empty((k, 3), np.int64)
    for i in range(k):
        no, fields = take()
        if len(fields) != 3:
            raise ParseError("boundary edge line must be 'i j marker'", no)
        try:
            bedges[i] = [int(f) for f in fields]
        except ValueError:
            raise ParseError("bad boundary edge", no) from None
        if bedges[i, 2] not in (OUTER, OBSTACLE):
            raise ParseError(f"unknown marker {bedges[i, 2]}", no)
    if pos != len(tokens):
        raise ParseError("trailing content", tokens[pos][0])
    mesh = Mesh(nodes, tris, bedges)
    mesh.validate()
    return mesh
