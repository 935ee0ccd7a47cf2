"""Complex P1 finite elements for the interior Dirichlet problem and the
exterior impedance problem, with weak Neumann boundary functionals.

Conventions
-----------
The assembled operator is ``A = K - M(pot) - B(lambda)`` where K is the
stiffness matrix, M the mass matrix weighted by the P1-interpolated
potential (products of three P1 functions integrated exactly) and B the
obstacle-edge mass weighted by the impedance.  With these signs a
discrete solution u of ``Delta u + pot u = 0`` satisfies ``(A u)_j = 0``
at every unconstrained row j, and the weak Neumann functional of u
against boundary data f is the residual pairing

    <du/dnu, f> = sum_{j on OUTER} f_j (A u)_j,

which is the volume bilinear form of the weak formulation applied to the
nodal lifting of f and is independent of how f is extended inside.

Dirichlet rows are eliminated exactly; systems are solved by complex
sparse LU.  Factorizations are cached on the solver objects so that
per-direction/per-tau right-hand sides reuse them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import MeshMismatch, SingularSystem, ZeroDenominator
from .geometry import Direction
from .meshing import Mesh, OBSTACLE, OUTER
from .quadrature import strip_integrate

__all__ = [
    "FEField",
    "PotentialField",
    "Impedance",
    "assemble_stiffness_mass",
    "assemble_edge_mass",
    "DirichletSolver",
    "ImpedanceSolver",
    "solve_dirichlet",
    "solve_impedance",
    "neumann_pairing",
    "reflected_norm_ratios",
    "l2_norm",
    "interpolate",
]

BoundaryData = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FEField:
    """Complex nodal coefficients on a mesh."""

    mesh: Mesh
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, complex)
        if c.shape != (self.mesh.n_nodes,):
            raise MeshMismatch("coefficient vector does not match the mesh")
        if not np.isfinite(c).all():
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "coeffs", c)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        """Evaluate by P1 interpolation at arbitrary points (slow path,
        used by quadrature oracles)."""
        return _point_eval(self.mesh, self.coeffs, np.asarray(pts, float))


@dataclass(frozen=True)
class PotentialField:
    """Background and perturbation potentials sampled at mesh nodes.

    V must vanish outside the obstacle mask (zero perturbation away from
    the obstacle); the mask marks nodes where the perturbation may live.
    """

    V0: np.ndarray
    V: np.ndarray
    obstacle_mask: np.ndarray

    def __post_init__(self):
        V0 = np.ascontiguousarray(self.V0, complex)
        V = np.ascontiguousarray(self.V, complex)
        mask = np.ascontiguousarray(self.obstacle_mask, bool)
        if not (len(V0) == len(V) == len(mask)):
            raise ValueError("potential arrays must share one length")
        if np.any(V[~mask] != 0):
            raise ValueError("V must vanish where the obstacle mask is false")
        object.__setattr__(self, "V0", V0)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "obstacle_mask", mask)

    @property
    def total(self) -> np.ndarray:
        return self.V0 + self.V


@dataclass(frozen=True)
class Impedance:
    """Impedance value per OBSTACLE boundary node; complex allowed, either
    sign of the imaginary part."""

    values: dict  # node id -> complex

    @classmethod
    def constant(cls, mesh: Mesh, lam: complex) -> "Impedance":
        nodes = mesh.boundary_nodes(OBSTACLE)
        return cls({int(n): complex(lam) for n in nodes})

    @classmethod
    def from_callable(cls, mesh: Mesh, fn) -> "Impedance":
        nodes = mesh.boundary_nodes(OBSTACLE)
        pts = mesh.nodes[nodes]
        vals = np.asarray(fn(pts), complex)
        return cls({int(n): complex(v) for n, v in zip(nodes, vals)})


# exact integrals of products of three P1 basis functions over a triangle,
# as multiples of the area: c[i,j,k] = (1/area) int l_i l_j l_k
_C3 = np.full((3, 3, 3), 1 / 60.0)
for _i in range(3):
    for _j in range(3):
        for _k in range(3):
            if _i == _j == _k:
                _C3[_i, _j, _k] = 1 / 10.0
            elif _i == _j or _j == _k or _i == _k:
                _C3[_i, _j, _k] = 1 / 30.0


def _geometry(mesh: Mesh):
    p = mesh.nodes[mesh.triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * det
    grads = np.empty((len(mesh.triangles), 3, 2))
    grads[:, 0] = np.column_stack([p[:, 1, 1] - p[:, 2, 1], p[:, 2, 0] - p[:, 1, 0]])
    grads[:, 1] = np.column_stack([p[:, 2, 1] - p[:, 0, 1], p[:, 0, 0] - p[:, 2, 0]])
    grads[:, 2] = np.column_stack([p[:, 0, 1] - p[:, 1, 1], p[:, 1, 0] - p[:, 0, 0]])
    grads /= det[:, None, None]
    return area, grads


def assemble_stiffness_mass(mesh: Mesh, pot_nodal: Optional[np.ndarray] = None,
                            elements: Optional[np.ndarray] = None):
    """(K, M) with M weighted by the P1-interpolated potential (exact
    cubic integration).  ``elements`` restricts assembly to a subset."""
    tris = mesh.triangles if elements is None else mesh.triangles[elements]
    area, grads = _geometry(mesh)
    if elements is not None:
        area = area[elements]
        grads = grads[elements]
    Ke = np.einsum("tid,tjd->tij", grads, grads) * area[:, None, None]
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    n = mesh.n_nodes
    K = sp.csr_matrix((Ke.ravel(), (rows, cols)), shape=(n, n))
    if pot_nodal is None:
        return K, None
    Vt = np.asarray(pot_nodal, complex)[tris]
    Me = np.einsum("tk,ijk->tij", Vt, _C3) * area[:, None, None]
    M = sp.csr_matrix((Me.ravel(), (rows, cols)), shape=(n, n))
    return K, M


def assemble_edge_mass(mesh: Mesh, impedance: Impedance) -> sp.csr_matrix:
    """B_ij = int over OBSTACLE edges of lambda phi_i phi_j ds, with
    lambda linear along each edge."""
    n = mesh.n_nodes
    rows, cols, vals = [], [], []
    for i, j, marker in mesh.boundary_edges:
        if marker != OBSTACLE:
            continue
        l1 = impedance.values.get(int(i), 0.0)
        l2 = impedance.values.get(int(j), 0.0)
        L = float(np.linalg.norm(mesh.nodes[j] - mesh.nodes[i]))
        b11 = L * (3 * l1 + l2) / 12
        b22 = L * (l1 + 3 * l2) / 12
        b12 = L * (l1 + l2) / 12
        rows += [i, j, i, j]
        cols += [i, j, j, i]
        vals += [b11, b22, b12, b12]
    if not rows:
        return sp.csr_matrix((n, n), dtype=complex)
    return sp.csr_matrix((np.array(vals, complex), (rows, cols)), shape=(n, n))


def _boundary_values(mesh: Mesh, g: BoundaryData, nodes: np.ndarray) -> np.ndarray:
    if callable(g):
        return np.asarray(g(mesh.nodes[nodes]), complex)
    g = np.asarray(g, complex)
    if g.shape == (mesh.n_nodes,):
        return g[nodes]
    if g.shape == (len(nodes),):
        return g
    raise MeshMismatch("boundary data shape matches neither the mesh nor the boundary")


class _EliminatedSystem:
    """Dirichlet row elimination with a cached complex LU factorization."""

    def __init__(self, A: sp.csr_matrix, fixed: np.ndarray):
        self.A = A
        self.fixed = fixed
        self.free = ~fixed
        Aff = A[self.free][:, self.free].tocsc()
        self.Afb = A[self.free][:, fixed].tocsr()
        try:
            self.lu = spla.splu(Aff)
        except RuntimeError as exc:   # exactly singular pivot
            raise SingularSystem(str(exc)) from exc

    def solve(self, gb: np.ndarray, rhs_free: Optional[np.ndarray] = None) -> np.ndarray:
        n = self.A.shape[0]
        u = np.zeros(n, complex)
        u[self.fixed] = gb
        b = -(self.Afb @ gb)
        if rhs_free is not None:
            b = b + rhs_free
        u[self.free] = self.lu.solve(b)
        if not np.isfinite(u).all():
            raise SingularSystem("solution contains non-finite entries")
        return u


class DirichletSolver:
    """Interior problem Delta u + (V0+V) u = 0 on a full-domain mesh,
    u = g on the OUTER boundary."""

    def __init__(self, mesh: Mesh, potentials: PotentialField):
        if len(mesh.boundary_nodes(OBSTACLE)):
            raise MeshMismatch("interior Dirichlet problem wants an OUTER-only mesh")
        if len(potentials.V0) != mesh.n_nodes:
            raise MeshMismatch("potential field does not match the mesh")
        self.mesh = mesh
        self.potentials = potentials
        K, M = assemble_stiffness_mass(mesh, potentials.total)
        self.A = (K - M).tocsr()
        K, M0 = assemble_stiffness_mass(mesh, potentials.V0)
        self.A_bg = (K - M0).tocsr()
        _, self.MV = assemble_stiffness_mass(mesh, potentials.V)
        self.outer = mesh.boundary_nodes(OUTER)
        fixed = np.zeros(mesh.n_nodes, bool)
        fixed[self.outer] = True
        self.fixed = fixed
        self.system = _EliminatedSystem(self.A, fixed)

    def solve(self, g: BoundaryData) -> FEField:
        gb = _boundary_values(self.mesh, g, self.outer)
        return FEField(self.mesh, self.system.solve(gb))

    def solve_source(self, rhs: np.ndarray) -> FEField:
        """A w = rhs at free rows, w = 0 on the boundary.  Used for
        reflected-field (scattering) computations."""
        w = self.system.solve(np.zeros(len(self.outer), complex),
                              rhs_free=rhs[self.system.free])
        return FEField(self.mesh, w)


class ImpedanceSolver:
    """Exterior problem Delta u + V0 u = 0 on an annulus mesh with the
    Robin condition du/dnu + lambda u = 0 on the OBSTACLE polygon and
    u = g on OUTER."""

    def __init__(self, mesh: Mesh, V0: np.ndarray, impedance: Impedance):
        if not len(mesh.boundary_nodes(OBSTACLE)):
            raise MeshMismatch("impedance problem wants OBSTACLE-marked edges")
        V0 = np.asarray(V0)
        if np.iscomplexobj(V0) and np.any(V0.imag != 0):
            raise ValueError("impenetrable pipeline assumes a real background potential")
        self.mesh = mesh
        self.V0 = V0.astype(complex)
        K, M = assemble_stiffness_mass(mesh, self.V0)
        self.B = assemble_edge_mass(mesh, impedance)
        self.A = (K - M - self.B).tocsr()
        self.A_bg = (K - M).tocsr()        # no Robin term; used by pairings
        self.K = K
        self.M = M
        self.outer = mesh.boundary_nodes(OUTER)
        fixed = np.zeros(mesh.n_nodes, bool)
        fixed[self.outer] = True
        self.fixed = fixed
        self.system = _EliminatedSystem(self.A, fixed)

    def solve(self, g: BoundaryData) -> FEField:
        gb = _boundary_values(self.mesh, g, self.outer)
        return FEField(self.mesh, self.system.solve(gb))

    def solve_source(self, rhs: np.ndarray) -> FEField:
        w = self.system.solve(np.zeros(len(self.outer), complex),
                              rhs_free=rhs[self.system.free])
        return FEField(self.mesh, w)


def solve_dirichlet(mesh: Mesh, potentials: PotentialField, g: BoundaryData) -> FEField:
    return DirichletSolver(mesh, potentials).solve(g)


def solve_impedance(mesh: Mesh, V0: np.ndarray, impedance: Impedance,
                    g: BoundaryData) -> FEField:
    return ImpedanceSolver(mesh, V0, impedance).solve(g)


def neumann_pairing(u: FEField, operator: sp.spmatrix, f: BoundaryData,
                    outer_nodes: Optional[np.ndarray] = None) -> complex:
    """<du/dnu restricted to OUTER, f> through the volume bilinear form.

    ``operator`` is the assembled weak-form matrix of the equation u
    satisfies (``DirichletSolver.A`` or ``ImpedanceSolver.A``); the
    pairing is the boundary-row residual dotted with the nodal values of
    f.  No boundary differentiation anywhere.
    """
    mesh = u.mesh
    if operator.shape != (mesh.n_nodes, mesh.n_nodes):
        raise MeshMismatch("operator does not match the field's mesh")
    if outer_nodes is None:
        outer_nodes = mesh.boundary_nodes(OUTER)
    fb = _boundary_values(mesh, f, outer_nodes)
    residual = operator @ u.coeffs
    return complex(fb @ residual[outer_nodes])


def l2_norm(mesh: Mesh, coeffs: np.ndarray, mass: Optional[sp.spmatrix] = None) -> float:
    if mass is None:
        _, mass = assemble_stiffness_mass(mesh, np.ones(mesh.n_nodes))
    return float(np.sqrt(np.real(np.conj(coeffs) @ (mass @ coeffs))))


def reflected_norm_ratios(v_exact, w: FEField, shape, direction: Direction,
                          V_nodal: Optional[np.ndarray] = None,
                          mass: Optional[sp.spmatrix] = None):
    """(r1, r2) for the reflected field w = u - v.

    r1 = ||w||_L2(mesh domain) / ||v||_L2(D): bounded by the impenetrable
    estimate; r2 = ||w||_L2 / ||V v||_L1: bounded by the penetrable one.
    ``v_exact`` maps points to probe-field values; r2 requires V_nodal on
    w's mesh.
    """
    num = l2_norm(w.mesh, w.coeffs, mass)
    vsq = strip_integrate(shape, direction, lambda p: np.abs(v_exact(p)) ** 2,
                          rel_tol=1e-9)
    den1 = np.sqrt(float(np.real(vsq)))
    if den1 <= 0:
        raise ZeroDenominator("probe field vanishes on the obstacle")
    r1 = num / den1
    r2 = None
    if V_nodal is not None:
        den2 = _weighted_l1(w.mesh, np.asarray(V_nodal, complex), v_exact)
        if den2 <= 0:
            raise ZeroDenominator("V v vanishes on the obstacle")
        r2 = num / den2
    return r1, r2


def _weighted_l1(mesh: Mesh, V_nodal: np.ndarray, v_exact) -> float:
    """int |V| |v| dx by element quadrature over the support of V."""
    from .quadrature import triangle_rule
    tris = mesh.triangles
    el = np.nonzero(np.any(V_nodal[tris] != 0, axis=1))[0]
    if not len(el):
        return 0.0
    p = mesh.nodes[tris[el]]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    areas = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    bary, wts = triangle_rule(4)
    qp = np.einsum("qb,ebd->eqd", bary, p)
    Vq = np.einsum("qb,eb->eq", bary, V_nodal[tris[el]])
    vq = v_exact(qp.reshape(-1, 2)).reshape(Vq.shape)
    return float(np.einsum("eq,q,e->", np.abs(Vq) * np.abs(vq), wts, areas))


# -- point evaluation of P1 fields -------------------------------------------

class _Locator:
    """Uniform-bin point location for triangle meshes."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        p = mesh.nodes[mesh.triangles]
        self.tri_min = p.min(axis=1)
        self.tri_max = p.max(axis=1)
        self.lo = mesh.nodes.min(axis=0)
        self.hi = mesh.nodes.max(axis=0)
        nbin = max(8, int(np.sqrt(len(mesh.triangles) / 2)))
        self.nbin = nbin
        self.h = (self.hi - self.lo) / nbin
        self.bins: dict = {}
        lo_idx = np.clip(((self.tri_min - self.lo) / self.h).astype(int), 0, nbin - 1)
        hi_idx = np.clip(((self.tri_max - self.lo) / self.h).astype(int), 0, nbin - 1)
        for t in range(len(mesh.triangles)):
            for bx in range(lo_idx[t, 0], hi_idx[t, 0] + 1):
                for by in range(lo_idx[t, 1], hi_idx[t, 1] + 1):
                    self.bins.setdefault((bx, by), []).append(t)

    def bary(self, pts: np.ndarray):
        mesh = self.mesh
        pts = np.atleast_2d(pts)
        tri_of = np.full(len(pts), -1, np.int64)
        lam = np.zeros((len(pts), 3))
        p = mesh.nodes[mesh.triangles]
        for i, x in enumerate(pts):
            bx = min(max(int((x[0] - self.lo[0]) / self.h[0]), 0), self.nbin - 1)
            by = min(max(int((x[1] - self.lo[1]) / self.h[1]), 0), self.nbin - 1)
            best, best_l = -1, None
            for t in self.bins.get((bx, by), ()):
                a, b, c = p[t]
                det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
                l1 = ((b[0] - x[0]) * (c[1] - x[1]) - (b[1] - x[1]) * (c[0] - x[0])) / det
                l2 = ((c[0] - x[0]) * (a[1] - x[1]) - (c[1] - x[1]) * (a[0] - x[0])) / det
                l3 = 1.0 - l1 - l2
                if min(l1, l2, l3) >= -1e-12:
                    best, best_l = t, (l1, l2, l3)
                    break
            if best >= 0:
                tri_of[i] = best
                lam[i] = best_l
        return tri_of, lam


_locator_cache: dict = {}


def _get_locator(mesh: Mesh) -> _Locator:
    key = id(mesh)
    loc = _locator_cache.get(key)
    if loc is None or loc.mesh is not mesh:
        loc = _Locator(mesh)
        _locator_cache[key] = loc
    return loc


def _point_eval(mesh: Mesh, coeffs: np.ndarray, pts: np.ndarray) -> np.ndarray:
    single = pts.ndim == 1
    tri_of, lam = _get_locator(mesh).bary(pts)
    out = np.zeros(len(lam), complex)
    ok = tri_of >= 0
    nodes = mesh.triangles[tri_of[ok]]
    out[ok] = np.einsum("pk,pk->p", coeffs[nodes], lam[ok])
    return out[0] if single else out


def interpolate(mesh: Mesh, fn) -> FEField:
    """Nodal interpolant of a callable field."""
    return FEField(mesh, np.asarray(fn(mesh.nodes), complex))
