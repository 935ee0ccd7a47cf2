"""Enclosure and probe indicator functions.

Numerical strategy
------------------
The defining boundary pairing <dv/dnu - du/dnu, .> equals, for exact
fields, a volume/surface expression supported on the obstacle (the
Alessandrini identity for the penetrable problem, the energy identity
for the impenetrable one).  At large tau the boundary-row evaluation
subtracts terms of size e^{2 tau h_Omega} to produce a result of size
e^{2 tau h_D}, which float64 cannot survive once
tau (h_Omega - h_D) >~ 15; the obstacle-supported forms carry no such
cancellation.  All indicator values are therefore computed through the
obstacle-supported forms, with the reflected field obtained from a
source problem (never by subtracting two large solutions):

* penetrable: w solves A_full w = M_V v with v the exact probe trace,
  I = integral over supp V of V (v + w) v*;
* impenetrable: w solves the impedance system with the exact Robin load
  -(dv/dnu + lambda v) on the obstacle polygon, I = energy form in
  (w, v).

The boundary-row pairing (fem.neumann_pairing) remains the right tool at
wave-scale inputs (plane waves, point sources) and is exercised by the
representation-identity check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import fem
from .cgo import BoxGrid, CGOField, box_for_domain, conjugate_cgo, make_exp_cgo, \
    solve_faddeev
from .errors import EmptyFamily, MeshMismatch, SourceTooClose
from .fem import FEField, Impedance, PotentialField
from .geometry import Direction, Disk
from .hankel import point_source, point_source_gradient
from .meshing import FilledMesh, Mesh, OBSTACLE, OUTER, fill_polygon_hole
from .quadrature import edge_rule, strip_integrate, triangle_rule, \
    disk_integrate_from_point

__all__ = [
    "IndicatorSample",
    "NoObstacleSetup",
    "IndicatorSeries",
    "PenetrableSetup",
    "ImpenetrableSetup",
    "enclosure_penetrable",
    "alessandrini_oracle",
    "enclosure_impenetrable",
    "representation_check",
    "inequality_check_1_20",
    "probe_indicator",
    "absorbing_medium_potentials",
]

_FLOOR_FACTOR = 1e3 * np.finfo(float).eps


@dataclass(frozen=True)
class IndicatorSample:
    """One (tau, I(tau)) pair with its numerical noise floor."""

    tau: float
    value: complex
    floor: float = 0.0

    def reliable(self, part: str = "ABS") -> bool:
        return abs(_part_value(self.value, part)) >= self.floor


def _part_value(value: complex, part: str) -> float:
    if part == "RE":
        return value.real
    if part == "IM":
        return value.imag
    if part == "ABS":
        return abs(value)
    raise ValueError(f"unknown part {part!r}")


@dataclass(frozen=True)
class IndicatorSeries:
    """Indicator samples for one direction, sorted by increasing tau."""

    direction: Direction
    samples: tuple
    pipeline: str
    t_shift: float = 0.0

    def __post_init__(self):
        if len(self.samples) < 3:
            raise ValueError("an indicator series needs at least 3 samples")
        taus = [s.tau for s in self.samples]
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValueError("tau samples must be strictly increasing")
        if self.pipeline not in ("PENETRABLE", "IMPENETRABLE"):
            raise ValueError("pipeline must be PENETRABLE or IMPENETRABLE")

    @property
    def taus(self) -> np.ndarray:
        return np.array([s.tau for s in self.samples])

    @property
    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.samples])

    def shifted_log_abs(self, part: str = "ABS") -> np.ndarray:
        """log |part(I)| - 2 tau t, computed in log space."""
        out = []
        for s in self.samples:
            p = abs(_part_value(s.value, part))
            out.append((math.log(p) if p > 0 else -math.inf) - 2 * s.tau * self.t_shift)
        return np.array(out)


# ---------------------------------------------------------------------------
# penetrable pipeline
# ---------------------------------------------------------------------------

class PenetrableSetup:
    """Forward model for the penetrable problem on a full-domain mesh.

    The factorized systems persist across directions and tau samples.
    For a constant real background the exponential CGO family is used
    with k = sqrt(V0); otherwise Faddeev fields are solved on a periodic
    box (``v0_fn`` samples the background there, zero-extended).
    """

    def __init__(self, mesh: Mesh, potentials: PotentialField,
                 cgo_family: str = "exp",
                 v0_fn: Optional[Callable] = None,
                 box_n: int = 256,
                 domain_bbox=None):
        self.mesh = mesh
        self.potentials = potentials
        self.solver = fem.DirichletSolver(mesh, potentials)
        self.cgo_family = cgo_family
        if domain_bbox is None:
            lo = mesh.nodes.min(axis=0)
            hi = mesh.nodes.max(axis=0)
            domain_bbox = (lo[0], lo[1], hi[0], hi[1])
        self.domain_bbox = domain_bbox
        if cgo_family == "exp":
            v0 = potentials.V0
            if np.abs(v0 - v0[0]).max() > 1e-12 or abs(v0[0].imag) > 1e-12 \
                    or v0[0].real < 0:
                raise ValueError("exp CGO family needs a constant real V0 >= 0")
            self.k = float(np.sqrt(v0[0].real))
            self.box = None
        elif cgo_family == "faddeev":
            if v0_fn is None:
                raise ValueError("faddeev family needs v0_fn to sample the background")
            self.k = 0.0
            self.box = box_for_domain(domain_bbox, box_n)
            X, Y = self.box.points()
            inside = self.box.interior_mask(domain_bbox)
            self.v0_box = np.where(inside, v0_fn(X, Y), 0.0).astype(complex)
        else:
            raise ValueError("cgo_family must be 'exp' or 'faddeev'")
        # quadrature over the perturbation's support
        self._setup_support_quadrature()

    def _setup_support_quadrature(self):
        mesh, pot = self.mesh, self.potentials
        Vt = pot.V[mesh.triangles]
        el = np.nonzero(np.any(Vt != 0, axis=1))[0]
        self.support_elements = el
        self.support_tris = mesh.triangles[el]
        self.support_Vt = pot.V[self.support_tris]
        p = mesh.nodes[self.support_tris]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        self.support_areas = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        self.support_corners = p

    def probe_pair(self, direction: Direction, tau: float):
        if self.cgo_family == "exp":
            v = make_exp_cgo(direction, tau, self.k)
            return v, conjugate_cgo(v)
        v = solve_faddeev(self.v0_box, self.box, direction, tau)
        vs = solve_faddeev(self.v0_box, self.box, direction, tau, conjugated=True)
        return v, vs

    def reflected(self, v: CGOField) -> FEField:
        """Solve A_full w = M_V v with w = 0 on the boundary; u = v + w is
        the obstacle-perturbed field for Dirichlet data v|boundary."""
        v_nodes = v(self.mesh.nodes)
        rhs = self.solver.MV @ v_nodes
        return self.solver.solve_source(rhs)

    def indicator_quadrature(self, v: CGOField, vs: CGOField, w: FEField,
                             bary=None, wts=None):
        """integral over supp V of V (v + w) v*, plus the l1 mass of the
        integrand (the indicator noise floor scale).

        Probe fields are evaluated exactly at the quadrature points; the
        reflected field enters by barycentric interpolation on its owning
        element (no point location).
        """
        if bary is None:
            bary, wts = triangle_rule(6)
        qp = np.einsum("qb,ebd->eqd", bary, self.support_corners)
        flat = qp.reshape(-1, 2)
        Vq = np.einsum("qb,eb->eq", bary, self.support_Vt)
        vq = v(flat).reshape(Vq.shape)
        vsq = vs(flat).reshape(Vq.shape)
        wq = np.einsum("qb,eb->eq", bary, w.coeffs[self.support_tris])
        f = Vq * (vq + wq) * vsq
        contrib = np.einsum("eq,q,e->", f, wts, self.support_areas)
        mass = np.einsum("eq,q,e->", np.abs(f), wts, self.support_areas)
        return complex(contrib), float(mass)


def _penetrable_sample(setup: PenetrableSetup, direction: Direction,
                       tau: float) -> IndicatorSample:
    v, vs = setup.probe_pair(direction, tau)
    w = setup.reflected(v)
    value, mass = setup.indicator_quadrature(v, vs, w)
    return IndicatorSample(tau, value, floor=_FLOOR_FACTOR * mass)


def enclosure_penetrable(setup: PenetrableSetup, direction: Direction,
                         taus: Sequence[float], t_shift: float = 0.0) -> IndicatorSeries:
    """Indicator series I(tau) = <dv/dnu - du/dnu, v*> for the penetrable
    obstacle, evaluated through its obstacle-supported form (see module
    docstring)."""
    samples = tuple(_penetrable_sample(setup, direction, float(t)) for t in taus)
    return IndicatorSeries(direction, samples, "PENETRABLE", t_shift)


def alessandrini_oracle(setup: PenetrableSetup, direction: Direction,
                        tau: float) -> complex:
    """Second path for the same quantity: int_D V v v* + int_D V w v*,
    by uniformly refined quadrature (each support element split in 16,
    degree-4 rule on each piece) with exact probe-field evaluations."""
    v, vs = setup.probe_pair(direction, tau)
    w = setup.reflected(v)
    bary4, wts4 = triangle_rule(4)
    # each support element split into 4^2 congruent pieces, degree-4 rule on each
    bary, wts = _refined_rule(bary4, wts4, levels=2)
    value, _ = setup.indicator_quadrature(v, vs, w, bary, wts)
    return value


def _subdivide_barycentric(levels: int):
    """Barycentric corner matrices of the 4^levels congruent sub-triangles."""
    tris = [np.eye(3)]
    for _ in range(levels):
        nxt = []
        for T in tris:
            a, b, c = T
            ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
            nxt += [np.array([a, ab, ca]), np.array([ab, b, bc]),
                    np.array([ca, bc, c]), np.array([ab, bc, ca])]
        tris = nxt
    return np.array(tris)


def _refined_rule(bary, wts, levels: int):
    sub = _subdivide_barycentric(levels)
    n_sub = len(sub)
    out_b = np.einsum("qc,scb->sqb", bary, sub).reshape(-1, 3)
    out_w = np.tile(wts / n_sub, n_sub)
    return out_b, out_w


# ---------------------------------------------------------------------------
# impenetrable pipeline
# ---------------------------------------------------------------------------

class NoObstacleSetup:
    """Degenerate configuration without an obstacle: the reflected field
    and every indicator vanish identically."""

    def __init__(self, k: float = 1.0):
        self.k = float(k)


class ImpenetrableSetup:
    """Forward model for the exterior impedance problem on an O-grid,
    with a filled companion mesh for background (no-obstacle) solves."""

    def __init__(self, ogrid: Mesh, hole: Disk, k: float, lam: complex,
                 n_t: int, filled: Optional[FilledMesh] = None):
        self.mesh = ogrid
        self.hole = hole
        self.k = float(k)
        self.lam = complex(lam)
        self.n_t = n_t
        V0 = np.full(ogrid.n_nodes, k * k)
        self.impedance = Impedance.constant(ogrid, lam)
        self.solver = fem.ImpedanceSolver(ogrid, V0, self.impedance)
        self.filled = filled or fill_polygon_hole(ogrid, hole, n_t)
        V0f = np.full(self.filled.full.n_nodes, k * k + 0j)
        pot = PotentialField(V0f, np.zeros_like(V0f),
                             np.zeros(len(V0f), bool))
        self.bg_solver = fem.DirichletSolver(self.filled.full, pot)
        self._edges = self._obstacle_edge_geometry()

    def _obstacle_edge_geometry(self):
        mesh = self.mesh
        sel = mesh.boundary_edges[mesh.boundary_edges[:, 2] == OBSTACLE]
        E = sel[:, :2]
        p1 = mesh.nodes[E[:, 0]]
        p2 = mesh.nodes[E[:, 1]]
        tang = p2 - p1
        elen = np.linalg.norm(tang, axis=1)
        nu = np.column_stack([tang[:, 1], -tang[:, 0]]) / elen[:, None]
        mid = 0.5 * (p1 + p2)
        flip = np.einsum("ed,ed->e", nu, mid - self.hole.center) < 0
        nu[flip] *= -1.0
        gx, gw = edge_rule(4)
        qp = p1[:, None, :] + gx[None, :, None] * tang[:, None, :]
        return {"E": E, "p1": p1, "p2": p2, "len": elen, "nu": nu,
                "gx": gx, "gw": gw, "qp": qp}

    def robin_load(self, v_fn, grad_fn) -> np.ndarray:
        """Load vector F_j = -int (dv/dnu + lambda v) phi_j ds over the
        obstacle polygon, with analytic v and grad v."""
        ed = self._edges
        vq = v_fn(ed["qp"].reshape(-1, 2)).reshape(ed["qp"].shape[:2])
        gq = grad_fn(ed["qp"].reshape(-1, 2)).reshape(ed["qp"].shape)
        dvdn = np.einsum("eqd,ed->eq", gq, ed["nu"])
        gN = -(dvdn + self.lam * vq)
        F = np.zeros(self.mesh.n_nodes, complex)
        gx, gw = ed["gx"], ed["gw"]
        w1 = gw * (1 - gx)
        w2 = gw * gx
        np.add.at(F, ed["E"][:, 0], ed["len"] * (gN * w1).sum(axis=1))
        np.add.at(F, ed["E"][:, 1], ed["len"] * (gN * w2).sum(axis=1))
        return F

    def reflected(self, v_fn, grad_fn) -> FEField:
        """w = u - v from the Robin load of the exact probe field; the
        weak form is [K - M - B] w = -F with the conventions of fem."""
        F = self.robin_load(v_fn, grad_fn)
        return self.solver.solve_source(-F)

    def edge_integrals(self, w: FEField, v_fn):
        """(int Im(w conj v) ds, int |w|^2 ds, int |v|^2 ds) over the
        obstacle polygon; w by its P1 trace, v analytic."""
        ed = self._edges
        gx, gw = ed["gx"], ed["gw"]
        vq = v_fn(ed["qp"].reshape(-1, 2)).reshape(ed["qp"].shape[:2])
        wq = w.coeffs[ed["E"][:, 0]][:, None] * (1 - gx)[None, :] \
            + w.coeffs[ed["E"][:, 1]][:, None] * gx[None, :]
        def line_int(f):
            return float(np.einsum("eq,q,e->", f, gw, ed["len"]))
        return (line_int(np.imag(wq * np.conj(vq))),
                line_int(np.abs(wq) ** 2),
                line_int(np.abs(vq) ** 2))

    def energy_identity_value(self, w: FEField, v_fn, grad_d_integrals):
        """Real part of the pairing difference through the energy identity:

        -2 int Im(lam) Im(w conj v) - int Re(lam) |w|^2 + ||grad w||^2
        - Re V0 ||w||^2 + int Re(lam) |v|^2 + int_D |grad v|^2
        - int_D Re V0 |v|^2.

        ``grad_d_integrals`` = (int_D |grad v|^2, int_D |v|^2) computed by
        the caller (analytic for the probe families).
        """
        i_wv, i_w2, i_v2 = self.edge_integrals(w, v_fn)
        gradw = float(np.real(np.conj(w.coeffs) @ (self.solver.K @ w.coeffs)))
        massw = float(np.real(np.conj(w.coeffs) @ (self.solver.M @ w.coeffs)))
        gD, mD = grad_d_integrals
        value = (-2 * self.lam.imag * i_wv - self.lam.real * i_w2
                 + gradw - massw
                 + self.lam.real * i_v2 + gD - self.k ** 2 * mD)
        mass = (2 * abs(self.lam.imag) * abs(i_wv) + abs(self.lam.real) * i_w2
                + abs(gradw) + abs(massw) + abs(self.lam.real) * i_v2
                + abs(gD) + self.k ** 2 * abs(mD))
        return value, mass

    def disk_weight_integral(self, direction: Direction, tau: float) -> float:
        """int_D e^{2 tau x.omega} dx for the hole disk."""
        val = strip_integrate(self.hole, direction,
                              lambda p: np.exp(2 * tau * (p @ direction.omega)),
                              rel_tol=1e-10)
        return float(np.real(val))


def _impenetrable_sample(setup: ImpenetrableSetup, direction: Direction,
                         tau: float) -> IndicatorSample:
    v = make_exp_cgo(direction, tau, setup.k)
    w = setup.reflected(lambda p: v(p), lambda p: v.gradient(p))
    E = setup.disk_weight_integral(direction, tau)
    gD = (2 * tau ** 2 + setup.k ** 2) * E
    value, mass = setup.energy_identity_value(w, lambda p: v(p), (gD, E))
    return IndicatorSample(tau, complex(value), floor=_FLOOR_FACTOR * mass)


def enclosure_impenetrable(setup: ImpenetrableSetup, direction: Direction,
                           taus: Sequence[float], t_shift: float = 0.0,
                           exploratory: bool = False) -> IndicatorSeries:
    """Indicator series Re <dv/dnu - du/dnu, conj(v)> for the impedance
    obstacle with v the exponential CGO family.

    ``exploratory=True`` computes instead the unvalidated complex-pairing
    variant (the open-problem indicator with v* in place of conj v); no
    behavior is asserted for it beyond finiteness.
    """
    if isinstance(setup, NoObstacleSetup):
        samples = tuple(IndicatorSample(float(t), 0j) for t in taus)
        return IndicatorSeries(direction, samples, "IMPENETRABLE", t_shift)
    if exploratory:
        samples = tuple(_exploratory_sample(setup, direction, float(t)) for t in taus)
    else:
        samples = tuple(_impenetrable_sample(setup, direction, float(t)) for t in taus)
    return IndicatorSeries(direction, samples, "IMPENETRABLE", t_shift)


def _exploratory_sample(setup: ImpenetrableSetup, direction: Direction,
                        tau: float) -> IndicatorSample:
    # all terms obstacle-supported or quadratic in the two reflected
    # fields; kept for exploration only, no validated behavior
    v = make_exp_cgo(direction, tau, setup.k)
    vs = conjugate_cgo(v)
    w = setup.reflected(lambda p: v(p), lambda p: v.gradient(p))
    ws = setup.reflected(lambda p: vs(p), lambda p: vs.gradient(p))
    ed = setup._edges
    gx, gw = ed["gx"], ed["gw"]
    qp = ed["qp"].reshape(-1, 2)
    vq = v(qp).reshape(ed["qp"].shape[:2])
    vsq = vs(qp).reshape(ed["qp"].shape[:2])
    dvdn = np.einsum("eqd,ed->eq", v.gradient(qp).reshape(ed["qp"].shape), ed["nu"])
    def trace(f):
        return f.coeffs[ed["E"][:, 0]][:, None] * (1 - gx)[None, :] \
            + f.coeffs[ed["E"][:, 1]][:, None] * gx[None, :]
    wq, wsq = trace(w), trace(ws)
    def line_int(f):
        return complex(np.einsum("eq,q,e->", f, gw, ed["len"]))
    lam = setup.lam
    term_bdry = line_int((dvdn + lam * vq) * wsq - lam * wq * wsq + lam * vq * vsq)
    E = setup.disk_weight_integral(direction, tau)
    # grad v . grad v* = (z . zbar) e^{2 tau x.omega}; z.zbar = 2 tau^2 + k^2
    term_vol = (2 * tau ** 2 + setup.k ** 2) * E - setup.k ** 2 * E
    return IndicatorSample(tau, term_bdry + term_vol, floor=0.0)


# ---------------------------------------------------------------------------
# representation identity and the fundamental inequality
# ---------------------------------------------------------------------------

def representation_check(setup: ImpenetrableSetup, v_full: FEField,
                         u_ext: FEField):
    """(lhs, rhs) of the real-part representation identity.

    lhs: boundary-row pairing difference of the two discrete solutions
    (background on the filled mesh, impedance on the annulus) against
    conj(v).  rhs: the assembled energy form with w = u - v.  Both sides
    are discretizations of the same continuum identity; their gap decays
    with the mesh.
    """
    filled = setup.filled
    if v_full.mesh is not filled.full:
        raise MeshMismatch("v must live on the filled companion mesh")
    if u_ext.mesh is not setup.mesh:
        raise MeshMismatch("u must live on the annulus mesh")
    n_ext = filled.n_exterior_nodes
    outer = setup.mesh.boundary_nodes(OUTER)
    f = np.conj(v_full.coeffs[outer])
    res_bg = (setup.bg_solver.A @ v_full.coeffs)[outer]
    res_u = (setup.solver.A @ u_ext.coeffs)[outer]
    lhs = float(np.real(f @ (res_bg - res_u)))

    w = FEField(setup.mesh, u_ext.coeffs - v_full.coeffs[:n_ext])
    i_wv, i_w2, i_v2 = _edge_integrals_fe(setup, w, v_full)
    gradw = float(np.real(np.conj(w.coeffs) @ (setup.solver.K @ w.coeffs)))
    massw = float(np.real(np.conj(w.coeffs) @ (setup.solver.M @ w.coeffs)))
    Kd, Md = fem.assemble_stiffness_mass(filled.full,
                                         np.ones(filled.full.n_nodes),
                                         elements=filled.fill_elements)
    gD = float(np.real(np.conj(v_full.coeffs) @ (Kd @ v_full.coeffs)))
    mD = float(np.real(np.conj(v_full.coeffs) @ (Md @ v_full.coeffs)))
    lam = setup.lam
    rhs = (-2 * lam.imag * i_wv - lam.real * i_w2 + gradw - massw
           + lam.real * i_v2 + gD - setup.k ** 2 * mD)
    return lhs, rhs


def _edge_integrals_fe(setup: ImpenetrableSetup, w: FEField, v_full: FEField):
    ed = setup._edges
    gx, gw = ed["gx"], ed["gw"]
    def trace(coeffs):
        return coeffs[ed["E"][:, 0]][:, None] * (1 - gx)[None, :] \
            + coeffs[ed["E"][:, 1]][:, None] * gx[None, :]
    wq = trace(w.coeffs)
    vq = trace(v_full.coeffs[:setup.filled.n_exterior_nodes])
    def line_int(f):
        return float(np.einsum("eq,q,e->", f, gw, ed["len"]))
    return (line_int(np.imag(wq * np.conj(vq))),
            line_int(np.abs(wq) ** 2),
            line_int(np.abs(vq) ** 2))


@dataclass(frozen=True)
class ProbeFamilyMember:
    """One probe field for the inequality sweep: its boundary values,
    indicator value m, and the D-norms a = ||grad v||^2, b = ||v||^2."""

    label: str
    m: float
    a: float
    b: float

    @property
    def c(self) -> float:
        return self.a + self.b


@dataclass(frozen=True)
class InequalityReport:
    members: tuple
    sup_m_over_c: float
    feasible: bool
    c1: float
    c2: float


def inequality_check_1_20(setup: ImpenetrableSetup, family) -> InequalityReport:
    """Empirical two-sided estimate check over a family of probe fields.

    family: iterable of ("planewave", unit-direction) and ("cgo",
    Direction, tau) descriptors.  For each member, m = the real pairing
    difference (computed through the stable energy form), a and b the
    obstacle H1-seminorm/L2 data.  Degenerate members (b ~ 0) are
    excluded.  Feaibility: a positive C1 and finite C2 >= 0 with
    m >= C1 a - C2 b across the family, found by scanning C1 down from
    min(m+C2max b)/a.
    """
    members = []
    k = setup.k
    area = setup.hole.area()
    for desc in family:
        if desc[0] == "planewave":
            d = np.asarray(desc[1], float)
            d = d / np.linalg.norm(d)
            v_fn = lambda p, d=d: np.exp(1j * k * (p @ d))
            grad_fn = lambda p, d=d: 1j * k * d[None, :] * np.exp(1j * k * (p @ d))[:, None]
            a = k ** 2 * area
            b = area
            label = f"pw({d[0]:+.2f},{d[1]:+.2f})"
            w = setup.reflected(v_fn, grad_fn)
            m, _ = setup.energy_identity_value(w, v_fn, (a, b))
        elif desc[0] == "cgo":
            direction, tau = desc[1], float(desc[2])
            v = make_exp_cgo(direction, tau, k)
            E = setup.disk_weight_integral(direction, tau)
            a = (2 * tau ** 2 + k ** 2) * E
            b = E
            label = f"cgo(tau={tau:g})"
            w = setup.reflected(lambda p: v(p), lambda p: v.gradient(p))
            m, _ = setup.energy_identity_value(w, lambda p: v(p), (a, b))
        else:
            raise ValueError(f"unknown family member {desc!r}")
        if b <= 1e-14 * max(a, 1.0):
            continue
        members.append(ProbeFamilyMember(label, m, a, b))
    if not members:
        raise EmptyFamily("no usable probe fields in the family")
    sup_mc = max(mb.m / mb.c for mb in members)
    # scan C1 > 0; C2(C1) = max over members of (C1 a - m)/b clipped at 0
    scale = max(mb.m / mb.b for mb in members)
    c2_cap = 1e6 * max(abs(scale), 1.0)
    feasible, c1_star, c2_star = False, 0.0, math.inf
    for c1 in np.geomspace(1e-6, 10.0, 200):
        c2 = max(0.0, max((c1 * mb.a - mb.m) / mb.b for mb in members))
        if c2 <= c2_cap:
            feasible, c1_star, c2_star = True, float(c1), float(c2)
    return InequalityReport(tuple(members), float(sup_mc), feasible,
                            c1_star, c2_star)


# ---------------------------------------------------------------------------
# probe method (side A)
# ---------------------------------------------------------------------------

def probe_indicator(setup: ImpenetrableSetup, y: np.ndarray) -> float:
    """I(y): the energy form driven by the point source G_y.

    Blows up as y approaches the obstacle boundary, stays bounded on
    compact sets away from it.
    """
    if isinstance(setup, NoObstacleSetup):
        return 0.0
    y = np.asarray(y, float)
    h_obs, h_out = _boundary_element_sizes(setup.mesh)
    d_obs = np.linalg.norm(y - setup.hole.center) - setup.hole.radius
    if d_obs < h_obs:
        raise SourceTooClose(f"dist(y, obstacle) = {d_obs:.4f} < local element "
                             f"size {h_obs:.4f}")
    outer = setup.mesh.nodes[setup.mesh.boundary_nodes(OUTER)]
    d_out = np.min(np.linalg.norm(outer - y, axis=1))
    if d_out < h_out:
        raise SourceTooClose(f"dist(y, outer boundary) = {d_out:.4f} < local "
                             f"element size {h_out:.4f}")
    k = setup.k
    v_fn = lambda p: point_source(k, p, y)
    grad_fn = lambda p: point_source_gradient(k, p, y)
    w = setup.reflected(v_fn, grad_fn)
    gD = disk_integrate_from_point(
        setup.hole, y,
        lambda p: np.sum(np.abs(point_source_gradient(k, p, y)) ** 2, axis=1))
    mD = disk_integrate_from_point(
        setup.hole, y, lambda p: np.abs(point_source(k, p, y)) ** 2)
    value, _ = setup.energy_identity_value(w, v_fn, (gD, mD))
    return float(value)


def _boundary_element_sizes(mesh: Mesh):
    """Max diameter of elements touching the OBSTACLE resp. OUTER boundary."""
    sizes = {}
    p = mesh.nodes[mesh.triangles]
    diam = np.maximum(np.maximum(
        np.linalg.norm(p[:, 0] - p[:, 1], axis=1),
        np.linalg.norm(p[:, 1] - p[:, 2], axis=1)),
        np.linalg.norm(p[:, 2] - p[:, 0], axis=1))
    for marker in (OBSTACLE, OUTER):
        nodes = set(mesh.boundary_nodes(marker).tolist())
        touch = np.array([any(n in nodes for n in tri) for tri in mesh.triangles])
        sizes[marker] = float(diam[touch].max()) if touch.any() else 0.0
    return sizes[OBSTACLE], sizes[OUTER]

def absorbing_medium_potentials(a0, b0, a, b, k: float) -> PotentialField:
    """Map time-harmonic absorbing-medium coefficients to potentials:
    V0 = a0 + i b0 / k and V = (a - a0) + i (b - b0) / k, with the
    obstacle mask where (a, b) differs from the background."""
    if k <= 0:
        raise ValueError("k must be positive")
    a0 = np.asarray(a0, float)
    b0 = np.asarray(b0, float)
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    V0 = a0 + 1j * b0 / k
    V = (a - a0) + 1j * (b - b0) / k
    mask = (a != a0) | (b != b0)
    return PotentialField(V0, V, mask)
