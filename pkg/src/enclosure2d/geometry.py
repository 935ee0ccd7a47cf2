"""Parametric 2D shapes, support functions, slice measures and the
exponential-weight norm ratios used by the enclosure estimates.

All shapes are convex, so every straight-line slice meets a shape in a
single interval.  Directions come in (omega, theta) pairs with theta the
+90-degree rotation of omega; the probe fields grow along omega and
oscillate along theta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import DegenerateSlices, QuadratureNotConverged

__all__ = [
    "Direction",
    "Disk",
    "Ellipse",
    "ConvexPolygon",
    "ConeSectorCap",
    "Shape",
    "SliceProfile",
    "support_function",
    "slice_measure",
    "width",
    "estimate_p_regularity",
    "l1_l2_ratio",
    "weighted_l2_lower_bound",
]

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Direction:
    """Unit vector pair (omega, theta) with theta = rot90(omega)."""

    omega: np.ndarray
    theta: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        om = np.asarray(self.omega, float)
        if om.shape != (2,):
            raise ValueError("omega must be a 2-vector")
        nrm = math.hypot(om[0], om[1])
        if abs(nrm - 1.0) > 1e-9:
            om = om / nrm
        object.__setattr__(self, "omega", om)
        th = self.theta
        if th is None:
            th = np.array([-om[1], om[0]])
        else:
            th = np.asarray(th, float)
        object.__setattr__(self, "theta", th)
        if abs(om @ om - 1.0) > _UNIT_TOL or abs(th @ th - 1.0) > _UNIT_TOL:
            raise ValueError("direction vectors must be unit length")
        if abs(om @ th) > _UNIT_TOL:
            raise ValueError("theta must be perpendicular to omega")

    @classmethod
    def from_angle(cls, angle: float) -> "Direction":
        return cls(np.array([math.cos(angle), math.sin(angle)]))


@dataclass(frozen=True)
class Disk:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, float))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def contains(self, pts: np.ndarray) -> np.ndarray:
        d = np.asarray(pts, float) - self.center
        return np.einsum("...d,...d->...", d, d) <= self.radius ** 2

    def support(self, omega: np.ndarray) -> float:
        return float(self.center @ omega) + self.radius

    def bbox(self):
        c, r = self.center, self.radius
        return (c[0] - r, c[1] - r, c[0] + r, c[1] + r)

    def area(self) -> float:
        return math.pi * self.radius ** 2

    def boundary(self, n: int) -> np.ndarray:
        t = 2 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.column_stack([np.cos(t), np.sin(t)])


@dataclass(frozen=True)
class Ellipse:
    center: np.ndarray
    semiaxes: tuple
    rotation: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, float))
        a, b = self.semiaxes
        if a <= 0 or b <= 0:
            raise ValueError("semiaxes must be positive")

    def _axes(self):
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        return np.array([c, s]), np.array([-s, c])

    def contains(self, pts: np.ndarray) -> np.ndarray:
        u, v = self._axes()
        d = np.asarray(pts, float) - self.center
        a, b = self.semiaxes
        return (d @ u) ** 2 / a ** 2 + (d @ v) ** 2 / b ** 2 <= 1.0

    def support(self, omega: np.ndarray) -> float:
        u, v = self._axes()
        a, b = self.semiaxes
        return float(self.center @ omega) + math.hypot(a * (omega @ u), b * (omega @ v))

    def bbox(self):
        # support function in the four axis directions
        ex = self.support(np.array([1.0, 0.0]))
        wx = self.support(np.array([-1.0, 0.0]))
        ey = self.support(np.array([0.0, 1.0]))
        wy = self.support(np.array([0.0, -1.0]))
        return (-wx, -wy, ex, ey)

    def area(self) -> float:
        return math.pi * self.semiaxes[0] * self.semiaxes[1]

    def boundary(self, n: int) -> np.ndarray:
        u, v = self._axes()
        a, b = self.semiaxes
        t = 2 * np.pi * np.arange(n) / n
        return self.center + np.outer(a * np.cos(t), u) + np.outer(b * np.sin(t), v)


@dataclass(frozen=True)
class ConvexPolygon:
    """Vertices counterclockwise, strictly convex."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, float)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise ValueError("need at least 3 two-dimensional vertices")
        nxt = np.roll(v, -1, axis=0)
        prv = np.roll(v, 1, axis=0)
        cross = (v[:, 0] - prv[:, 0]) * (nxt[:, 1] - v[:, 1]) - \
                (v[:, 1] - prv[:, 1]) * (nxt[:, 0] - v[:, 0])
        if not (cross > 0).all():
            raise ValueError("vertices must be counterclockwise and strictly convex")
        object.__setattr__(self, "vertices", v)

    def _halfplanes(self):
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        # outward normal of a CCW polygon edge
        nrm = np.column_stack([e[:, 1], -e[:, 0]])
        nrm /= np.linalg.norm(nrm, axis=1)[:, None]
        return nrm, np.einsum("ed,ed->e", nrm, v)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        nrm, c = self._halfplanes()
        d = np.asarray(pts, float) @ nrm.T - c
        return (d <= 1e-12).all(axis=-1)

    def support(self, omega: np.ndarray) -> float:
        return float(np.max(self.vertices @ omega))

    def bbox(self):
        v = self.vertices
        return (v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max())

    def area(self) -> float:
        v = self.vertices
        n = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(v[:, 0] * n[:, 1] - n[:, 0] * v[:, 1]))

    def boundary(self, n: int) -> np.ndarray:
        return self.vertices


class ConeSectorCap:
    """The cone-sector test fixture: {x1 < x2 < 2 x1, 0 < x1} cut by the
    unit disk.  Its tip at the origin defeats the rotated-cube covering
    construction, which is why it is worth keeping around as a fixture.
    """

    # sector between the rays x2 = x1 and x2 = 2 x1
    ANGLE_LO = math.atan2(1.0, 1.0)
    ANGLE_HI = math.atan2(2.0, 1.0)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        p = np.asarray(pts, float)
        x1, x2 = p[..., 0], p[..., 1]
        return (x1 > 0) & (x2 > x1) & (x2 < 2 * x1) & (x1 ** 2 + x2 ** 2 < 1.0)

    def support(self, omega: np.ndarray) -> float:
        ang = math.atan2(omega[1], omega[0])
        d = 0.0
        if not (self.ANGLE_LO <= ang <= self.ANGLE_HI):
            d = min(abs(_angdiff(ang, self.ANGLE_LO)), abs(_angdiff(ang, self.ANGLE_HI)))
        return max(0.0, math.cos(d))

    def bbox(self):
        # contained in the first-quadrant part of the unit disk
        return (0.0, 0.0, math.cos(self.ANGLE_LO), math.sin(self.ANGLE_HI))

    def area(self) -> float:
        return 0.5 * (self.ANGLE_HI - self.ANGLE_LO)

    def boundary(self, n: int) -> np.ndarray:
        t = np.linspace(self.ANGLE_LO, self.ANGLE_HI, max(2, n))
        arc = np.column_stack([np.cos(t), np.sin(t)])
        return np.vstack([[0.0, 0.0], arc])

    def __eq__(self, other):
        return isinstance(other, ConeSectorCap)

    def __hash__(self):
        return hash("cone-sector-cap")


Shape = object  # union of the four kinds above


def _angdiff(a: float, b: float) -> float:
    d = (a - b) % (2 * math.pi)
    return d - 2 * math.pi if d > math.pi else d


@dataclass(frozen=True)
class SliceProfile:
    """Depths, chord measures and the fitted regularity exponent."""

    omega: Direction
    depths: np.ndarray
    measures: np.ndarray
    fitted_p: float
    fit_r2: float


def support_function(shape, omega: Direction) -> float:
    """sup_{x in D} x . omega."""
    return shape.support(omega.omega)


def width(shape, omega: Direction) -> float:
    """Extent of the shape along omega."""
    return shape.support(omega.omega) + shape.support(-omega.omega)


def slice_measure(shape, omega: Direction, s: float) -> float:
    """1D measure of D intersected with the line x.omega = h_D(omega) - s.

    Analytic for disks and convex polygons, bisection of the chord
    endpoints otherwise.  Returns 0 when the slice misses D.
    """
    if s < 0:
        raise ValueError("slice depth s must be >= 0")
    om = omega.omega
    if isinstance(shape, Disk):
        r = shape.radius
        if s >= 2 * r:
            return 0.0
        return 2.0 * math.sqrt(max(2 * r * s - s * s, 0.0))
    if isinstance(shape, ConvexPolygon):
        return _polygon_chord(shape, om, shape.support(om) - s)
    return _bisection_chord(shape, om, shape.support(om) - s)


def _polygon_chord(poly: ConvexPolygon, om: np.ndarray, level: float) -> float:
    # line {x.om = level} parametrized as p0 + t*theta; clip t against edges
    th = np.array([-om[1], om[0]])
    p0 = level * om
    nrm, c = poly._halfplanes()
    a = nrm @ th
    b = c - nrm @ p0
    lo, hi = -np.inf, np.inf
    for ai, bi in zip(a, b):
        if abs(ai) < 1e-15:
            if bi < -1e-12:
                return 0.0
            continue
        t = bi / ai
        if ai > 0:
            hi = min(hi, t)
        else:
            lo = max(lo, t)
    return max(0.0, hi - lo)


def _bisection_chord(shape, om: np.ndarray, level: float, n_scan: int = 4096) -> float:
    th = np.array([-om[1], om[0]])
    x0, y0, x1, y1 = shape.bbox()
    # t-range of the line inside the bbox (plus a margin)
    corners = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    tvals = (corners - level * om) @ th
    tlo, thi = tvals.min() - 1e-9, tvals.max() + 1e-9
    ts = np.linspace(tlo, thi, n_scan)
    pts = level * om + ts[:, None] * th
    inside = shape.contains(pts)
    if not inside.any():
        return 0.0
    total = 0.0
    flips = np.nonzero(inside[:-1] != inside[1:])[0]
    # refine every inside/outside transition to ~1e-13 of the bbox scale
    refined = []
    for i in flips:
        a, b = ts[i], ts[i + 1]
        fa = inside[i]
        for _ in range(60):
            m = 0.5 * (a + b)
            if bool(shape.contains(level * om + m * th)) == bool(fa):
                a = m
            else:
                b = m
        refined.append(0.5 * (a + b))
    # pair up entry/exit points
    if inside[0]:
        refined.insert(0, ts[0])
    if inside[-1]:
        refined.append(ts[-1])
    for a, b in zip(refined[0::2], refined[1::2]):
        total += b - a
    return total


def estimate_p_regularity(shape, omega: Direction, s_max: float, n: int = 24) -> SliceProfile:
    """Log-log least-squares fit of the chord law mu(s) ~ C s^(p-1).

    fitted_p = 1 + slope.  Depths are geometrically spaced in (0, s_max].
    """
    if n < 8:
        raise ValueError("need n >= 8 sample depths")
    w = width(shape, omega)
    if not 0 < s_max < w:
        raise ValueError("s_max must lie in (0, width)")
    depths = s_max * np.geomspace(1e-2, 1.0, n)
    measures = np.array([slice_measure(shape, omega, s) for s in depths])
    pos = measures > 0
    if pos.sum() < (n + 1) // 2:
        raise DegenerateSlices(
            f"{n - pos.sum()} of {n} slice measures vanish for this direction"
        )
    x = np.log(depths[pos])
    y = np.log(measures[pos])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid ** 2) / ss_tot) if ss_tot > 0 else 1.0
    return SliceProfile(omega, depths, measures, fitted_p=1.0 + float(slope), fit_r2=r2)


def _exp_weight_integral(shape, omega: Direction, rate: float, rel_tol: float = 1e-9):
    """int_D exp(-rate * (h - x.omega)) dx via the chord (Fubini) reduction."""
    w = width(shape, omega)
    val, err = quad(
        lambda s: slice_measure(shape, omega, s) * math.exp(-rate * s),
        0.0,
        w,
        epsabs=0.0,
        epsrel=rel_tol,
        limit=400,
    )
    if val <= 0 or not math.isfinite(val):
        raise QuadratureNotConverged("exponential-weight integral is degenerate")
    if err > 1e-6 * abs(val):
        raise QuadratureNotConverged(
            f"quadrature error {err:.2e} exceeds 1e-6 relative on value {val:.2e}"
        )
    return val


def l1_l2_ratio(shape, omega: Direction, tau: float) -> float:
    """||e^{tau x.omega}||_L1(D) / ||e^{tau x.omega}||_L2(D).

    Both norms are reduced to 1D chord integrals against exp(-tau s) and
    evaluated adaptively; the common factor e^{tau h} cancels, so the
    computation is overflow-free for any tau.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    l1 = _exp_weight_integral(shape, omega, tau)
    l2sq = _exp_weight_integral(shape, omega, 2 * tau)
    return l1 / math.sqrt(l2sq)


def weighted_l2_lower_bound(shape, omega: Direction, tau: float, p: float) -> float:
    """e^{-tau h} ||e^{tau x.omega}||_L2(D) * tau^{p/2}.

    The verify suite sweeps tau and asserts this stays bounded away from
    zero, which is the empirical content of the tau^{-p/2} lower estimate.
    """
    if tau <= 0:
        raise ValueError("tau must be > 0")
    if p < 1:
        raise ValueError("p must be >= 1")
    l2 = math.sqrt(_exp_weight_integral(shape, omega, 2 * tau))
    return l2 * tau ** (p / 2)
