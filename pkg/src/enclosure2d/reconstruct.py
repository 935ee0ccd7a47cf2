"""Support-function extraction from indicator series and convex-hull
assembly from directional estimates.

The one-line formula reads h off the slope of log|I| against 2 tau; the
fit window is the top half of the reliable samples, since the small-tau
samples carry the polynomial-prefactor bias.  The threshold variant
scans shifts t for the onset of decay.  Everything here works in log
space, so series produced at large tau h never overflow the fits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyIntersection, NoBracket, NonPositivePart, TooFewReliable
from .geometry import Direction, Disk
from .indicator import IndicatorSeries, _part_value

__all__ = [
    "SupportEstimate",
    "HullPolygon",
    "extract_support",
    "threshold_characterization",
    "assemble_hull",
    "hausdorff_to_shape",
]


@dataclass(frozen=True)
class SupportEstimate:
    direction: Direction
    h_hat: float
    slope_stderr: float
    r2: float
    n_used: int

    def __post_init__(self):
        if self.n_used < 3:
            raise ValueError("a support estimate needs >= 3 samples")


@dataclass(frozen=True)
class HullPolygon:
    """Counterclockwise convex polygon with its source estimates."""

    vertices: np.ndarray
    sources: tuple

    def contains(self, pts: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        nrm = np.column_stack([e[:, 1], -e[:, 0]])
        d = np.asarray(pts, float) @ nrm.T - np.einsum("ed,ed->e", nrm, v)
        return (d <= tol * np.linalg.norm(nrm, axis=1)).all(axis=-1)

    def area(self) -> float:
        v = self.vertices
        n = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(v[:, 0] * n[:, 1] - n[:, 0] * v[:, 1]))


def _fit_window(series: IndicatorSeries, part: str):
    usable = [s for s in series.samples if s.reliable(part)]
    if len(usable) < 3:
        raise TooFewReliable(
            f"only {len(usable)} reliable samples for part {part}")
    usable.sort(key=lambda s: s.tau)
    top = usable[len(usable) // 2:]
    if len(top) < 3:
        top = usable[-3:]
    return top


def extract_support(series: IndicatorSeries, part: str = "RE") -> SupportEstimate:
    """OLS slope of log|part(I)| against 2 tau over the top half of the
    reliable samples; h_hat = slope."""
    window = _fit_window(series, part)
    vals = np.array([_part_value(s.value, part) for s in window])
    if np.any(vals == 0):
        raise NonPositivePart(f"part {part} vanishes inside the fit window")
    x = 2.0 * np.array([s.tau for s in window])
    y = np.log(np.abs(vals))
    n = len(x)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = max(n - 2, 1)
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(float(resid @ resid) / dof / sxx) if sxx > 0 else math.inf
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    return SupportEstimate(series.direction, float(slope), stderr, r2, n)


def prefactor_fit(series: IndicatorSeries, part: str = "RE"):
    """Diagnostic two-parameter fit log|I| = 2 h tau - p log tau + c.

    Not used by the reconstruction pipeline; reported alongside the
    default fit when requested.
    """
    window = _fit_window(series, part)
    vals = np.array([_part_value(s.value, part) for s in window])
    if np.any(vals == 0):
        raise NonPositivePart(f"part {part} vanishes inside the fit window")
    taus = np.array([s.tau for s in window])
    y = np.log(np.abs(vals))
    A = np.column_stack([2 * taus, -np.log(taus), np.ones_like(taus)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0]), float(coef[1])


def threshold_characterization(series: IndicatorSeries, part: str,
                               t_grid: Sequence[float],
                               decade: float = 10.0) -> float:
    """Smallest t in the grid for which e^{-2 tau t} |part(I)| decays by
    at least ``decade`` across the reliable sweep (log-space test)."""
    usable = [s for s in series.samples if s.reliable(part)]
    if len(usable) < 2:
        raise NoBracket("fewer than two reliable samples")
    usable.sort(key=lambda s: s.tau)
    first, last = usable[0], usable[-1]
    p0 = abs(_part_value(first.value, part))
    p1 = abs(_part_value(last.value, part))
    if p0 == 0 or p1 == 0:
        raise NoBracket("selected part vanishes at the sweep ends")
    log_drop_needed = math.log(decade)
    for t in sorted(t_grid):
        drop = (math.log(p0) - 2 * first.tau * t) - (math.log(p1) - 2 * last.tau * t)
        if drop >= log_drop_needed:
            return float(t)
    raise NoBracket("no grid shift exhibits the required decay")


def _clip_halfplane(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Sutherland-Hodgman step: keep {x . normal <= offset}."""
    if len(poly) == 0:
        return poly
    d = poly @ normal - offset
    out = []
    n = len(poly)
    for i in range(n):
        j = (i + 1) % n
        pi, pj = poly[i], poly[j]
        di, dj = d[i], d[j]
        if di <= 1e-14:
            out.append(pi)
            if dj > 1e-14:
                t = di / (di - dj)
                out.append(pi + t * (pj - pi))
        elif dj <= 1e-14:
            t = di / (di - dj)
            out.append(pi + t * (pj - pi))
    return np.array(out) if out else np.empty((0, 2))


def assemble_hull(estimates: Sequence[SupportEstimate], bbox) -> HullPolygon:
    """Intersection of the half-planes {x . omega_j <= h_hat_j}, clipped
    to the domain bounding box."""
    if len(estimates) < 3:
        raise ValueError("need at least 3 directional estimates")
    dirs = {tuple(np.round(e.direction.omega, 12)) for e in estimates}
    if len(dirs) < 3:
        raise ValueError("need at least 3 distinct directions")
    x0, y0, x1, y1 = bbox
    poly = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], float)
    for e in estimates:
        poly = _clip_halfplane(poly, e.direction.omega, e.h_hat)
        if len(poly) < 3:
            raise EmptyIntersection("support estimates admit no common point")
    return HullPolygon(poly, tuple(estimates))


def hausdorff_to_shape(hull: HullPolygon, shape, n_samples: int = 720) -> float:
    """Symmetric Hausdorff distance between the hull polygon and a shape
    boundary, by dense boundary sampling."""
    t = 2 * np.pi * np.arange(n_samples) / n_samples
    shape_pts = shape.boundary(n_samples)
    poly = hull.vertices
    # distance from a point set to a polygon boundary
    def to_segments(pts, verts):
        a = verts
        b = np.roll(verts, -1, axis=0)
        ab = b - a
        denom = np.einsum("ed,ed->e", ab, ab)
        best = np.full(len(pts), np.inf)
        for j in range(len(a)):
            ap = pts - a[j]
            tt = np.clip(ap @ ab[j] / denom[j], 0.0, 1.0)
            proj = a[j] + tt[:, None] * ab[j]
            best = np.minimum(best, np.linalg.norm(pts - proj, axis=1))
        return best
    d1 = to_segments(shape_pts, poly).max()
    # polygon boundary sampled densely against the shape boundary
    dense = []
    for j in range(len(poly)):
        a, b = poly[j], poly[(j + 1) % len(poly)]
        ts = np.linspace(0, 1, 32, endpoint=False)
        dense.append(a + ts[:, None] * (b - a))
    dense = np.vstack(dense)
    if isinstance(shape, Disk):
        d2 = np.abs(np.linalg.norm(dense - shape.center, axis=1) - shape.radius).max()
    else:
        d2 = np.min(np.linalg.norm(dense[:, None, :] - shape_pts[None], axis=2),
                    axis=1).max()
    return float(max(d1, d2))
