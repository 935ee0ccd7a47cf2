"""Quadrature over shapes and mesh elements.

Two families of rules:

* strip rules: integrate f over a convex shape by slicing perpendicular
  to a direction, Gauss-Legendre along each chord and adaptively in the
  slice coordinate.  Exact treatment of e^{c x.omega}-type weights whose
  level sets are the slices.
* element rules: fixed-order Gauss points on mesh triangles and edges.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from .geometry import ConvexPolygon, Direction, Disk

__all__ = [
    "strip_integrate",
    "triangle_rule",
    "edge_rule",
    "disk_integrate_from_point",
]


def _chord_interval(shape, om: np.ndarray, level: float):
    """(t_lo, t_hi) of {level*om + t*theta} inside the convex shape."""
    th = np.array([-om[1], om[0]])
    if isinstance(shape, Disk):
        d = level - float(shape.center @ om)
        r2 = shape.radius ** 2 - d * d
        if r2 <= 0:
            return None
        tc = float(shape.center @ th)
        half = math.sqrt(r2)
        return (tc - half, tc + half)
    if isinstance(shape, ConvexPolygon):
        nrm, c = shape._halfplanes()
        p0 = level * om
        a = nrm @ th
        b = c - nrm @ p0
        lo, hi = -np.inf, np.inf
        for ai, bi in zip(a, b):
            if abs(ai) < 1e-15:
                if bi < -1e-12:
                    return None
                continue
            t = bi / ai
            if ai > 0:
                hi = min(hi, t)
            else:
                lo = max(lo, t)
        if hi <= lo:
            return None
        return (lo, hi)
    # generic convex shape: bisection along the line
    x0, y0, x1, y1 = shape.bbox()
    corners = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    ts = (corners - level * om) @ th
    scan = np.linspace(ts.min(), ts.max(), 2048)
    pts = level * om + scan[:, None] * th
    inside = shape.contains(pts)
    if not inside.any():
        return None
    idx = np.nonzero(inside)[0]
    lo = _refine(shape, om, th, level, scan[max(idx[0] - 1, 0)], scan[idx[0]])
    hi = _refine(shape, om, th, level, scan[idx[-1]], scan[min(idx[-1] + 1, len(scan) - 1)])
    return (lo, hi)


def _refine(shape, om, th, level, a, b):
    ina = bool(shape.contains(level * om + a * th))
    for _ in range(60):
        m = 0.5 * (a + b)
        if bool(shape.contains(level * om + m * th)) == ina:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def strip_integrate(shape, direction: Direction, fn, n_chord: int = 48,
                    rel_tol: float = 1e-9):
    """integral over D of fn(points) via slicing perpendicular to omega.

    ``fn`` maps an (n, 2) point array to complex values; it is evaluated
    on Gauss nodes of each chord.  The outer (depth) integral is adaptive,
    so exponential concentration toward the supporting line is resolved
    automatically.
    """
    om = direction.omega
    h = shape.support(om)
    wdt = h + shape.support(-om)
    gx, gw = np.polynomial.legendre.leggauss(n_chord)

    def chord_integral(s: float) -> float:
        iv = _chord_interval(shape, om, h - s)
        if iv is None:
            return 0.0
        lo, hi = iv
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        ts = mid + half * gx
        pts = (h - s) * om + ts[:, None] * np.array([-om[1], om[0]])
        return half * float(np.real(gw @ fn(pts)))

    def chord_integral_imag(s: float) -> float:
        iv = _chord_interval(shape, om, h - s)
        if iv is None:
            return 0.0
        lo, hi = iv
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        ts = mid + half * gx
        pts = (h - s) * om + ts[:, None] * np.array([-om[1], om[0]])
        return half * float(np.imag(gw @ fn(pts)))

    re, _ = quad(chord_integral, 0.0, wdt, epsabs=0.0, epsrel=rel_tol, limit=400)
    im, _ = quad(chord_integral_imag, 0.0, wdt, epsabs=0.0, epsrel=rel_tol, limit=400)
    if im == 0.0:
        return re
    return re + 1j * im


# Dunavant-style 6-point rule, degree 4, barycentric coordinates.
_TRI6_BARY = np.array([
    [0.445948490915965, 0.445948490915965, 0.108103018168070],
    [0.445948490915965, 0.108103018168070, 0.445948490915965],
    [0.108103018168070, 0.445948490915965, 0.445948490915965],
    [0.091576213509771, 0.091576213509771, 0.816847572980459],
    [0.091576213509771, 0.816847572980459, 0.091576213509771],
    [0.816847572980459, 0.091576213509771, 0.091576213509771],
])
_TRI6_W = np.array([0.223381589678011] * 3 + [0.109951743655322] * 3)


def triangle_rule(order: int = 4):
    """(bary, weights) with weights summing to 1 (multiply by triangle area)."""
    if order <= 4:
        return _TRI6_BARY, _TRI6_W
    # higher order via a collapsed Gauss (Duffy) tensor rule
    ng = max(4, (order + 2) // 2)
    gx, gw = np.polynomial.legendre.leggauss(ng)
    gx = 0.5 * (gx + 1)
    gw = 0.5 * gw
    U, V = np.meshgrid(gx, gx, indexing="ij")
    WU, WV = np.meshgrid(gw, gw, indexing="ij")
    l1 = U.ravel()
    l2 = (V * (1 - U)).ravel()
    l3 = ((1 - V) * (1 - U)).ravel()
    w = (WU * WV * (1 - U)).ravel() * 2.0
    return np.column_stack([l1, l2, l3]), w


def edge_rule(n: int = 4):
    """Gauss nodes/weights on [0, 1]."""
    gx, gw = np.polynomial.legendre.leggauss(n)
    return 0.5 * (gx + 1), 0.5 * gw


def disk_integrate_from_point(disk: Disk, y: np.ndarray, fn, n_ang: int = 128,
                              n_rad: int = 48) -> float:
    """integral over the disk of fn(points), in polar coordinates centered
    at the exterior point y.

    Radial nodes are log-spaced between the near and far chord crossings,
    which resolves |x - y|^(-m) kernels without adaptivity.
    """
    y = np.asarray(y, float)
    c = disk.center - y
    R = disk.radius
    dist = np.linalg.norm(c)
    if dist <= R:
        raise ValueError("y must lie outside the disk")
    # angular window subtended by the disk
    alpha = math.asin(R / dist)
    base = math.atan2(c[1], c[0])
    ga, gwa = np.polynomial.legendre.leggauss(n_ang)
    angs = base + alpha * ga
    wa = alpha * gwa
    gr, gwr = np.polynomial.legendre.leggauss(n_rad)
    dirs = np.column_stack([np.cos(angs), np.sin(angs)])
    # ray-circle intersection: |t d - c|^2 = R^2
    b = dirs @ c
    disc = b ** 2 - (dist ** 2 - R ** 2)
    ok = disc > 1e-30
    root = np.sqrt(np.maximum(disc, 0.0))
    lo = np.maximum(b - root, 1e-14)
    hi = np.maximum(b + root, 2e-14)
    # log-radial substitution r = e^u resolves |x-y|^-m kernels
    ulo, uhi = np.log(lo), np.log(hi)
    us = 0.5 * (uhi + ulo)[:, None] + 0.5 * (uhi - ulo)[:, None] * gr[None, :]
    rs = np.exp(us)                                    # (n_ang, n_rad)
    pts = y[None, None, :] + rs[..., None] * dirs[:, None, :]
    vals = fn(pts.reshape(-1, 2)).reshape(rs.shape)
    per_ray = 0.5 * (uhi - ulo) * np.einsum("ar,r->a", vals * rs ** 2, gwr)
    return float(np.sum(wa[ok] * per_ray[ok]))
