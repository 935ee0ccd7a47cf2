"""Pipeline orchestration: configs to setups to CSV artifacts.

Each runner returns a list of (relative-path, text) artifacts; the CLI
funnels them through a single writer and records a hashed manifest.
Numbers are serialized with repr (shortest round-trip), so repeated runs
of one config are byte-identical.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import fem
from .cgo import box_for_domain, make_exp_cgo, pde_residual, solve_faddeev
from .config import ExperimentConfig
from .errors import NoBracket, SourceTooClose
from .geometry import Direction, Disk
from .indicator import (ImpenetrableSetup, IndicatorSeries, PenetrableSetup,
                        absorbing_medium_potentials, alessandrini_oracle,
                        enclosure_impenetrable, enclosure_penetrable,
                        probe_indicator)
from .meshing import build_ogrid, build_uniform, rectangle_polygon
from .reconstruct import (SupportEstimate, assemble_hull, extract_support,
                          threshold_characterization)

__all__ = [
    "build_penetrable_setup",
    "build_impenetrable_setup",
    "jump_part",
    "run_pipeline",
]


def _fmt(x) -> str:
    return repr(float(x))


def _csv(rows, header) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(c) if isinstance(c, (str, int)) else _fmt(c)
                              for c in row))
    return "\n".join(lines) + "\n"


def effective_perturbation(cfg: ExperimentConfig) -> complex:
    """The nodal jump value of V inside the obstacle."""
    if cfg.absorbing is not None:
        ab = cfg.absorbing
        return complex(0.0, float(ab["b_jump"]) / float(ab["k"]))
    return cfg.v_jump


def jump_part(cfg: ExperimentConfig) -> str:
    """Indicator part carrying the sign law for this configuration."""
    jump = effective_perturbation(cfg)
    return "RE" if abs(jump.real) >= abs(jump.imag) else "IM"


def build_penetrable_setup(cfg: ExperimentConfig,
                           fe_grid: Optional[int] = None) -> PenetrableSetup:
    n = fe_grid or cfg.fe_grid
    mesh = build_uniform(cfg.rect, n, n)
    inside = cfg.obstacle.contains(mesh.nodes)
    if cfg.absorbing is not None:
        ab = cfg.absorbing
        a0 = np.full(mesh.n_nodes, float(ab["a0"]))
        b0 = np.full(mesh.n_nodes, float(ab["b0"]))
        a = np.full(mesh.n_nodes, float(ab["a"]))
        b = b0 + np.where(inside, float(ab["b_jump"]), 0.0)
        potentials = absorbing_medium_potentials(a0, b0, a, b, float(ab["k"]))
    else:
        V0 = np.full(mesh.n_nodes, cfg.k ** 2, complex)
        V = np.where(inside, cfg.v_jump, 0.0).astype(complex)
        potentials = fem.PotentialField(V0, V, inside)
    family = cfg.cgo_family
    if family == "auto":
        v0 = potentials.V0
        constant_real = (np.abs(v0 - v0[0]).max() < 1e-12
                         and abs(v0[0].imag) < 1e-12 and v0[0].real >= 0)
        family = "exp" if constant_real else "faddeev"
    v0_fn = None
    if family == "faddeev":
        v0c = potentials.V0[0]
        v0_fn = lambda X, Y: np.full_like(X, v0c, dtype=complex)
    return PenetrableSetup(mesh, potentials, cgo_family=family,
                           v0_fn=v0_fn, box_n=cfg.cgo_grid,
                           domain_bbox=cfg.rect)


def build_impenetrable_setup(cfg: ExperimentConfig, nr: Optional[int] = None,
                             nt: Optional[int] = None) -> ImpenetrableSetup:
    nr = nr or cfg.ogrid_nr
    nt = nt or cfg.ogrid_nt
    ogrid = build_ogrid(rectangle_polygon(cfg.rect), cfg.obstacle, nr, nt)
    return ImpenetrableSetup(ogrid, cfg.obstacle, cfg.k, cfg.lam, nt)


# ---------------------------------------------------------------------------
# per-direction work (plain function so worker processes can run it)
# ---------------------------------------------------------------------------

_WORK_SETUP = None
_WORK_CFG = None


def _init_worker(cfg: ExperimentConfig):
    global _WORK_SETUP, _WORK_CFG
    _WORK_CFG = cfg
    if cfg.pipeline == "PENETRABLE":
        _WORK_SETUP = build_penetrable_setup(cfg)
    else:
        _WORK_SETUP = build_impenetrable_setup(cfg)


def _direction_task(args):
    idx, angle = args
    cfg = _WORK_CFG
    direction = Direction.from_angle(angle)
    taus = cfg.tau.values()
    if cfg.pipeline == "PENETRABLE":
        series = enclosure_penetrable(_WORK_SETUP, direction, taus)
    else:
        series = enclosure_impenetrable(_WORK_SETUP, direction, taus,
                                        exploratory=cfg.exploratory)
    return idx, series


def _series_for_directions(cfg: ExperimentConfig, directions, jobs: int):
    tasks = [(i, math.atan2(d.omega[1], d.omega[0]))
             for i, d in enumerate(directions)]
    if jobs <= 1:
        _init_worker(cfg)
        results = [_direction_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(cfg,)) as pool:
            results = list(pool.map(_direction_task, tasks))
    results.sort(key=lambda r: r[0])
    return [r[1] for r in results]


def _indicator_csv(series: IndicatorSeries) -> str:
    rows = []
    for s in series.samples:
        la = math.log(abs(s.value)) if abs(s.value) > 0 else float("-inf")
        rows.append((s.tau, s.value.real, s.value.imag, la,
                     int(s.reliable("ABS"))))
    return _csv(rows, ["tau", "re_i", "im_i", "log_abs_i", "reliable"])


def _extract_all(cfg: ExperimentConfig, all_series, part: str):
    estimates, t_stars = [], []
    t_lo, t_hi, t_n = cfg.t_grid
    grid = np.linspace(t_lo, t_hi, t_n)
    for series in all_series:
        est = extract_support(series, part)
        estimates.append(est)
        try:
            t_stars.append(threshold_characterization(series, part, grid))
        except NoBracket:
            t_stars.append(float("nan"))
    return estimates, t_stars


def run_penetrable(cfg: ExperimentConfig, seed: int, jobs: int):
    directions = cfg.directions(seed)
    all_series = _series_for_directions(cfg, directions, jobs)
    part = jump_part(cfg)
    estimates, t_stars = _extract_all(cfg, all_series, part)
    artifacts = []
    for i, series in enumerate(all_series):
        artifacts.append((f"indicator_{i:03d}.csv", _indicator_csv(series)))
    rows = [(i, e.direction.omega[0], e.direction.omega[1], e.h_hat,
             e.slope_stderr, e.r2, e.n_used, t_stars[i])
            for i, e in enumerate(estimates)]
    artifacts.append(("support_estimates.csv",
                      _csv(rows, ["idx", "omega_x", "omega_y", "h_hat",
                                  "stderr", "r2", "n_used", "t_star"])))
    hull = None
    if len(estimates) >= 3:
        hull = assemble_hull(estimates, cfg.rect)
        artifacts.append(("hull.csv", _csv(hull.vertices, ["x", "y"])))
    return artifacts, {"estimates": estimates, "series": all_series,
                       "hull": hull, "part": part}


def run_impenetrable(cfg: ExperimentConfig, seed: int, jobs: int):
    directions = cfg.directions(seed)
    all_series = _series_for_directions(cfg, directions, jobs)
    estimates, t_stars = _extract_all(cfg, all_series, "RE")
    artifacts = []
    for i, series in enumerate(all_series):
        artifacts.append((f"indicator_{i:03d}.csv", _indicator_csv(series)))
    rows = [(i, e.direction.omega[0], e.direction.omega[1], e.h_hat,
             e.slope_stderr, e.r2, e.n_used, t_stars[i])
            for i, e in enumerate(estimates)]
    artifacts.append(("support_estimates.csv",
                      _csv(rows, ["idx", "omega_x", "omega_y", "h_hat",
                                  "stderr", "r2", "n_used", "t_star"])))
    hull = None
    if len(estimates) >= 3:
        hull = assemble_hull(estimates, cfg.rect)
        artifacts.append(("hull.csv", _csv(hull.vertices, ["x", "y"])))
    return artifacts, {"estimates": estimates, "series": all_series,
                       "hull": hull, "part": "RE"}


def probe_points_for(cfg: ExperimentConfig):
    """Probe points along rays approaching the obstacle from outside."""
    hole: Disk = cfg.obstacle
    x0, y0, x1, y1 = cfg.rect
    c, r = hole.center, hole.radius
    wall = min(c[0] - x0, x1 - c[0], c[1] - y0, y1 - c[1])
    d_max = cfg.probe_max_dist or 0.75 * (wall - r)
    dists = np.geomspace(cfg.probe_min_dist, d_max, cfg.probe_points)[::-1]
    rays = []
    for j in range(cfg.probe_rays):
        ang = 2 * np.pi * j / cfg.probe_rays
        u = np.array([math.cos(ang), math.sin(ang)])
        rays.append([(c + (r + d) * u, d) for d in dists])
    return rays


def run_probe(cfg: ExperimentConfig, seed: int, jobs: int):
    setup = build_impenetrable_setup(cfg)
    rays = probe_points_for(cfg)
    rows = []
    values = []
    for ridx, ray in enumerate(rays):
        ray_vals = []
        for y, d in ray:
            val = probe_indicator(setup, y)
            rows.append((y[0], y[1], val, ridx, d))
            ray_vals.append((d, val))
        values.append(ray_vals)
    artifacts = [("probe_map.csv", _csv(rows, ["x", "y", "indicator", "ray", "dist"]))]
    return artifacts, {"rays": values}


def run_geometry(cfg: ExperimentConfig, seed: int, jobs: int):
    from .geometry import (estimate_p_regularity, l1_l2_ratio, slice_measure,
                           support_function, weighted_l2_lower_bound, width)
    shape = cfg.obstacle
    directions = cfg.directions(seed)
    artifacts = []
    summary = []
    for i, d in enumerate(directions):
        w = width(shape, d)
        depths = np.linspace(0.0, w, 64)
        rows = [(s, slice_measure(shape, d, s)) for s in depths]
        artifacts.append((f"slices_{i:03d}.csv", _csv(rows, ["s", "mu"])))
        prof = estimate_p_regularity(shape, d, s_max=w / 8)
        taus = np.geomspace(cfg.tau.lo, max(cfg.tau.hi, cfg.tau.lo * 4), cfg.tau.n)
        rrows = [(t, l1_l2_ratio(shape, d, t),
                  weighted_l2_lower_bound(shape, d, t, prof.fitted_p))
                 for t in taus]
        artifacts.append((f"ratios_{i:03d}.csv", _csv(rrows, ["tau", "ratio", "bound"])))
        summary.append((i, d.omega[0], d.omega[1],
                        support_function(shape, d), prof.fitted_p, prof.fit_r2))
    artifacts.append(("geometry_summary.csv",
                      _csv(summary, ["idx", "omega_x", "omega_y", "h",
                                     "fitted_p", "fit_r2"])))
    return artifacts, {"summary": summary}


def run_cgo(cfg: ExperimentConfig, seed: int, jobs: int):
    box = box_for_domain(cfg.rect, cfg.cgo_grid)
    X, Y = box.points()
    pts = np.column_stack([X.ravel(), Y.ravel()])
    if cfg.obstacle is not None:
        inside = cfg.obstacle.contains(pts).reshape(X.shape)
    else:
        inside = np.zeros_like(X, bool)
    v0_box = np.where(inside, effective_perturbation(cfg), 0.0).astype(complex)
    direction = cfg.directions(seed)[0]
    artifacts = []
    summary = []
    for i, tau in enumerate(cfg.tau.values()):
        fld = solve_faddeev(v0_box, box, direction, float(tau))
        res = pde_residual(fld, v0_box, cfg.rect)
        summary.append((tau, fld.sup_psi, res))
        mask = box.interior_mask(cfg.rect)
        vv = np.exp(pts @ fld.param.z).reshape(X.shape) * (1 + fld.psi)
        rows = np.column_stack([X[mask], Y[mask],
                                fld.psi[mask].real, fld.psi[mask].imag,
                                vv[mask].real, vv[mask].imag])
        artifacts.append((f"cgo_field_{i:03d}.csv",
                          _csv(rows, ["x", "y", "re_psi", "im_psi", "re_v", "im_v"])))
    artifacts.append(("cgo_summary.csv",
                      _csv(summary, ["tau", "sup_psi", "pde_residual"])))
    return artifacts, {"summary": summary}


def run_verify(cfg: ExperimentConfig, seed: int, jobs: int):
    from .verify import run_suite
    rows = []
    results = []
    for suite in cfg.verify_suites:
        checks = run_suite(suite, cfg)
        results.extend(checks)
        for c in checks:
            rows.append((c.suite, c.check, c.measured, c.threshold,
                         "pass" if c.passed else "FAIL"))
    artifacts = [("verify_report.csv",
                  _csv(rows, ["suite", "check", "measured", "threshold", "status"]))]
    return artifacts, {"checks": results}


_RUNNERS = {
    "PENETRABLE": run_penetrable,
    "IMPENETRABLE": run_impenetrable,
    "PROBE": run_probe,
    "GEOMETRY": run_geometry,
    "CGO": run_cgo,
    "VERIFY": run_verify,
}


def run_pipeline(cfg: ExperimentConfig, seed: int = 0, jobs: int = 1):
    """Dispatch a configuration to its pipeline runner.

    Returns (artifacts, summary): artifacts are (relative path, text)
    pairs, summary is pipeline-specific python data for callers/tests.
    """
    return _RUNNERS[cfg.pipeline](cfg, seed, jobs)
