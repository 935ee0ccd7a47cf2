"""Experiment configuration: TOML in, validated ExperimentConfig out.

Every validation failure raises ConfigError naming the offending key.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import tomli

from .errors import ConfigError
from .geometry import ConeSectorCap, ConvexPolygon, Direction, Disk, Ellipse

__all__ = ["ExperimentConfig", "load_config", "parse_config"]

PIPELINES = ("PENETRABLE", "IMPENETRABLE", "PROBE", "GEOMETRY", "CGO", "VERIFY")
VERIFY_SUITES = ("INEQ_1_20", "REPRESENTATION", "LEMMA_3_1", "LEMMA_3_2",
                 "BOUND_3_8", "CGO_RESIDUAL", "TWO_PATH")


@dataclass(frozen=True)
class TauSweep:
    lo: float
    hi: float
    n: int

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class ExperimentConfig:
    pipeline: str
    rect: tuple                      # (x0, y0, x1, y1)
    obstacle: object
    k: float
    v_jump: complex
    lam: complex
    absorbing: Optional[dict]
    fe_grid: int
    ogrid_nr: int
    ogrid_nt: int
    cgo_grid: int
    cgo_family: str
    tau: TauSweep
    n_directions: int
    direction_mode: str
    t_grid: tuple                    # (lo, hi, n)
    probe_rays: int
    probe_points: int
    probe_min_dist: float
    probe_max_dist: float
    verify_suites: tuple
    out_dir: str
    exploratory: bool = False

    def directions(self, seed: int = 0):
        if self.direction_mode == "random":
            rng = np.random.default_rng(seed)
            angles = np.sort(rng.uniform(0, 2 * np.pi, self.n_directions))
        else:
            angles = 2 * np.pi * np.arange(self.n_directions) / self.n_directions
        return [Direction.from_angle(a) for a in angles]


def _get(table, key, typ, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"missing required key `{key}`")
        return default
    val = table[key]
    if typ is float and isinstance(val, int):
        val = float(val)
    if not isinstance(val, typ):
        raise ConfigError(f"key `{key}` must be {typ.__name__}, got {type(val).__name__}")
    return val


def _complex_pair(table, key, default=0j):
    if key not in table:
        return default
    v = table[key]
    if not (isinstance(v, list) and len(v) == 2
            and all(isinstance(x, (int, float)) for x in v)):
        raise ConfigError(f"key `{key}` must be [re, im]")
    return complex(v[0], v[1])


def _parse_obstacle(table):
    kind = _get(table, "kind", str, required=True)
    if kind == "disk":
        center = table.get("center", [0.0, 0.0])
        radius = _get(table, "radius", float, required=True)
        try:
            return Disk(np.asarray(center, float), radius)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"obstacle.{exc}") from exc
    if kind == "ellipse":
        center = table.get("center", [0.0, 0.0])
        semiaxes = table.get("semiaxes")
        if semiaxes is None:
            raise ConfigError("missing required key `obstacle.semiaxes`")
        rotation = _get(table, "rotation", float, default=0.0)
        return Ellipse(np.asarray(center, float), tuple(semiaxes), rotation)
    if kind == "polygon":
        vertices = table.get("vertices")
        if vertices is None:
            raise ConfigError("missing required key `obstacle.vertices`")
        try:
            return ConvexPolygon(np.asarray(vertices, float))
        except ValueError as exc:
            raise ConfigError(f"obstacle.vertices: {exc}") from exc
    if kind == "cone-sector-cap":
        return ConeSectorCap()
    raise ConfigError(f"unknown obstacle.kind `{kind}`")


def parse_config(data: dict) -> ExperimentConfig:
    pl = data.get("pipeline", {})
    pipeline = _get(pl, "type", str, required=True).upper()
    if pipeline not in PIPELINES:
        raise ConfigError(f"pipeline.type must be one of {PIPELINES}")

    dom = data.get("domain", {})
    rect = dom.get("rect", [-1.0, -1.0, 1.0, 1.0])
    if not (isinstance(rect, list) and len(rect) == 4):
        raise ConfigError("domain.rect must be [x0, y0, x1, y1]")
    rect = tuple(float(v) for v in rect)
    if rect[2] <= rect[0] or rect[3] <= rect[1]:
        raise ConfigError("domain.rect is empty")

    obstacle = None
    if "obstacle" in data:
        obstacle = _parse_obstacle(data["obstacle"])
    elif pipeline in ("PENETRABLE", "IMPENETRABLE", "PROBE", "GEOMETRY"):
        raise ConfigError("missing required table `obstacle`")

    phys = data.get("physics", {})
    k = _get(phys, "k", float, default=1.0)
    if k < 0:
        raise ConfigError("physics.k must be >= 0")
    v_jump = _complex_pair(phys, "v_jump", default=1.0 + 0j)
    lam = _complex_pair(phys, "lambda", default=0j)
    absorbing = phys.get("absorbing")
    if absorbing is not None:
        for key in ("a0", "b0", "a", "b_jump", "k"):
            if key not in absorbing:
                raise ConfigError(f"missing required key `physics.absorbing.{key}`")
        if absorbing["k"] <= 0:
            raise ConfigError("physics.absorbing.k must be positive")

    num = data.get("numerics", {})
    fe_grid = _get(num, "fe_grid", int, default=64)
    if fe_grid < 4:
        raise ConfigError("numerics.fe_grid must be >= 4")
    ogrid_nr = _get(num, "ogrid_nr", int, default=32)
    ogrid_nt = _get(num, "ogrid_nt", int, default=128)
    cgo_grid = _get(num, "cgo_grid", int, default=256)
    if cgo_grid & (cgo_grid - 1):
        raise ConfigError("numerics.cgo_grid must be a power of two")
    cgo_family = _get(num, "cgo_family", str, default="auto")
    if cgo_family not in ("auto", "exp", "faddeev"):
        raise ConfigError("numerics.cgo_family must be 'auto', 'exp' or 'faddeev'")

    tau_tbl = num.get("tau", {"min": 4.0, "max": 20.0, "n": 12})
    try:
        sweep = TauSweep(float(tau_tbl["min"]), float(tau_tbl["max"]), int(tau_tbl["n"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"numerics.tau must be {{min, max, n}}: {exc}") from exc
    if sweep.n < 3:
        raise ConfigError("numerics.tau.n must be >= 3")
    if not sweep.hi > sweep.lo > 0:
        raise ConfigError("numerics.tau must be increasing and positive")

    n_dirs = _get(num, "directions", int, default=16)
    if n_dirs < 1:
        raise ConfigError("numerics.directions must be >= 1")
    direction_mode = _get(num, "direction_mode", str, default="uniform")
    if direction_mode not in ("uniform", "random"):
        raise ConfigError("numerics.direction_mode must be 'uniform' or 'random'")

    tg = num.get("t_grid", {"min": 0.0, "max": 1.0, "n": 21})
    try:
        t_grid = (float(tg["min"]), float(tg["max"]), int(tg["n"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"numerics.t_grid must be {{min, max, n}}: {exc}") from exc
    if t_grid[1] <= t_grid[0] or t_grid[2] < 2:
        raise ConfigError("numerics.t_grid must span an increasing range")

    probe = data.get("probe", {})
    probe_rays = _get(probe, "rays", int, default=4)
    probe_points = _get(probe, "points_per_ray", int, default=6)
    probe_min_dist = _get(probe, "min_dist", float, default=0.05)
    probe_max_dist = _get(probe, "max_dist", float, default=0.0)
    if probe_max_dist and probe_max_dist <= probe_min_dist:
        raise ConfigError("probe.max_dist must exceed probe.min_dist")

    ver = data.get("verify", {})
    suites = tuple(s.upper() for s in ver.get("suites", []))
    for s in suites:
        if s not in VERIFY_SUITES:
            raise ConfigError(f"verify.suites entry `{s}` unknown; "
                              f"choose from {VERIFY_SUITES}")
    if pipeline == "VERIFY" and not suites:
        raise ConfigError("pipeline VERIFY needs a nonempty verify.suites list")

    out = data.get("output", {})
    out_dir = _get(out, "dir", str, default="out")

    exploratory = bool(phys.get("exploratory", False))

    cfg = ExperimentConfig(
        pipeline=pipeline, rect=rect, obstacle=obstacle, k=k, v_jump=v_jump,
        lam=lam, absorbing=absorbing, fe_grid=fe_grid, ogrid_nr=ogrid_nr,
        ogrid_nt=ogrid_nt, cgo_grid=cgo_grid, cgo_family=cgo_family,
        tau=sweep, n_directions=n_dirs, direction_mode=direction_mode,
        t_grid=t_grid, probe_rays=probe_rays, probe_points=probe_points,
        probe_min_dist=probe_min_dist, probe_max_dist=probe_max_dist,
        verify_suites=suites, out_dir=out_dir,
        exploratory=exploratory,
    )
    _validate_geometry(cfg)
    return cfg


def _validate_geometry(cfg: ExperimentConfig):
    if cfg.obstacle is None:
        return
    if cfg.pipeline in ("IMPENETRABLE", "PROBE"):
        if not isinstance(cfg.obstacle, Disk):
            raise ConfigError("obstacle.kind must be `disk` for the "
                              "IMPENETRABLE/PROBE pipelines (O-grid mesh)")
        x0, y0, x1, y1 = cfg.rect
        c, r = cfg.obstacle.center, cfg.obstacle.radius
        clearance = min(c[0] - x0, x1 - c[0], c[1] - y0, y1 - c[1]) - r
        if clearance < r / 2:
            raise ConfigError("obstacle must sit strictly inside domain.rect "
                              f"with clearance >= radius/2 (got {clearance:.4f})")
    if cfg.pipeline == "PENETRABLE":
        x0, y0, x1, y1 = cfg.rect
        bx0, by0, bx1, by1 = cfg.obstacle.bbox()
        if bx0 <= x0 or by0 <= y0 or bx1 >= x1 or by1 >= y1:
            raise ConfigError("obstacle must sit strictly inside domain.rect")


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error in {path}: {exc}") from exc
    return parse_config(data)
