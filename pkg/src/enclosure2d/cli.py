"""Command-line experiment runner.

Subcommands: run, verify, geometry, cgo, mesh gen|check.  Exit codes:
0 ok, 2 configuration error, 3 solver failure, 4 verification failure.
Every run writes its CSV artifacts plus a manifest.json listing each
file with a sha256 content hash; identical configs produce identical
bytes.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from pathlib import Path

from .config import ExperimentConfig, load_config
from .errors import (BornDiverged, ConfigError, Enclosure2DError,
                     InvariantViolation, ParseError, SingularSystem)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4


def _write_artifacts(out_dir: Path, artifacts, cfg_path, seed: int) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"config": str(cfg_path), "seed": seed, "outputs": []}
    for rel, text in sorted(artifacts, key=lambda a: a[0]):
        path = out_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode()
        path.write_bytes(data)
        manifest["outputs"].append({
            "path": rel,
            "sha256": hashlib.sha256(data).hexdigest(),
        })
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _run_config(cfg: ExperimentConfig, cfg_path, out_override, seed, jobs) -> int:
    from .pipelines import run_pipeline
    artifacts, summary = run_pipeline(cfg, seed=seed, jobs=jobs)
    out_dir = Path(out_override or cfg.out_dir)
    _write_artifacts(out_dir, artifacts, cfg_path, seed)
    print(f"{cfg.pipeline}: wrote {len(artifacts)} artifact(s) to {out_dir}")
    if cfg.pipeline == "VERIFY":
        checks = summary["checks"]
        failed = [c for c in checks if not c.passed]
        for c in checks:
            status = "pass" if c.passed else "FAIL"
            print(f"  [{status}] {c.suite}: {c.check} "
                  f"(measured {c.measured:.3e}, threshold {c.threshold:.3e})")
        if failed:
            return EXIT_VERIFY
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    return _run_config(cfg, args.config, args.out, args.seed, args.jobs)


def cmd_verify(args) -> int:
    from .verify import run_suite
    cfg = load_config(args.config)
    suites = [args.suite.upper()] if args.suite else list(cfg.verify_suites)
    if not suites:
        raise ConfigError("no verify suite selected: pass --suite or set "
                          "verify.suites in the config")
    rows = []
    for name in suites:
        rows.extend(run_suite(name, cfg))
    failed = [r for r in rows if not r.passed]
    out_dir = Path(args.out or cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = [dataclasses.asdict(r) for r in rows]
    (out_dir / "verify_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n")
    for r in rows:
        status = "pass" if r.passed else "FAIL"
        print(f"[{status}] {r.suite}: {r.check} "
              f"(measured {r.measured:.3e}, threshold {r.threshold:.3e})")
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_geometry(args) -> int:
    cfg = load_config(args.config)
    cfg = dataclasses.replace(cfg, pipeline="GEOMETRY")
    return _run_config(cfg, args.config, args.out, args.seed, args.jobs)


def cmd_cgo(args) -> int:
    cfg = load_config(args.config)
    cfg = dataclasses.replace(cfg, pipeline="CGO")
    return _run_config(cfg, args.config, args.out, args.seed, args.jobs)


def cmd_mesh(args) -> int:
    from . import meshing
    if args.mesh_cmd == "gen":
        cfg = load_config(args.config)
        if cfg.pipeline in ("IMPENETRABLE", "PROBE"):
            mesh = meshing.build_ogrid(meshing.rectangle_polygon(cfg.rect),
                                       cfg.obstacle, cfg.ogrid_nr, cfg.ogrid_nt)
        else:
            mesh = meshing.build_uniform(cfg.rect, cfg.fe_grid, cfg.fe_grid)
        meshing.write_mesh(mesh, args.path)
        print(f"wrote {mesh.n_nodes} nodes / {len(mesh.triangles)} triangles "
              f"to {args.path}")
        return EXIT_OK
    mesh = meshing.read_mesh(args.path)
    mesh.validate()
    print(f"{args.path}: ok ({mesh.n_nodes} nodes, {len(mesh.triangles)} "
          f"triangles, {len(mesh.boundary_edges)} boundary edges)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="enclosure2d",
        description="2D probe/enclosure reconstruction laboratory")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for direction fan-out")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for sampled directions")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="TOML experiment config")
        sp.add_argument("--out", default=None, help="output directory override")

    sp = sub.add_parser("run", help="run the configured pipeline")
    common(sp)
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("verify", help="run verification suites")
    common(sp)
    sp.add_argument("--suite", default=None,
                    help="suite name (default: config's verify.suites)")
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("geometry", help="slice/ratio tables for the obstacle")
    common(sp)
    sp.set_defaults(fn=cmd_geometry)

    sp = sub.add_parser("cgo", help="dump CGO remainder and field grids")
    common(sp)
    sp.set_defaults(fn=cmd_cgo)

    sp = sub.add_parser("mesh", help="mesh generation and checking")
    msub = sp.add_subparsers(dest="mesh_cmd", required=True)
    spg = msub.add_parser("gen", help="generate the configured mesh")
    spg.add_argument("--config", required=True)
    spg.add_argument("path", help="output mesh file")
    spg.set_defaults(fn=cmd_mesh)
    spc = msub.add_parser("check", help="parse and validate a mesh file")
    spc.add_argument("path", help="mesh file to check")
    spc.set_defaults(fn=cmd_mesh)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, InvariantViolation) as exc:
        print(f"mesh error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularSystem, BornDiverged) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except Enclosure2DError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
