"""Acceptance suite: one test per criterion, each printing a pass/fail
line with the measured quantity against its pinned tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as
they complete.  The heavyweight configurations are shared via
module-scoped fixtures; everything runs single-threaded.
"""
import math
import time
from pathlib import Path

import numpy as np
import pytest

from enclosure2d import fem
from enclosure2d.cgo import box_for_domain, make_exp_cgo, pde_residual, \
    solve_faddeev
from enclosure2d.config import load_config
from enclosure2d.geometry import Direction, Disk
from enclosure2d.indicator import alessandrini_oracle, enclosure_impenetrable, \
    enclosure_penetrable, inequality_check_1_20, probe_indicator, \
    representation_check
from enclosure2d.meshing import build_uniform
from enclosure2d.pipelines import (build_impenetrable_setup,
                                   build_penetrable_setup, jump_part,
                                   probe_points_for, run_pipeline)
from enclosure2d.reconstruct import assemble_hull, extract_support, \
    hausdorff_to_shape
from enclosure2d.verify import run_suite

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def report(criterion: str, passed: bool, detail: str):
    line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
    print(line)
    assert passed, line


def _series_and_estimates(cfg):
    setup = build_penetrable_setup(cfg)
    part = jump_part(cfg)
    taus = cfg.tau.values()
    out = []
    for d in cfg.directions():
        series = enclosure_penetrable(setup, d, taus)
        out.append((d, series, extract_support(series, part)))
    return setup, part, out


@pytest.fixture(scope="module")
def criterion1_run():
    cfg = load_config(CONFIGS / "accept01_penetrable_real_jump.toml")
    t0 = time.time()
    setup, part, rows = _series_and_estimates(cfg)
    elapsed = time.time() - t0
    return cfg, setup, part, rows, elapsed


@pytest.fixture(scope="module")
def criterion5_setup():
    cfg = load_config(CONFIGS / "accept05a_sound_hard.toml")
    return cfg, build_impenetrable_setup(cfg)


def test_criterion_01_penetrable_real_jump(criterion1_run):
    cfg, setup, part, rows, elapsed = criterion1_run
    disk = cfg.obstacle
    errs = [est.h_hat - disk.support(d.omega) for d, _, est in rows]
    hull = assemble_hull([est for _, _, est in rows], cfg.rect)
    dist = hausdorff_to_shape(hull, disk)
    worst = max(abs(e) for e in errs)
    # the two extraction paths stay together on this run
    from enclosure2d.reconstruct import threshold_characterization
    t_lo, t_hi, t_n = cfg.t_grid
    grid = np.linspace(t_lo, t_hi, t_n)
    spacing = grid[1] - grid[0]
    t_gap = max(abs(threshold_characterization(series, part, grid) - est.h_hat)
                for _, series, est in rows)
    ok = worst <= 0.05 and dist <= 0.08 and elapsed <= 600.0 \
        and t_gap <= spacing + 0.05
    report("criterion 1 (penetrable enclosure, Re jump)", ok,
           f"max|h_hat - h| = {worst:.4f} (tol 0.05), hull Hausdorff = "
           f"{dist:.4f} (tol 0.08), threshold/slope gap {t_gap:.4f} "
           f"(tol {spacing + 0.05:.3f}), runtime {elapsed:.1f}s (cap 600s)")


def test_criterion_02_absorbing_jump():
    cfg = load_config(CONFIGS / "accept02_absorbing_jump.toml")
    setup, part, rows = _series_and_estimates(cfg)
    assert part == "IM"
    disk = cfg.obstacle
    errs = [est.h_hat - disk.support(d.omega) for d, _, est in rows]
    worst = max(abs(e) for e in errs)
    sign_ok = True
    for d, series, _ in rows:
        h = disk.support(d.omega)
        window = [s for s in series.samples if s.tau >= np.median(series.taus)]
        sign_ok &= all(s.value.imag > 0 for s in window)
    ok = worst <= 0.05 and sign_ok
    report("criterion 2 (absorbing jump, Im part)", ok,
           f"max|h_hat - h| = {worst:.4f} (tol 0.05), Im I > 0 on fit "
           f"window: {sign_ok}")


def test_criterion_03_sign_laws(criterion1_run):
    cfg_a = load_config(CONFIGS / "accept03a_negative_real_jump.toml")
    cfg_b = load_config(CONFIGS / "accept03b_negative_imag_jump.toml")
    _, _, rows_a = _series_and_estimates(cfg_a)
    _, _, rows_b = _series_and_estimates(cfg_b)
    _, _, rows_pos, _ = criterion1_run[1], criterion1_run[2], criterion1_run[3], 0
    re_flip = im_flip = True
    for d, series, _ in rows_a:
        window = [s for s in series.samples if s.tau >= np.median(series.taus)]
        re_flip &= all(s.value.real < 0 for s in window)
    for d, series, _ in rows_b:
        window = [s for s in series.samples if s.tau >= np.median(series.taus)]
        im_flip &= all(s.value.imag < 0 for s in window)
    pos_ok = True
    for d, series, _ in criterion1_run[3]:
        window = [s for s in series.samples if s.tau >= np.median(series.taus)]
        pos_ok &= all(s.value.real > 0 for s in window)
    ok = re_flip and im_flip and pos_ok
    report("criterion 3 (sign laws)", ok,
           f"Re branch flips: {re_flip}, Im branch flips: {im_flip}, "
           f"positive base case: {pos_ok}")


def test_criterion_04_two_path_oracle(criterion1_run):
    cfg, setup, part, rows, _ = criterion1_run
    worst = 0.0
    checked = 0
    for d, series, _ in rows:
        for s in series.samples:
            if not s.reliable("ABS"):
                continue
            oracle = alessandrini_oracle(setup, d, s.tau)
            gap = abs(s.value - oracle) / max(abs(s.value), abs(oracle))
            worst = max(worst, gap)
            checked += 1
    ok = worst < 1e-2 and checked > 0
    report("criterion 4 (two-path oracle)", ok,
           f"max relative gap {worst:.2e} over {checked} reliable samples "
           f"(tol 1e-2)")


def test_criterion_05_impenetrable(criterion5_setup):
    cfg, setup = criterion5_setup
    taus = cfg.tau.values()
    errs, pos_ok = [], True
    for d in cfg.directions():
        series = enclosure_impenetrable(setup, d, taus)
        est = extract_support(series, "RE")
        errs.append(est.h_hat - cfg.obstacle.support(d.omega))
        window = [s for s in series.samples if s.tau >= np.median(series.taus)]
        pos_ok &= all(s.value.real > 0 for s in window)
    cfg_b = load_config(CONFIGS / "accept05b_complex_impedance.toml")
    setup_b = build_impenetrable_setup(cfg_b)
    errs_b = []
    for d in cfg_b.directions():
        series = enclosure_impenetrable(setup_b, d, cfg_b.tau.values())
        est = extract_support(series, "RE")
        errs_b.append(est.h_hat - cfg_b.obstacle.support(d.omega))
    worst = max(abs(e) for e in errs)
    worst_b = max(abs(e) for e in errs_b)
    ok = worst <= 0.05 and worst_b <= 0.05 and pos_ok
    report("criterion 5 (impenetrable enclosure)", ok,
           f"sound-hard max|err| = {worst:.4f}, lambda=1+i max|err| = "
           f"{worst_b:.4f} (tol 0.05), positive samples: {pos_ok}")


def test_criterion_06_representation_identity(criterion5_setup):
    cfg, setup = criterion5_setup
    worst = 0.0
    for j in range(8):
        ang = 2 * math.pi * j / 8
        d = np.array([math.cos(ang), math.sin(ang)])
        g = lambda p, d=d: np.exp(1j * setup.k * (np.atleast_2d(p) @ d))
        v_full = setup.bg_solver.solve(g)
        u_ext = setup.solver.solve(g)
        lhs, rhs = representation_check(setup, v_full, u_ext)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    ok = worst < 1e-2
    report("criterion 6 (representation identity)", ok,
           f"max lhs/rhs gap {worst:.2e} over 8 plane waves (tol 1e-2)")


def test_criterion_07_inequality_feasibility(criterion5_setup):
    cfg, _ = criterion5_setup
    rows = run_suite("INEQ_1_20", cfg)
    by_check = {r.check: r for r in rows}
    drift = by_check["sup m/c refinement drift"]
    feas = by_check["C1 > 0 feasible"]
    finite = by_check["sup m/c finite"]
    ok = all(r.passed for r in rows)
    report("criterion 7 (two-sided estimate feasibility)", ok,
           f"sup m/c = {finite.measured:.4f}, refinement drift = "
           f"{drift.measured:.3f} (tol 0.10), feasible C1 = {feas.measured:.3f}")


def test_criterion_08_probe():
    cfg = load_config(CONFIGS / "accept08_probe.toml")
    setup = build_impenetrable_setup(cfg)
    rays = probe_points_for(cfg)
    increasing = True
    far_vals, near_vals = [], []
    for ray in rays:
        vals = [(d, probe_indicator(setup, y)) for y, d in ray]
        tail = [v for _, v in vals[-3:]]
        increasing &= tail[0] < tail[1] < tail[2]
        far_vals += [v for d, v in vals if d > 0.3]
        near_vals += [v for d, v in vals if abs(d - cfg.probe_min_dist) < 1e-12]
    far_frac = max(far_vals) / min(near_vals)
    ok = increasing and far_frac <= 0.20
    report("criterion 8 (probe indicator)", ok,
           f"monotone approach: {increasing}, far/near ratio = "
           f"{far_frac:.3f} (tol 0.20)")


def test_criterion_09_weight_ratios():
    cfg = load_config(CONFIGS / "accept09_weight_ratios.toml")
    t0 = time.time()
    rows = run_suite("LEMMA_3_2", cfg) + run_suite("BOUND_3_8", cfg)
    elapsed = time.time() - t0
    ok = all(r.passed for r in rows) and elapsed < 60.0
    detail = "; ".join(f"{r.check}: {r.measured:.3f}" for r in rows)
    report("criterion 9 (weight-ratio estimates)", ok,
           f"{detail} (runtime {elapsed:.1f}s)")


def test_criterion_10_cgo_solver():
    cfg = load_config(CONFIGS / "accept10_cgo_solver.toml")
    rows = run_suite("CGO_RESIDUAL", cfg)
    ok = all(r.passed for r in rows)
    detail = "; ".join(f"{r.check}: {r.measured:.3e}" for r in rows)
    report("criterion 10 (CGO solver)", ok, detail)


def test_criterion_11_reflected_bounds():
    cfg = load_config(CONFIGS / "accept11_reflected_bounds.toml")
    rows = run_suite("LEMMA_3_1", cfg)
    ok = all(r.passed for r in rows)
    detail = "; ".join(f"{r.check}: {r.measured:.3f}" for r in rows)
    report("criterion 11 (reflected-solution bounds)", ok, detail)


def test_criterion_12_fem_convergence():
    cfg = load_config(CONFIGS / "accept12_fem_convergence.toml")
    k = cfg.k
    ang = 0.4
    d = np.array([math.cos(ang), math.sin(ang)])
    g = lambda p: np.exp(1j * k * (np.atleast_2d(p) @ d))
    errs = []
    for n in (32, 64, 128):
        mesh = build_uniform(cfg.rect, n, n)
        pots = fem.PotentialField(np.full(mesh.n_nodes, k * k, complex),
                                  np.zeros(mesh.n_nodes, complex),
                                  np.zeros(mesh.n_nodes, bool))
        u = fem.solve_dirichlet(mesh, pots, g)
        _, mass = fem.assemble_stiffness_mass(mesh, np.ones(mesh.n_nodes))
        e = u.coeffs - g(mesh.nodes)
        errs.append(math.sqrt(abs(np.conj(e) @ (mass @ e))))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    ok = min(orders) >= 1.9
    report("criterion 12 (FEM convergence)", ok,
           f"L2 orders {orders[0]:.3f}, {orders[1]:.3f} over 32->64->128 "
           f"(floor 1.9)")
