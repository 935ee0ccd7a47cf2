import math

import numpy as np
import pytest

from enclosure2d.cgo import (BoxGrid, SpectralParam, box_for_domain,
                             conjugate_cgo, make_exp_cgo, pde_residual,
                             solve_faddeev)
from enclosure2d.errors import BornDiverged
from enclosure2d.geometry import Direction, Disk

RECT = (-1.0, -1.0, 1.0, 1.0)
E1 = Direction(np.array([1.0, 0.0]))


def disk_potential(box, disk=Disk(np.zeros(2), 0.25), amp=1.0 + 0j, bbox=RECT):
    X, Y = box.points()
    pts = np.column_stack([X.ravel(), Y.ravel()])
    inside = disk.contains(pts).reshape(X.shape) & box.interior_mask(bbox)
    return np.where(inside, amp, 0.0)


class TestSpectralParam:
    def test_zero_wavenumber_construction(self):
        p = SpectralParam(E1, tau=5.0, k=0.0)
        assert np.allclose(p.z, [5.0, 5.0j])
        assert abs(p.z @ p.z) < 1e-12

    def test_nonzero_wavenumber(self):
        p = SpectralParam(E1, tau=1.0, k=1.0)
        assert np.allclose(p.z, [1.0, 1j * math.sqrt(2)])
        assert abs(p.z @ p.z + 1.0) < 1e-12

    @pytest.mark.parametrize("tau,k", [(4, 0), (7.5, 1.0), (20, 2.5), (100, 1)])
    def test_zz_invariant(self, tau, k):
        for ang in np.linspace(0, 2 * np.pi, 9):
            p = SpectralParam(Direction.from_angle(ang), tau, k)
            assert abs(p.z @ p.z + k * k) <= 1e-12 * max(1.0, tau * tau)

    def test_rejects_bad_tau(self):
        with pytest.raises(ValueError):
            SpectralParam(E1, tau=0.0, k=1.0)


class TestExpFamily:
    def test_modulus_is_pure_exponential(self):
        v = make_exp_cgo(Direction.from_angle(0.7), 5.0, 1.0)
        rng = np.random.default_rng(0)
        pts = rng.uniform(-1, 1, size=(50, 2))
        vals = v(pts)
        expected = np.exp(5.0 * (pts @ v.param.direction.omega))
        assert np.allclose(np.abs(vals), expected, rtol=1e-12)

    def test_solves_helmholtz(self):
        k = 1.0
        v = make_exp_cgo(E1, 3.0, k)
        h = 1e-4
        x0 = np.array([0.3, -0.2])
        pts = np.array([x0, x0 + [h, 0], x0 - [h, 0], x0 + [0, h], x0 - [0, h]])
        vals = v(pts)
        lap = (vals[1:] .sum() - 4 * vals[0]) / h ** 2
        assert abs(lap + k * k * vals[0]) < 1e-4 * abs(vals[0]) * (3 ** 2 + 1)

    def test_conjugate_is_complex_conjugate(self):
        v = make_exp_cgo(E1, 4.0, 1.0)
        vs = conjugate_cgo(v)
        pts = np.array([[0.1, 0.2], [-0.4, 0.9]])
        assert np.allclose(vs(pts), np.conj(v(pts)), rtol=1e-13)


class TestFaddeev:
    def test_zero_potential_gives_zero_psi(self):
        box = box_for_domain(RECT, 64)
        fld = solve_faddeev(np.zeros((64, 64), complex), box, E1, 10.0)
        assert fld.sup_psi == 0.0

    def test_sup_psi_decreases_along_tau(self):
        box = box_for_domain(RECT, 128)
        v0 = disk_potential(box)
        sups = []
        for tau in (10.0, 20.0, 40.0):
            fld = solve_faddeev(v0, box, E1, tau)
            X, Y = box.points()
            inside = box.interior_mask(RECT)
            sups.append(np.abs(fld.psi[inside]).max())
        assert sups[0] > sups[1] > sups[2]

    def test_pointwise_sandwich(self):
        box = box_for_domain(RECT, 128)
        v0 = disk_potential(box)
        fld = solve_faddeev(v0, box, E1, 10.0)
        X, Y = box.points()
        inside = box.interior_mask(RECT)
        pts = np.column_stack([X[inside], Y[inside]])
        vals = np.abs(fld.values(pts))
        grow = np.exp(pts @ fld.param.z.real)
        sup = fld.sup_psi
        assert sup < 0.5
        assert (vals >= (1 - sup) * grow - 1e-12).all()
        assert (vals <= (1 + sup) * grow + 1e-12).all()

    def test_grid_doubling_stability(self):
        sups = []
        for n in (128, 256):
            box = box_for_domain(RECT, n)
            fld = solve_faddeev(disk_potential(box), box, E1, 12.0)
            inside = box.interior_mask(RECT)
            sups.append(np.abs(fld.psi[inside]).max())
        assert abs(sups[1] - sups[0]) / sups[1] < 0.05

    def test_pde_residual_small(self):
        box = box_for_domain(RECT, 256)
        v0 = disk_potential(box)
        for tau in (10.0, 40.0):
            fld = solve_faddeev(v0, box, E1, tau)
            assert pde_residual(fld, v0, RECT) < 1e-3

    def test_born_divergence_reported(self):
        box = box_for_domain(RECT, 64)
        v0 = disk_potential(box, amp=400.0 + 0j)
        with pytest.raises(BornDiverged) as err:
            solve_faddeev(v0, box, E1, 2.0, max_iter=60)
        assert err.value.factor > 0

    def test_conjugate_identity_real_potential(self):
        box = box_for_domain(RECT, 128)
        v0 = disk_potential(box)
        fld = solve_faddeev(v0, box, E1, 10.0)
        flds = conjugate_cgo(fld, v0_box=v0)
        assert np.abs(flds.psi - np.conj(fld.psi)).max() < 1e-12

    def test_conjugate_differs_for_complex_potential(self):
        box = box_for_domain(RECT, 128)
        v0 = disk_potential(box, amp=1.0 + 1.0j)
        fld = solve_faddeev(v0, box, E1, 10.0)
        flds = conjugate_cgo(fld, v0_box=v0)
        gap = np.abs(flds.psi - np.conj(fld.psi)).max()
        assert gap > 1e-6 * (1 + np.abs(fld.psi).max())

    def test_interpolation_consistency(self):
        box = box_for_domain(RECT, 128)
        v0 = disk_potential(box)
        fld = solve_faddeev(v0, box, E1, 10.0)
        xs, ys, h = box.axes()
        pts = np.column_stack([xs[3:6], ys[3:6]])
        direct = np.exp(pts @ fld.param.z) * (1 + fld.psi[[3, 4, 5], [3, 4, 5]])
        assert np.allclose(fld.values(pts), direct, rtol=1e-12)
