import math

import numpy as np
import pytest
from scipy.integrate import quad

from enclosure2d.errors import DegenerateSlices
from enclosure2d.geometry import (ConeSectorCap, ConvexPolygon, Direction,
                                  Disk, Ellipse, estimate_p_regularity,
                                  l1_l2_ratio, slice_measure,
                                  support_function, weighted_l2_lower_bound,
                                  width)

SQUARE = ConvexPolygon(np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]))
CONE = ConeSectorCap()


def direction(angle):
    return Direction.from_angle(angle)


class TestDirection:
    def test_theta_is_rot90(self):
        d = direction(0.3)
        assert np.allclose(d.theta, [-d.omega[1], d.omega[0]])
        assert abs(d.omega @ d.theta) < 1e-12
        assert abs(d.omega @ d.omega - 1) < 1e-12

    def test_rejects_non_perpendicular(self):
        with pytest.raises(ValueError):
            Direction(np.array([1.0, 0.0]), np.array([1.0, 0.0]))


class TestSupportFunction:
    def test_unit_disk_any_direction(self):
        d = Disk(np.zeros(2), 1.0)
        for ang in np.linspace(0, 2 * np.pi, 7):
            assert support_function(d, direction(ang)) == pytest.approx(1.0)

    def test_offset_disk(self):
        d = Disk(np.array([0.3, 0.0]), 0.5)
        assert support_function(d, direction(0.0)) == pytest.approx(0.8)

    def test_square_corner(self):
        assert support_function(SQUARE, direction(np.pi / 4)) == pytest.approx(math.sqrt(2))

    def test_ellipse_closed_form(self):
        e = Ellipse(np.zeros(2), (2.0, 1.0), rotation=0.0)
        assert support_function(e, direction(0.0)) == pytest.approx(2.0)
        assert support_function(e, direction(np.pi / 2)) == pytest.approx(1.0)
        # against dense boundary sampling
        pts = e.boundary(20000)
        om = direction(0.7).omega
        assert support_function(e, direction(0.7)) == pytest.approx(
            float((pts @ om).max()), abs=1e-6)

    def test_cone_fixture_support(self):
        # downward direction: the tip at the origin supports the set
        assert support_function(CONE, Direction(np.array([0.0, -1.0]))) == pytest.approx(0.0)
        # direction inside the sector: the unit arc
        mid = 0.5 * (CONE.ANGLE_LO + CONE.ANGLE_HI)
        assert support_function(CONE, direction(mid)) == pytest.approx(1.0)

    def test_translation_property(self):
        rng = np.random.default_rng(7)
        shapes = [Disk(np.array([0.1, -0.2]), 0.4),
                  Ellipse(np.array([0.0, 0.1]), (0.5, 0.2), 0.4),
                  SQUARE]
        shift = np.array([0.37, -0.81])
        for shape in shapes:
            if isinstance(shape, Disk):
                moved = Disk(shape.center + shift, shape.radius)
            elif isinstance(shape, Ellipse):
                moved = Ellipse(shape.center + shift, shape.semiaxes, shape.rotation)
            else:
                moved = ConvexPolygon(shape.vertices + shift)
            for ang in rng.uniform(0, 2 * np.pi, 32):
                d = direction(ang)
                assert support_function(moved, d) == pytest.approx(
                    support_function(shape, d) + shift @ d.omega, abs=1e-12)


class TestSliceMeasure:
    def test_disk_tangent_and_center(self):
        d = Disk(np.zeros(2), 1.0)
        assert slice_measure(d, direction(1.1), 0.0) == 0.0
        assert slice_measure(d, direction(1.1), 1.0) == pytest.approx(2.0)

    def test_disk_chord_law_vs_sampling(self):
        d = Disk(np.array([0.2, 0.1]), 0.7)
        om = direction(0.5)
        for s in (0.1, 0.35, 0.9):
            expected = 2 * math.sqrt(2 * 0.7 * s - s * s)
            assert slice_measure(d, om, s) == pytest.approx(expected, rel=1e-10)

    def test_cone_fixture_slice(self):
        om = Direction(np.array([0.0, -1.0]))
        # slice at depth s below the tip: x2 = s, x1 in (s/2, s)
        assert slice_measure(CONE, om, 0.1) == pytest.approx(0.05, rel=1e-6)

    def test_negative_depth_rejected(self):
        with pytest.raises(ValueError):
            slice_measure(SQUARE, direction(0.0), -0.1)

    def test_beyond_width_is_zero(self):
        assert slice_measure(SQUARE, direction(0.0), 2.5) == 0.0

    @pytest.mark.parametrize("shape,area", [
        (Disk(np.array([0.1, -0.3]), 0.6), math.pi * 0.36),
        (SQUARE, 4.0),
        (Ellipse(np.zeros(2), (0.8, 0.3), 0.9), math.pi * 0.24),
        (CONE, 0.5 * (CONE.ANGLE_HI - CONE.ANGLE_LO)),
    ])
    def test_fubini_recovers_area(self, shape, area):
        om = direction(0.4)
        w = width(shape, om)
        val, _ = quad(lambda s: slice_measure(shape, om, s), 0, w, limit=300)
        assert val == pytest.approx(area, rel=1e-4)


class TestPRegularity:
    def test_disk_is_three_halves(self):
        d = Disk(np.zeros(2), 0.4)
        prof = estimate_p_regularity(d, direction(0.2), s_max=0.1)
        assert prof.fitted_p == pytest.approx(1.5, abs=0.05)

    def test_cone_fixture_is_two(self):
        prof = estimate_p_regularity(CONE, Direction(np.array([0.0, -1.0])),
                                     s_max=0.05)
        assert prof.fitted_p == pytest.approx(2.0, abs=0.05)

    def test_square_flat_side_is_one(self):
        prof = estimate_p_regularity(SQUARE, direction(0.0), s_max=0.3)
        assert prof.fitted_p == pytest.approx(1.0, abs=0.02)

    def test_degenerate_direction_raises(self):
        # slices above the tip in the upward direction leave the sector
        with pytest.raises((DegenerateSlices, ValueError)):
            estimate_p_regularity(CONE, Direction(np.array([0.0, -1.0])),
                                  s_max=-1.0)

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            estimate_p_regularity(SQUARE, direction(0.0), s_max=0.3, n=4)


class TestExponentialNormRatio:
    def test_tau_zero_gives_sqrt_area(self):
        d = Disk(np.zeros(2), 0.5)
        assert l1_l2_ratio(d, direction(0.9), 0.0) == pytest.approx(
            math.sqrt(math.pi * 0.25), rel=1e-8)

    def test_ratio_decays_with_tau(self):
        d = Disk(np.zeros(2), 0.3)
        om = direction(0.0)
        assert l1_l2_ratio(d, om, 40.0) < l1_l2_ratio(d, om, 10.0)

    def test_brute_force_oracle(self):
        # dense masked midpoint grid on the bounding box
        d = Disk(np.array([0.05, -0.1]), 0.3)
        om = direction(0.3)
        tau = 8.0
        n = 1600
        x0, y0, x1, y1 = d.bbox()
        xs = np.linspace(x0, x1, n)
        ys = np.linspace(y0, y1, n)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        pts = np.column_stack([X.ravel(), Y.ravel()])
        inside = d.contains(pts)
        h = support_function(d, om)
        f = np.exp(-tau * (h - pts[inside] @ om.omega))
        cell = (xs[1] - xs[0]) * (ys[1] - ys[0])
        l1 = f.sum() * cell
        l2 = math.sqrt((f ** 2).sum() * cell)
        assert l1_l2_ratio(d, om, tau) == pytest.approx(l1 / l2, rel=2e-3)

    def test_rate_bounded_after_half_power(self):
        # ratio(tau) * sqrt(tau) stays bounded on [10, 200] (the actual
        # disk rate is tau^{-3/4}, so the product decreases)
        d = Disk(np.zeros(2), 0.3)
        om = direction(0.0)
        vals = [l1_l2_ratio(d, om, t) * math.sqrt(t) for t in np.geomspace(10, 200, 6)]
        assert max(vals) <= vals[0] * 1.01
        assert min(vals) > 0

    def test_monotone_band_all_shapes(self):
        for shape in (Disk(np.zeros(2), 0.3), SQUARE, CONE):
            om = direction(0.0) if not isinstance(shape, ConeSectorCap) \
                else Direction(np.array([0.0, -1.0]))
            for tau in (10.0, 20.0, 40.0):
                assert l1_l2_ratio(shape, om, 4 * tau) < l1_l2_ratio(shape, om, tau)
                assert l1_l2_ratio(shape, om, tau) > 0


class TestWeightedLowerBound:
    def test_disk_bounded_below_over_sweep(self):
        d = Disk(np.zeros(2), 0.4)
        om = direction(0.1)
        vals = [weighted_l2_lower_bound(d, om, t, 1.5) for t in np.geomspace(10, 200, 8)]
        assert min(vals) > 0.5 * vals[0]

    def test_cone_bounded_below(self):
        om = Direction(np.array([0.0, -1.0]))
        vals = [weighted_l2_lower_bound(CONE, om, t, 2.0) for t in np.geomspace(10, 200, 8)]
        assert min(vals) > 0.5 * vals[0]

    def test_small_tau_limit_vanishes(self):
        d = Disk(np.zeros(2), 0.4)
        om = direction(0.0)
        b = weighted_l2_lower_bound(d, om, 1e-4, 1.5)
        # b -> tau^{p/2} sqrt(area) -> 0 in the small-tau limit
        assert b == pytest.approx((1e-4) ** 0.75 * math.sqrt(d.area()), rel=1e-3)
        assert b < 1e-3

    def test_invalid_arguments(self):
        d = Disk(np.zeros(2), 0.4)
        with pytest.raises(ValueError):
            weighted_l2_lower_bound(d, direction(0.0), -1.0, 1.5)
        with pytest.raises(ValueError):
            weighted_l2_lower_bound(d, direction(0.0), 1.0, 0.5)
