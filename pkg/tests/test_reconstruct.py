import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enclosure2d.errors import (EmptyIntersection, NoBracket, NonPositivePart,
                                TooFewReliable)
from enclosure2d.geometry import Direction, Disk
from enclosure2d.indicator import IndicatorSample, IndicatorSeries
from enclosure2d.reconstruct import (HullPolygon, SupportEstimate,
                                     assemble_hull, extract_support,
                                     hausdorff_to_shape, prefactor_fit,
                                     threshold_characterization)

E1 = Direction(np.array([1.0, 0.0]))
RECT = (-1.0, -1.0, 1.0, 1.0)


def synthetic_series(fn, taus=np.linspace(10, 40, 16), direction=E1):
    samples = tuple(IndicatorSample(float(t), complex(fn(t))) for t in taus)
    return IndicatorSeries(direction, samples, "PENETRABLE")


class TestExtractSupport:
    def test_known_rate_with_prefactor(self):
        # the t^-2 prefactor biases the finite-tau slope by p/(2 tau_bar)
        # ~= 0.031 for the top-half window of [10, 40]
        series = synthetic_series(lambda t: math.exp(2 * t * 0.5) * t ** -2)
        est = extract_support(series, "RE")
        assert est.h_hat == pytest.approx(0.5, abs=0.035)
        assert est.h_hat < 0.5
        assert est.r2 > 0.999

    def test_dominant_term_wins(self):
        series = synthetic_series(
            lambda t: math.exp(2 * t * 0.5) + math.exp(2 * t * 0.3))
        est = extract_support(series, "RE")
        assert est.h_hat == pytest.approx(0.5, abs=0.01)

    def test_prefactor_fit_recovers_both(self):
        series = synthetic_series(lambda t: math.exp(2 * t * 0.4) * t ** -1.5)
        h, p = prefactor_fit(series, "RE")
        assert h == pytest.approx(0.4, abs=1e-6)
        assert p == pytest.approx(1.5, abs=1e-4)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(min_value=1e-6, max_value=1e6))
    def test_scaling_invariance(self, c):
        base = synthetic_series(lambda t: math.exp(2 * t * 0.37) * t ** -1)
        scaled = synthetic_series(lambda t: c * math.exp(2 * t * 0.37) * t ** -1)
        e0 = extract_support(base, "RE")
        e1 = extract_support(scaled, "RE")
        assert abs(e0.h_hat - e1.h_hat) < 1e-9

    def test_too_few_reliable(self):
        samples = (IndicatorSample(1.0, 1.0 + 0j, floor=10.0),
                   IndicatorSample(2.0, 1.0 + 0j, floor=10.0),
                   IndicatorSample(3.0, 1.0 + 0j, floor=0.0))
        series = IndicatorSeries(E1, samples, "PENETRABLE")
        with pytest.raises(TooFewReliable):
            extract_support(series, "RE")

    def test_vanishing_part(self):
        series = synthetic_series(lambda t: 1j * math.exp(t))  # Re == 0
        with pytest.raises(NonPositivePart):
            extract_support(series, "RE")


class TestThreshold:
    def test_synthetic_threshold(self):
        series = synthetic_series(lambda t: math.exp(2 * t * 0.5))
        grid = np.linspace(0.0, 1.0, 21)
        t_star = threshold_characterization(series, "RE", grid)
        above = [t for t in grid if t > 0.5]
        assert t_star == pytest.approx(min(above), abs=1e-12)

    def test_agreement_with_slope(self):
        series = synthetic_series(lambda t: math.exp(2 * t * 0.42) * t ** -1.5)
        est = extract_support(series, "RE")
        grid = np.linspace(0.0, 1.0, 41)
        t_star = threshold_characterization(series, "RE", grid)
        assert abs(t_star - est.h_hat) <= (grid[1] - grid[0]) + 0.05

    def test_all_zero_series_raises(self):
        series = synthetic_series(lambda t: 0.0)
        with pytest.raises(NoBracket):
            threshold_characterization(series, "RE", np.linspace(0, 1, 11))

    def test_no_bracket(self):
        series = synthetic_series(lambda t: math.exp(2 * t * 2.0))
        with pytest.raises(NoBracket):
            threshold_characterization(series, "RE", np.linspace(0.0, 0.5, 6))


def estimates_for(h_of_angle, n=16):
    out = []
    for j in range(n):
        ang = 2 * math.pi * j / n
        d = Direction.from_angle(ang)
        out.append(SupportEstimate(d, h_of_angle(ang), 0.0, 1.0, 6))
    return out


class TestHull:
    def test_disk_circumscribed_polygon(self):
        disk = Disk(np.zeros(2), 0.4)
        ests = estimates_for(lambda a: 0.4, 16)
        hull = assemble_hull(ests, RECT)
        # circumscribed 16-gon: vertices at r/cos(pi/16), faces tangent
        bound = 0.4 * (1 / math.cos(math.pi / 16) - 1) + 1e-9
        assert hausdorff_to_shape(hull, disk) <= bound + 1e-6

    def test_equilateral_triangle(self):
        ests = estimates_for(lambda a: 1.0, 3)
        hull = assemble_hull(ests, (-4, -4, 4, 4))
        assert len(hull.vertices) == 3
        # circumradius of the half-plane triangle with h=1 is 2
        assert np.allclose(np.linalg.norm(hull.vertices, axis=1), 2.0, atol=1e-9)

    def test_monotone_under_enlargement(self):
        ests = estimates_for(lambda a: 0.5 + 0.1 * math.cos(a), 12)
        hull = assemble_hull(ests, RECT)
        bigger = [SupportEstimate(e.direction, e.h_hat + 0.05, 0.0, 1.0, 6)
                  for e in ests]
        hull2 = assemble_hull(bigger, RECT)
        assert hull2.contains(hull.vertices).all()

    def test_idempotent(self):
        ests = estimates_for(lambda a: 0.45, 8)
        hull = assemble_hull(ests, RECT)
        again = assemble_hull(list(hull.sources), RECT)
        assert np.allclose(hull.vertices, again.vertices)

    def test_empty_intersection(self):
        bad = [SupportEstimate(Direction.from_angle(0.0), -1.0, 0.0, 1.0, 6),
               SupportEstimate(Direction.from_angle(math.pi), -1.0, 0.0, 1.0, 6),
               SupportEstimate(Direction.from_angle(1.0), 1.0, 0.0, 1.0, 6)]
        with pytest.raises(EmptyIntersection):
            assemble_hull(bad, RECT)

    def test_needs_three_distinct_directions(self):
        e = SupportEstimate(E1, 0.5, 0.0, 1.0, 6)
        with pytest.raises(ValueError):
            assemble_hull([e, e, e], RECT)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(min_value=0.05, max_value=0.5),
           st.floats(min_value=-0.3, max_value=0.3),
           st.floats(min_value=-0.3, max_value=0.3))
    def test_exact_disk_estimates_contain_disk(self, r, cx, cy):
        disk = Disk(np.array([cx, cy]), r)
        ests = estimates_for(lambda a: disk.support(
            np.array([math.cos(a), math.sin(a)])), 16)
        hull = assemble_hull(ests, (-2, -2, 2, 2))
        pts = disk.boundary(64) * 0.999 + disk.center * 0.001
        assert hull.contains(pts).all()
