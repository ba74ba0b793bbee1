"""Ratio minimization, the dominance oracle, and their agreement."""

import numpy as np
import pytest

from radialreg.empdist import centered_empirical, superquantile_curve
from radialreg.radial import (
    dominance_check,
    ratio_R,
    s_epsilon,
    s_oracle_bisection,
    s_unregularized,
)


def curve(xs):
    return superquantile_curve(centered_empirical(xs))


TWO_POINT_Y = [-1.0, 1.0]
TWO_POINT_X = [-2.0, 2.0]


class TestRatio:
    def test_identical_curves(self):
        F = curve(TWO_POINT_Y)
        for a in (0.1, 0.37, 0.5, 0.93):
            assert ratio_R(a, F, F) == pytest.approx(1.0, abs=1e-14)

    def test_hand_integration_pair(self):
        F, G = curve(TWO_POINT_Y), curve(TWO_POINT_X)
        assert ratio_R(0.25, F, G) == pytest.approx(0.5, abs=1e-14)
        assert ratio_R(0.75, F, G) == pytest.approx(0.5, abs=1e-14)

    def test_endpoints_rejected(self):
        F, G = curve(TWO_POINT_Y), curve(TWO_POINT_X)
        for a in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(ValueError):
                ratio_R(a, F, G)


class TestSEpsilon:
    def test_constant_ratio(self):
        F, G = curve(TWO_POINT_Y), curve(TWO_POINT_X)
        for eps in (0.01, 0.1, 0.3, 0.49):
            assert s_epsilon(F, G, eps).value == pytest.approx(0.5, abs=1e-14)

    def test_identity(self):
        F = curve([0.3, 1.0, 2.5])
        assert s_epsilon(F, F, 0.2).value == pytest.approx(1.0, abs=1e-14)

    def test_tie_breaks_to_smallest_alpha(self):
        F = curve(TWO_POINT_Y)
        rv = s_epsilon(F, F, 0.1)
        assert rv.argmin_alpha == pytest.approx(0.1)

    def test_value_matches_ratio_at_argmin(self):
        rng = np.random.default_rng(0)
        F = curve(rng.normal(0, 1, 60))
        G = curve(rng.normal(0, 2, 45))
        rv = s_epsilon(F, G, 0.05)
        assert rv.value == pytest.approx(ratio_R(rv.argmin_alpha, F, G), abs=1e-12)

    def test_epsilon_domain(self):
        F = curve(TWO_POINT_Y)
        for eps in (0.0, 0.5, 0.7, -0.1):
            with pytest.raises(ValueError):
                s_epsilon(F, F, eps)

    def test_monotone_in_epsilon(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            F = curve(rng.normal(0, 1, 30))
            G = curve(rng.gamma(2.0, 1.0, 30))
            vals = [s_epsilon(F, G, e).value
                    for e in (0.01, 0.05, 0.1, 0.2, 0.3, 0.45)]
            assert np.all(np.diff(vals) >= -1e-12)

    def test_scale_equivariance(self):
        rng = np.random.default_rng(9)
        y = rng.normal(0, 1, 50)
        x = rng.normal(0, 1.5, 40)
        F = curve(y)
        for c in (0.5, 2.0, 7.3):
            base = s_epsilon(F, curve(x), 0.1).value
            scaled = s_epsilon(F, curve(c * x), 0.1).value
            assert scaled == pytest.approx(base / c, rel=1e-12)

    def test_knot_exactness_against_grid(self):
        rng = np.random.default_rng(13)
        for _ in range(30):
            F = curve(rng.normal(0, 1, rng.integers(5, 80)))
            G = curve(rng.gamma(1.5, 1.0, rng.integers(5, 80)))
            eps = 0.02
            rv = s_epsilon(F, G, eps)
            grid = np.linspace(eps, 1 - eps, 2001)
            grid_vals = F(grid) / G(grid)
            assert rv.value <= grid_vals.min() + 1e-12


class TestDominance:
    def test_equality_case(self):
        F = centered_empirical(TWO_POINT_Y)
        assert dominance_check(F, F)

    def test_inside_point(self):
        F = centered_empirical(TWO_POINT_Y)
        assert dominance_check(F, centered_empirical([-0.6, 0.6]))

    def test_outside_point(self):
        F = centered_empirical(TWO_POINT_Y)
        assert not dominance_check(F, centered_empirical([-1.2, 1.2]))

    def test_requires_centering(self):
        with pytest.raises(ValueError):
            dominance_check(centered_empirical([0.0, 1.0, 2.0]),
                            centered_empirical([1.0, 3.0]).__class__(
                                values=np.array([1.0, 3.0]),
                                weights=np.array([0.5, 0.5]),
                                mean=2.0, count=2))


class TestOracle:
    def test_two_point_scaling(self):
        F = centered_empirical(TWO_POINT_Y)
        G = centered_empirical(TWO_POINT_X)
        assert s_oracle_bisection(F, G, 1e-10) == pytest.approx(0.5, abs=1e-9)

    def test_identity(self):
        F = centered_empirical([-1.0, 0.0, 2.0])
        assert s_oracle_bisection(F, F, 1e-10) == pytest.approx(1.0, abs=1e-9)

    def test_tol_validated(self):
        F = centered_empirical(TWO_POINT_Y)
        with pytest.raises(ValueError):
            s_oracle_bisection(F, F, 0.0)

    def test_degenerate_rejected(self):
        F = centered_empirical(TWO_POINT_Y)
        with pytest.raises(ValueError):
            s_oracle_bisection(F, centered_empirical([2.0, 2.0]), 1e-6)

    def test_agrees_with_full_knot_minimum(self):
        rng = np.random.default_rng(21)
        for _ in range(60):
            y = rng.normal(0, 1, rng.integers(3, 30))
            x = rng.normal(0, 1.3, rng.integers(3, 30))
            if len(set(y)) < 2 or len(set(x)) < 2:
                continue
            Fd, Gd = centered_empirical(y), centered_empirical(x)
            knot = s_unregularized(superquantile_curve(Fd), superquantile_curve(Gd))
            bisect = s_oracle_bisection(Fd, Gd, 1e-11)
            assert bisect == pytest.approx(knot.value, abs=1e-9)

    def test_membership_boundary_equivalence(self):
        from radialreg.empdist import scale

        rng = np.random.default_rng(30)
        for _ in range(40):
            y = rng.gamma(2.0, 1.0, rng.integers(4, 25))
            x = rng.normal(0, 1, rng.integers(4, 25))
            if len(set(y)) < 2 or len(set(x)) < 2:
                continue
            Fd, Gd = centered_empirical(y), centered_empirical(x)
            s = s_oracle_bisection(Fd, Gd, 1e-12)
            assert dominance_check(Fd, scale(Gd, max(s - 1e-9, 0.0)))
            assert not dominance_check(Fd, scale(Gd, s + 1e-9))
