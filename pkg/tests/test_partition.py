"""Cell residualization, conditional bounds, and cell-function recovery."""

import numpy as np
import pytest
from scipy.stats import norm

from radialreg.empdist import centered_empirical, superquantile_curve, scale
from radialreg.partition import (
    TwoSampleDataset,
    conditional_moments,
    f_set,
    interaction_radial,
    residualize,
    s_bar,
    short_r2,
)
from radialreg.radial import dominance_check, s_epsilon


def two_cell_dataset(n=400, seed=0, gamma0=1.0, beta0=1.0):
    rng = np.random.default_rng(seed)

    def draw(m):
        xc = rng.integers(0, 2, m)
        xnc = rng.normal(0, 1, m) + 0.5 * xc
        return xc, xnc

    xc_y, xnc_y = draw(n)
    y = gamma0 * xc_y + beta0 * xnc_y + rng.normal(0, 1, n)
    xc_x, xnc_x = draw(n)
    return TwoSampleDataset(y=y, y_xc=xc_y, x_nc=xnc_x, x_xc=xc_x)


class TestDataset:
    def test_effective_size_formula(self):
        ds = TwoSampleDataset.without_common(np.arange(20.0), np.arange(30.0))
        assert ds.n == pytest.approx(600 / 50)

    def test_support_union(self):
        ds = TwoSampleDataset(y=[1.0, 2.0], y_xc=[0, 1], x_nc=[3.0, 4.0], x_xc=[1, 2])
        assert ds.xc_support == [0, 1, 2]

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            TwoSampleDataset(y=[1.0], y_xc=[0, 1], x_nc=[1.0], x_xc=[0])


class TestResidualize:
    def test_single_cell_is_global_centering(self):
        rng = np.random.default_rng(1)
        y = rng.normal(3, 1, 50)
        x = rng.normal(-1, 1, 60)
        ds = TwoSampleDataset.without_common(y, x)
        part = residualize(ds, min_cell=1)
        assert len(part.cells) == 1
        np.testing.assert_allclose(part.cells[0].y_centered, y - y.mean())
        np.testing.assert_allclose(part.cells[0].x_centered[:, 0], x - x.mean())

    def test_within_cell_means_zero(self):
        ds = two_cell_dataset(seed=2)
        part = residualize(ds, min_cell=5)
        for c in part.cells:
            assert abs(c.y_centered.mean()) < 1e-10
            assert np.all(np.abs(c.x_centered.mean(axis=0)) < 1e-10)

    def test_min_cell_exclusion_recorded(self):
        ds = TwoSampleDataset(
            y=np.arange(12, dtype=float), y_xc=np.array([0] * 10 + [1] * 2),
            x_nc=np.arange(12, dtype=float), x_xc=np.array([0] * 10 + [1] * 2),
        )
        part = residualize(ds, min_cell=5)
        assert [c.value for c in part.cells] == [0]
        assert part.excluded[0][0] == 1 and part.excluded[0][1] == "below min_cell"

    def test_one_sided_cell_excluded(self):
        ds = TwoSampleDataset(
            y=np.arange(10, dtype=float), y_xc=np.array([0] * 10),
            x_nc=np.arange(10, dtype=float), x_xc=np.array([0] * 5 + [2] * 5),
        )
        part = residualize(ds, min_cell=2)
        assert [c.value for c in part.cells] == [0]
        assert any(e[1] == "absent in one sample" for e in part.excluded)

    def test_no_cell_left_raises(self):
        ds = two_cell_dataset(n=8, seed=3)
        with pytest.raises(ValueError):
            residualize(ds, min_cell=50)

    def test_cell_shares_match_normal_mass(self):
        # the binary threshold design: cell share approx Phi(0.3)
        rng = np.random.default_rng(4)
        n = 200_000
        n1 = rng.normal(0, 1, n)
        xc = (n1 <= 0.3).astype(int)
        ds = TwoSampleDataset(y=rng.normal(0, 1, n), y_xc=xc,
                              x_nc=rng.normal(0, 1, n), x_xc=xc)
        m = conditional_moments(ds)
        share_1 = m.p_y[m.values.index(1)]
        assert share_1 == pytest.approx(norm.cdf(0.3), abs=0.01)


class TestSBar:
    def test_single_cell_reduction(self):
        rng = np.random.default_rng(5)
        x = rng.normal(0, 1.5, 300)
        y = x + rng.normal(0, 1, 300)
        ds = TwoSampleDataset.without_common(y, rng.normal(0, 1.5, 300))
        part = residualize(ds, min_cell=1)
        rv = s_bar(part, [1.0], epsilon=0.2)
        F = superquantile_curve(centered_empirical(y))
        G = superquantile_curve(centered_empirical(ds.x_nc[:, 0] - ds.x_nc.mean()))
        assert rv.value == pytest.approx(s_epsilon(F, G, 0.2).value, abs=1e-12)

    def test_min_over_cells_oracle(self):
        ds = two_cell_dataset(seed=6)
        part = residualize(ds, min_cell=5)
        per_cell = []
        for c in part.cells:
            F = superquantile_curve(centered_empirical(c.y_centered))
            G = superquantile_curve(centered_empirical(c.x_centered[:, 0]))
            per_cell.append(s_epsilon(F, G, 0.1).value)
        rv = s_bar(part, [1.0], epsilon=0.1)
        assert rv.value == pytest.approx(min(per_cell), abs=1e-12)
        assert rv.cell == part.cells[int(np.argmin(per_cell))].value

    def test_below_each_cell_value(self):
        ds = two_cell_dataset(seed=7)
        part = residualize(ds, min_cell=5)
        rv = s_bar(part, [-1.0], epsilon=0.25)
        for c in part.cells:
            F = superquantile_curve(centered_empirical(c.y_centered))
            G = superquantile_curve(centered_empirical(-c.x_centered[:, 0]))
            assert rv.value <= s_epsilon(F, G, 0.25).value + 1e-12


class TestFSet:
    def test_zero_coefficient_recovers_cell_means(self):
        ds = two_cell_dataset(seed=8)
        m = conditional_moments(ds)
        out = f_set(m, np.zeros((1, 1)))
        for j, v in enumerate(m.values):
            assert out["f"][v] == (pytest.approx(m.m_y[j]), pytest.approx(m.m_y[j]))

    def test_hand_arithmetic_binary(self):
        class M:
            values = [0, 1]
            m_y = np.array([1.0, 3.0])
            m_x = np.array([[2.0], [1.0]])

        out = f_set(M, np.array([[1.0]]))
        assert out["f"][0] == (pytest.approx(-1.0), pytest.approx(-1.0))
        assert out["f"][1] == (pytest.approx(2.0), pytest.approx(2.0))
        assert out["gamma"][1] == (pytest.approx(3.0), pytest.approx(3.0))

    def test_point_identified_reproduction(self):
        ds = two_cell_dataset(seed=9)
        m = conditional_moments(ds)
        beta = np.array([[0.7]])
        out = f_set(m, beta)
        for j, v in enumerate(m.values):
            expect = m.m_y[j] - 0.7 * m.m_x[j, 0]
            assert out["f"][v][0] == pytest.approx(expect, abs=1e-12)

    def test_empty_set_rejected(self):
        ds = two_cell_dataset(seed=10)
        m = conditional_moments(ds)
        with pytest.raises(ValueError):
            f_set(m, np.empty((0, 1)))


class TestInteraction:
    def test_no_interaction_direction_reduces_to_s_bar(self):
        ds = two_cell_dataset(seed=11)
        part = residualize(ds, min_cell=5)
        x1_of_cell = {0: 0.0, 1: 1.0}
        q = np.array([0.0, 1.0])
        rv = interaction_radial(part, x1_of_cell, q, epsilon=0.2)
        assert rv.value == pytest.approx(s_bar(part, [1.0], 0.2).value, abs=1e-12)

    def test_direct_min_oracle(self):
        ds = two_cell_dataset(seed=12)
        part = residualize(ds, min_cell=5)
        x1_of_cell = {0: 0.0, 1: 1.0}
        q = np.array([0.6, 0.8])
        rv = interaction_radial(part, x1_of_cell, q, epsilon=0.1)
        vals = []
        for c in part.cells:
            v = np.array([0.8 + x1_of_cell[c.value] * 0.6])
            nrm = np.linalg.norm(v)
            F = superquantile_curve(centered_empirical(c.y_centered))
            G = superquantile_curve(centered_empirical(c.x_centered @ (v / nrm)))
            vals.append(s_epsilon(F, G, 0.1).value / nrm)
        assert rv.value == pytest.approx(min(vals), abs=1e-12)

    def test_single_support_point_rejected(self):
        ds = two_cell_dataset(seed=13)
        part = residualize(ds, min_cell=5)
        with pytest.raises(ValueError):
            interaction_radial(part, {0: 1.0, 1: 1.0}, np.array([1.0, 0.0]), 0.2)

    def test_true_point_inside_at_large_n(self):
        # interaction coefficient zero: (0, beta0) passes the per-cell
        # dominance check at every cell
        ds = two_cell_dataset(n=20_000, seed=14, beta0=1.0)
        part = residualize(ds, min_cell=5)
        for c in part.cells:
            F = centered_empirical(c.y_centered)
            G = centered_empirical(c.x_centered[:, 0])
            assert dominance_check(F, scale(G, 1.0))


class TestShortR2:
    def test_constant_common_regressor(self):
        rng = np.random.default_rng(15)
        ds = TwoSampleDataset.without_common(rng.normal(0, 1, 80), rng.normal(0, 1, 80))
        assert short_r2(ds, min_cell=1) == pytest.approx(0.0, abs=1e-12)

    def test_fully_explained(self):
        y = np.array([-1.0] * 10 + [1.0] * 10)
        xc = np.array([0] * 10 + [1] * 10)
        ds = TwoSampleDataset(y=y, y_xc=xc, x_nc=np.arange(20, dtype=float), x_xc=xc)
        assert short_r2(ds, min_cell=2) == pytest.approx(1.0, abs=1e-12)

    def test_matches_monte_carlo_decomposition(self):
        rng = np.random.default_rng(16)
        n = 100_000
        Sig = np.array([[1.0, 0.8], [0.8, 1.5]])
        L = np.linalg.cholesky(Sig)
        N = rng.standard_normal((n, 2)) @ L.T
        xc = (N[:, 0] <= 0.3).astype(int)
        y = 0.3 * xc + N[:, 1] + rng.normal(0, 2, n)
        ds = TwoSampleDataset(y=y, y_xc=xc, x_nc=N[:, 1], x_xc=xc)
        # direct decomposition oracle on an independent draw
        N2 = rng.standard_normal((n, 2)) @ L.T
        xc2 = (N2[:, 0] <= 0.3).astype(int)
        y2 = 0.3 * xc2 + N2[:, 1] + rng.normal(0, 2, n)
        m1 = y2[xc2 == 1].mean()
        m0 = y2[xc2 == 0].mean()
        p1 = xc2.mean()
        between = p1 * (m1 - y2.mean()) ** 2 + (1 - p1) * (m0 - y2.mean()) ** 2
        assert short_r2(ds) == pytest.approx(between / y2.var(), abs=0.01)

    def test_degenerate_outcome_rejected(self):
        ds = TwoSampleDataset.without_common(np.ones(30), np.arange(30, dtype=float))
        with pytest.raises(ValueError):
            short_r2(ds, min_cell=1)
