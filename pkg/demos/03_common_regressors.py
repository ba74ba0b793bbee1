"""A covariate recorded in both datasets tightens everything.

Splitting both samples on the shared discrete covariate and re-centering
within cells removes its influence; the admissible set becomes the
intersection of the per-cell sets (the minimum of the cell bounds per
direction).  The cell function itself is then recovered from the slope set.
"""

import numpy as np

from radialreg import (
    TwoSampleDataset,
    conditional_moments,
    f_set,
    residualize,
    s_bar,
    short_r2,
)

rng = np.random.default_rng(11)
n = 40_000
Sigma = np.array([[1.0, 0.8], [0.8, 1.5]])
L = np.linalg.cholesky(Sigma)


def draw(m):
    N = rng.standard_normal((m, 2)) @ L.T
    return (N[:, 0] <= 0.3).astype(int), N[:, 1]


cell_y, xnc_y = draw(n)
y = 0.3 * cell_y + 1.0 * xnc_y + rng.normal(0, 2.0, n)
cell_x, xnc_x = draw(n)
data = TwoSampleDataset(y=y, y_xc=cell_y, x_nc=xnc_x, x_xc=cell_x)

print(f"outcome rows {data.n_y}, covariate rows {data.n_x}, "
      f"effective size {data.n:.0f}")
print(f"share of outcome variance explained by the cell alone: {short_r2(data):.3f}")

cells = residualize(data)
for c in cells.cells:
    print(f"  cell {c.value}: n_y={c.n_y}, n_x={c.n_x}, "
          f"mean_y={c.m_y:+.3f}, mean_x={c.m_x[0]:+.3f}")

up = s_bar(cells, [1.0], epsilon=0.45)
lo = s_bar(cells, [-1.0], epsilon=0.45)
print(f"\nslope set with cell conditioning: [{-lo.value:.4f}, {up.value:.4f}]"
      f"   (binding cell: {up.cell})")

pooled = TwoSampleDataset.without_common(y, xnc_x)
up_pooled = s_bar(residualize(pooled, min_cell=1), [1.0], epsilon=0.45)
print(f"ignoring the shared covariate would give:  +-{up_pooled.value:.4f}")

moments = conditional_moments(data)
recovered = f_set(moments, np.array([[-lo.value], [up.value]]))
print("\ncell-function ranges over the slope set:")
for cell, (f_lo, f_hi) in recovered["f"].items():
    print(f"  f({cell}) in [{f_lo:+.4f}, {f_hi:+.4f}]")
g_lo, g_hi = recovered["gamma"][1]
print(f"cell contrast f(1)-f(0) in [{g_lo:+.4f}, {g_hi:+.4f}]  (truth: +0.30)")
