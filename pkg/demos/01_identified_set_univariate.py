"""What can two unlinked samples say about a single regression slope?

We observe Y in one dataset and X in another, never together.  Every slope
b such that b*X could have produced Y's distribution (in the convex-order
sense) is admissible; this demo traces that interval for a thin-tailed and
a fat-tailed design and compares it with the crude variance bound.
"""

import numpy as np

from radialreg import centered_empirical, s_epsilon, superquantile_curve, variance_ellipsoid

rng = np.random.default_rng(42)
n = 50_000

print("=== Normal design: Y = X + U, X ~ N(0, 1.5^2), U ~ N(0,1) ===")
x_draws = rng.normal(0, 1.5, n)
y = x_draws + rng.normal(0, 1, n)
x = rng.normal(0, 1.5, n)  # the second, unlinked sample

F = superquantile_curve(centered_empirical(y))
G_plus = superquantile_curve(centered_empirical(x))
G_minus = superquantile_curve(centered_empirical(-x))

for eps in (0.45, 0.25, 0.05, 0.005):
    up = s_epsilon(F, G_plus, eps).value
    lo = -s_epsilon(F, G_minus, eps).value
    print(f"  trim eps={eps:<6}: admissible slopes [{lo:+.4f}, {up:+.4f}]")

bench = variance_ellipsoid(y, x[:, None])
print(f"  variance benchmark: +-{bench.radius([1.0]):.4f}")
print("  (normal case: the sharp set and the variance bound coincide, ~1.2019)")

print("\n=== Gamma design: X ~ Gamma(1, 2), U ~ Gamma(0.4, 2) ===")
xg_draws = rng.gamma(1.0, 2.0, n)
yg = xg_draws + rng.gamma(0.4, 2.0, n)
xg = rng.gamma(1.0, 2.0, n)

Fg = superquantile_curve(centered_empirical(yg))
Gg_plus = superquantile_curve(centered_empirical(xg))
Gg_minus = superquantile_curve(centered_empirical(-xg))

for eps in (0.45, 0.25, 0.05, 0.005):
    up = s_epsilon(Fg, Gg_plus, eps).value
    lo = -s_epsilon(Fg, Gg_minus, eps).value
    print(f"  trim eps={eps:<6}: admissible slopes [{lo:+.4f}, {up:+.4f}]")

bench_g = variance_ellipsoid(yg, xg[:, None])
print(f"  variance benchmark: +-{bench_g.radius([1.0]):.4f}")
print("  (skewness bites: higher moments shrink the set far below the variance bound,")
print("   and the set keeps shrinking as the trim vanishes)")
