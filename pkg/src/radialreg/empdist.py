"""Empirical distributions and exact superquantile-integral curves.

The curve alpha -> integral of the quantile function over [alpha, 1] is the
basic object everything else is built from: for an empirical distribution it
is piecewise linear with knots at the cumulative weights, so it can be stored
exactly and evaluated by linear interpolation.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EmpiricalDist",
    "SuperquantileCurve",
    "build_empirical",
    "center",
    "centered_empirical",
    "scale",
    "superquantile_curve",
    "quantile",
]

_WEIGHT_TOL = 1e-12
_MEAN_TOL = 1e-12


@dataclass(frozen=True)
class EmpiricalDist:
    """Discrete distribution with distinct sorted support and probability weights.

    Attributes
    ----------
    values : ndarray
        Strictly increasing support points.
    weights : ndarray
        Positive weights summing to one.
    mean : float
        Weighted mean of ``values``.
    count : int
        Number of raw observations the distribution was built from.
    """

    values: np.ndarray
    weights: np.ndarray
    mean: float
    count: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        values.setflags(write=False)
        weights.setflags(write=False)
        if values.ndim != 1 or weights.shape != values.shape or values.size == 0:
            raise ValueError("values and weights must be matching non-empty 1-d arrays")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if values.size > 1 and not np.all(np.diff(values) > 0):
            raise ValueError("values must be strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if abs(weights.sum() - 1.0) > _WEIGHT_TOL:
            raise ValueError("weights must sum to 1")
        if abs(self.mean - float(weights @ values)) > _MEAN_TOL:
            raise ValueError("mean inconsistent with weighted average of values")

    @property
    def variance(self) -> float:
        dev = self.values - self.mean
        return float(self.weights @ (dev * dev))

    @property
    def is_degenerate(self) -> bool:
        return self.values.size == 1


@dataclass(frozen=True)
class SuperquantileCurve:
    """Piecewise-linear curve alpha -> integral over [alpha, 1] of the quantile.

    Built for a centered distribution, so the curve is 0 at both ends,
    concave, and strictly positive on the interior.
    """

    knots: np.ndarray
    curve_values: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        vals = np.asarray(self.curve_values, dtype=float)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "curve_values", vals)
        knots.setflags(write=False)
        vals.setflags(write=False)
        if knots.shape != vals.shape or knots.ndim != 1 or knots.size < 3:
            raise ValueError("need matching 1-d knot/value arrays with interior knots")
        if knots[0] != 0.0 or knots[-1] != 1.0:
            raise ValueError("knots must start at 0 and end at 1")
        if not np.all(np.diff(knots) > 0):
            raise ValueError("knots must be strictly increasing")
        if vals[0] != 0.0 or vals[-1] != 0.0:
            raise ValueError("curve must vanish at 0 and 1 (centered distribution)")

    def __call__(self, alpha) -> np.ndarray:
        """Evaluate the curve by linear interpolation (exact between knots)."""
        return np.interp(alpha, self.knots, self.curve_values)

    @property
    def interior_knots(self) -> np.ndarray:
        return self.knots[1:-1]

    def tail_slopes(self) -> tuple[float, float]:
        """Slopes at the two ends: (-min value, -max value) of the distribution.

        The curve behaves like ``-v_min * alpha`` near 0 and
        ``v_max * (1 - alpha)`` near 1; these drive the limit ratios of two
        curves at the trimmed-out tails.
        """
        left = (self.curve_values[1] - 0.0) / (self.knots[1] - 0.0)
        right = (0.0 - self.curve_values[-2]) / (1.0 - self.knots[-2])
        return float(left), float(right)


def build_empirical(sample) -> EmpiricalDist:
    """Build an empirical distribution, merging duplicate observations into weights."""
    arr = np.asarray(sample, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("sample is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sample contains non-finite values")
    values, counts = np.unique(arr, return_counts=True)
    weights = counts / arr.size
    mean = float(weights @ values)
    return EmpiricalDist(values=values, weights=weights, mean=mean, count=int(arr.size))


def center(dist: EmpiricalDist) -> EmpiricalDist:
    """Shift the distribution so it has mean zero; idempotent on centered input.

    Values that collide after the shift (distinct only below one ulp of the
    mean) are merged, keeping the support strictly increasing.
    """
    scale_ = float(np.abs(dist.values).max())
    if abs(dist.mean) <= 1.4e-14 * scale_:  # mean is summation dust
        return dist
    values = dist.values - dist.mean
    weights = dist.weights
    if np.any(np.diff(values) <= 0):
        values, inverse = np.unique(values, return_inverse=True)
        weights = np.bincount(inverse, weights=weights)
    return EmpiricalDist(
        values=values,
        weights=weights,
        mean=float(weights @ values),
        count=dist.count,
    )


def centered_empirical(sample) -> EmpiricalDist:
    """Convenience: build and center in one go."""
    return center(build_empirical(sample))


def scale(dist: EmpiricalDist, c: float) -> EmpiricalDist:
    """Distribution of c * A for A ~ dist. c = 0 collapses to a point mass."""
    if c == 0.0:
        return EmpiricalDist(
            values=np.zeros(1), weights=np.ones(1), mean=0.0, count=dist.count
        )
    values = dist.values * c
    weights = dist.weights
    if c < 0:
        values = values[::-1].copy()
        weights = weights[::-1].copy()
    return EmpiricalDist(
        values=values, weights=weights, mean=float(weights @ values), count=dist.count
    )


def superquantile_curve(dist: EmpiricalDist) -> SuperquantileCurve:
    """Exact curve of the tail-quantile integral for a centered distribution.

    Knots are {0} plus the cumulative weights plus {1}; the value at an
    interior knot equals the weighted sum of the support points above it,
    see the partial-sum identity for sorted distinct values.
    """
    if abs(dist.mean) > 1e-10:
        raise ValueError("distribution must be centered (|mean| <= 1e-10)")
    if dist.is_degenerate:
        raise ValueError("degenerate single-value distribution has no curve")
    cumw = np.cumsum(dist.weights)
    wz = dist.weights * dist.values
    # tail sums: tail[i] = sum_{j >= i} w_j v_j
    tail = np.cumsum(wz[::-1])[::-1]
    knots = np.concatenate(([0.0], cumw[:-1], [1.0]))
    vals = np.concatenate(([0.0], tail[1:], [0.0]))
    return SuperquantileCurve(knots=knots, curve_values=vals)


def quantile(dist: EmpiricalDist, t: float) -> float:
    """Generalized inverse of the step cdf: inf{x : F(x) >= t}, for t in (0, 1]."""
    if not 0.0 < t <= 1.0:
        raise ValueError("t must lie in (0, 1]")
    cumw = np.cumsum(dist.weights)
    cumw[-1] = 1.0
    idx = int(np.searchsorted(cumw, t, side="left"))
    return float(dist.values[min(idx, dist.values.size - 1)])
