"""Shape, goodness-of-fit, and sign restrictions on the identified set.

Restrictions on the cell function f (monotonicity, convexity, bounded cell
contrasts) are linear in the cell means, so each row yields a per-direction
linear inequality in the scale lambda; a floor on the long-regression R
squared yields a per-direction lower bound on lambda.  Combining restrictions
keeps the star-set representation: lower bounds take the max, upper bounds
the min, and crossing bounds mark a direction empty.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import StarSet
from .partition import ConditionalMoments

__all__ = [
    "ShapeOperator",
    "ConstraintSpec",
    "build_shape_operator",
    "shape_bounds",
    "r2_lower_bound",
    "combine",
    "combine_bounds",
    "spec_from_dict",
]


@dataclass(frozen=True)
class ShapeOperator:
    """Linear rows over cell values of f with per-row lower bounds.

    Row r encodes sum_j rows[r, j] * f(cell_j) >= lower[r].
    """

    rows: np.ndarray
    lower: np.ndarray
    labels: tuple = ()
    cell_values: tuple = ()

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        lower = np.asarray(self.lower, dtype=float).ravel()
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "lower", lower)
        if rows.shape[0] != lower.size:
            raise ValueError("one lower bound per row required")
        if not np.all(np.isfinite(rows)) or not np.all(np.isfinite(lower)):
            raise ValueError("rows and bounds must be finite")


@dataclass(frozen=True)
class ConstraintSpec:
    """Bundle of optional restrictions applied jointly."""

    shape: ShapeOperator | None = None
    r2_lower: float | None = None
    r2_relative: float | None = None
    signs: dict = field(default_factory=dict)

    def resolve_r2(self, short_r2: float) -> float | None:
        if self.r2_relative is not None:
            return float(self.r2_relative) * short_r2
        return self.r2_lower


def build_shape_operator(kind: str, xc_support, cutoff: float = 0.0) -> ShapeOperator:
    """Difference rows over ordered cells for a named restriction.

    monotone: K-1 first-difference rows >= 0.
    convex:   K-2 divided second-difference rows >= 0 (needs numeric cells).
    exclusion(cutoff): paired rows bounding each consecutive cell contrast,
    |f(x_{r+1}) - f(x_r)| <= cutoff; cutoff 0 forces f constant across cells.
    """
    values = list(xc_support)
    K = len(values)
    if kind == "monotone":
        if K < 2:
            raise ValueError("monotonicity needs at least two cells")
        rows = np.zeros((K - 1, K))
        for r in range(K - 1):
            rows[r, r] = -1.0
            rows[r, r + 1] = 1.0
        return ShapeOperator(rows, np.zeros(K - 1),
                             labels=("monotone",) * (K - 1), cell_values=tuple(values))
    if kind == "convex":
        if K < 3:
            raise ValueError("convexity needs at least three cells")
        x = np.asarray(values, dtype=float)
        rows = np.zeros((K - 2, K))
        for r in range(K - 2):
            d1 = x[r + 1] - x[r]
            d2 = x[r + 2] - x[r + 1]
            rows[r, r] = 1.0 / d1
            rows[r, r + 1] = -(1.0 / d1 + 1.0 / d2)
            rows[r, r + 2] = 1.0 / d2
        return ShapeOperator(rows, np.zeros(K - 2),
                             labels=("convex",) * (K - 2), cell_values=tuple(values))
    if kind == "exclusion":
        if K < 2:
            raise ValueError("exclusion bounds need at least two cells")
        if cutoff < 0:
            raise ValueError("exclusion cutoff must be nonnegative")
        rows = np.zeros((2 * (K - 1), K))
        for r in range(K - 1):
            rows[2 * r, r] = -1.0
            rows[2 * r, r + 1] = 1.0
            rows[2 * r + 1, r] = 1.0
            rows[2 * r + 1, r + 1] = -1.0
        return ShapeOperator(rows, np.full(2 * (K - 1), -float(cutoff)),
                             labels=("exclusion-relaxation",) * (2 * (K - 1)),
                             cell_values=tuple(values))
    raise ValueError(f"unknown shape restriction kind {kind!r}")


def shape_bounds(moments: ConditionalMoments, op: ShapeOperator, q) -> tuple[float, float]:
    """Per-direction interval for lambda implied by the shape rows.

    Each row gives a = [R m_Y - c](r) >= lambda * b with b = [R m_X' q](r);
    b > 0 rows cap lambda at a/b, b < 0 rows floor it at a/b, and b = 0 rows
    either bind nothing (a >= 0) or kill the direction entirely (a < 0).
    Empty candidate sets give the usual sup/inf-of-nothing infinities.
    """
    q = np.asarray(q, dtype=float).ravel()
    a = op.rows @ moments.m_y - op.lower
    b = op.rows @ (moments.m_x @ q)
    if op.rows.shape[1] != moments.m_y.size:
        raise ValueError("operator rows do not match the number of retained cells")
    lower, upper = -np.inf, np.inf
    for ar, br in zip(a, b):
        if br == 0.0:
            if ar < 0.0:
                return np.inf, -np.inf  # direction infeasible for every lambda
            if ar == 0.0:
                warnings.warn("knife-edge shape row with a = b = 0; treated as vacuous")
            continue
        ratio = ar / br
        if br > 0:
            upper = min(upper, ratio)
        else:
            lower = max(lower, ratio)
    return lower, upper


def r2_lower_bound(moments: ConditionalMoments, r2_lower: float, q) -> float:
    """Minimal scale in direction q for the long regression to reach r2_lower."""
    q = np.asarray(q, dtype=float).ravel()
    denom = float(q @ moments.within_cov @ q)
    if denom <= 0:
        raise ValueError("within-cell covariance is not positive in this direction")
    slack = r2_lower - moments.short_r2
    if slack < 0:
        warnings.warn("requested R^2 floor is below the short regression's; bound is 0")
    return float(np.sqrt(max(0.0, slack) * moments.var_y / denom))


def combine_bounds(directions, base_upper, moments: ConditionalMoments,
                   spec: ConstraintSpec) -> tuple[np.ndarray, np.ndarray]:
    """Arrays (lower, upper) per direction after applying every restriction."""
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    m = directions.shape[0]
    lower = np.zeros(m)
    upper = np.asarray(base_upper, dtype=float).copy()
    r2_target = spec.resolve_r2(moments.short_r2)
    for i, q in enumerate(directions):
        if spec.shape is not None:
            lo_s, up_s = shape_bounds(moments, spec.shape, q)
            lower[i] = max(lower[i], lo_s)
            upper[i] = min(upper[i], up_s)
        if r2_target is not None:
            lower[i] = max(lower[i], r2_lower_bound(moments, r2_target, q))
        for comp, sign in spec.signs.items():
            s = 1.0 if sign in ("+", 1, 1.0, "pos") else -1.0
            if s * q[int(comp)] < 0:
                lower[i], upper[i] = np.inf, -np.inf  # ray violates the sign
                break
    return lower, upper


def combine(base: StarSet, moments: ConditionalMoments, spec: ConstraintSpec) -> StarSet:
    """Constrained star set; may exclude the origin, be non-convex, or empty."""
    lower, upper = combine_bounds(base.directions, base.upper, moments, spec)
    out = StarSet(directions=base.directions.copy(), upper=upper, lower=lower,
                  dimension=base.dimension, epsilon=base.epsilon)
    if out.is_empty:
        warnings.warn("constrained set is empty in every direction")
    return out


def spec_from_dict(payload: dict, xc_support) -> ConstraintSpec:
    """Parse the constraint file schema into a ConstraintSpec.

    Schema: {"shape": "monotone" | "convex" | {"exclusion": c} |
             {"custom": [{"coeffs": {cell: coef}, "lower": c}, ...]},
             "r2_lower": x | {"relative": r},
             "signs": {component (1-based): "+" | "-"}}
    """
    shape = None
    if "shape" in payload and payload["shape"] is not None:
        sh = payload["shape"]
        if isinstance(sh, str):
            shape = build_shape_operator(sh, xc_support)
        elif "exclusion" in sh:
            shape = build_shape_operator("exclusion", xc_support, cutoff=float(sh["exclusion"]))
        elif "custom" in sh:
            values = list(xc_support)
            idx = {v: j for j, v in enumerate(values)}
            rows, lows, labels = [], [], []
            for entry in sh["custom"]:
                row = np.zeros(len(values))
                for cell, coef in entry["coeffs"].items():
                    key = cell
                    if key not in idx:  # JSON keys are strings; try numeric match
                        for v in values:
                            if str(v) == str(cell):
                                key = v
                                break
                    row[idx[key]] = float(coef)
                rows.append(row)
                lows.append(float(entry.get("lower", 0.0)))
                labels.append("custom")
            shape = ShapeOperator(np.vstack(rows), np.array(lows),
                                  labels=tuple(labels), cell_values=tuple(values))
        else:
            raise ValueError("unrecognized shape restriction payload")
    r2_abs, r2_rel = None, None
    if "r2_lower" in payload and payload["r2_lower"] is not None:
        r2 = payload["r2_lower"]
        if isinstance(r2, dict):
            r2_rel = float(r2["relative"])
        else:
            r2_abs = float(r2)
    signs = {}
    for comp, sgn in (payload.get("signs") or {}).items():
        signs[int(comp) - 1] = sgn  # file is 1-based, arrays 0-based
    return ConstraintSpec(shape=shape, r2_lower=r2_abs, r2_relative=r2_rel, signs=signs)
