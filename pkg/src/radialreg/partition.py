"""Discrete common regressors: cell residualization and conditional bounds.

Common covariates observed in both datasets let the two samples be split on
their values; within each cell the problem reduces to the no-common-regressor
case on centered subsamples, and the per-direction bound is the minimum of
the cell bounds.  The intercept-like function of the common covariates is
recovered cellwise from the coefficient set.
"""

from dataclasses import dataclass, field

import numpy as np

from .empdist import centered_empirical, superquantile_curve
from .errors import NumericalError
from .radial import RadialValue, s_epsilon

__all__ = [
    "TwoSampleDataset",
    "CellPartition",
    "ConditionalMoments",
    "residualize",
    "conditional_moments",
    "s_bar",
    "f_set",
    "interaction_radial",
    "short_r2",
]


def effective_size(n_y: int, n_x: int) -> float:
    """Harmonic-style effective sample size of the two-sample problem."""
    return (n_x * n_y) / (n_x + n_y)


@dataclass
class TwoSampleDataset:
    """Outcome sample (y, x_c) and covariate sample (x_nc, x_c), unlinked.

    ``y_xc`` / ``x_xc`` hold the common-regressor value of each row; they can
    be any scalar type matched by exact equality.  A constant column means
    "no common regressors" (one global cell).
    """

    y: np.ndarray
    y_xc: np.ndarray
    x_nc: np.ndarray
    x_xc: np.ndarray

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float).ravel()
        x = np.asarray(self.x_nc, dtype=float)
        self.x_nc = x.reshape(-1, 1) if x.ndim == 1 else x
        self.y_xc = np.asarray(self.y_xc)
        self.x_xc = np.asarray(self.x_xc)
        if self.y.size == 0 or self.x_nc.shape[0] == 0:
            raise ValueError("both samples must be non-empty")
        if self.y_xc.shape[0] != self.y.size:
            raise ValueError("y and y_xc must have the same length")
        if self.x_xc.shape[0] != self.x_nc.shape[0]:
            raise ValueError("x_nc and x_xc must have the same length")

    @classmethod
    def without_common(cls, y, x_nc) -> "TwoSampleDataset":
        y = np.asarray(y, dtype=float).ravel()
        x = np.asarray(x_nc, dtype=float)
        x = x.reshape(-1, 1) if x.ndim == 1 else x
        return cls(y=y, y_xc=np.zeros(y.size, dtype=int),
                   x_nc=x, x_xc=np.zeros(x.shape[0], dtype=int))

    @property
    def n_y(self) -> int:
        return self.y.size

    @property
    def n_x(self) -> int:
        return self.x_nc.shape[0]

    @property
    def n(self) -> float:
        return effective_size(self.n_y, self.n_x)

    @property
    def p(self) -> int:
        return self.x_nc.shape[1]

    @property
    def xc_support(self) -> list:
        vals = set(np.unique(self.y_xc).tolist()) | set(np.unique(self.x_xc).tolist())
        return sorted(vals)

    def subset(self, y_idx, x_idx) -> "TwoSampleDataset":
        return TwoSampleDataset(
            y=self.y[y_idx], y_xc=self.y_xc[y_idx],
            x_nc=self.x_nc[x_idx], x_xc=self.x_xc[x_idx],
        )


@dataclass
class Cell:
    """One common-regressor value: centered subsamples from both sides."""

    value: object
    y_centered: np.ndarray
    x_centered: np.ndarray
    n_y: int
    n_x: int
    m_y: float
    m_x: np.ndarray


@dataclass
class CellPartition:
    """Retained cells plus a record of what was excluded and why."""

    cells: list
    excluded: list = field(default_factory=list)
    min_cell: int = 10

    def __post_init__(self):
        if not self.cells:
            raise ValueError("no cell satisfies the minimum size requirement")

    @property
    def values(self) -> list:
        return [c.value for c in self.cells]

    @property
    def p(self) -> int:
        return self.cells[0].x_centered.shape[1]

    def cell(self, value) -> Cell:
        for c in self.cells:
            if c.value == value:
                return c
        raise KeyError(f"no retained cell {value!r}")


@dataclass
class ConditionalMoments:
    """Cellwise means, own-sample cell shares, and pooled within covariance."""

    values: list
    m_y: np.ndarray
    m_x: np.ndarray
    p_y: np.ndarray
    p_x: np.ndarray
    within_cov: np.ndarray
    var_y: float

    @property
    def short_r2(self) -> float:
        between = float(self.p_y @ (self.m_y - self.p_y @ self.m_y) ** 2)
        return between / self.var_y


def residualize(dataset: TwoSampleDataset, min_cell: int = 10) -> CellPartition:
    """Split both samples on the common-regressor values and center within cells.

    Cells below ``min_cell`` in either sample, or present in only one sample,
    are excluded and recorded rather than silently dropped.
    """
    cells, excluded = [], []
    for v in dataset.xc_support:
        yi = dataset.y_xc == v
        xi = dataset.x_xc == v
        ny, nx = int(yi.sum()), int(xi.sum())
        if ny == 0 or nx == 0:
            excluded.append((v, "absent in one sample", ny, nx))
            continue
        if ny < min_cell or nx < min_cell:
            excluded.append((v, "below min_cell", ny, nx))
            continue
        y_sub = dataset.y[yi]
        x_sub = dataset.x_nc[xi]
        m_y = float(y_sub.mean())
        m_x = x_sub.mean(axis=0)
        cells.append(Cell(
            value=v,
            y_centered=y_sub - m_y,
            x_centered=x_sub - m_x,
            n_y=ny, n_x=nx, m_y=m_y, m_x=m_x,
        ))
    return CellPartition(cells=cells, excluded=excluded, min_cell=min_cell)


def conditional_moments(dataset: TwoSampleDataset, partition: CellPartition | None = None,
                        min_cell: int = 10) -> ConditionalMoments:
    """Cell means and pooled within-cell covariance over retained cells.

    Each moment is weighted by its own sample's cell frequencies: Y moments
    by the outcome sample, covariate moments by the covariate sample.
    """
    part = partition if partition is not None else residualize(dataset, min_cell)
    vals = part.values
    m_y = np.array([c.m_y for c in part.cells])
    m_x = np.vstack([c.m_x for c in part.cells])
    n_y_cells = np.array([c.n_y for c in part.cells], dtype=float)
    n_x_cells = np.array([c.n_x for c in part.cells], dtype=float)
    p_y = n_y_cells / n_y_cells.sum()
    p_x = n_x_cells / n_x_cells.sum()
    p = part.p
    within = np.zeros((p, p))
    for c, w in zip(part.cells, p_x):
        within += w * (c.x_centered.T @ c.x_centered) / c.n_x
    var_y = float(np.var(dataset.y))
    if var_y <= 0:
        raise ValueError("outcome variance must be positive")
    return ConditionalMoments(values=vals, m_y=m_y, m_x=m_x, p_y=p_y, p_x=p_x,
                              within_cov=within, var_y=var_y)


def _cell_radial(cell: Cell, q: np.ndarray, epsilon: float, tail_limits: bool) -> RadialValue | None:
    """Radial value of one cell in direction q; None when degenerate."""
    y_dist = centered_empirical(cell.y_centered)
    proj = centered_empirical(cell.x_centered @ q)
    if y_dist.is_degenerate or proj.is_degenerate:
        return None
    return s_epsilon(
        superquantile_curve(y_dist), superquantile_curve(proj),
        epsilon, tail_limits=tail_limits,
    )


def s_bar(partition: CellPartition, q, epsilon: float = 0.25,
          tail_limits: bool = False) -> RadialValue:
    """Minimum of the cell radial values: the bound with common regressors."""
    q = np.asarray(q, dtype=float).ravel()
    best, best_cell = None, None
    for c in partition.cells:
        rv = _cell_radial(c, q, epsilon, tail_limits)
        if rv is None:
            continue
        if best is None or rv.value < best.value:
            best, best_cell = rv, c.value
    if best is None:
        raise NumericalError("all cells degenerate in the requested direction")
    return RadialValue(value=best.value, argmin_alpha=best.argmin_alpha,
                       epsilon=epsilon, direction=q, cell=best_cell)


def radial_set_cells(partition: CellPartition, directions, epsilon: float = 0.25,
                     tail_limits: bool = False):
    """Per-direction s_bar over a direction grid -> array of upper bounds."""
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    return np.array([
        s_bar(partition, q, epsilon, tail_limits).value for q in directions
    ])


def f_set(moments: ConditionalMoments, beta_points) -> dict:
    """Images of the cell function f under every extreme coefficient vector.

    For each retained cell x: f(x) = m_y(x) - m_x(x)'beta.  Returns per-cell
    intervals of f and, for the dummy parameterization relative to the first
    retained cell, induced intervals for the cell contrasts.
    """
    pts = np.atleast_2d(np.asarray(beta_points, dtype=float))
    if pts.size == 0:
        raise ValueError("empty coefficient set")
    f_vals = moments.m_y[None, :] - pts @ moments.m_x.T  # (n_pts, n_cells)
    intervals = {
        v: (float(f_vals[:, j].min()), float(f_vals[:, j].max()))
        for j, v in enumerate(moments.values)
    }
    gamma = {}
    ref = 0
    for j, v in enumerate(moments.values):
        if j == ref:
            continue
        contrast = f_vals[:, j] - f_vals[:, ref]
        gamma[v] = (float(contrast.min()), float(contrast.max()))
    return {"f": intervals, "gamma": gamma, "reference_cell": moments.values[ref]}


def interaction_radial(partition: CellPartition, x1_of_cell: dict, q,
                       epsilon: float = 0.25, tail_limits: bool = False) -> RadialValue:
    """Radial value of the interaction-augmented set in R^(p+1).

    ``q`` stacks the interaction coordinate first, then the p base
    coordinates.  For each support value x of the interacted regressor the
    base direction is shifted by x * q_1 along the first covariate and the
    cell bound is rescaled by its norm; the overall value is the infimum.
    """
    q = np.asarray(q, dtype=float).ravel()
    p = partition.p
    if q.size != p + 1:
        raise ValueError("direction must have p + 1 coordinates")
    x1_values = sorted(set(x1_of_cell.values()))
    if len(x1_values) < 2:
        raise ValueError("interacted regressor needs at least two support points")
    q1, q_rest = q[0], q[1:]
    best_val, best_cell = None, None
    for x1 in x1_values:
        v = q_rest.copy()
        v[0] += x1 * q1
        nrm = float(np.linalg.norm(v))
        if nrm < 1e-14:
            continue  # zero direction constrains nothing in this cell group
        group = [c for c in partition.cells if x1_of_cell[c.value] == x1]
        for c in group:
            rv = _cell_radial(c, v / nrm, epsilon, tail_limits)
            if rv is None:
                continue
            val = rv.value / nrm
            if best_val is None or val < best_val:
                best_val, best_cell = val, c.value
    if best_val is None:
        raise NumericalError("no cell constrains the requested direction")
    return RadialValue(value=best_val, argmin_alpha=0.5, epsilon=epsilon,
                       direction=q, cell=best_cell)


def short_r2(dataset: TwoSampleDataset, min_cell: int = 10) -> float:
    """Share of outcome variance explained by the common regressors alone."""
    m = conditional_moments(dataset, min_cell=min_cell)
    return min(max(m.short_r2, 0.0), 1.0)
