"""Subsampling inference: confidence regions, intervals, and tests.

The radial estimator is not asymptotically normal, so critical values come
from subsampling: draw without-replacement subsamples independently from the
two datasets (sizes proportional to each sample, effective size b_n),
recompute the statistic, and use quantiles of sqrt(b_n) * (S* - S_hat).
Per-replication generators are derived from (seed, replication), so serial
and parallel runs agree bit for bit.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .empdist import centered_empirical, superquantile_curve
from .errors import NumericalError
from .geometry import sphere_grid
from .partition import (
    CellPartition,
    TwoSampleDataset,
    conditional_moments,
    residualize,
    s_bar,
)
from . import constraints as cons

__all__ = [
    "InferenceConfig",
    "ConfidenceRegion",
    "TestResult",
    "SubsampleDraws",
    "subsample_statistic",
    "confidence_region",
    "confidence_interval_component",
    "select_epsilon",
    "constrained_region",
    "point_id_test",
    "tstsls",
    "tstsls_interval",
    "equality_test",
]

DEFAULT_EPS_GRID = (0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.45)


@dataclass(frozen=True)
class InferenceConfig:
    """Tuning of the subsampling engine.

    ``epsilon`` is either a fixed trim in (0, 1/2], an explicit grid, or
    "auto" for the default grid with the per-direction data-driven choice.
    ``b_n`` is the effective subsample size; default ceil(n^(2/3)).
    """

    level: float = 0.95
    b_n: int | None = None
    replications: int = 1000
    epsilon: object = "auto"
    seed: int = 0
    min_cell: int = 10
    tail_limits: bool = False
    finite_population_correction: bool = True
    min_tail_knots: int = 30

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must be in (0, 1)")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        for e in self.eps_grid():
            if not 0.0 < e <= 0.5:
                raise ValueError("epsilon values must lie in (0, 1/2]")

    @property
    def alpha(self) -> float:
        return 1.0 - self.level

    def eps_grid(self) -> tuple:
        if isinstance(self.epsilon, str):
            if self.epsilon != "auto":
                raise ValueError("epsilon must be a number, a grid, or 'auto'")
            return DEFAULT_EPS_GRID
        if np.isscalar(self.epsilon):
            return (float(self.epsilon),)
        return tuple(float(e) for e in self.epsilon)

    @property
    def adaptive(self) -> bool:
        return len(self.eps_grid()) > 1

    def resolve_b(self, n_eff: float) -> int:
        if self.b_n is not None:
            return int(self.b_n)
        return int(math.ceil(n_eff ** (2.0 / 3.0)))

    def admissible_eps(self, b_per_sample: int) -> tuple:
        """Drop trims the subsample cannot resolve.

        A subsample with b observations per side has knots at spacing 1/b;
        trims below min_tail_knots/b leave the deviation draws blind to the
        tail noise the full-sample estimator picks up there, which wrecks
        the quantiles.  The largest trim is always kept.
        """
        grid = self.eps_grid()
        floor = self.min_tail_knots / max(b_per_sample, 1)
        keep = tuple(e for e in grid if e >= floor)
        return keep if keep else (grid[-1],)


@dataclass
class SubsampleDraws:
    """Full-sample statistic plus rescaled subsample deviations."""

    full: np.ndarray
    draws: np.ndarray  # (replications_kept, *stat_shape)
    b_n: int
    n_eff: float
    failures: int = 0

    def quantile(self, prob: float) -> np.ndarray:
        if self.draws.shape[0] == 0:
            raise NumericalError("every subsampling replication failed")
        return np.quantile(self.draws, prob, axis=0)


@dataclass
class ConfidenceRegion:
    """Per-direction point estimates, critical values, and trimmed bounds."""

    directions: np.ndarray
    estimate: np.ndarray
    critical: np.ndarray
    bound: np.ndarray
    epsilon: np.ndarray
    level: float
    b_n: int
    replications: int
    seed: int
    n_eff: float
    failures: int = 0
    lower_estimate: np.ndarray | None = None
    lower_critical: np.ndarray | None = None
    lower_bound: np.ndarray | None = None

    @property
    def empty_mask(self) -> np.ndarray:
        lo = self.lower_bound if self.lower_bound is not None else np.zeros_like(self.bound)
        return lo > self.bound

    def contains_scale(self, i: int, lam: float) -> bool:
        """Is the point lam * directions[i] inside the region?"""
        lo = 0.0 if self.lower_bound is None else self.lower_bound[i]
        return bool(lo <= lam <= self.bound[i])


@dataclass(frozen=True)
class TestResult:
    """Outcome of a subsampling test."""

    statistic: float
    critical_value: float
    p_value: float
    kind: str
    level: float
    auxiliary: object = None
    reject: bool = False


def _subsample_sizes(n_y: int, n_x: int, b_eff: int) -> tuple[int, int]:
    """Per-sample sizes proportional to n_y, n_x with effective size b_eff."""
    n_eff = (n_x * n_y) / (n_x + n_y)
    c = min(b_eff / n_eff, 1.0)
    b_y = min(max(int(round(c * n_y)), 2), n_y)
    b_x = min(max(int(round(c * n_x)), 2), n_x)
    return b_y, b_x


def subsample_statistic(dataset: TwoSampleDataset, evaluator, config: InferenceConfig) -> SubsampleDraws:
    """Rescaled deviations of a statistic over without-replacement subsamples.

    ``evaluator`` maps a TwoSampleDataset to a float or ndarray and must be
    pure; replications where it raises are dropped and counted.
    """
    full = np.asarray(evaluator(dataset), dtype=float)
    b_eff = config.resolve_b(dataset.n)
    b_y, b_x = _subsample_sizes(dataset.n_y, dataset.n_x, b_eff)
    root_b = math.sqrt(b_eff)
    if config.finite_population_correction and b_eff < dataset.n:
        # without-replacement draws shrink deviations by sqrt(1 - b/n)
        root_b /= math.sqrt(1.0 - b_eff / dataset.n)
    draws, failures = [], 0
    for r in range(config.replications):
        rng = np.random.default_rng([config.seed, r])
        iy = rng.choice(dataset.n_y, size=b_y, replace=False)
        ix = rng.choice(dataset.n_x, size=b_x, replace=False)
        try:
            stat = np.asarray(evaluator(dataset.subset(iy, ix)), dtype=float)
        except (ValueError, NumericalError):
            failures += 1
            continue
        draws.append(root_b * (stat - full))
    return SubsampleDraws(
        full=full,
        draws=np.array(draws) if draws else np.empty((0,) + full.shape),
        b_n=b_eff,
        n_eff=dataset.n,
        failures=failures,
    )


def _radial_matrix(directions: np.ndarray, eps_grid, min_cell: int, tail_limits: bool):
    """Evaluator factory: per-direction, per-epsilon radial values."""

    def evaluate(ds: TwoSampleDataset) -> np.ndarray:
        part = residualize(ds, min_cell)
        out = np.empty((directions.shape[0], len(eps_grid)))
        for i, q in enumerate(directions):
            for j, eps in enumerate(eps_grid):
                out[i, j] = s_bar(part, q, eps, tail_limits).value
        return out

    return evaluate


def confidence_region(dataset: TwoSampleDataset, directions=None,
                      config: InferenceConfig = InferenceConfig()) -> ConfidenceRegion:
    """One-sided-per-direction region: 0 <= lambda <= S_eps - c_alpha / sqrt(n).

    With a grid of epsilons the per-direction choice minimizes the trimmed
    boundary (ties to the larger epsilon), which is also the reported bound.
    """
    if directions is None:
        directions = sphere_grid(dataset.p)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if config.adaptive:
        b_y, b_x = _subsample_sizes(dataset.n_y, dataset.n_x, config.resolve_b(dataset.n))
        eps_grid = config.admissible_eps(min(b_y, b_x))
    else:
        eps_grid = config.eps_grid()
    sub = subsample_statistic(
        dataset, _radial_matrix(directions, eps_grid, config.min_cell, config.tail_limits), config
    )
    crit = sub.quantile(config.alpha)  # (m, n_eps)
    bounds = sub.full - crit / math.sqrt(dataset.n)
    m = directions.shape[0]
    est = np.empty(m)
    chosen_crit = np.empty(m)
    chosen_bound = np.empty(m)
    chosen_eps = np.empty(m)
    for i in range(m):
        j = 0
        for k in range(1, len(eps_grid)):
            if bounds[i, k] <= bounds[i, j]:
                j = k
        est[i] = sub.full[i, j]
        chosen_crit[i] = crit[i, j]
        chosen_bound[i] = max(bounds[i, j], 0.0)
        chosen_eps[i] = eps_grid[j]
    return ConfidenceRegion(
        directions=directions, estimate=est, critical=chosen_crit,
        bound=chosen_bound, epsilon=chosen_eps, level=config.level,
        b_n=sub.b_n, replications=config.replications, seed=config.seed,
        n_eff=dataset.n, failures=sub.failures,
    )


def select_epsilon(dataset: TwoSampleDataset, q, config: InferenceConfig = InferenceConfig()) -> float:
    """Data-driven trim for one direction: minimize the region boundary."""
    region = confidence_region(dataset, np.atleast_2d(np.asarray(q, dtype=float)), config)
    return float(region.epsilon[0])


def confidence_interval_component(dataset: TwoSampleDataset, k: int = 0,
                                  config: InferenceConfig = InferenceConfig(),
                                  **opt_kwargs) -> dict:
    """Two-sided interval for one coefficient, clamped to contain 0.

    The support-function statistic (optimizer re-run on every subsample for
    p > 1) is subsampled at the trim selected on the coordinate directions.
    """
    p = dataset.p
    if not 0 <= k < p:
        raise ValueError("component index out of range")
    e_plus = np.zeros(p)
    e_plus[k] = 1.0
    sides = {}
    for sign in (1, -1):
        q = sign * e_plus
        eps = select_epsilon(dataset, q, config) if config.adaptive else config.eps_grid()[0]
        fixed = replace(config, epsilon=eps)
        if p == 1:
            region = confidence_region(dataset, q[None, :], fixed)
            sides[sign] = {
                "sigma": float(region.estimate[0]),
                "critical": float(region.critical[0]),
                "raw": float(region.estimate[0] - region.critical[0] / math.sqrt(dataset.n)),
                "epsilon": eps,
                "failures": region.failures,
            }
            continue

        def sigma_stat(ds: TwoSampleDataset) -> float:
            part = residualize(ds, fixed.min_cell)
            return _cellwise_support(part, k, sign, eps, fixed.tail_limits, **opt_kwargs)

        sub = subsample_statistic(dataset, sigma_stat, fixed)
        c = float(sub.quantile(fixed.alpha))
        sides[sign] = {
            "sigma": float(sub.full),
            "critical": c,
            "raw": float(sub.full - c / math.sqrt(dataset.n)),
            "epsilon": eps,
            "failures": sub.failures,
        }
    upper = max(sides[1]["raw"], 0.0)
    lower = min(-sides[-1]["raw"], 0.0)
    return {
        "interval": (lower, upper),
        "estimate_interval": (-sides[-1]["sigma"], sides[1]["sigma"]),
        "component": k,
        "epsilon": {"+": sides[1]["epsilon"], "-": sides[-1]["epsilon"]},
        "critical": {"+": sides[1]["critical"], "-": sides[-1]["critical"]},
        "failures": sides[1]["failures"] + sides[-1]["failures"],
        "level": config.level,
    }


def _cellwise_support(part: CellPartition, k: int, sign: int, eps: float,
                      tail_limits: bool, **opt_kwargs) -> float:
    """Support value of the cell-min radial set along +-e_k.

    1/S_bar(q) is a max of convex functions of q, hence convex; the same
    slice minimization as without cells applies.
    """
    from scipy import optimize

    p = part.p

    def inv_s(q: np.ndarray) -> float:
        try:
            val = s_bar(part, q, eps, tail_limits).value
        except NumericalError:
            return np.inf
        return np.inf if val <= 0 else 1.0 / val

    if p == 1:
        v = inv_s(np.array([float(sign)]))
        return 1.0 / v

    free_idx = [j for j in range(p) if j != k]

    def assemble(z):
        q = np.empty(p)
        q[k] = sign
        q[free_idx] = z
        return q

    def objective(z):
        return inv_s(assemble(z))

    step = opt_kwargs.get("fd_step", 1e-6)

    def grad(z):
        g = np.empty_like(z)
        for j in range(z.size):
            e = np.zeros_like(z)
            e[j] = step
            g[j] = (objective(z + e) - objective(z - e)) / (2 * step)
        return g

    res = optimize.minimize(
        objective, np.zeros(p - 1), method="BFGS", jac=grad,
        options={"maxiter": opt_kwargs.get("max_iter", 500), "gtol": 1e-10, "xrtol": 1e-8},
    )
    if not np.isfinite(res.fun) or res.fun <= 0:
        raise NumericalError("support minimization failed on a subsample")
    return float(1.0 / res.fun)


def _constrained_matrix(directions, spec: "cons.ConstraintSpec", min_cell: int,
                        eps: float, tail_limits: bool):
    def evaluate(ds: TwoSampleDataset) -> np.ndarray:
        part = residualize(ds, min_cell)
        moments = conditional_moments(ds, part)
        base_upper = np.array([s_bar(part, q, eps, tail_limits).value for q in directions])
        star = cons.combine_bounds(directions, base_upper, moments, spec)
        return np.vstack((star[0], star[1]))  # (2, m) lower, upper

    return evaluate


def constrained_region(dataset: TwoSampleDataset, directions, spec,
                       config: InferenceConfig = InferenceConfig()) -> ConfidenceRegion:
    """Two-sided region under constraints: both bounds get half-level quantiles.

    The lower bound moves down by the (1 - alpha/2) deviation quantile and
    the upper bound up by (minus) the (alpha/2) one, keeping the region
    conservative whether or not the two bounds coincide.  Empty directions
    propagate as lower > upper.
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if config.adaptive:
        eps_opts = config.eps_grid()
        eps = float(eps_opts[-1])
    else:
        eps = config.eps_grid()[0]
    evaluator = _constrained_matrix(directions, spec, config.min_cell, eps, config.tail_limits)
    sub = subsample_statistic(dataset, evaluator, config)
    lo_full, up_full = sub.full[0], sub.full[1]
    finite_draws = np.where(np.isfinite(sub.draws), sub.draws, np.nan)
    with np.errstate(invalid="ignore"):
        c_lo = np.nanquantile(finite_draws[:, 0, :], 1.0 - config.alpha / 2.0, axis=0)
        c_up = np.nanquantile(finite_draws[:, 1, :], config.alpha / 2.0, axis=0)
    root_n = math.sqrt(dataset.n)
    lower = np.where(np.isfinite(lo_full), np.maximum(lo_full - c_lo / root_n, 0.0), lo_full)
    upper = np.where(np.isfinite(up_full), up_full - c_up / root_n, up_full)
    return ConfidenceRegion(
        directions=directions, estimate=up_full, critical=c_up,
        bound=upper, epsilon=np.full(directions.shape[0], eps),
        level=config.level, b_n=sub.b_n, replications=config.replications,
        seed=config.seed, n_eff=dataset.n, failures=sub.failures,
        lower_estimate=lo_full, lower_critical=c_lo, lower_bound=lower,
    )


def _ols(y: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Least-squares slope coefficients, intercept included then dropped."""
    Z = np.column_stack((np.ones(X.shape[0]), X))
    gram = Z.T @ Z
    if np.linalg.matrix_rank(gram) < Z.shape[1]:
        raise NumericalError("singular regression design")
    return np.linalg.solve(gram, Z.T @ y)[1:]


def _radial_at_vector(y: np.ndarray, proj: np.ndarray, eps: float, tail_limits: bool) -> float:
    Fy = superquantile_curve(centered_empirical(y))
    G = superquantile_curve(centered_empirical(proj))
    from .radial import s_epsilon

    return s_epsilon(Fy, G, eps, tail_limits=tail_limits).value


def point_id_test(x_v, y_v, config: InferenceConfig = InferenceConfig(),
                  eps_multiplier: float = 1.0) -> TestResult:
    """Boundary test on a validation sample where (Y, X) are jointly observed.

    Estimates the regression coefficient, computes the radial value of the
    fitted index, and rejects point identification at the boundary when
    sqrt(n) (S_hat - 1) exceeds the (1 - alpha) subsampling quantile of the
    recentred statistic (coefficient re-estimated on every subsample).
    """
    X = np.asarray(x_v, dtype=float)
    X = X.reshape(-1, 1) if X.ndim == 1 else X
    y = np.asarray(y_v, dtype=float).ravel()
    if y.size != X.shape[0]:
        raise ValueError("x_v and y_v must have the same number of rows")
    n = y.size
    beta = _ols(y, X)
    if float(np.linalg.norm(beta)) < 1e-12:
        raise NumericalError("fitted coefficient is zero; boundary test undefined")

    if config.adaptive:
        eps = _select_eps_joint(X, y, beta, config)
    else:
        eps = config.eps_grid()[0]
    eps = float(min(max(eps * eps_multiplier, 1e-6), 0.5 - 1e-12))

    def stat_on(rows) -> float:
        Xs, ys = X[rows], y[rows]
        b = _ols(ys, Xs)
        return _radial_at_vector(ys, Xs @ b, eps, config.tail_limits)

    all_rows = np.arange(n)
    s_hat = stat_on(all_rows)
    b_n = min(config.resolve_b(n), n)
    root_b = math.sqrt(b_n)
    if config.finite_population_correction and b_n < n:
        root_b /= math.sqrt(1.0 - b_n / n)
    draws, failures = [], 0
    for r in range(config.replications):
        rng = np.random.default_rng([config.seed, r])
        rows = rng.choice(n, size=b_n, replace=False)
        try:
            draws.append(root_b * (stat_on(rows) - s_hat))
        except (ValueError, NumericalError):
            failures += 1
    if not draws:
        raise NumericalError("every subsampling replication failed")
    draws = np.array(draws)
    statistic = math.sqrt(n) * (s_hat - 1.0)
    critical = float(np.quantile(draws, config.level))
    p_value = float(np.mean(draws >= statistic))
    # guard: an exactly-degenerate null (S* identically 1) leaves only float
    # dust in both the statistic and the draws; never reject on dust
    reject = bool(statistic > critical + 1e-9)
    return TestResult(
        statistic=statistic, critical_value=critical, p_value=p_value,
        kind="point-id", level=config.level, auxiliary=beta, reject=reject,
    )


def _select_eps_joint(X, y, beta, config: InferenceConfig) -> float:
    """Tradeoff rule along the fitted direction for the joint-sample test."""
    n = y.shape[0]
    b_n = min(config.resolve_b(n), n)
    grid = config.admissible_eps(b_n)

    def stats_all_eps(rows):
        ys = y[rows]
        b = _ols(ys, X[rows])
        proj = X[rows] @ b
        Fy = superquantile_curve(centered_empirical(ys))
        G = superquantile_curve(centered_empirical(proj))
        from .radial import s_epsilon

        return np.array([s_epsilon(Fy, G, e, tail_limits=config.tail_limits).value for e in grid])

    full = stats_all_eps(np.arange(n))
    root_b = math.sqrt(b_n)
    if config.finite_population_correction and b_n < n:
        root_b /= math.sqrt(1.0 - b_n / n)
    draws = []
    for r in range(config.replications):
        rng = np.random.default_rng([config.seed, 1 + r])
        rows = rng.choice(n, size=b_n, replace=False)
        try:
            draws.append(root_b * (stats_all_eps(rows) - full))
        except (ValueError, NumericalError):
            continue
    if not draws:
        return grid[-1]
    crit = np.quantile(np.array(draws), config.alpha, axis=0)
    bound = full - crit / math.sqrt(n)
    j = 0
    for k in range(1, len(grid)):
        if bound[k] <= bound[j]:
            j = k
    return grid[j]


def tstsls(dataset: TwoSampleDataset) -> np.ndarray:
    """Two-stage point estimator under the exclusion restriction.

    First stage: cell means of the covariates in the covariate sample
    (saturated dummy regression).  The fitted values are imputed to the
    outcome sample through the shared cells; the second stage regresses the
    outcome on them.
    """
    cell_means = {}
    for v in np.unique(dataset.x_xc):
        rows = dataset.x_xc == v
        cell_means[v] = dataset.x_nc[rows].mean(axis=0)
    usable = np.array([xc in cell_means for xc in dataset.y_xc])
    if not usable.any():
        raise NumericalError("no outcome rows share a cell with the covariate sample")
    y = dataset.y[usable]
    x_hat = np.vstack([cell_means[xc] for xc in dataset.y_xc[usable]])
    spread = x_hat.var(axis=0)
    if np.any(spread <= 1e-12 * max(1.0, float(np.var(y)))):
        raise NumericalError("predicted regressor has (numerically) zero variance")
    return _ols(y, x_hat)


def tstsls_interval(dataset: TwoSampleDataset, k: int = 0,
                    config: InferenceConfig = InferenceConfig(),
                    method: str = "normal") -> dict:
    """Two-sided interval around the two-stage estimate.

    The estimator is asymptotically normal, so the default interval is
    normal with the scale estimated from the subsampling deviations; the
    raw equal-tailed quantile interval is available as method="quantile".
    """
    def stat(ds: TwoSampleDataset) -> float:
        return float(tstsls(ds)[k])

    sub = subsample_statistic(dataset, stat, config)
    root_n = math.sqrt(dataset.n)
    if method == "normal":
        from scipy.stats import norm

        scale = float(np.std(sub.draws))
        half = norm.ppf(1.0 - config.alpha / 2.0) * scale / root_n
        lo, hi = float(sub.full - half), float(sub.full + half)
    elif method == "quantile":
        hi = float(sub.full - sub.quantile(config.alpha / 2.0) / root_n)
        lo = float(sub.full - sub.quantile(1.0 - config.alpha / 2.0) / root_n)
    else:
        raise ValueError("method must be 'normal' or 'quantile'")
    return {
        "estimate": float(sub.full),
        "interval": (lo, hi),
        "component": k,
        "level": config.level,
        "failures": sub.failures,
    }


def equality_test(dataset: TwoSampleDataset, config: InferenceConfig = InferenceConfig(),
                  k: int = 0) -> TestResult:
    """Two-sided test that the exclusion-restricted estimate sits on the boundary.

    The statistic is sqrt(n) times the gap between the two-stage estimate and
    the radial upper bound for the same coefficient; the critical value is the
    (1 - alpha) subsampling quantile of the absolute recentred gap.
    """
    if config.adaptive:
        e = np.zeros(dataset.p)
        e[k] = 1.0
        eps = select_epsilon(dataset, e, config)
    else:
        eps = config.eps_grid()[0]

    def gap(ds: TwoSampleDataset) -> float:
        part = residualize(ds, config.min_cell)
        if ds.p == 1:
            upper = s_bar(part, np.array([1.0]), eps, config.tail_limits).value
        else:
            upper = _cellwise_support(part, k, 1, eps, config.tail_limits)
        return float(tstsls(ds)[k]) - upper

    sub = subsample_statistic(dataset, gap, config)
    statistic = math.sqrt(dataset.n) * float(sub.full)
    abs_draws = np.abs(sub.draws)
    critical = float(np.quantile(abs_draws, config.level))
    p_value = float(np.mean(abs_draws >= abs(statistic)))
    return TestResult(
        statistic=statistic, critical_value=critical, p_value=p_value,
        kind="equality", level=config.level,
        auxiliary={"theta_hat": float(sub.full), "epsilon": eps},
        reject=bool(abs(statistic) > critical),
    )
