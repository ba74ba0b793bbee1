"""Direction grids, set assembly, ellipsoid benchmark, and support functions.

The identified set is star-shaped around the origin, so it is represented by
per-direction radial intervals.  Sharp single-coefficient bounds come from
the support function, obtained by minimizing the convex map
q -> 1 / (radial value at q) over an affine slice of directions.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.spatial import ConvexHull, QhullError

from .empdist import EmpiricalDist, centered_empirical, superquantile_curve
from .errors import NumericalError
from .radial import s_epsilon

__all__ = [
    "StarSet",
    "Ellipsoid",
    "SupportValue",
    "sphere_grid",
    "default_direction_count",
    "radial_set",
    "variance_ellipsoid",
    "support_function",
    "projection_interval",
    "convex_hull_2d",
]


def unit_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    nrm = float(np.linalg.norm(v))
    if nrm == 0 or not np.isfinite(nrm):
        raise ValueError("direction must be a nonzero finite vector")
    return v / nrm


def default_direction_count(dimension: int) -> int:
    """Grid sizes used when the caller does not choose: 2 / 1,000 / 2,000."""
    if dimension <= 1:
        return 2
    if dimension == 2:
        return 1000
    return 2000


def sphere_grid(dimension: int, count: int = 0) -> np.ndarray:
    """Deterministic unit direction grid, one direction per row.

    p = 1 gives {+1, -1}; p = 2 equally spaced angles; p >= 3 a spherical
    Fibonacci set (p = 3) or a Halton set pushed through the normal quantile
    and normalized (p >= 4).  All rows have unit norm.
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    if count <= 0:
        count = default_direction_count(dimension)
    if dimension == 1:
        return np.array([[1.0], [-1.0]])
    if count < 2:
        raise ValueError("count must be >= 2")
    if dimension == 2:
        theta = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack((np.cos(theta), np.sin(theta)))
    if dimension == 3:
        # spherical Fibonacci spiral
        i = np.arange(count, dtype=float)
        golden = (1.0 + math.sqrt(5.0)) / 2.0
        z = 1.0 - (2.0 * i + 1.0) / count
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        phi = 2.0 * np.pi * i / golden
        pts = np.column_stack((r * np.cos(phi), r * np.sin(phi), z))
    else:
        from scipy.stats import norm, qmc

        sampler = qmc.Halton(d=dimension, scramble=False)
        sampler.fast_forward(1)  # skip the all-zero point
        u = sampler.random(count)
        pts = norm.ppf(u)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


@dataclass
class StarSet:
    """Per-direction radial intervals [lower(q), upper(q)].

    Unconstrained sets have lower = 0 everywhere and always contain the
    origin; constrained sets may have positive lower bounds, infinite or
    crossing bounds (empty directions), and can be non-convex.
    """

    directions: np.ndarray
    upper: np.ndarray
    lower: np.ndarray = None
    dimension: int = 0
    hull_vertices: np.ndarray | None = None
    epsilon: object = None

    def __post_init__(self):
        self.directions = np.atleast_2d(np.asarray(self.directions, dtype=float))
        self.upper = np.asarray(self.upper, dtype=float).ravel()
        if self.lower is None:
            self.lower = np.zeros_like(self.upper)
        else:
            self.lower = np.asarray(self.lower, dtype=float).ravel()
        if self.dimension == 0:
            self.dimension = self.directions.shape[1]
        if self.directions.shape[0] != self.upper.size:
            raise ValueError("one upper bound per direction required")

    @property
    def empty_mask(self) -> np.ndarray:
        return self.lower > self.upper

    @property
    def is_empty(self) -> bool:
        return bool(np.all(self.empty_mask))

    def boundary_points(self) -> np.ndarray:
        """Points upper(q) * q over non-empty directions with finite upper."""
        keep = ~self.empty_mask & np.isfinite(self.upper)
        return self.directions[keep] * self.upper[keep, None]

    def projection(self, k: int) -> tuple[float, float]:
        """Range of the k-th coordinate over the per-direction boundary points."""
        keep = ~self.empty_mask & np.isfinite(self.upper)
        pts = self.directions[keep, k]
        vals = np.concatenate((self.upper[keep] * pts, self.lower[keep] * pts))
        if vals.size == 0:
            raise ValueError("empty set has no projection")
        return float(vals.min()), float(vals.max())


@dataclass(frozen=True)
class Ellipsoid:
    """Variance benchmark set {b : b' shape b <= radius_sq}."""

    shape: np.ndarray
    radius_sq: float

    def __post_init__(self):
        shape = np.atleast_2d(np.asarray(self.shape, dtype=float))
        object.__setattr__(self, "shape", shape)
        if self.radius_sq <= 0:
            raise ValueError("radius_sq must be positive")
        if not np.allclose(shape, shape.T):
            raise ValueError("shape matrix must be symmetric")
        try:
            np.linalg.cholesky(shape)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("shape matrix must be positive definite") from exc

    def radius(self, q) -> float:
        """Boundary scale along unit direction q: sqrt(radius_sq / q'Aq)."""
        q = np.asarray(q, dtype=float).ravel()
        return float(np.sqrt(self.radius_sq / (q @ self.shape @ q)))

    def contains(self, beta) -> bool:
        beta = np.asarray(beta, dtype=float).ravel()
        return bool(beta @ self.shape @ beta <= self.radius_sq)

    def support(self, u) -> float:
        """Support function sup{u'b} = sqrt(radius_sq * u' A^-1 u)."""
        u = np.asarray(u, dtype=float).ravel()
        sol = np.linalg.solve(self.shape, u)
        return float(np.sqrt(self.radius_sq * (u @ sol)))


@dataclass(frozen=True)
class SupportValue:
    """Sharp one-coordinate bound: sup of (+-)beta_k over the set."""

    component_index: int
    sign: int
    value: float
    minimizer: np.ndarray
    converged: bool = True
    iterations: int = 0
    epsilon: float = 0.0


def _center_columns(X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.ndim != 2:
        raise ValueError("X must be a 2-d sample (rows are observations)")
    return X - X.mean(axis=0, keepdims=True)


def _check_covariance(Xc: np.ndarray):
    cov = (Xc.T @ Xc) / Xc.shape[0]
    if np.linalg.matrix_rank(cov, tol=1e-10 * max(1.0, float(np.trace(cov)))) < cov.shape[0]:
        raise NumericalError("sample covariance of X is singular")
    return cov


def radial_set(
    Y: EmpiricalDist,
    X,
    directions=None,
    epsilon: float = 0.25,
    tail_limits: bool = False,
) -> StarSet:
    """Plug-in star set: the per-direction radial value on projected samples.

    Y must be the centered outcome distribution; X the covariate sample
    (rows), centered here once so every direction shares the same centering.
    For p = 2 the convex hull of the boundary points is attached.
    """
    Xc = _center_columns(X)
    p = Xc.shape[1]
    _check_covariance(Xc)
    if directions is None:
        directions = sphere_grid(p)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    Fy = superquantile_curve(Y)
    upper = np.empty(directions.shape[0])
    for i, q in enumerate(directions):
        proj = Xc @ q
        dist = centered_empirical(proj)
        if dist.is_degenerate:
            upper[i] = 0.0
            continue
        G = superquantile_curve(dist)
        upper[i] = s_epsilon(Fy, G, epsilon, tail_limits=tail_limits).value
    out = StarSet(directions=directions, upper=upper, epsilon=epsilon)
    if p == 2:
        out.hull_vertices = convex_hull_2d(out.boundary_points())
    return out


def convex_hull_2d(points) -> np.ndarray:
    """Vertices of the planar convex hull, counterclockwise (quickhull).

    Degenerate clouds (all points collinear) fall back to the extreme
    segment endpoints.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2:
        raise ValueError("convex_hull_2d expects 2-d points")
    uniq = np.unique(pts, axis=0)
    if uniq.shape[0] < 3:
        return uniq
    try:
        hull = ConvexHull(uniq)
    except QhullError:
        i = np.lexsort((uniq[:, 1], uniq[:, 0]))
        return uniq[[i[0], i[-1]]]
    return uniq[hull.vertices]


def variance_ellipsoid(y_sample, x_sample) -> Ellipsoid:
    """Benchmark set from second moments only: {b : b'V(X)b <= V(Y)}."""
    y = np.asarray(y_sample, dtype=float).ravel()
    Xc = _center_columns(x_sample)
    v_y = float(np.var(y))
    if v_y <= 0:
        raise ValueError("outcome variance must be positive")
    cov = (Xc.T @ Xc) / Xc.shape[0]
    return Ellipsoid(shape=cov, radius_sq=v_y)


def _central_diff_grad(fun, x, step=1e-6):
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = step
        g[j] = (fun(x + e) - fun(x - e)) / (2.0 * step)
    return g


def support_function(
    Y: EmpiricalDist,
    X,
    component: int,
    epsilon: float = 0.25,
    sign: int = 1,
    tail_limits: bool = False,
    fd_step: float = 1e-6,
    max_iter: int = 500,
    multistart: bool = False,
) -> SupportValue:
    """Sharp bound on one coordinate via convex minimization over a slice.

    Minimizes 1 / S_eps over {q : q_k = sign} with BFGS on the remaining
    coordinates, central finite-difference gradients, starting from the
    coordinate direction itself.  Returns the reciprocal of the minimum.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    Xc = _center_columns(X)
    p = Xc.shape[1]
    if not 0 <= component < p:
        raise ValueError("component index out of range")
    _check_covariance(Xc)
    Fy = superquantile_curve(Y)

    def radial_at(q: np.ndarray) -> float:
        proj = Xc @ q
        dist = centered_empirical(proj)
        if dist.is_degenerate:
            return 0.0
        return s_epsilon(Fy, superquantile_curve(dist), epsilon, tail_limits=tail_limits).value

    if p == 1:
        q = np.array([float(sign)])
        val = radial_at(q)
        return SupportValue(component, sign, val, q, True, 0, epsilon)

    free_idx = [j for j in range(p) if j != component]

    def assemble(z: np.ndarray) -> np.ndarray:
        q = np.empty(p)
        q[component] = sign
        q[free_idx] = z
        return q

    def objective(z: np.ndarray) -> float:
        s = radial_at(assemble(z))
        if s <= 0:
            return np.inf
        return 1.0 / s

    starts = [np.zeros(p - 1)]
    if multistart:
        for j in range(p - 1):
            for s0 in (1.0, -1.0):
                z0 = np.zeros(p - 1)
                z0[j] = s0
                starts.append(z0)

    best = None
    total_iter = 0
    converged = False
    for z0 in starts:
        res = optimize.minimize(
            objective,
            z0,
            method="BFGS",
            jac=lambda z: _central_diff_grad(objective, z, fd_step),
            options={"maxiter": max_iter, "gtol": 1e-10, "xrtol": 1e-8},
        )
        total_iter += int(res.nit)
        if best is None or res.fun < best.fun:
            best = res
        converged = converged or bool(res.success) or res.status == 2
    if not np.isfinite(best.fun) or best.fun <= 0:
        raise NumericalError("support-function minimization failed to find a finite value")
    q_opt = assemble(best.x)
    return SupportValue(
        component_index=component,
        sign=sign,
        value=float(1.0 / best.fun),
        minimizer=q_opt,
        converged=converged,
        iterations=total_iter,
        epsilon=epsilon,
    )


def projection_interval(
    Y: EmpiricalDist,
    X,
    k: int,
    epsilon: float = 0.25,
    tail_limits: bool = False,
    **opt_kwargs,
) -> tuple[float, float]:
    """Sharp interval for the k-th coefficient; always contains 0."""
    hi = support_function(Y, X, k, epsilon, sign=1, tail_limits=tail_limits, **opt_kwargs)
    lo = support_function(Y, X, k, epsilon, sign=-1, tail_limits=tail_limits, **opt_kwargs)
    return (-lo.value, hi.value)
