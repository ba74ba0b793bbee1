"""Sharp bounds for partially linear regressions from two unlinked samples.

The outcome lives in one dataset and the covariates of interest in another;
the set of coefficients compatible with both marginals is convex, contains
the origin, and is recovered direction by direction from the minimized ratio
of tail-quantile integrals.  Subsampling turns the plug-in set into
confidence regions; discrete covariates shared by both datasets shrink the
set through within-cell residualization, and shape or fit restrictions can
shrink it further.
"""

__version__ = "0.1.0"

from .empdist import (
    EmpiricalDist,
    SuperquantileCurve,
    build_empirical,
    center,
    centered_empirical,
    quantile,
    superquantile_curve,
)
from .errors import NumericalError
from .geometry import (
    Ellipsoid,
    StarSet,
    SupportValue,
    projection_interval,
    radial_set,
    sphere_grid,
    support_function,
    variance_ellipsoid,
)
from .inference import (
    ConfidenceRegion,
    InferenceConfig,
    TestResult,
    confidence_interval_component,
    confidence_region,
    constrained_region,
    equality_test,
    point_id_test,
    select_epsilon,
    subsample_statistic,
    tstsls,
    tstsls_interval,
)
from .partition import (
    CellPartition,
    ConditionalMoments,
    TwoSampleDataset,
    conditional_moments,
    f_set,
    interaction_radial,
    residualize,
    s_bar,
    short_r2,
)
from .radial import (
    RadialValue,
    dominance_check,
    ratio_R,
    s_epsilon,
    s_oracle_bisection,
    s_unregularized,
)
from .constraints import (
    ConstraintSpec,
    ShapeOperator,
    build_shape_operator,
    combine,
    r2_lower_bound,
    shape_bounds,
)
from .simlab import DgpSpec, McReport, make_dgp, run_monte_carlo

__all__ = [
    "__version__",
    "NumericalError",
    # empirical distributions
    "EmpiricalDist", "SuperquantileCurve", "build_empirical", "center",
    "centered_empirical", "quantile", "superquantile_curve",
    # radial function
    "RadialValue", "dominance_check", "ratio_R", "s_epsilon",
    "s_oracle_bisection", "s_unregularized",
    # geometry
    "Ellipsoid", "StarSet", "SupportValue", "projection_interval",
    "radial_set", "sphere_grid", "support_function", "variance_ellipsoid",
    # common regressors
    "CellPartition", "ConditionalMoments", "TwoSampleDataset",
    "conditional_moments", "f_set", "interaction_radial", "residualize",
    "s_bar", "short_r2",
    # constraints
    "ConstraintSpec", "ShapeOperator", "build_shape_operator", "combine",
    "r2_lower_bound", "shape_bounds",
    # inference
    "ConfidenceRegion", "InferenceConfig", "TestResult",
    "confidence_interval_component", "confidence_region", "constrained_region",
    "equality_test", "point_id_test", "select_epsilon", "subsample_statistic",
    "tstsls", "tstsls_interval",
    # simulation lab
    "DgpSpec", "McReport", "make_dgp", "run_monte_carlo",
]
