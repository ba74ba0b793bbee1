"""Command line: ingest two CSV samples, run an analysis, emit a JSON report.

Subcommands: set (plug-in star set and hull), region (subsampling confidence
region), ci (component interval), mc (Monte Carlo harness), pointid
(boundary test on a joint sample), tstsls (exclusion-restricted benchmark
plus equality test).  Reports embed the full effective configuration and are
byte-identical across runs with the same seed.  Exit codes: 0 ok, 2 invalid
input, 3 numerical failure.
"""

import argparse
import json
import math
import sys
import numpy as np
import pandas as pd

from . import __version__
from . import constraints as cons
from .errors import NumericalError
from .geometry import default_direction_count, sphere_grid
from .inference import (
    InferenceConfig,
    confidence_interval_component,
    confidence_region,
    constrained_region,
    equality_test,
    point_id_test,
    select_epsilon,
    tstsls,
    tstsls_interval,
)
from .partition import TwoSampleDataset, conditional_moments, residualize, s_bar
from .simlab import run_monte_carlo

SCHEMA_VERSION = 1

__all__ = ["main", "run_command", "load_dataset", "write_report", "build_parser"]


def _clean(value):
    """JSON-safe, deterministic representation of results."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        f = float(value)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def _read_columns(path: str, y_col: str | None, xnc_cols: list, xc_cols: list,
                  split_col: str | None = None):
    df = pd.read_csv(path)
    needed = ([y_col] if y_col else []) + xnc_cols + xc_cols + ([split_col] if split_col else [])
    for col in needed:
        if col not in df.columns:
            raise ValueError(f"column {col!r} missing from {path}")
    return df


def _xc_labels(df: pd.DataFrame, xc_cols: list) -> np.ndarray:
    if not xc_cols:
        return np.zeros(len(df), dtype=int)
    if len(xc_cols) == 1:
        return df[xc_cols[0]].to_numpy()
    return np.array([tuple(row) for row in df[xc_cols].itertuples(index=False)],
                    dtype=object)


def load_dataset(outcome_csv: str, covariate_csv: str, y_col: str,
                 xnc_cols: list, xc_cols: list | None = None,
                 split_col: str | None = None) -> tuple[TwoSampleDataset, dict]:
    """Read the two samples; returns (dataset, ingestion report).

    With ``split_col`` both samples come from ``outcome_csv``: rows whose
    split value is "y" form the outcome sample and rows with "x" the
    covariate sample.  Rows with missing or non-numeric entries in used
    numeric columns are dropped and counted.
    """
    xc_cols = xc_cols or []
    if split_col:
        df = _read_columns(outcome_csv, y_col, xnc_cols, xc_cols, split_col)
        tag = df[split_col].astype(str).str.strip().str.lower()
        df_y = df[tag == "y"]
        df_x = df[tag == "x"]
        if len(df_y) == 0 or len(df_x) == 0:
            raise ValueError("split column must mark rows 'y' (outcome) and 'x' (covariate)")
    else:
        df_y = _read_columns(outcome_csv, y_col, [], xc_cols)
        df_x = _read_columns(covariate_csv, None, xnc_cols, xc_cols)

    y_raw = pd.to_numeric(df_y[y_col], errors="coerce")
    keep_y = y_raw.notna()
    x_numeric = df_x[xnc_cols].apply(pd.to_numeric, errors="coerce")
    keep_x = x_numeric.notna().all(axis=1)
    for cols, frame, keep in ((xc_cols, df_y, keep_y), (xc_cols, df_x, keep_x)):
        for c in cols:
            keep &= frame[c].notna()
    dropped = {"outcome": int((~keep_y).sum()), "covariates": int((~keep_x).sum())}
    df_y, y_raw = df_y[keep_y], y_raw[keep_y]
    df_x, x_numeric = df_x[keep_x], x_numeric[keep_x]
    if len(df_y) == 0 or len(df_x) == 0:
        raise ValueError("no usable rows after dropping missing values")

    y_xc = _xc_labels(df_y, xc_cols)
    x_xc = _xc_labels(df_x, xc_cols)
    if xc_cols:
        common = set(np.unique(y_xc).tolist()) & set(np.unique(x_xc).tolist())
        if not common:
            raise ValueError("the two samples share no common-regressor value")
        only_y = sorted(set(np.unique(y_xc).tolist()) - common)
        only_x = sorted(set(np.unique(x_xc).tolist()) - common)
    else:
        only_y, only_x = [], []
    ds = TwoSampleDataset(y=y_raw.to_numpy(float), y_xc=y_xc,
                          x_nc=x_numeric.to_numpy(float), x_xc=x_xc)
    report = {
        "n_y": ds.n_y, "n_x": ds.n_x, "n_effective": ds.n,
        "dropped_rows": dropped,
        "unmatched_cells": {"outcome_only": [str(v) for v in only_y],
                            "covariate_only": [str(v) for v in only_x]},
    }
    return ds, report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radialreg",
        description="Bounds and confidence regions for partially linear "
                    "regressions estimated from two unlinked samples.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_args(p, covariates=True):
        p.add_argument("--outcome", required=True, help="CSV with the outcome sample")
        if covariates:
            p.add_argument("--covariates", help="CSV with the covariate sample")
            p.add_argument("--split-col",
                           help="single-file mode: column marking rows 'y'/'x'")
        p.add_argument("--y", required=True, help="outcome column name")
        p.add_argument("--xnc", required=True,
                       help="comma-separated covariate column names")
        p.add_argument("--xc", default="",
                       help="comma-separated common-regressor column names")

    def add_tuning(p):
        p.add_argument("--epsilon", default="auto",
                       help="trim in (0, 1/2], or 'auto' for the data-driven rule")
        p.add_argument("--eps-grid", default="",
                       help="comma-separated grid for the data-driven rule")
        p.add_argument("--level", type=float, default=0.95)
        p.add_argument("--bn", type=int, default=0,
                       help="effective subsample size (default ceil(n^(2/3)))")
        p.add_argument("--subsamples", type=int, default=1000,
                       help="number of subsampling replications")
        p.add_argument("--min-cell", type=int, default=10)
        p.add_argument("--tail-limits", action="store_true",
                       help="include the limiting tail ratios in the minimization")
        p.add_argument("--seed", type=int, default=0)

    def add_output(p):
        p.add_argument("--out", default="", help="report path (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json",
                       help="csv adds a plot-ready file next to the JSON report")

    p_set = sub.add_parser("set", help="plug-in identified set")
    add_data_args(p_set)
    add_tuning(p_set)
    p_set.add_argument("--directions", type=int, default=0)
    p_set.add_argument("--constraints", default="", help="constraint JSON file")
    add_output(p_set)

    p_region = sub.add_parser("region", help="confidence region for the coefficients")
    add_data_args(p_region)
    add_tuning(p_region)
    p_region.add_argument("--directions", type=int, default=0)
    p_region.add_argument("--constraints", default="")
    add_output(p_region)

    p_ci = sub.add_parser("ci", help="confidence interval for one coefficient")
    add_data_args(p_ci)
    add_tuning(p_ci)
    p_ci.add_argument("--component", type=int, default=1,
                      help="1-based coefficient index")
    add_output(p_ci)

    p_mc = sub.add_parser("mc", help="Monte Carlo coverage study on a preset")
    p_mc.add_argument("--preset", required=True)
    p_mc.add_argument("--n", type=int, required=True, help="per-sample size")
    p_mc.add_argument("--sims", type=int, required=True)
    p_mc.add_argument("--methods", default="region",
                      help="comma-separated: region, sign-constrained, tstsls")
    add_tuning(p_mc)
    add_output(p_mc)

    p_pid = sub.add_parser("pointid", help="boundary test on a joint validation sample")
    add_data_args(p_pid, covariates=False)
    add_tuning(p_pid)
    p_pid.add_argument("--eps-multiplier", type=float, default=1.0)
    add_output(p_pid)

    p_ts = sub.add_parser("tstsls", help="exclusion-restricted benchmark and equality test")
    add_data_args(p_ts)
    add_tuning(p_ts)
    add_output(p_ts)

    return parser


def _split_cols(text: str) -> list:
    return [c.strip() for c in text.split(",") if c.strip()]


def _tuning_config(args) -> InferenceConfig:
    if args.eps_grid:
        epsilon = tuple(float(e) for e in _split_cols(args.eps_grid))
    elif args.epsilon == "auto":
        epsilon = "auto"
    else:
        epsilon = float(args.epsilon)
    return InferenceConfig(
        level=args.level,
        b_n=args.bn if args.bn > 0 else None,
        replications=args.subsamples,
        epsilon=epsilon,
        seed=args.seed,
        min_cell=getattr(args, "min_cell", 10),
        tail_limits=bool(getattr(args, "tail_limits", False)),
    )


def _effective_config(args, config: InferenceConfig, dataset=None) -> dict:
    out = {
        "command": args.command,
        "level": config.level,
        "replications": config.replications,
        "epsilon": config.epsilon if np.isscalar(config.epsilon) and not isinstance(config.epsilon, str)
        else list(config.eps_grid()),
        "epsilon_mode": "auto" if config.adaptive else "fixed",
        "b_n": config.b_n if config.b_n is not None
        else (config.resolve_b(dataset.n) if dataset is not None else None),
        "seed": config.seed,
        "min_cell": config.min_cell,
        "tail_limits": config.tail_limits,
    }
    for key in ("outcome", "covariates", "split_col", "y", "xnc", "xc", "component",
                "directions", "constraints", "preset", "n", "sims", "methods",
                "eps_multiplier"):
        if hasattr(args, key):
            out[key] = getattr(args, key)
    return out


def _load_constraints(path: str, xc_support) -> cons.ConstraintSpec | None:
    if not path:
        return None
    with open(path) as fh:
        payload = json.load(fh)
    return cons.spec_from_dict(payload, xc_support)


def _resolve_directions(dataset, count: int) -> np.ndarray:
    m = count if count > 0 else default_direction_count(dataset.p)
    return sphere_grid(dataset.p, m)


def _resolve_set_epsilon(dataset, config: InferenceConfig) -> tuple[float, dict]:
    """The set-level trim: smallest per-coordinate data-driven choice."""
    if not config.adaptive:
        return config.eps_grid()[0], {}
    chosen = {}
    for k in range(dataset.p):
        e = np.zeros(dataset.p)
        e[k] = 1.0
        for sign in (1, -1):
            chosen[f"{'+' if sign > 0 else '-'}e{k + 1}"] = select_epsilon(
                dataset, sign * e, config)
    return min(chosen.values()), chosen


def run_command(args) -> tuple[int, dict]:
    """Execute a parsed command; returns (exit code, report)."""
    report: dict = {"schema_version": SCHEMA_VERSION,
                    "package": {"name": "radialreg", "version": __version__}}
    config = _tuning_config(args)

    if args.command == "mc":
        mc = run_monte_carlo(args.preset, sims=args.sims, config=config,
                             n=args.n, seed=args.seed,
                             methods=tuple(_split_cols(args.methods)))
        report["config"] = _effective_config(args, config)
        report["results"] = mc.as_dict()
        return 0, report

    xc_cols = _split_cols(args.xc)
    xnc_cols = _split_cols(args.xnc)
    if args.command == "pointid":
        df = _read_columns(args.outcome, args.y, xnc_cols, [])
        X = df[xnc_cols].apply(pd.to_numeric, errors="coerce")
        y = pd.to_numeric(df[args.y], errors="coerce")
        keep = X.notna().all(axis=1) & y.notna()
        if not keep.any():
            raise ValueError("no usable rows after dropping missing values")
        report["config"] = _effective_config(args, config)
        report["data"] = {"n": int(keep.sum()), "dropped_rows": int((~keep).sum())}
        res = point_id_test(X[keep].to_numpy(float), y[keep].to_numpy(float),
                            config, eps_multiplier=args.eps_multiplier)
        report["results"] = {
            "statistic": res.statistic, "critical_value": res.critical_value,
            "p_value": res.p_value, "reject": res.reject, "kind": res.kind,
            "coefficient": list(np.atleast_1d(res.auxiliary)),
        }
        return 0, report

    covariates = getattr(args, "covariates", None)
    split_col = getattr(args, "split_col", None)
    if covariates is None and not split_col:
        raise ValueError("provide --covariates or --split-col")
    ds, ingest = load_dataset(args.outcome, covariates, args.y, xnc_cols,
                              xc_cols, split_col)
    report["config"] = _effective_config(args, config, ds)
    report["data"] = ingest

    if args.command == "set":
        eps, eps_by_dir = _resolve_set_epsilon(ds, config)
        directions = _resolve_directions(ds, args.directions)
        part = residualize(ds, config.min_cell)
        upper = np.array([
            s_bar(part, q, eps, config.tail_limits).value for q in directions
        ])
        results = {
            "epsilon": eps, "epsilon_by_coordinate": eps_by_dir,
            "directions": directions, "upper": upper,
            "lower": np.zeros(len(upper)),
            "cells_retained": [str(c.value) for c in part.cells],
            "cells_excluded": [[str(v), why, ny, nx] for v, why, ny, nx in part.excluded],
        }
        spec_c = _load_constraints(args.constraints, [c.value for c in part.cells])
        if spec_c is not None:
            moments = conditional_moments(ds, part)
            lo, up = cons.combine_bounds(directions, upper, moments, spec_c)
            results["lower"], results["upper"] = lo, up
            results["empty_directions"] = int(np.sum(lo > up))
        if ds.p == 2:
            from .geometry import convex_hull_2d

            keep = np.isfinite(results["upper"]) & (results["lower"] <= results["upper"])
            pts = directions[keep] * np.asarray(results["upper"])[keep, None]
            results["hull"] = convex_hull_2d(pts) if keep.any() else []
        report["results"] = _star_payload(results)
        return 0, report

    if args.command == "region":
        directions = _resolve_directions(ds, args.directions)
        spec_c = None
        if args.constraints:
            part = residualize(ds, config.min_cell)
            spec_c = _load_constraints(args.constraints, [c.value for c in part.cells])
        if spec_c is None:
            region = confidence_region(ds, directions, config)
        else:
            region = constrained_region(ds, directions, spec_c, config)
        results = {
            "directions": region.directions,
            "estimate": region.estimate,
            "critical": region.critical,
            "bound": region.bound,
            "epsilon": region.epsilon,
            "level": region.level,
            "b_n": region.b_n,
            "failed_replications": region.failures,
        }
        if region.lower_bound is not None:
            results["lower_estimate"] = region.lower_estimate
            results["lower_critical"] = region.lower_critical
            results["lower_bound"] = region.lower_bound
        if ds.p == 2:
            from .geometry import convex_hull_2d

            lo = region.lower_bound if region.lower_bound is not None else np.zeros_like(region.bound)
            keep = np.isfinite(region.bound) & (lo <= region.bound)
            if keep.any():
                results["hull"] = convex_hull_2d(
                    region.directions[keep] * region.bound[keep, None])
        report["results"] = _star_payload(results)
        return 0, report

    if args.command == "ci":
        k = args.component - 1
        out = confidence_interval_component(ds, k, config)
        report["results"] = {
            "component": args.component,
            "interval": list(out["interval"]),
            "estimate_interval": list(out["estimate_interval"]),
            "epsilon": out["epsilon"],
            "critical": out["critical"],
            "level": out["level"],
            "failed_replications": out["failures"],
        }
        return 0, report

    if args.command == "tstsls":
        est = tstsls(ds)
        ival = tstsls_interval(ds, 0, config)
        eq = equality_test(ds, config)
        report["results"] = {
            "estimate": est,
            "interval": list(ival["interval"]),
            "level": config.level,
            "equality_test": {
                "statistic": eq.statistic, "critical_value": eq.critical_value,
                "p_value": eq.p_value, "reject": eq.reject,
            },
        }
        return 0, report

    raise ValueError(f"unknown command {args.command!r}")


def _star_payload(results: dict) -> dict:
    payload = dict(results)
    if "directions" in payload:
        payload["directions"] = np.asarray(payload["directions"])
    return payload


def write_report(report: dict, out_path: str = "", fmt: str = "json") -> str:
    """Serialize deterministically; returns the JSON text."""
    text = json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
        if fmt == "csv":
            _write_csv_companion(report, out_path)
    return text


def _write_csv_companion(report: dict, out_path: str):
    """Plot-ready CSV: hull polygon (closed) or interval rows."""
    base = out_path[:-5] if out_path.endswith(".json") else out_path
    res = report.get("results", {})
    lines = []
    hull = res.get("hull")
    if hull is not None and len(hull) > 0:
        pts = np.asarray(hull, dtype=float)
        lines.append("x,y")
        for row in np.vstack((pts, pts[:1])):  # repeat the first vertex to close
            lines.append(f"{float(row[0])!r},{float(row[1])!r}")
    elif "interval" in res:
        lines.append("lower,upper")
        lo, hi = res["interval"]
        lines.append(f"{float(lo)!r},{float(hi)!r}")
    elif "bound" in res or "upper" in res:
        bound = np.asarray(res.get("bound", res.get("upper")), dtype=float)
        dirs = np.asarray(res["directions"], dtype=float)
        lines.append(",".join(f"q{j + 1}" for j in range(dirs.shape[1])) + ",bound")
        for q, b in zip(dirs, bound):
            lines.append(",".join(repr(float(v)) for v in q) + f",{float(b)!r}")
    elif "targets" in res:
        lines.append("method,field,lower,upper")
        for method in sorted(res["targets"]):
            summary = res["targets"][method]
            for field in ("reference", "avg_set", "avg_ci"):
                if field in summary:
                    lo, hi = summary[field]
                    lines.append(f"{method},{field},{float(lo)!r},{float(hi)!r}")
            for field in ("coverage", "excess_length", "avg_estimate"):
                if field in summary:
                    v = float(summary[field])
                    lines.append(f"{method},{field},{v!r},{v!r}")
    else:
        return
    with open(base + ".csv", "w") as fh:
        fh.write("\n".join(lines) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, report = run_command(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    text = write_report(report, args.out, args.format)
    if not args.out:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
