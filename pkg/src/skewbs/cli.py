"""Command-line front end: ``skewbs {fit,influence,leverage,rc,simulate}``.

Exit status is 0 on success, 1 on a numerical failure (non-convergence,
singular information, eigen-solver failure, rank-deficient design) and 2 on
usage or input errors.  JSON output carries ``"schema": "skewbs/1"`` and all
floats are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import __version__
from .diagnostics import Scheme, generalized_leverage, local_influence, parameter_indices
from .errors import (
    ConstantColumnError,
    ConvergenceError,
    DomainError,
    EigenFailure,
    InvalidPair,
    ParseError,
    RankError,
    SingularityError,
)
from .fitting import FitOptions, fit, fit_restricted, lr_test, relative_changes
from .io import fmt, read_csv_dataset, read_table
from .regression import Dataset, ModelParams, simulate_response
from .special_fns import default_rule

__all__ = ["RunConfig", "ingest", "build_parser", "main"]

SCHEMA = "skewbs/1"
ENV_QUAD = "SKEWBS_QUAD_ORDER"
EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    input_path: str
    response_column: str
    covariate_columns: list[str]
    log_response: bool = False
    log_covariates: list[str] = field(default_factory=list)
    intercept: bool = True
    quadrature_order: int | None = None
    seed: int = 0
    output_format: str = "json"


def ingest(config: RunConfig) -> Dataset:
    """Read the input file into a :class:`Dataset` (row order preserved)."""
    if config.response_column in config.covariate_columns:
        raise DomainError("response column must be distinct from the covariates")
    return read_csv_dataset(
        config.input_path,
        response=config.response_column,
        covariates=list(config.covariate_columns),
        log_response=config.log_response,
        log_covariates=list(config.log_covariates),
        intercept=config.intercept,
    )


# -- output -----------------------------------------------------------------


def _json(obj, indent=0) -> str:
    """JSON with 17-significant-digit floats; non-finite floats become null."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None or isinstance(obj, bool):
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _json(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    return str(v)


def _csv(header, rows, comment: dict | None = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write("# " + ";".join(f"{k}={_csv_cell(v)}" for k, v in comment.items()) + "\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_csv_cell(v) for v in row) + "\n")
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(output, "w", newline="") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _param_names(p: int) -> list[str]:
    return [f"beta{k + 1}" for k in range(p)] + ["alpha", "lambda"]


# -- configuration ----------------------------------------------------------


def _split(text: str | None) -> list[str]:
    if text is None:
        return []
    return [t.strip() for t in text.split(",") if t.strip()]


def _quad_order(args) -> int | None:
    if args.quad_order is not None:
        order = args.quad_order
    elif os.environ.get(ENV_QUAD):
        try:
            order = int(os.environ[ENV_QUAD])
        except ValueError:
            raise UsageError(f"{ENV_QUAD} must be an integer, got {os.environ[ENV_QUAD]!r}") from None
    else:
        return None
    if order < 3:
        raise UsageError("quadrature order must be at least 3")
    return order


def _config(args) -> RunConfig:
    if args.mccool:
        with resources.as_file(resources.files("skewbs") / "data" / "mccool.csv") as path:
            input_path = str(path)
        response = args.response or "T"
        covariates = _split(args.covariates) or ["stress"]
        log_response = True
        log_covariates = _split(args.log_covariates) or ["stress"]
    else:
        if not args.input:
            raise UsageError("--input is required (or use --mccool for the bundled data)")
        if not args.response or (not args.covariates and args.no_intercept):
            raise UsageError("--response is required, plus --covariates when --no-intercept is set")
        input_path = args.input
        response = args.response
        covariates = _split(args.covariates)
        log_response = args.log_response
        log_covariates = _split(args.log_covariates)
    if not os.path.isfile(input_path):
        raise UsageError(f"input file not found: {input_path}")
    return RunConfig(
        input_path=input_path,
        response_column=response,
        covariate_columns=covariates,
        log_response=log_response,
        log_covariates=log_covariates,
        intercept=not args.no_intercept,
        quadrature_order=_quad_order(args),
        seed=args.seed,
        output_format=args.format,
    )


def _options(config: RunConfig, args) -> FitOptions:
    return FitOptions(
        quad_order=config.quadrature_order,
        lambda_fixed=getattr(args, "lambda_fixed", None),
        strict=True,
    )


def _fit_baseline(data, config, args):
    """Full-model fit for the diagnostics, which are derived with lambda free."""
    if args.lambda_fixed is not None:
        raise UsageError("--lambda-fixed is not supported for influence or leverage")
    return fit(data, _options(config, args))


# -- commands ---------------------------------------------------------------


def _model_record(res, p):
    d = res.to_dict()
    d["parameters"] = _param_names(p)
    return d


def cmd_fit(config: RunConfig, args) -> int:
    data = ingest(config)
    opts = _options(config, args)
    models = {}
    lr = None
    if opts.lambda_fixed is None:
        full = fit(data, opts)
        restricted = fit_restricted(data, opts)
        models["skewed"] = _model_record(full, data.p)
        models["log_bs"] = _model_record(restricted, data.p)
        lr = lr_test(full, restricted)
    else:
        res = fit(data, opts)
        key = "log_bs" if opts.lambda_fixed == 0 else "lambda_fixed"
        models[key] = _model_record(res, data.p)

    if config.output_format == "json":
        out = {"schema": SCHEMA, "command": "fit", "n_obs": data.n, "models": models}
        if lr is not None:
            out["lr_test"] = {
                "statistic": lr.statistic,
                "df": lr.df,
                "critical_5pct": lr.critical_5pct,
                "reject": lr.reject,
                "p_value": lr.p_value,
            }
        _emit(_json(out), args.output)
        return EXIT_OK

    rows = []
    for name, m in models.items():
        est = [*m["beta"], m["alpha"], m["lambda"]]
        se = [*m["se"]["beta"], m["se"]["alpha"], m["se"]["lambda"]]
        for pname, e, s in zip(m["parameters"], est, se):
            rows.append((name, pname, e, s))
        for q in ("loglik", "aic", "bic", "hqic"):
            rows.append((name, q, m[q], None))
    if lr is not None:
        rows.append(("lr_test", "statistic", lr.statistic, None))
        rows.append(("lr_test", "p_value", lr.p_value, None))
        rows.append(("lr_test", "reject", lr.reject, None))
    _emit(_csv(["model", "quantity", "value", "se"], rows, {"schema": SCHEMA, "command": "fit"}), args.output)
    return EXIT_OK


def _covariate_column(data: Dataset, index: int | None) -> int:
    if index is None:
        varying = [j for j in range(data.p) if np.ptp(data.X[:, j]) > 0]
        if len(varying) != 1:
            raise UsageError("--covariate-index is required when the design has several non-constant columns")
        return varying[0]
    if not 1 <= index <= data.p:
        raise UsageError(f"--covariate-index must be in [1, {data.p}]")
    return index - 1


def cmd_influence(config: RunConfig, args) -> int:
    data = ingest(config)
    res = _fit_baseline(data, config, args)
    scheme = Scheme(args.scheme)
    column = _covariate_column(data, args.covariate_index) if scheme is Scheme.COVARIATE else None
    subset = None
    if args.subset:
        try:
            subset = parameter_indices(data.p, _split(args.subset))
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        if len(subset) == data.p + 2:
            subset = None
    rule = default_rule(config.quadrature_order)
    report = local_influence(data, res.theta_hat, scheme, column, subset, rule=rule)
    names = _param_names(data.p)
    subset_names = None if subset is None else [names[i] for i in subset]
    cases = np.arange(1, data.n + 1)
    meta = {
        "schema": SCHEMA,
        "command": "influence",
        "scheme": scheme.value,
        "covariate_index": None if column is None else column + 1,
        "subset": None if subset_names is None else "+".join(subset_names),
        "c_dmax": report.c_dmax,
    }
    if config.output_format == "json":
        out = dict(meta, subset=subset_names, n_obs=data.n, case=cases, d_max_abs=report.d_max_abs)
        _emit(_json(out), args.output)
    else:
        _emit(_csv(["case", "d_max_abs"], zip(cases, report.d_max_abs), meta), args.output)
    return EXIT_OK


def cmd_leverage(config: RunConfig, args) -> int:
    data = ingest(config)
    res = _fit_baseline(data, config, args)
    gl = generalized_leverage(data, res.theta_hat, default_rule(config.quadrature_order))
    cases = np.arange(1, data.n + 1)
    meta = {"schema": SCHEMA, "command": "leverage"}
    if config.output_format == "json":
        out = dict(meta, n_obs=data.n, case=cases, diagonal=gl.diagonal)
        if args.full:
            out["matrix"] = gl.values
        _emit(_json(out), args.output)
    else:
        header = ["case", "gl_diag"]
        cols = [cases, gl.diagonal]
        if args.full:
            header += [f"gl_{l}" for l in cases]
            cols += list(gl.values.T)
        _emit(_csv(header, zip(*cols), meta), args.output)
    return EXIT_OK


def _drop_list(text: str, n: int) -> list[int]:
    text = text.strip()
    if text.lower() == "all":
        return list(range(n))
    out = []
    for tok in _split(text):
        try:
            k = int(tok)
        except ValueError:
            raise UsageError(f"--drop entries must be integers, got {tok!r}") from None
        if not 1 <= k <= n:
            raise UsageError(f"--drop index {k} out of range [1, {n}]")
        if k - 1 in out:
            raise UsageError(f"--drop index {k} repeated")
        out.append(k - 1)
    return out


def cmd_rc(config: RunConfig, args) -> int:
    data = ingest(config)
    drop = _drop_list(args.drop, data.n)
    opts = _options(config, args)
    base = fit(data, opts)
    rows = relative_changes(data, base, drop, opts, warm_start=args.warm_start, denominator=args.rc_denominator)
    names = _param_names(data.p)
    meta = {"schema": SCHEMA, "command": "rc", "denominator": args.rc_denominator}
    if config.output_format == "json":
        records = [
            {
                "case": r.dropped_index + 1,
                "rc": dict(zip(names, r.rc.tolist())),
                "se": dict(zip(names, r.se_after.tolist())),
                "theta": dict(zip(names, r.theta_after.tolist())),
                "converged": r.converged,
                "error": r.error,
            }
            for r in rows
        ]
        out = dict(meta, n_obs=data.n, baseline=dict(zip(names, base.theta_vector.tolist())), rows=records)
        _emit(_json(out), args.output)
    else:
        header = ["case"] + [f"rc_{k}" for k in names] + [f"se_{k}" for k in names] + ["converged", "error"]
        body = [
            [r.dropped_index + 1, *r.rc, *r.se_after, r.converged, (r.error or "").replace(",", ";")]
            for r in rows
        ]
        _emit(_csv(header, body, meta), args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    """Draw ``y`` from the model on a supplied or unit-uniform design and write ``y, x...`` as CSV."""
    beta = [float(b) for b in _split(args.beta)]
    if not beta:
        raise UsageError("--beta needs at least one coefficient")
    if args.n < 1:
        raise UsageError("--n must be positive")
    if not args.alpha > 0:
        raise UsageError("--alpha must be positive")
    seq = np.random.SeedSequence(args.seed)
    design_seed, noise_seed = seq.spawn(2)
    intercept = not args.no_intercept
    k = len(beta) - int(intercept)
    if args.design:
        header, table = read_table(args.design)
        if table.shape[1] != k:
            raise UsageError(f"design file has {table.shape[1]} columns but --beta implies {k} covariates")
        if table.shape[0] != args.n:
            raise UsageError(f"design file has {table.shape[0]} rows but --n is {args.n}")
        names = header
        Z = table
    else:
        names = [f"x{j + 1}" for j in range(k)]
        Z = np.random.default_rng(design_seed).uniform(size=(args.n, k))
    X = np.column_stack([np.ones(args.n), Z]) if intercept else Z
    if X.shape[1] == 0:
        raise UsageError("design has no columns")
    theta = ModelParams(np.array(beta), args.alpha, args.lam)
    y = simulate_response(X, theta, seed=noise_seed)
    if "y" in names:
        raise UsageError("design column name 'y' clashes with the response column")
    _emit(_csv(["y", *names], (row for row in np.column_stack([y, Z]))), args.output)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _add_data_args(p):
    g = p.add_argument_group("data")
    g.add_argument("--input", help="CSV file with a header row")
    g.add_argument("--mccool", action="store_true", help="use the bundled McCool data, log(T) ~ 1 + log(stress)")
    g.add_argument("--response", help="response column name")
    g.add_argument("--covariates", help="comma-separated covariate column names")
    g.add_argument("--log-response", action="store_true", help="take the natural log of the response")
    g.add_argument("--log-covariates", help="comma-separated covariates to log-transform")
    g.add_argument("--no-intercept", action="store_true", help="do not prepend a column of ones")
    g = p.add_argument_group("numerics and output")
    g.add_argument("--lambda-fixed", type=float, default=None, help="hold lambda at this value")
    g.add_argument("--quad-order", type=int, default=None, help=f"quadrature nodes (default: ${ENV_QUAD} or 257)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--output", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewbs", description="Skewed log-Birnbaum-Saunders regression")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the skewed and symmetric models, with LR test")
    _add_data_args(p)

    p = sub.add_parser("influence", help="local-influence |d_max| index data")
    _add_data_args(p)
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default="case")
    p.add_argument("--covariate-index", type=int, default=None, help="1-based design column for --scheme covariate")
    p.add_argument("--subset", help="parameters of interest, e.g. beta or alpha,lambda or beta2")

    p = sub.add_parser("leverage", help="generalized leverage")
    _add_data_args(p)
    p.add_argument("--full", action="store_true", help="also write the full n x n matrix")

    p = sub.add_parser("rc", help="relative changes after case deletion")
    _add_data_args(p)
    p.add_argument("--drop", default="all", help="1-based case numbers, comma-separated, or 'all'")
    p.add_argument("--rc-denominator", choices=("deleted", "full"), default="deleted")
    p.add_argument("--warm-start", action="store_true", help="start refits at the full-data estimate")

    p = sub.add_parser("simulate", help="draw a synthetic dataset from the model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", required=True, help="comma-separated coefficients, e.g. --beta=1,-0.5")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--design", help="CSV of covariate columns (default: unit-uniform draws)")
    p.add_argument("--no-intercept", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="output file (default: stdout)")
    return parser


_COMMANDS = {"fit": cmd_fit, "influence": cmd_influence, "leverage": cmd_leverage, "rc": cmd_rc}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        config = _config(args)
        return _COMMANDS[args.command](config, args)
    except (UsageError, ParseError, DomainError, ConstantColumnError, OSError) as exc:
        print(f"skewbs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, SingularityError, EigenFailure, RankError, InvalidPair, ArithmeticError) as exc:
        print(f"skewbs: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
