"""Command-line front end: ``ssbm {evi,ei,simulate,closed-form}``.

Reports are JSON with a top-level ``schema`` version.  Exit codes: 0 ok,
2 input error, 3 numerical or diagnostic error, 4 internal error.  On error
a JSON object naming the failing stage is printed to stdout.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from datetime import datetime

import numpy as np

from . import closedform
from .closedform import BmLaw
from .distributions import Family, TailModel, ecdf, fit_marginal
from .ei import theta_curve
from .errors import DomainError, InputError, SsbmError
from .evi import wlse_emr, wlse_mpmr
from .plateau import MONOTONE_NO_PLATEAU, find_plateau, fit_sd_spline
from .simulate import DEFAULT_SEED, run_benchmark
from .subsample import SortedSample, bm_curve, geometric_grid

__all__ = ["build_parser", "ingest", "main", "transform"]

SCHEMA = 1
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_INTERNAL = 0, 2, 3, 4

log = logging.getLogger("ssbm")


class Stage:
    """Name of the pipeline step currently running, for error reports."""

    def __init__(self):
        self.name = "args"

    def __call__(self, name):
        self.name = name
        return self


class DiagnosticFailure(SsbmError):
    """A diagnostic the caller asked to treat as fatal."""


# ---------------------------------------------------------------- ingestion

def _parse_timestamp(text: str) -> float:
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(text).timestamp()
    except ValueError as exc:
        raise InputError(f"unparseable timestamp {text!r}") from exc


def ingest(path, column: str, timestamp_column: str | None = None):
    """Read one numeric column from a CSV with a header row.

    Rows whose target cell does not parse as a finite number are dropped and
    counted.  With a timestamp column the series is stably sorted by time.
    Returns ``(series, info)``.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if column not in fields:
            raise InputError(f"column {column!r} not found in {path} (have {fields})")
        if timestamp_column is not None and timestamp_column not in fields:
            raise InputError(f"timestamp column {timestamp_column!r} not found in {path}")
        values, stamps = [], []
        rows = dropped = 0
        for row in reader:
            rows += 1
            cell = (row.get(column) or "").strip()
            try:
                v = float(cell)
            except ValueError:
                v = math.nan
            if not math.isfinite(v):
                dropped += 1
                continue
            values.append(v)
            if timestamp_column is not None:
                stamps.append(_parse_timestamp(row.get(timestamp_column) or ""))
    if dropped:
        log.warning("%s: dropped %d row(s) with unparseable %r values", path, dropped, column)
    if not values:
        raise InputError(f"{path}: no numeric values in column {column!r}")
    series = np.array(values, dtype=float)
    resorted = False
    if timestamp_column is not None:
        t = np.array(stamps)
        if np.any(np.diff(t) < 0):
            order = np.argsort(t, kind="stable")
            series = series[order]
            resorted = True
    info = {"path": str(path), "column": column, "rows": rows, "dropped": dropped, "resorted": resorted}
    return series, info


def transform(series, kind: str):
    """identity, log, or log loss r_t = log(max y) - log(y_t)."""
    x = np.asarray(series, dtype=float)
    if kind == "identity":
        return x.copy(), kind
    if kind not in ("log", "logloss"):
        raise InputError(f"unknown transform {kind!r}")
    if np.any(x <= 0.0):
        raise InputError(f"{kind} transform needs strictly positive values")
    lx = np.log(x)
    if kind == "log":
        return lx, kind
    return float(lx.max()) - lx, kind


# ---------------------------------------------------------------- output

def _clean(obj):
    """Make a report JSON-safe: numpy scalars to Python, NaN/inf to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False)


def _parse_grid(text: str, lo: int, hi: int):
    kind, _, points = text.partition(":")
    if kind != "geometric" or not points.isdigit() or int(points) < 2:
        raise InputError(f"grid must look like geometric:<points>, got {text!r}")
    return geometric_grid(lo, hi, int(points))


def _float_list(text: str):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"expected a comma-separated list of numbers, got {text!r}") from exc


# ---------------------------------------------------------------- commands

def _risk_block(fit, n_values, theta):
    rows = []
    xi = fit.xi_hat
    for n in n_values:
        if not n >= 1.0:
            raise InputError(f"extrapolation block size must be >= 1, got {n!r}")
        m = fit.intercept + xi * math.log(n)
        offsets = []
        for k in (0, 1, 2):
            level = closedform.offset_level(m, xi, k) if xi > 0.0 else m
            prob = closedform.bm_cdf_offset(xi, n, k) if xi > 0.0 else None
            offsets.append({"k": k, "level": level, "probability": prob})
        row = {"n": n, "mpmr": m, "offsets": offsets}
        if theta is not None:
            row["reserve"] = m / theta
        rows.append(row)
    return {"source": fit.method, "xi_hat": xi, "intercept": fit.intercept, "theta": theta, "levels": rows}


def cmd_evi(args, stage: Stage) -> dict:
    stage("ingest")
    series, info = ingest(args.input, args.column, args.timestamp)
    stage("transform")
    values, kind = transform(series, args.transform)
    if args.ei_theta is not None and not 0.0 < args.ei_theta <= 1.0:
        raise InputError(f"--ei-theta must lie in (0, 1], got {args.ei_theta}")
    stage("bm_curve")
    sample = SortedSample(values, transform=kind)
    grid = _parse_grid(args.grid, 2, sample.n_raw)
    curve = bm_curve(sample, grid=grid)
    stage("plateau")
    plateau = find_plateau(fit_sd_spline(curve), delta=args.delta)
    if args.require_plateau and plateau.diagnostic == MONOTONE_NO_PLATEAU:
        raise DiagnosticFailure("sd curve decreases without a plateau (monotone_no_plateau)")
    stage("evi")
    emr_fit = wlse_emr(curve, plateau)
    mpmr_fit = wlse_mpmr(curve, plateau)
    stage("risk")
    risk = _risk_block(mpmr_fit, _float_list(args.n_extrapolate) if args.n_extrapolate else [], args.ei_theta)
    report = {
        "schema": SCHEMA,
        "command": "evi",
        "input": {**info, "n": int(sample.n_raw), "transform": kind},
        "bm_curve": {"points": len(curve), "grid_min": int(curve.grid[0]), "grid_max": int(curve.grid[-1])},
        "plateau": plateau.to_dict(),
        "evi": {"headline": "emr_wlse", "emr_wlse": emr_fit.to_dict(), "mpmr_wlse": mpmr_fit.to_dict()},
        "risk": risk,
    }
    if args.output == "csv-dir":
        stage("output")
        os.makedirs(args.out_dir, exist_ok=True)
        curve_path = os.path.join(args.out_dir, "bm_curve.csv")
        curve.to_csv(curve_path)
        report["bm_curve"]["csv"] = curve_path
        with open(os.path.join(args.out_dir, "report.json"), "w") as fh:
            fh.write(dumps(report) + "\n")
    return report


_MARGINALS = {"exponential": Family.EXPONENTIAL, "gpd": Family.PARETO, "gaussian": Family.GAUSSIAN}


def cmd_ei(args, stage: Stage) -> dict:
    stage("ingest")
    series, info = ingest(args.input, args.column, args.timestamp)
    stage("marginal")
    if args.marginal == "ecdf":
        marginal = ecdf(series)
        marginal_info = {"kind": "ecdf"}
    else:
        model, table = fit_marginal(series, [_MARGINALS[args.marginal]])
        marginal = model
        marginal_info = {"kind": args.marginal, "param": model.param, "aic": table[model.family.value]["aic"]}
    stage("theta_curve")
    grid = _parse_grid(args.grid, 4, series.size // 4)
    curve = theta_curve(series, marginal, grid=grid, variant=args.variant)
    report = {
        "schema": SCHEMA,
        "command": "ei",
        "input": {**info, "n": int(series.size)},
        "marginal": marginal_info,
        "ei": curve.summary(),
        "curve": [{"n": n, "theta_hat": t, "z_sd": s} for n, t, s in curve.rows()],
    }
    if args.out_dir:
        stage("output")
        os.makedirs(args.out_dir, exist_ok=True)
        path = os.path.join(args.out_dir, "ei_curve.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "theta_hat", "z_sd"])
            for n, t, s in curve.rows():
                w.writerow([n, repr(t), repr(s)])
        report["csv"] = path
    return report


def cmd_simulate(args, stage: Stage) -> dict:
    stage("args")
    phis = _float_list(args.phi)
    xis = _float_list(args.xi)
    if not phis or not xis:
        raise InputError("--phi and --xi need at least one value each")
    stage("simulate")
    table = run_benchmark(phis, xis, replicates=args.replicates, length=args.length, base_seed=args.seed)
    if args.output == "csv":
        stage("output")
        if args.out:
            table.to_csv(args.out)
        else:
            table.write_csv(sys.stdout)
        return None
    return {"schema": SCHEMA, "command": "simulate", **table.to_dict()}


def _model(name: str, param: float) -> TailModel:
    return TailModel(Family(name), param)


def cmd_closed_form(args, stage: Stage) -> dict:
    stage("args")
    if args.param is None:
        raise InputError("--param is required")
    model = _model(args.model, args.param)
    law = BmLaw(model, args.n)
    what = args.what
    stage("closed_form")
    if what == "mpmr":
        value = closedform.mpmr_exact(law)
    elif what == "mpmr-asymptotic":
        value = closedform.mpmr_asymptotic(law)
    elif what == "emr":
        value = closedform.emr(law)
    elif what == "variance":
        value = closedform.bm_variance(law)
    elif what == "kld-mx":
        value = closedform.kld(args.n, "M_to_X")
    elif what == "kld-xm":
        value = closedform.kld(args.n, "X_to_M")
    elif what.startswith("cdf-offset:"):
        try:
            k = int(what.split(":", 1)[1])
        except ValueError as exc:
            raise InputError(f"bad offset in {what!r}") from exc
        value = closedform.bm_cdf_offset(args.param, args.n, k)
    else:
        raise InputError(f"unknown quantity {what!r}")
    return {"schema": SCHEMA, "command": "closed-form", "model": args.model, "param": args.param,
            "n": args.n, "what": what, "value": value}


def _what(text: str) -> str:
    fixed = {"mpmr", "mpmr-asymptotic", "emr", "variance", "kld-mx", "kld-xm"}
    if text in fixed or text.startswith("cdf-offset:"):
        return text
    raise argparse.ArgumentTypeError(f"invalid choice {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ssbm", description="Sub-sampling block maxima risk estimation")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("evi", help="EVI by weighted least squares on the BM curve")
    e.add_argument("--input", required=True)
    e.add_argument("--column", required=True)
    e.add_argument("--timestamp")
    e.add_argument("--transform", required=True, choices=["identity", "log", "logloss"])
    e.add_argument("--delta", type=float, default=0.1)
    e.add_argument("--grid", default="geometric:64")
    e.add_argument("--n-extrapolate", help="comma-separated block sizes for the risk block")
    e.add_argument("--ei-theta", type=float)
    e.add_argument("--output", required=True, choices=["json", "csv-dir"])
    e.add_argument("--out-dir", default=".", help="directory for --output csv-dir")
    e.add_argument("--require-plateau", action="store_true",
                   help="exit with status 3 when the sd curve has no plateau")
    e.set_defaults(func=cmd_evi)

    i = sub.add_parser("ei", help="extremal index from rolling block maxima")
    i.add_argument("--input", required=True)
    i.add_argument("--column", required=True)
    i.add_argument("--timestamp")
    i.add_argument("--marginal", default="ecdf", choices=["ecdf", "exponential", "gpd", "gaussian"])
    i.add_argument("--variant", default="bb", choices=["bb", "northrop"])
    i.add_argument("--grid", default="geometric:32")
    i.add_argument("--out-dir", help="also write ei_curve.csv here")
    i.set_defaults(func=cmd_ei)

    s = sub.add_parser("simulate", help="MAPE benchmark on AR(1)-exponential series")
    s.add_argument("--phi", required=True)
    s.add_argument("--xi", required=True)
    s.add_argument("--length", type=int, default=365)
    s.add_argument("--replicates", type=int, default=50)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--output", default="json", choices=["json", "csv"])
    s.add_argument("--out", help="CSV output path (default stdout)")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("closed-form", help="closed-form block-maximum quantities")
    c.add_argument("--model", required=True, choices=[f.value for f in Family])
    c.add_argument("--param", "--xi", "--sigma", dest="param", type=float)
    c.add_argument("--n", required=True, type=float)
    c.add_argument("--what", required=True, type=_what)
    c.set_defaults(func=cmd_closed_form)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    stage = Stage()
    try:
        report = args.func(args, stage)
    except (InputError, DomainError) as exc:
        code = EXIT_INPUT
        err = exc
    except SsbmError as exc:
        code = EXIT_NUMERIC
        err = exc
    except Exception as exc:  # noqa: BLE001 - last-resort report
        log.debug("internal error", exc_info=True)
        code = EXIT_INTERNAL
        err = exc
    else:
        if report is not None:
            print(dumps(report))
        return EXIT_OK
    print(dumps({"schema": SCHEMA, "command": args.command,
                 "error": {"stage": stage.name, "type": type(err).__name__, "message": str(err)}}))
    return code


if __name__ == "__main__":
    sys.exit(main())
