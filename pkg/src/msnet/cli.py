"""Command-line front end.

    msnet run SCENARIO.yaml [--output-dir DIR] [--workers N]
    msnet report DIR

Exit codes: 0 success, 1 invalid scenario or unstable input or any other
library error, 2 when a Verify check fails.
"""

from __future__ import annotations

import argparse
from pathlib import Path
import sys

import numpy as np

from . import analytic, estimate, tailsim
from .artifacts import read_json, write_column, write_csv, write_json
from .errors import MissingArtifacts, MsnetError
from .scenario import Scenario, load
from .streams import as_stream, default_workers

EXIT_OK, EXIT_ERROR, EXIT_MISMATCH = 0, 1, 2
SLACK = 1e-9


def _meta(sc: Scenario) -> dict:
    return {"scenario": sc.name, "scenario_hash": sc.hash, "seed": sc.seed, "task": sc.task}


def _analytic(sc: Scenario):
    rate = analytic.rate_for(sc.marks, sc.arrival)
    return rate.to_dict() if rate is not None else None


def _theta(sc, stream, workers):
    p = sc.task_params
    return estimate.theta_star(sc.model, sc.marks, sc.arrival, p["n_schedule"], p["replicas"],
                               stream.child(1), p["tol"], p["theta_max"], workers,
                               p["gamma_replicas"], p["min_ess"])


def _tail(sc, stream, workers):
    p = sc.task_params
    sample = tailsim.sample_stationary_daters(
        sc.model, sc.marks, sc.arrival, p["count"], stream.child(2), p["policy"], p["warmup"],
        p["window_settle"], p["n_max"], workers)
    return sample, tailsim.fit_tail_slope(sample, p["q_lo"], p["q_hi"])


def _theta_rows(result):
    rows = []
    for e in result.sequence:
        if e.get("skipped"):
            rows.append([e["n"], None, None, None, None, 0, 1])
        else:
            rows.append([e["n"], e["theta"], e["lo"], e["hi"], e["ess"], e["reliable"], 0])
    return rows


THETA_HEADER = ["n", "theta", "lo", "hi", "ess", "reliable", "skipped"]


def _tail_info(sample, fit):
    return {"fit": fit.to_dict(), "count": len(sample), "warmup": sample.warmup,
            "flagged": sample.flagged, "horizon_policy": sample.horizon_policy}


def task_gamma(sc, out, stream, workers):
    p = sc.task_params
    rows = []
    for n in p["n_schedule"]:
        g, se = estimate.gamma_estimate(sc.model, sc.marks, n, p["replicas"], stream.child(n), workers)
        rows.append([n, g, se])
    meta = _meta(sc)
    write_csv(out / "gamma.csv", ["n", "gamma_hat", "stderr"], rows, meta)
    series = [{"n": n, "gamma_hat": g, "stderr": se} for n, g, se in rows]
    write_json(out / "gamma.json", {"series": series, "mean_interarrival": sc.arrival.mean()}, meta)
    return EXIT_OK


def task_lambda(sc, out, stream, workers):
    p = sc.task_params
    z = estimate.saturated_daters(sc.model, sc.marks, p["n"], p["replicas"], stream, workers)
    grid = estimate.lambda_grid(z, p["n"], p["thetas"])
    meta = _meta(sc)
    write_csv(out / "lambda.csv", ["n", "theta", "value", "stderr", "samples", "divergent", "ess"],
              [e.row() + [e.ess] for e in grid], meta)
    write_json(out / "lambda.json", {"n": p["n"], "estimates": [e.__dict__ for e in grid]}, meta)
    return EXIT_OK


def task_theta_star(sc, out, stream, workers):
    result = _theta(sc, stream, workers)
    meta = _meta(sc)
    write_csv(out / "theta_n.csv", THETA_HEADER, _theta_rows(result), meta)
    write_json(out / "theta_star.json", {"theta_star": result.to_dict(), "analytic": _analytic(sc)}, meta)
    return EXIT_OK


def task_tail(sc, out, stream, workers):
    sample, fit = _tail(sc, stream, workers)
    meta = _meta(sc)
    write_column(out / "tail_sample.csv", "Z", sample.values, meta)
    if sc.task_params["ccdf"]:
        x, logc = tailsim.ccdf_curve(sample)
        write_csv(out / "ccdf.csv", ["x", "log_ccdf"], zip(x, logc), meta)
    write_json(out / "slope_fit.json", {"tail": _tail_info(sample, fit)}, meta)
    return EXIT_OK


def task_bounds(sc, out, stream, workers):
    p = sc.task_params
    res = tailsim.sandwich(sc.model, sc.marks, sc.arrival, p["L"], p["batches"], p["replicas"],
                           stream, workers)
    low_gap = res["lower"] - res["truncated"]
    up_gap = res["truncated"] - res["upper"]
    report = {
        "L": p["L"], "batches": p["batches"], "replicas": p["replicas"], "slack": SLACK,
        "lower_violations": int(np.sum(low_gap > SLACK)),
        "upper_violations": int(np.sum(up_gap > SLACK)),
        "max_lower_minus_truncated": float(low_gap.max()),
        "max_truncated_minus_upper": float(up_gap.max()),
        "mean_lower": float(res["lower"].mean()),
        "mean_truncated": float(res["truncated"].mean()),
        "mean_upper": float(res["upper"].mean()),
        "walk_drift": res["walk_drift"],
    }
    report["pass"] = report["lower_violations"] == 0 and report["upper_violations"] == 0
    write_json(out / "bounds.json", {"bounds": report}, _meta(sc))
    return EXIT_OK


def task_verify(sc, out, stream, workers):
    p = sc.task_params
    rate = _analytic(sc)
    theta = _theta(sc, stream, workers)
    sample, fit = _tail(sc, stream, workers)
    tol = p["slope_rel_tol"]
    lo, hi = theta.bracket
    checks = {}
    target = rate["theta_star"] if rate is not None else None
    if isinstance(target, float):
        checks["slope_vs_analytic"] = abs(fit.rate - target) <= tol * target
        checks["bracket_contains_analytic"] = lo <= target <= hi
    else:
        # no finite closed form: compare the two estimates with each other
        checks["slope_vs_bracket"] = lo * (1 - tol) <= fit.rate <= hi * (1 + tol)
    passed = all(checks.values())
    meta = _meta(sc)
    write_csv(out / "theta_n.csv", THETA_HEADER, _theta_rows(theta), meta)
    write_json(out / "verify.json", {
        "analytic": rate,
        "theta_star": theta.to_dict(),
        "tail": _tail_info(sample, fit),
        "slope_rel_tol": tol,
        "checks": checks,
        "pass": passed,
    }, meta)
    return EXIT_OK if passed else EXIT_MISMATCH


TASKS = {
    "Gamma": task_gamma,
    "Lambda": task_lambda,
    "ThetaStar": task_theta_star,
    "Tail": task_tail,
    "Bounds": task_bounds,
    "Verify": task_verify,
}


def run(path, output_dir=None, workers=None) -> int:
    sc = load(path)
    out = sc.resolve_output(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    workers = default_workers() if workers is None else workers
    return TASKS[sc.task](sc, out, as_stream(sc.seed), workers)


def _num(x, digits=4):
    if x is None:
        return "-"
    if x == "inf":
        return "inf"
    return f"{x:.{digits}f}"


def collect(artifact_dir) -> list[dict]:
    """One summary row per scenario found under ``artifact_dir``."""
    root = Path(artifact_dir)
    files = sorted(root.rglob("*.json")) if root.is_dir() else []
    rows = {}
    for f in files:
        doc = read_json(f)
        if not isinstance(doc, dict) or "schema_version" not in doc or "scenario" not in doc:
            continue
        row = rows.setdefault(doc["scenario"], {"instance": doc["scenario"], "analytic": None,
                                                "regime": None, "bracket": None, "slope": None,
                                                "slope_se": None, "pass": None})
        if doc.get("analytic"):
            row["analytic"] = doc["analytic"]["theta_star"]
            row["regime"] = doc["analytic"]["regime"]
        if "theta_star" in doc:
            row["bracket"] = doc["theta_star"]["bracket"]
        if "tail" in doc:
            row["slope"] = doc["tail"]["fit"]["rate"]
            row["slope_se"] = doc["tail"]["fit"]["stderr"]
        if "pass" in doc:
            row["pass"] = doc["pass"]
        elif "bounds" in doc:
            row["pass"] = doc["bounds"]["pass"]
    if not rows:
        raise MissingArtifacts(f"no msnet artifacts under {root}")
    return [rows[k] for k in sorted(rows)]


def format_report(rows) -> str:
    header = ["instance", "analytic", "regime", "bracket", "slope", "result"]
    table = [header]
    for r in rows:
        br = r["bracket"]
        bracket = f"[{_num(br[0])}, {_num(br[1])}]" if br else "-"
        slope = f"{_num(r['slope'])} +/- {r['slope_se']:.2g}" if r["slope"] is not None else "-"
        result = "-" if r["pass"] is None else ("pass" if r["pass"] else "FAIL")
        table.append([r["instance"], _num(r["analytic"]), r["regime"] or "-", bracket, slope, result])
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table]
    return "\n".join(lines) + "\n"


def report(artifact_dir) -> str:
    return format_report(collect(artifact_dir))


def _diagnose(exc: Exception) -> str:
    name = type(exc).__name__
    field = getattr(exc, "field", None)
    where = f" [field {field}]" if field else ""
    return f"msnet: error: {name}{where}: {exc}"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="msnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--output-dir", default=None,
                       help="overrides the scenario's output_dir and $MSNET_OUTPUT_DIR")
    p_run.add_argument("--workers", type=int, default=None,
                       help="worker threads (default $MSNET_WORKERS or 1); never changes results")
    p_rep = sub.add_parser("report", help="summarise the artifacts in a directory")
    p_rep.add_argument("artifact_dir")
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return run(args.scenario, args.output_dir, args.workers)
        sys.stdout.write(report(args.artifact_dir))
        return EXIT_OK
    except (MsnetError, OSError) as exc:
        print(_diagnose(exc), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
