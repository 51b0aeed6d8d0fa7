"""Command-line interface: ``gtcorr <command> [options]``.

Every command prints one JSON report document on stdout (see
``docs/report-schema.md``); diagnostics go to stderr. Exit codes: 0 on
success, 2 when a correction is infeasible (ground-truth error not smaller
than the validation statistic), 1 on usage, parse or other input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from gtcorr import __version__, approx, compare, correct, dist, estimate, sim
from gtcorr._backend import BACKEND
from gtcorr.approx import MetricKind

logger = logging.getLogger("gtcorr")

SCHEMA_VERSION = 1
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2

BASE_COLUMNS = ("x_algo", "y_algo", "x_marked", "y_marked")
REAL_COLUMNS = ("x_real", "y_real")
DEFAULT_STATS_METRICS = "mean,p25,p50,p75,p95"


class UsageError(Exception):
    pass


class ParseError(ValueError):
    pass


# --- dataset files -----------------------------------------------------------


def ingest_csv(path) -> estimate.Dataset:
    """Read ``x_algo,y_algo,x_marked,y_marked[,x_real,y_real]`` rows (meters).

    Blank lines and lines starting with ``#`` are skipped. Column order in
    the header is free but names must match exactly.

    Raises:
        ParseError: unknown or missing columns, non-numeric or non-finite
            cells, ragged rows, or no data rows; messages carry the line number.
    """
    path = Path(path)
    header = None
    rows = []
    with path.open(newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            cells = [c.strip() for c in next(csv.reader([line]))]
            if header is None:
                header = cells
                unknown = [c for c in header if c not in BASE_COLUMNS + REAL_COLUMNS]
                if unknown:
                    raise ParseError(f"{path}:{lineno}: unknown column(s) {', '.join(unknown)}")
                if len(set(header)) != len(header):
                    raise ParseError(f"{path}:{lineno}: duplicate column names")
                missing = [c for c in BASE_COLUMNS if c not in header]
                if missing:
                    raise ParseError(f"{path}:{lineno}: missing column(s) {', '.join(missing)}")
                present = [c for c in REAL_COLUMNS if c in header]
                if len(present) == 1:
                    raise ParseError(f"{path}:{lineno}: real ground truth needs both x_real and y_real")
                continue
            if len(cells) != len(header):
                raise ParseError(
                    f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)} "
                    "(rows must all carry the real columns or none)"
                )
            values = []
            for name, cell in zip(header, cells):
                try:
                    val = float(cell)
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: column {name}: not a number: {cell!r}") from None
                if not math.isfinite(val):
                    raise ParseError(f"{path}:{lineno}: column {name}: non-finite value {cell!r}")
                values.append(val)
            rows.append(values)
    if header is None:
        raise ParseError(f"{path}: no header line")
    if not rows:
        raise ParseError(f"{path}: no data rows")
    arr = np.array(rows)
    col = {name: arr[:, i] for i, name in enumerate(header)}
    real = None
    if "x_real" in col:
        real = np.column_stack([col["x_real"], col["y_real"]])
    return estimate.Dataset(
        algo=np.column_stack([col["x_algo"], col["y_algo"]]),
        marked=np.column_stack([col["x_marked"], col["y_marked"]]),
        real=real,
    )


def write_dataset_csv(d: estimate.Dataset, path) -> None:
    cols = BASE_COLUMNS + (REAL_COLUMNS if d.has_real else ())
    parts = [d.algo, d.marked] + ([d.real] if d.has_real else [])
    data = np.hstack(parts)
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for row in data:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def write_points_csv(points: np.ndarray, path, header: Sequence[str] = ("x", "y")) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for a, b in points:
            fh.write(f"{float(a)!r},{float(b)!r}\n")


# --- report documents --------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, MetricKind):
        return obj.name
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def report_document(command: str, inputs: dict, results: dict, warnings: Optional[list] = None) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "inputs_echo": _jsonable(inputs),
        "results": _jsonable(results),
        "warnings": list(warnings or []),
    }


def dumps_report(doc: dict) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(doc, indent=2, allow_nan=False)


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.4f}"
    return str(x)


def _table(rows: list[list], header: list[str]) -> str:
    cells = [header] + [[_fmt(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = []
    for j, r in enumerate(cells):
        lines.append("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths))))
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_pretty(doc: dict) -> str:
    """Aligned text rendering; experiment reports become metric tables."""
    res = doc["results"]
    out = [f"# {doc['command']}"]
    if "reports" in res or "report" in res:
        reports = res.get("reports") or [res["report"]]
        for rep in reports:
            if rep.get("shift") is not None:
                out.append(f"\nshift = ({rep['shift'][0]:g}, {rep['shift'][1]:g}) m")
            rows = []
            for m in rep["metrics"]:
                row = [m]
                if rep.get("marking") is not None:
                    row.append(rep["marking"].get(m))
                row += [
                    rep["validation"].get(m),
                    rep["experimental_real"].get(m),
                    rep["theoretical_real"].get(m),
                ]
                gap = rep["relative_gaps"].get(m)
                row.append(None if gap is None else f"{100 * gap:.1f}%")
                rows.append(row)
            header = ["metric"] + (["marking"] if rep.get("marking") is not None else [])
            header += ["validation", "real (exp)", "real (theory)", "gap"]
            out.append(_table(rows, header))
    else:
        out.append(json.dumps(res, indent=2))
    for w in doc.get("warnings", []):
        out.append(f"warning: {w}")
    return "\n".join(out)


# --- commands ----------------------------------------------------------------


def _metric_list(text: str) -> list[MetricKind]:
    return [MetricKind.parse(t) for t in text.split(",") if t.strip()]


def _stats_dict(s: estimate.SummaryStats, metrics: Sequence[MetricKind]) -> dict:
    out = {"n": s.n}
    for m in metrics:
        out[m.name] = s.get(m)
    return out


def _kind_norms(d: estimate.Dataset, kind: str) -> np.ndarray:
    return estimate.norms(estimate.error_vectors(d, estimate.ErrorKind(kind)))


def cmd_stats(args) -> dict:
    d = ingest_csv(args.input)
    metrics = _metric_list(args.metric or DEFAULT_STATS_METRICS)
    probs = [m.q for m in metrics if not m.is_mean]
    kinds = ["validation"] + (["real", "marking"] if d.has_real else [])
    results = {"n": len(d)}
    for kind in kinds:
        s = estimate.summary_stats(_kind_norms(d, kind), probs)
        results[kind] = _stats_dict(s, metrics)
    return report_document("stats", {"input": args.input, "metrics": metrics}, results)


def cmd_fit(args) -> dict:
    d = ingest_csv(args.input)
    vecs = estimate.error_vectors(d, estimate.ErrorKind(args.kind))
    r = estimate.norms(vecs)
    if args.dist == "normal":
        px, py = estimate.fit_normal_per_axis(vecs)
        params = {"x": asdict(px), "y": asdict(py)}
    elif args.dist == "rayleigh":
        params = asdict(estimate.fit_rayleigh(r))
    elif args.dist == "rice":
        params = asdict(estimate.fit_rice(vecs))
    else:
        params = asdict(estimate.fit_rice_norms(r))
    return report_document(
        "fit", {"input": args.input, "dist": args.dist, "kind": args.kind}, {"params": params, "n": len(d)}
    )


def _theoretical_fn(name: str, vecs: np.ndarray, r: np.ndarray):
    if name == "rayleigh":
        p = estimate.fit_rayleigh(r)
        return asdict(p), estimate.rayleigh_quantile_fn(p)
    if name == "rice":
        p = estimate.fit_rice(vecs)
        return asdict(p), estimate.rice_quantile_fn(p)
    mean = float(np.mean(r))
    return {"mean": mean}, estimate.exponential_quantile_fn(mean)


def cmd_qq(args) -> dict:
    d = ingest_csv(args.input)
    vecs = estimate.error_vectors(d, estimate.ErrorKind(args.kind))
    r = estimate.norms(vecs)
    params, fn = _theoretical_fn(args.dist, vecs, r)
    pts = estimate.qq_points(r, fn)
    results = {"dist": args.dist, "params": params, "n": len(r), "max_deviation_1_99": estimate.qq_max_deviation(pts)}
    if args.output:
        write_points_csv(pts, args.output, ("theoretical", "empirical"))
        results["output"] = args.output
    else:
        results["points"] = pts
    return report_document("qq", {"input": args.input, "dist": args.dist, "kind": args.kind}, results)


def cmd_ecdf(args) -> dict:
    d = ingest_csv(args.input)
    pts = estimate.ecdf_points(_kind_norms(d, args.kind))
    results = {"n": len(pts)}
    if args.output:
        write_points_csv(pts, args.output, ("x", "F"))
        results["output"] = args.output
    else:
        results["points"] = pts
    return report_document("ecdf", {"input": args.input, "kind": args.kind}, results)


def _result_dict(r: correct.CorrectionResult) -> dict:
    out = {
        "real_stat": r.real_stat,
        "sigma_real": r.sigma_real,
        "impact": r.impact,
        "metric": r.metric.name,
    }
    if r.bounds is not None:
        out["impact_bounds"] = list(r.bounds)
    if r.provenance:
        out["provenance"] = r.provenance
    return out


def _constants_for(metric: MetricKind, warnings: list) -> approx.ApproxConstants:
    try:
        return approx.builtin_constants(metric)
    except approx.NotBuiltIn:
        warnings.append(f"no published constants for {metric}; fitted on the default grid")
        return approx.fit_constants(metric)


def cmd_correct(args) -> dict:
    metric = MetricKind.parse(args.metric)
    inputs = {"val": args.val, "gt": args.gt, "metric": metric}
    warnings: list = []
    if args.model == "marking":
        r = correct.correct_marking(args.val, args.gt, metric)
    else:
        inputs["eps"] = args.eps
        c = _constants_for(metric, warnings)
        r = correct.correct_map(args.val, args.gt, metric, c, correct.CorrectionConfig(epsilon=args.eps))
    return report_document(f"correct {args.model}", inputs, _result_dict(r), warnings)


def cmd_pipeline(args) -> dict:
    metric = MetricKind.parse(args.metric)
    warnings: list = []
    c = _constants_for(metric, warnings)
    r = correct.correct_pipeline(
        args.val, args.map_gt, args.mark_gt, metric, correct.CorrectionConfig(epsilon=args.eps), c
    )
    inputs = {"val": args.val, "map_gt": args.map_gt, "mark_gt": args.mark_gt, "metric": metric, "eps": args.eps}
    return report_document("pipeline", inputs, _result_dict(r), warnings)


def cmd_compare(args) -> dict:
    metric = MetricKind.parse(args.metric)
    warnings: list = []
    c = _constants_for(metric, warnings)
    v = compare.compare_impacts(args.val, args.gt, metric, c, correct.CorrectionConfig(epsilon=args.eps))
    results = {
        "dominant": v.dominant.value,
        "ratio_v_over_u": v.ratio_v_over_u,
        "threshold": v.threshold,
        "marking_impact": v.marking_impact,
        "map_impact": v.map_impact,
        "lambda_star": compare.find_lambda_star(c),
    }
    return report_document("compare", {"val": args.val, "gt": args.gt, "metric": metric}, results, warnings)


def cmd_fit_constants(args) -> dict:
    metric = MetricKind.parse(args.metric)
    if not (args.vmax > 0 and args.step > 0):
        raise ValueError("--vmax and --step must be positive")
    n = int(round(args.vmax / args.step))
    grid = np.arange(n + 1) * args.step
    c = approx.fit_constants(metric, grid)
    results = {"alpha": c.alpha, "beta": c.beta, "gamma": c.gamma, "rmse": c.rmse, "grid_points": int(grid.size)}
    try:
        b = approx.builtin_constants(metric)
        results["published"] = {"alpha": b.alpha, "beta": b.beta, "rmse": b.rmse}
    except approx.NotBuiltIn:
        pass
    return report_document("fit-constants", {"metric": metric, "vmax": args.vmax, "step": args.step}, results)


def _parse_shift(text: str) -> sim.Vec2:
    parts = [float(p) for p in text.split(",")]
    if len(parts) == 1:
        return sim.as_shift(parts[0])
    if len(parts) == 2:
        return sim.Vec2(*parts)
    raise ValueError(f"--shift takes R or R,R, got {text!r}")


def _sim_config(args, shift=None) -> sim.SimConfig:
    return sim.SimConfig(
        sigma_real=args.sigma_real,
        sigma_mark=args.sigma_mark,
        map_shift=shift if shift is not None else _parse_shift(args.shift),
        n=args.n,
        seed=args.seed,
        layout=args.layout,
    )


def cmd_simulate(args) -> dict:
    cfg = _sim_config(args)
    d = sim.gen_dataset(cfg, workers=args.workers)
    write_dataset_csv(d, args.output)
    val = estimate.summary_stats(_kind_norms(d, "validation"))
    results = {"output": args.output, "n": len(d), "validation": val.to_dict()}
    return report_document("simulate", asdict(cfg), results)


def _report_dict(rep: sim.ExperimentReport) -> dict:
    metrics = [MetricKind.parse(m) for m in rep.metrics]
    out = {
        "metrics": list(rep.metrics),
        "shift": list(rep.shift) if rep.shift is not None else None,
        "validation": _stats_dict(rep.validation, metrics),
        "experimental_real": _stats_dict(rep.experimental_real, metrics),
        "theoretical_real": rep.theoretical_real,
        "relative_gaps": rep.relative_gaps,
        "validation_gaps": rep.validation_gaps,
        "marking": _stats_dict(rep.marking, metrics) if rep.marking is not None else None,
        "errors": rep.errors,
    }
    return out


def cmd_experiment(args) -> dict:
    warnings: list = []
    if args.kind == "marking":
        cfg = _sim_config(args, shift=sim.Vec2(0.0, 0.0))
        rep = sim.run_marking_experiment(cfg, workers=args.workers)
        return report_document("experiment marking", asdict(cfg), {"report": _report_dict(rep)})
    cfg = _sim_config(args, shift=sim.Vec2(0.0, 0.0))
    shifts = [float(s) for s in args.shifts.split(",") if s.strip()]
    if args.allow_marking and cfg.sigma_mark > 0:
        warnings.append("sigma_mark > 0: the map correction ignores marking error and only approximately applies")
    out = sim.run_map_experiment(cfg, shifts, allow_marking=args.allow_marking, workers=args.workers)
    reports = []
    for _, rep in out:
        d = _report_dict(rep)
        d["improvement"] = {m: rep.improvement(m) for m in rep.metrics}
        reports.append(d)
        for m, msg in rep.errors.items():
            warnings.append(f"shift {tuple(rep.shift)}: {m}: {msg}")
    inputs = asdict(cfg) | {"shifts": shifts, "allow_marking": args.allow_marking}
    return report_document("experiment map", inputs, {"reports": reports}, warnings)


# --- argument parsing --------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gtcorr", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--pretty", action="store_true", help="aligned text instead of JSON")

    def dataset(sp, output=False):
        sp.add_argument("--input", required=True, help="dataset CSV")
        sp.add_argument("--kind", default="validation", choices=[k.value for k in estimate.ErrorKind])
        if output:
            sp.add_argument("--output", help="write points as two-column CSV instead of inline JSON")

    sp = sub.add_parser("stats", help="summary statistics of error norms")
    sp.add_argument("--input", required=True)
    sp.add_argument("--metric", help=f"comma-separated metrics (default {DEFAULT_STATS_METRICS})")
    common(sp)
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("fit", help="fit an error distribution")
    dataset(sp)
    sp.add_argument("--dist", required=True, choices=["normal", "rayleigh", "rice", "rice-norms"])
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("qq", help="Q-Q points against a fitted distribution")
    dataset(sp, output=True)
    sp.add_argument("--dist", required=True, choices=["rayleigh", "rice", "exponential"])
    common(sp)
    sp.set_defaults(func=cmd_qq)

    sp = sub.add_parser("ecdf", help="empirical CDF points of error norms")
    dataset(sp, output=True)
    common(sp)
    sp.set_defaults(func=cmd_ecdf)

    sp = sub.add_parser("correct", help="correct a validation statistic")
    sp.add_argument("model", choices=["marking", "map"])
    sp.add_argument("--val", type=float, required=True, help="validation statistic u (m)")
    sp.add_argument("--gt", type=float, required=True, help="marking statistic or map offset norm v (m)")
    sp.add_argument("--metric", default="mean")
    sp.add_argument("--eps", type=float, default=correct.DEFAULT_EPSILON)
    common(sp)
    sp.set_defaults(func=cmd_correct)

    sp = sub.add_parser("pipeline", help="remove map error, then marking error")
    sp.add_argument("--val", type=float, required=True)
    sp.add_argument("--map-gt", type=float, required=True, help="map offset norm (m)")
    sp.add_argument("--mark-gt", type=float, required=True, help="marking error statistic (m)")
    sp.add_argument("--metric", default="mean")
    sp.add_argument("--eps", type=float, default=correct.DEFAULT_EPSILON)
    common(sp)
    sp.set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("compare", help="does marking or map error have the larger impact?")
    sp.add_argument("--val", type=float, required=True)
    sp.add_argument("--gt", type=float, required=True)
    sp.add_argument("--metric", default="mean")
    sp.add_argument("--eps", type=float, default=correct.DEFAULT_EPSILON)
    common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("fit-constants", help="fit the impact approximation constants")
    sp.add_argument("--metric", default="mean")
    sp.add_argument("--vmax", type=float, default=approx.DEFAULT_GRID_MAX)
    sp.add_argument("--step", type=float, default=approx.DEFAULT_GRID_STEP)
    common(sp)
    sp.set_defaults(func=cmd_fit_constants)

    def simflags(sp):
        sp.add_argument("--sigma-real", type=float, required=True)
        sp.add_argument("--sigma-mark", type=float, default=0.0)
        sp.add_argument("--n", type=_positive_int, default=100_000)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--layout", choices=["origin", "grid"], default="origin")
        sp.add_argument("--workers", type=_positive_int, default=1)
        common(sp)

    sp = sub.add_parser("simulate", help="write a synthetic dataset CSV")
    simflags(sp)
    sp.add_argument("--shift", default="0", help="map shift R (both axes) or R,R")
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("experiment", help="synthetic correction experiments")
    sp.add_argument("kind", choices=["marking", "map"])
    simflags(sp)
    sp.add_argument("--shifts", default="1,2,3,4,5,6", help="map experiment shifts, comma-separated (m)")
    sp.add_argument("--allow-marking", action="store_true")
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        doc = args.func(args)
    except correct.InfeasibleCorrection as exc:
        print(f"infeasible correction: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, LookupError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(render_pretty(doc) if args.pretty else dumps_report(doc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
