"""Command-line front end: ``coroute generate | solve | batch``."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
import uuid
from concurrent.futures import ProcessPoolExecutor

from . import model, pipeline, plotting, report
from .allocation import UnassignedPoint
from .evrptw import Infeasible
from .setcover import Uncoverable

EXIT_OK, EXIT_IO, EXIT_INFEASIBLE = 0, 1, 2
PLAN_FAILURES = (Infeasible, Uncoverable, UnassignedPoint)


def _overrides(pairs) -> dict:
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise argparse.ArgumentTypeError(f"--set expects key=value, got {item!r}")
        out[key] = model.parse_value(value)
    return out


def _write(path, text):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _err(msg):
    print(f"coroute: {msg}", file=sys.stderr)


def _scales(text) -> list[str]:
    toks = list(model.SCALES) if text == "all" else [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in toks if t not in model.SCALES]
    if bad or not toks:
        raise argparse.ArgumentTypeError(
            f"invalid scale {','.join(bad) or text!r}; choose from {', '.join(model.SCALES)} or all")
    return toks


def _methods(text) -> list[str]:
    toks = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in toks if t not in pipeline.METHODS]
    if bad or not toks:
        raise argparse.ArgumentTypeError(
            f"invalid method {','.join(bad) or text!r}; choose from {', '.join(pipeline.METHODS)}")
    # keep the canonical column order regardless of how they were typed
    return [m for m in pipeline.METHODS if m in toks]


def _positive(text) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


# --- generate ---------------------------------------------------------------

def cmd_generate(args) -> int:
    try:
        scen = model.generate_scenario(args.scale, args.seed, _overrides(args.set))
    except model.ScenarioError as exc:
        _err(str(exc))
        return EXIT_INFEASIBLE
    try:
        _write(args.output, model.dump_scenario(scen))
    except OSError as exc:
        _err(f"cannot write {args.output}: {exc.strerror or exc}")
        return EXIT_IO
    return EXIT_OK


# --- solve ------------------------------------------------------------------

def cmd_solve(args) -> int:
    try:
        scen = model.load_scenario(args.input)
    except model.SchemaError as exc:
        _err(f"schema error in {args.input}: {exc}")
        return EXIT_IO
    except OSError as exc:
        _err(f"cannot read {args.input}: {exc.strerror or exc}")
        return EXIT_IO
    try:
        plans, wall = report.solve_scenario(scen, [args.method])
    except PLAN_FAILURES as exc:
        _err(f"infeasible: {exc}")
        return EXIT_INFEASIBLE
    doc = report.build_report(scen, plans)
    stem = os.path.splitext(args.output)[0]
    svg_path = args.svg or stem + ".svg"
    timing_path = stem + ".timings.json"
    timing = {
        "run_id": uuid.uuid4().hex,
        "scenario": scen.name,
        "solve_wall_ms": {m: round(v, 3) for m, v in wall.items()},
        "stages_ms": {m: {k: round(v, 3) for k, v in p.timings.items()} for m, p in plans.items()},
    }
    try:
        _write(args.output, report.dumps(doc))
        _write(svg_path, plotting.route_svg(plans[args.method], scen))
        _write(timing_path, json.dumps(timing, indent=2) + "\n")
    except OSError as exc:
        _err(f"cannot write output: {exc.strerror or exc}")
        return EXIT_IO
    p = plans[args.method]
    print(f"{scen.name} {args.method}: {p.task_time / 60:.0f} min, {p.total_energy / 1e6:.2f} MJ")
    return EXIT_OK


# --- batch ------------------------------------------------------------------

def _batch_one(job):
    """Worker: plan one scenario with every method; never raises."""
    scale, seed, methods, overrides = job
    name = f"{scale}-{seed}"
    out = {"name": name, "files": {}, "timings": [], "error": None}
    try:
        scen = model.generate_scenario(scale, seed, overrides)
        out["files"][os.path.join("scenarios", name + ".json")] = model.dump_scenario(scen)
        plans, wall = report.solve_scenario(scen, methods)
        out["rows"] = report.metric_rows(name, plans, methods)
        keep = {m: plans[m] for m in methods if m != "baseline"}
        keep["baseline"] = plans["baseline"]
        out["files"][os.path.join("reports", name + ".json")] = report.dumps(report.build_report(scen, keep))
        for m in methods:
            out["files"][os.path.join("routes", f"{name}-{m}.svg")] = plotting.route_svg(plans[m], scen)
            t = plans[m].timings
            out["timings"].append({
                "scenario": name, "method": m, "solve_wall_ms": f"{wall[m]:.3f}",
                "msc_ms": f"{t.get('msc_ms', 0.0):.3f}", "tsp_ms": f"{t.get('tsp_ms', 0.0):.3f}",
                "evrptw_ms": f"{t.get('evrptw_ms', 0.0):.3f}",
            })
    except Exception as exc:  # recorded per row; the batch carries on
        out["rows"] = report.error_rows(name, methods, exc)
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def run_batch(scales, count, seed, methods, outdir, jobs=1, overrides=None, figures=True) -> dict:
    """Plan ``count`` scenarios per scale; write CSV, reports, SVGs and figures."""
    run_id = time.strftime("%Y%m%dT%H%M%S") + "-" + uuid.uuid4().hex[:8]
    work = [(sc, seed + k, methods, overrides or {}) for sc in scales for k in range(count)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_batch_one, work))
    else:
        results = [_batch_one(w) for w in work]

    rows, timings = [], []
    for res in results:  # order-stable: (scale, scenario index, method)
        rows.extend(res["rows"])
        for rel, text in res["files"].items():
            _write(os.path.join(outdir, rel), text)
        for t in res["timings"]:
            timings.append({"run_id": run_id, **t})
    summary = report.summarize(rows)
    _write(os.path.join(outdir, "metrics.csv"), report.to_csv(rows))
    _write(os.path.join(outdir, "summary.txt"), report.format_summary(summary))
    _write(os.path.join(outdir, "timings", f"{run_id}.csv"), report.to_csv(timings, report.TIMING_COLUMNS))
    figs = plotting.write_batch_figures(rows, timings, os.path.join(outdir, "figures")) if figures else []
    return {"rows": rows, "summary": summary, "timings": timings, "figures": figs, "run_id": run_id,
            "failures": [r for r in results if r["error"]]}


def cmd_batch(args) -> int:
    try:
        res = run_batch(args.scale, args.count, args.seed, args.methods, args.output,
                        args.jobs, _overrides(args.set), figures=not args.no_figures)
    except OSError as exc:
        _err(f"cannot write to {args.output}: {exc.strerror or exc}")
        return EXIT_IO
    sys.stdout.write(report.format_summary(res["summary"]))
    for f in res["failures"]:
        _err(f"{f['name']}: {f['error']}")
    print(f"{len(res['rows'])} rows -> {os.path.join(args.output, 'metrics.csv')} (run {res['run_id']})")
    return EXIT_OK


# --- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coroute", description="Cooperative UAV-UGV route planning.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random scenario JSON")
    g.add_argument("--scale", required=True, choices=list(model.SCALES))
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="dotted override into the scenario JSON, e.g. uav.speed_mps=12")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="plan one scenario and write a report plus route SVG")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("-o", "--output", required=True, help="PlanReport JSON path")
    s.add_argument("--method", choices=list(pipeline.METHODS), default="exact")
    s.add_argument("--svg", help="route SVG path (default: next to the report)")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("batch", help="benchmark many seeded scenarios")
    b.add_argument("--scale", type=_scales, default=list(model.SCALES),
                   help="small, medium, large, a comma list, or all (default)")
    b.add_argument("--count", type=_positive, default=10)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--methods", type=_methods, default=list(pipeline.METHODS))
    b.add_argument("-o", "--output", required=True, help="output directory")
    b.add_argument("--jobs", type=_positive, default=1)
    b.add_argument("--set", action="append", metavar="KEY=VALUE")
    b.add_argument("--no-figures", action="store_true", help="skip the PNG figures")
    b.set_defaults(func=cmd_batch)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
