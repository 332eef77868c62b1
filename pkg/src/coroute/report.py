"""PlanReport assembly, metric rows and batch summaries."""
from __future__ import annotations

import csv
import io
import json
import time
from statistics import mean

from . import model, pipeline

SCHEMA_VERSION = 1

CSV_COLUMNS = [
    "scenario",
    "method",
    "route_time_min",
    "energy_mj",
    "time_improvement_pct",
    "energy_improvement_pct",
    "status",
]
TIMING_COLUMNS = ["run_id", "scenario", "method", "solve_wall_ms", "msc_ms", "tsp_ms", "evrptw_ms"]

NOTES = [
    "UGV idle draw P_g(0) is charged for every second spent waiting at a refuel stop.",
    "A UAV that would reach a stop before the UGV delays its departure instead of loitering; "
    "total delay is reported per plan.",
    "Greedy and exact plans differ only through the refuel stops chosen by the cover step.",
    "Travel is Euclidean; leg times are rounded up to whole seconds.",
]


def parameters(scenario) -> dict:
    uav, ugv = scenario.uav, scenario.ugv
    return {
        "map_extent_km": scenario.map_extent / 1000.0,
        "n_points": len(scenario.points),
        "uav_speed_mps": uav.speed,
        "uav_fuel_capacity_mj": round(uav.fuel_capacity / 1e6, 6),
        "uav_recharge_rate_w": round(uav.recharge_rate, 6),
        "uav_cruise_power_w": round(uav.cruise_power, 6),
        "ugv_speed_mps": ugv.speed,
        "ugv_drive_power_w": round(ugv.power(ugv.speed), 6),
        "ugv_idle_power_w": round(ugv.power(0.0), 6),
        "coverage_radius_km": round(scenario.coverage_radius / 1000.0, 6),
        "scale_factor": round(model.scale_factor(scenario), 6),
    }


def solve_scenario(scenario, methods=pipeline.METHODS) -> tuple[dict, dict]:
    """Plan ``scenario`` with each method.

    Returns (plans by method, wall-clock milliseconds by method).  The
    baseline is always computed since improvements are measured against it.
    """
    plans, wall = {}, {}
    t0 = time.perf_counter()
    plans["baseline"] = pipeline.run_baseline(scenario)
    wall["baseline"] = (time.perf_counter() - t0) * 1000.0
    for m in methods:
        if m == "baseline":
            continue
        t0 = time.perf_counter()
        plans[m] = pipeline.run_cooperative(scenario, m)
        wall[m] = (time.perf_counter() - t0) * 1000.0
    return plans, wall


def build_report(scenario, plans: dict) -> dict:
    base = plans["baseline"]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario.name,
        "seed": scenario.seed,
        "parameters": parameters(scenario),
        "notes": NOTES,
        "plans": {m: pipeline.plan_to_dict(p, scenario) for m, p in plans.items()},
        "improvements": {},
    }
    for m, p in plans.items():
        if m == "baseline":
            continue
        doc["improvements"][m] = {k: round(v, 4) for k, v in pipeline.compute_metrics(p, base).items()}
    if "exact" in plans:
        doc["exact_covers_enumerated"] = plans["exact"].covers_evaluated
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def metric_rows(scenario_name: str, plans: dict, methods) -> list[dict]:
    base = plans["baseline"]
    rows = []
    for m in methods:
        p = plans[m]
        imp = pipeline.compute_metrics(p, base)
        rows.append({
            "scenario": scenario_name,
            "method": m,
            "route_time_min": int(round(p.task_time / 60.0)),
            "energy_mj": f"{p.total_energy / 1e6:.2f}",
            "time_improvement_pct": f"{imp['time_improvement_pct']:.2f}",
            "energy_improvement_pct": f"{imp['energy_improvement_pct']:.2f}",
            "status": "ok",
        })
    return rows


def error_rows(scenario_name: str, methods, exc: Exception) -> list[dict]:
    msg = f"error: {type(exc).__name__}: {exc}".replace("\n", " ")
    return [
        {"scenario": scenario_name, "method": m, "route_time_min": "", "energy_mj": "",
         "time_improvement_pct": "", "energy_improvement_pct": "", "status": msg}
        for m in methods
    ]


def to_csv(rows, columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def summarize(rows) -> list[dict]:
    """Mean/min/max improvements per (scale, method)."""
    groups: dict[tuple[str, str], list[dict]] = {}
    for r in rows:
        if r["status"] != "ok" or r["method"] == "baseline":
            continue
        scale = r["scenario"].rsplit("-", 1)[0]
        groups.setdefault((scale, r["method"]), []).append(r)
    out = []
    order = {s: k for k, s in enumerate(model.SCALES)}
    for (scale, method) in sorted(groups, key=lambda g: (order.get(g[0], 99), g[0], g[1])):
        rs = groups[(scale, method)]
        t = [float(r["time_improvement_pct"]) for r in rs]
        e = [float(r["energy_improvement_pct"]) for r in rs]
        out.append({
            "scale": scale, "method": method, "n": len(rs),
            "time_mean": mean(t), "time_min": min(t), "time_max": max(t),
            "energy_mean": mean(e), "energy_min": min(e), "energy_max": max(e),
            "time_positive": sum(x > 0 for x in t), "energy_positive": sum(x > 0 for x in e),
        })
    return out


def format_summary(summary) -> str:
    head = (f"{'scale':<8} {'method':<8} {'n':>3}  {'time % mean':>11} {'min':>8} {'max':>8} {'>0':>3}"
            f"  {'energy % mean':>13} {'min':>8} {'max':>8} {'>0':>3}")
    lines = [head, "-" * len(head)]
    for s in summary:
        lines.append(
            f"{s['scale']:<8} {s['method']:<8} {s['n']:>3}  {s['time_mean']:>11.2f} {s['time_min']:>8.2f} "
            f"{s['time_max']:>8.2f} {s['time_positive']:>3}  {s['energy_mean']:>13.2f} "
            f"{s['energy_min']:>8.2f} {s['energy_max']:>8.2f} {s['energy_positive']:>3}"
        )
    return "\n".join(lines) + "\n"
