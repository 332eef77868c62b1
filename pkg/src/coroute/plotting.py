"""Route SVGs and batch comparison figures.

The SVG is written by hand so its structure is fixed: one ``polyline`` per
moving vehicle, one ``circle`` per refuel stop sized to the coverage radius,
and square markers (``rect``) for assignment points.  That keeps it byte-stable
and easy to check with an XML parser.
"""
from __future__ import annotations

import os
from statistics import mean

CANVAS = 800.0
MARGIN = 20.0


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def uav_path(plan) -> list[int]:
    """Node sequence the UAV traces, carried legs drawn straight."""
    path = [0]
    for leg in plan.uav_legs:
        seq = list(leg.sortie.order) if leg.sortie is not None else [leg.origin, leg.destination]
        if path and seq and path[-1] == seq[0]:
            seq = seq[1:]
        path.extend(seq)
    return path if len(path) > 1 else []


def ugv_path(plan) -> list[int]:
    return [w.point for w in plan.ugv_route.waypoints]


def route_svg(plan, scenario) -> str:
    extent = float(scenario.map_extent)
    k = (CANVAS - 2 * MARGIN) / extent
    size = CANVAS

    def xy(pid):
        p = scenario.nodes[pid]
        # SVG y grows downward; flip so north is up
        return MARGIN + p.x * k, MARGIN + (extent - p.y) * k

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(size)}" height="{_fmt(size)}" '
        f'viewBox="0 0 {_fmt(size)} {_fmt(size)}">',
        f'<title>{scenario.name} {plan.method}</title>',
        f'<rect class="map" x="{_fmt(MARGIN)}" y="{_fmt(MARGIN)}" width="{_fmt(extent * k)}" '
        f'height="{_fmt(extent * k)}" fill="none" stroke="#999"/>',
    ]
    r = scenario.coverage_radius * k
    for s in plan.stops:
        cx, cy = xy(s)
        out.append(f'<circle class="refuel-stop" data-stop="{s}" cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
                   f'r="{_fmt(r)}" fill="#1f77b4" fill-opacity="0.08" stroke="#1f77b4"/>')
    for vehicle, path, colour in (("ugv", ugv_path(plan), "#d62728"), ("uav", uav_path(plan), "#2ca02c")):
        if len(path) < 2:
            continue
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in map(xy, path))
        out.append(f'<polyline class="{vehicle}" points="{pts}" fill="none" stroke="{colour}" '
                   f'stroke-width="1.5"/>')
    for p in scenario.nodes:
        x, y = xy(p.id)
        half = 5.0 if p.id == 0 else 2.5
        cls = "depot" if p.id == 0 else "point"
        out.append(f'<rect class="{cls}" data-id="{p.id}" x="{_fmt(x - half)}" y="{_fmt(y - half)}" '
                   f'width="{_fmt(2 * half)}" height="{_fmt(2 * half)}" fill="#000"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_batch_figures(rows, timings, outdir) -> list[str]:
    """Render time, energy and wall-clock comparisons as PNG files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(outdir, exist_ok=True)
    ok = [r for r in rows if r["status"] == "ok"]
    scenarios = list(dict.fromkeys(r["scenario"] for r in ok))
    methods = list(dict.fromkeys(r["method"] for r in ok))
    value = {(r["scenario"], r["method"]): r for r in ok}
    written = []

    def grouped(field, ylabel, fname, cast):
        fig, ax = plt.subplots(figsize=(max(6.0, 0.45 * len(scenarios) + 2), 4))
        width = 0.8 / max(len(methods), 1)
        for j, m in enumerate(methods):
            xs = [i + (j - (len(methods) - 1) / 2) * width for i in range(len(scenarios))]
            ys = [cast(value[(s, m)][field]) if (s, m) in value else 0.0 for s in scenarios]
            ax.bar(xs, ys, width, label=m)
        ax.set_xticks(range(len(scenarios)))
        ax.set_xticklabels(scenarios, rotation=60, ha="right", fontsize=7)
        ax.set_ylabel(ylabel)
        ax.legend()
        fig.tight_layout()
        path = os.path.join(outdir, fname)
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    grouped("route_time_min", "task completion time (min)", "time_comparison.png", float)
    grouped("energy_mj", "total energy (MJ)", "energy_comparison.png", float)

    # wall-clock per method, averaged per scale
    if timings:
        scales = list(dict.fromkeys(t["scenario"].rsplit("-", 1)[0] for t in timings))
        tmethods = list(dict.fromkeys(t["method"] for t in timings))
        fig, ax = plt.subplots(figsize=(6, 4))
        width = 0.8 / max(len(tmethods), 1)
        for j, m in enumerate(tmethods):
            ys = []
            for sc in scales:
                vals = [float(t["solve_wall_ms"]) / 1000.0 for t in timings
                        if t["method"] == m and t["scenario"].rsplit("-", 1)[0] == sc]
                ys.append(mean(vals) if vals else 0.0)
            xs = [i + (j - (len(tmethods) - 1) / 2) * width for i in range(len(scales))]
            ax.bar(xs, ys, width, label=m)
        ax.set_xticks(range(len(scales)))
        ax.set_xticklabels(scales)
        ax.set_ylabel("mean solve time (s)")
        ax.set_yscale("log")
        ax.legend()
        fig.tight_layout()
        path = os.path.join(outdir, "computational_time.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
