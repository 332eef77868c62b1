"""Split the tour over refuel stops into per-leg subproblems and hand out points."""
from __future__ import annotations

from dataclasses import dataclass, replace


class UnassignedPoint(ValueError):
    pass


@dataclass(frozen=True)
class Subproblem:
    index: int  # 1-based
    origin: int
    destination: int
    uav_points: tuple[int, ...]
    window_open: int = 0
    window_close: int = 10**12
    ugv_detours: tuple[int, ...] = ()  # origin -> detours -> destination, in driving order


def allocate(plan, tour_order, scenario) -> list[Subproblem]:
    """One subproblem per tour leg; each point goes to exactly one of them.

    ``tour_order`` is the closed stop tour (depot first and last).  A point
    belongs to the first stop in tour order whose coverage holds it; points
    held by the depot land in subproblem 1.  Stops themselves are visited by
    the rendezvous and are not handed out.
    """
    order = list(tour_order)
    if order[0] != 0:
        raise ValueError("tour must begin at the depot")
    if len(order) > 1 and order[-1] == 0:
        order = order[:-1]
    radius = scenario.coverage_radius
    dist = scenario.matrix.dist
    stops = set(order)
    legs = max(len(order), 1)
    buckets: list[list[int]] = [[] for _ in range(legs)]
    for p in scenario.point_ids:
        if p in stops:
            continue
        pos = next((k for k, s in enumerate(order) if dist[s][p] < radius), None)
        if pos is None:
            raise UnassignedPoint(f"point {p} is not covered by any stop")
        buckets[max(pos, 1) - 1].append(p)

    out = []
    for k in range(legs):
        origin = order[k]
        dest = order[k + 1] if k + 1 < len(order) else 0
        out.append(Subproblem(k + 1, origin, dest, tuple(buckets[k])))
    return out


def cheapest_insertion(path, point, dist) -> list:
    """Insert ``point`` between two consecutive nodes of ``path`` at least added length."""
    best = None
    for pos in range(1, len(path)):
        a, b = path[pos - 1], path[pos]
        delta = dist[a][point] + dist[point][b] - dist[a][b]
        if best is None or delta < best[0] - 1e-9:
            best = (delta, pos)
    new = list(path)
    new.insert(best[1], point)
    return new


def overflow_fallback(sp: Subproblem, scenario, is_feasible, spill=None, rank=None):
    """Shed UAV points from ``sp`` until ``is_feasible(sp)`` holds.

    Points leave farthest-from-destination first.  Each one is offered to
    ``spill(point)`` (a later subproblem that can still reach it); if that
    declines, the point goes onto the UGV's origin->destination drive at its
    cheapest insertion position.  Returns the reduced subproblem, the points
    handed to the UGV and the points spilled forward, each in move order.
    """
    if is_feasible(sp):
        return sp, [], []
    dist = scenario.matrix.dist
    d = sp.destination
    if rank is None:
        rank = lambda s: sorted(s.uav_points, key=lambda p: (-dist[d][p], p))
    leg = [sp.origin] + list(sp.ugv_detours) + [d]
    to_ugv, spilled = [], []
    cur = sp
    while cur.uav_points:
        p = rank(cur)[0]
        if spill is not None and spill(p):
            spilled.append(p)
        else:
            to_ugv.append(p)
            leg = cheapest_insertion(leg, p, dist)
        cur = replace(
            cur,
            uav_points=tuple(q for q in cur.uav_points if q != p),
            ugv_detours=tuple(leg[1:-1]),
        )
        if is_feasible(cur):
            break
    return cur, to_ugv, spilled
