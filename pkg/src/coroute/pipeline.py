"""End-to-end cooperative planning, the UGV-only baseline and plan metrics."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

from . import energy, evrptw, setcover
from .allocation import Subproblem, allocate, cheapest_insertion, overflow_fallback
from .energy import FuelState
from .evrptw import EvrptwInstance, Infeasible, Sortie
from .routing_core import TourInstance, solve_tsp_heuristic
from .ugv_planner import (
    UgvRoute, Waypoint, apply_rendezvous, drive_to, driving_time, plan_spatial, waiting_time,
)

HORIZON_FACTOR = 10
METHODS = ("greedy", "exact", "baseline")


@dataclass(frozen=True)
class UavLeg:
    """One stretch of the UAV route between recharges.

    ``sortie`` is None when the UAV rides on the UGV for the whole leg
    (direct flight between the two stops is beyond one charge).
    """
    subproblem: int
    origin: int
    destination: int
    sortie: Sortie | None
    arrival: int
    recharge: int


@dataclass
class CooperativePlan:
    method: str
    stops: tuple[int, ...]
    tour: tuple[int, ...]
    subproblems: list[Subproblem]
    ugv_route: UgvRoute
    uav_legs: list[UavLeg]
    task_time: int
    uav_energy: float
    ugv_energy: float
    flags: list[str] = field(default_factory=list)
    covers_evaluated: int = 1
    cover_task_times: list[int] = field(default_factory=list)
    timings: dict = field(default_factory=dict, compare=False)

    @property
    def total_energy(self) -> float:
        return self.uav_energy + self.ugv_energy

    @property
    def recharges(self):
        return self.ugv_route.waits

    @property
    def sorties(self) -> list[Sortie]:
        return [leg.sortie for leg in self.uav_legs if leg.sortie is not None]


class _Clock:
    def __init__(self):
        self.ms = {}

    def add(self, key, t0):
        self.ms[key] = self.ms.get(key, 0.0) + (time.perf_counter() - t0) * 1000.0


class SortieCache:
    """Memo of travel-optimal orders keyed by (S, D, visit set).

    Entries are solved with only the fuel limit in force; a hit is reused
    when its flight also fits the caller's window, and a fuel-infeasible
    entry stays infeasible under any tighter window.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.store: dict = {}

    def solve(self, inst: EvrptwInstance) -> Sortie:
        key = (inst.start, inst.dest, frozenset(inst.visits))
        hit = self.store.get(key, ...)
        if hit is ...:
            loose = replace(inst, window_open=0, window_close=10**12, earliest_departure=0)
            try:
                s = evrptw.solve(loose, self.seed)
                hit = (s.order, s.travel)
            except Infeasible:
                hit = None
            self.store[key] = hit
        if hit is None:
            raise Infeasible("fuel budget exceeded", inst)
        order, travel = hit
        if travel <= inst.max_travel and inst.window_open <= inst.window_close:
            return evrptw.build_sortie(inst, order)
        return evrptw.solve(inst, self.seed)


def _shed_order(scenario):
    """Rank a subproblem's UAV points for shedding, biggest flight saving first.

    Savings are read off an unconstrained (fuel-free) sortie through all the
    current points; ties go to the lower id.
    """
    ta = scenario.matrix.times(scenario.uav.speed)

    def rank(sp):
        loose = EvrptwInstance(sp.origin, sp.destination, tuple(sorted(sp.uav_points)), ta,
                               0.0, 0.0)
        order = evrptw.solve_heuristic(loose, restarts=0).order
        scored = []
        for a, p, b in zip(order, order[1:], order[2:]):
            scored.append((-(ta[a][p] + ta[p][b] - ta[a][b]), p))
        return [p for _, p in sorted(scored)]

    return rank


def polish_leg(sp: Subproblem, scenario) -> tuple[int, ...]:
    """Reorder the UGV's detour points between origin and destination by
    segment reversal and relocation; the endpoints stay fixed."""
    tg = scenario.matrix.times(scenario.ugv.speed).tolist()
    path = [sp.origin] + list(sp.ugv_detours) + [sp.destination]
    return tuple(evrptw.local_search(path, tg)[1:-1])


def _leg_arrival(route: UgvRoute, sp: Subproblem, scenario) -> int:
    for p in list(sp.ugv_detours) + [sp.destination]:
        route = drive_to(route, p, scenario)
    return route.waypoints[-1].arrival


def _instance(sp, scenario, release, window_open, horizon) -> EvrptwInstance:
    uav = scenario.uav
    return EvrptwInstance(
        start=sp.origin,
        dest=sp.destination,
        visits=tuple(sorted(sp.uav_points)),
        times=scenario.matrix.times(uav.speed),
        power=uav.cruise_power,
        fuel_capacity=uav.fuel_capacity,
        window_open=window_open,
        window_close=horizon,
        earliest_departure=release,
    )


def plan_for_cover(scenario, cover, method="greedy", horizon=None, cache=None) -> CooperativePlan:
    """Run the UGV/UAV feedback loop for one fixed set of refuel stops."""
    clock = _Clock()
    cache = cache or SortieCache(scenario.seed)
    if horizon is None:
        horizon = HORIZON_FACTOR * run_baseline(scenario).task_time

    t0 = time.perf_counter()
    tour = plan_spatial(cover, scenario)
    clock.add("tsp_ms", t0)
    sps = allocate(cover, tour, scenario)

    route = UgvRoute.at_depot()
    release = 0
    legs: list[UavLeg] = []
    done: list[Subproblem] = []
    flags: list[str] = []
    t0 = time.perf_counter()
    radius = scenario.coverage_radius
    dist = scenario.matrix.dist
    shed = _shed_order(scenario)
    for k in range(len(sps)):
        sp = sps[k]
        closing = sp.index == len(sps)

        def spill(p, k=k):
            for j in range(k + 1, len(sps)):
                if dist[sps[j].destination][p] < radius:
                    sps[j] = replace(sps[j], uav_points=sps[j].uav_points + (p,))
                    return True
            return False

        def window(s, route=route, closing=closing):
            # the closing leg ends at the depot with no rendezvous to wait for
            return 0 if closing else _leg_arrival(route, s, scenario)

        def feasible(s, release=release, window=window):
            try:
                cache.solve(_instance(s, scenario, release, window(s), horizon))
                return True
            except Infeasible:
                return False

        direct = replace(sp, uav_points=())
        if not feasible(direct):
            # stops farther apart than one charge: the UAV rides the UGV
            leg = [sp.origin] + list(sp.ugv_detours) + [sp.destination]
            for p in sorted(sp.uav_points, key=lambda q: (-dist[sp.destination][q], q)):
                if not spill(p):
                    leg = cheapest_insertion(leg, p, dist)
            sp = replace(sp, uav_points=(), ugv_detours=tuple(leg[1:-1]))
            flags.append(f"carried:SP{sp.index}")
            carried = True
        else:
            sp, moved, spilled = overflow_fallback(sp, scenario, feasible, spill, shed)
            if moved:
                flags.append(f"overflow:SP{sp.index}:{len(moved)}")
            if spilled:
                flags.append(f"spill:SP{sp.index}:{len(spilled)}")
            carried = False

        if len(sp.ugv_detours) > 1:
            sp = replace(sp, ugv_detours=polish_leg(sp, scenario))
        for p in sp.ugv_detours:
            route = drive_to(route, p, scenario)
        route = drive_to(route, sp.destination, scenario)
        ugv_arrival = route.waypoints[-1].arrival
        w_open = 0 if closing else ugv_arrival
        sp = replace(sp, window_open=w_open, window_close=horizon)

        sortie = None
        if carried:
            arrival, recharge = ugv_arrival, 0
        else:
            sortie = cache.solve(_instance(sp, scenario, release, w_open, horizon))
            arrival = sortie.arrival_at_D
            recharge = 0 if closing else energy.recharge_duration(
                FuelState(max(sortie.fuel_at_D, 0.0)), scenario.uav
            )
        if not closing:
            route = apply_rendezvous(route, sp.destination, arrival, recharge)
            release = route.waypoints[-1].departure
        legs.append(UavLeg(sp.index, sp.origin, sp.destination, sortie, arrival, recharge))
        done.append(sp)
    clock.add("evrptw_ms", t0)

    task_time = max(route.waypoints[-1].arrival, legs[-1].arrival if legs else 0)
    plan = CooperativePlan(
        method=method,
        stops=tuple(cover.stops),
        tour=tuple(tour),
        subproblems=done,
        ugv_route=route,
        uav_legs=legs,
        task_time=task_time,
        uav_energy=0.0,
        ugv_energy=0.0,
        flags=flags,
        cover_task_times=[task_time],
        timings=clock.ms,
    )
    plan.uav_energy, plan.ugv_energy, _ = energy_accounting(plan, scenario)
    return plan


def _plan_key(plan: CooperativePlan, scenario):
    return (plan.task_time, round(plan.total_energy, 6),
            json.dumps(plan_to_dict(plan, scenario), sort_keys=True))


def run_cooperative(scenario, method: str = "greedy", *, max_covers: int = setcover.DEFAULT_MAX_SOLUTIONS,
                    node_cap: int = setcover.DEFAULT_NODE_CAP) -> CooperativePlan:
    """Cooperative plan with refuel stops from the greedy or the exact cover.

    For ``exact`` every enumerated minimum cover is planned in full and the
    plan with the least task time wins (then least energy, then the
    lexicographically smallest serialization).
    """
    if method not in ("greedy", "exact"):
        raise ValueError(f"unknown cover method {method!r}")
    start = time.perf_counter()
    horizon = HORIZON_FACTOR * run_baseline(scenario).task_time
    t0 = time.perf_counter()
    inst = setcover.build_cover_instance(scenario)
    if method == "greedy":
        covers = [setcover.greedy_cover(inst)]
    else:
        covers = setcover.exact_min_covers(inst, max_covers, node_cap)
    msc_ms = (time.perf_counter() - t0) * 1000.0

    cache = SortieCache(scenario.seed)
    plans = [plan_for_cover(scenario, c, method, horizon, cache) for c in covers]
    best = min(plans, key=lambda p: _plan_key(p, scenario))
    best.covers_evaluated = len(plans)
    best.cover_task_times = [p.task_time for p in plans]
    if any(c.incomplete for c in covers):
        best.flags.append("cover-search-incomplete")
    best.timings = {
        "msc_ms": msc_ms,
        "tsp_ms": sum(p.timings.get("tsp_ms", 0.0) for p in plans),
        "evrptw_ms": sum(p.timings.get("evrptw_ms", 0.0) for p in plans),
        "total_ms": (time.perf_counter() - start) * 1000.0,
    }
    return best


def run_baseline(scenario, seed: int | None = None) -> CooperativePlan:
    """The UGV alone tours every point (2-opt polished nearest neighbour)."""
    t0 = time.perf_counter()
    seed = scenario.seed if seed is None else seed
    nodes = tuple(p.id for p in scenario.nodes)
    tour = solve_tsp_heuristic(TourInstance(nodes, 0, scenario.matrix.dist), seed)
    route = UgvRoute.at_depot()
    for p in tour.order[1:]:
        route = drive_to(route, p, scenario)
    ugv = scenario.ugv
    plan = CooperativePlan(
        method="baseline",
        stops=(0,),
        tour=tour.order,
        subproblems=[],
        ugv_route=route,
        uav_legs=[],
        task_time=route.waypoints[-1].arrival,
        uav_energy=0.0,
        ugv_energy=ugv.power(ugv.speed) * route.waypoints[-1].arrival,
    )
    plan.timings = {"total_ms": (time.perf_counter() - t0) * 1000.0}
    return plan


def energy_accounting(plan: CooperativePlan, scenario) -> tuple[float, float, float]:
    """UAV flight draw, UGV driving plus idle draw, and their sum (J)."""
    uav = scenario.uav
    ugv = scenario.ugv
    flight = sum(s.travel for s in plan.sorties)
    uav_j = uav.cruise_power * flight
    ugv_j = ugv.power(ugv.speed) * driving_time(plan.ugv_route) + ugv.power(0.0) * waiting_time(plan.ugv_route)
    return uav_j, ugv_j, uav_j + ugv_j


def improvement(baseline: float, value: float) -> float:
    if baseline <= 0:
        raise ValueError("baseline must be positive")
    return (baseline - value) / baseline * 100.0


def compute_metrics(plan: CooperativePlan, baseline: CooperativePlan) -> dict:
    return {
        "time_improvement_pct": improvement(baseline.task_time, plan.task_time),
        "energy_improvement_pct": improvement(baseline.total_energy, plan.total_energy),
    }


# --- checks ----------------------------------------------------------------

def verify_plan(plan: CooperativePlan, scenario) -> list[str]:
    """Recheck completeness, fuel safety, rendezvous timing and metrics.

    Everything is recomputed from the route geometry and the travel matrix;
    an empty list means no violations.
    """
    problems = []
    matrix = scenario.matrix
    uav, ugv = scenario.uav, scenario.ugv
    wps = plan.ugv_route.waypoints
    if wps[0].point != 0 or wps[0].arrival != 0 or wps[-1].point != 0:
        problems.append("ugv route must start at the depot at t=0 and end there")

    # completeness
    seen: dict[int, int] = {}
    stops = set(plan.stops) - {0}
    if plan.method == "baseline":
        for w in wps[1:-1]:
            seen[w.point] = seen.get(w.point, 0) + 1
    else:
        for s in plan.sorties:
            for p in s.order[1:-1]:
                seen[p] = seen.get(p, 0) + 1
        for w in wps:
            if w.point != 0 and w.point not in stops:
                seen[w.point] = seen.get(w.point, 0) + 1
        for s in stops:
            seen[s] = seen.get(s, 0) + 1
    for p in scenario.point_ids:
        c = seen.get(p, 0)
        if c != 1:
            problems.append(f"completeness: point {p} visited {c} times")
    extra = set(seen) - set(scenario.point_ids)
    if extra:
        problems.append(f"completeness: unknown points {sorted(extra)}")

    # UGV time propagation
    for prev, w in zip(wps, wps[1:]):
        leg = matrix.travel_time(prev.point, w.point, ugv.speed)
        if w.arrival != prev.departure + leg:
            problems.append(f"ugv timing: arrival at {w.point} is {w.arrival}, expected {prev.departure + leg}")
        if w.departure < w.arrival:
            problems.append(f"ugv timing: departs {w.point} before arriving")

    # fuel replay and rendezvous consistency
    if plan.method != "baseline":
        fuel = FuelState(uav.fuel_capacity)
        release = 0
        waits = {rv.stop: rv for rv in plan.ugv_route.waits}
        ugv_at = {}
        for w in wps:
            ugv_at[w.point] = w
        for leg in plan.uav_legs:
            closing = leg.subproblem == len(plan.uav_legs)
            if leg.sortie is not None:
                s = leg.sortie
                if s.order[0] != leg.origin or s.order[-1] != leg.destination:
                    problems.append(f"sortie SP{leg.subproblem} endpoints mismatch")
                if s.departure < release:
                    problems.append(f"sortie SP{leg.subproblem} leaves before release")
                if abs(fuel.remaining - uav.fuel_capacity) > evrptw.FUEL_TOL:
                    problems.append(f"sortie SP{leg.subproblem} starts without a full tank")
                clock = s.departure
                for a, b in zip(s.order, s.order[1:]):
                    dt = matrix.travel_time(a, b, uav.speed)
                    clock += dt
                    try:
                        fuel = energy.drain(fuel, dt, uav.cruise_power)
                    except energy.FuelExhausted:
                        if fuel.remaining - uav.cruise_power * dt < -evrptw.FUEL_TOL:
                            problems.append(f"fuel: UAV runs dry before reaching {b} in SP{leg.subproblem}")
                        fuel = FuelState(0.0)
                if clock != leg.arrival:
                    problems.append(f"sortie SP{leg.subproblem} arrival {leg.arrival} != recomputed {clock}")
            if closing:
                continue
            rv = waits.get(leg.destination)
            w = ugv_at.get(leg.destination)
            if rv is None or w is None:
                problems.append(f"rendezvous missing at stop {leg.destination}")
                continue
            if leg.arrival < w.arrival:
                problems.append(f"rendezvous: UAV at {leg.destination} before the UGV")
            if w.departure != leg.arrival + leg.recharge:
                problems.append(f"rendezvous: UGV leaves {leg.destination} at {w.departure}, "
                                f"expected {leg.arrival + leg.recharge}")
            refill = min(uav.fuel_capacity, fuel.remaining + uav.recharge_rate * leg.recharge)
            if refill < uav.fuel_capacity - evrptw.FUEL_TOL:
                problems.append(f"recharge at {leg.destination} leaves the tank short")
            fuel = FuelState(uav.fuel_capacity)
            release = w.departure

    # metric recomputation
    uav_arr = plan.uav_legs[-1].arrival if plan.uav_legs else 0
    task = max(wps[-1].arrival, uav_arr)
    if abs(task - plan.task_time) > 1:
        problems.append(f"task time {plan.task_time} != recomputed {task}")
    flight = sum(matrix.travel_time(a, b, uav.speed)
                 for s in plan.sorties for a, b in zip(s.order, s.order[1:]))
    drive = sum(matrix.travel_time(a.point, b.point, ugv.speed) for a, b in zip(wps, wps[1:]))
    idle = sum(w.departure - w.arrival for w in wps[:-1])
    uav_j = uav.cruise_power * flight
    ugv_j = ugv.power(ugv.speed) * drive + ugv.power(0.0) * idle
    if abs(uav_j - plan.uav_energy) > 1 or abs(ugv_j - plan.ugv_energy) > 1:
        problems.append("energy totals do not match the routes")
    return problems


# --- serialization ---------------------------------------------------------

def _sortie_dict(s: Sortie) -> dict:
    return {
        "order": list(s.order),
        "node_times_s": list(s.node_times),
        "node_fuel_j": [round(f, 6) for f in s.node_fuel],
        "departure_s": s.departure,
        "arrival_s": s.arrival_at_D,
        "flight_s": s.travel,
        "departure_delay_s": s.delay,
    }


def plan_to_dict(plan: CooperativePlan, scenario) -> dict:
    d = {
        "method": plan.method,
        "task_time_s": plan.task_time,
        "uav_energy_j": round(plan.uav_energy, 6),
        "ugv_energy_j": round(plan.ugv_energy, 6),
        "total_energy_j": round(plan.total_energy, 6),
        "refuel_stops": list(plan.stops),
        "ugv_tour": list(plan.tour),
        "ugv_route": [
            {"point_id": w.point, "arrival_s": w.arrival, "departure_s": w.departure}
            for w in plan.ugv_route.waypoints
        ],
        "recharges": [
            {"stop": r.stop, "ugv_arrival_s": r.ugv_arrival, "uav_arrival_s": r.uav_arrival,
             "recharge_s": r.recharge, "ugv_wait_s": r.wait}
            for r in plan.ugv_route.waits
        ],
        "subproblems": [
            {"index": sp.index, "origin": sp.origin, "destination": sp.destination,
             "uav_points": list(sp.uav_points), "ugv_detours": list(sp.ugv_detours),
             "window_open_s": sp.window_open}
            for sp in plan.subproblems
        ],
        "uav_route": [
            {"subproblem": leg.subproblem, "origin": leg.origin, "destination": leg.destination,
             "mode": "flight" if leg.sortie is not None else "carried",
             "arrival_s": leg.arrival, "recharge_s": leg.recharge,
             "sortie": _sortie_dict(leg.sortie) if leg.sortie is not None else None}
            for leg in plan.uav_legs
        ],
        "total_departure_delay_s": sum(s.delay for s in plan.sorties),
        "flags": list(plan.flags),
    }
    if plan.method == "exact":
        d["covers_evaluated"] = plan.covers_evaluated
        d["cover_task_times_s"] = list(plan.cover_task_times)
    return d
