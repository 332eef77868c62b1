"""UGV route over the refuel stops: spatial order, arrival times and recharge waits."""
from __future__ import annotations

from dataclasses import dataclass, replace

from .routing_core import TourInstance, solve_tsp_exact, solve_tsp_heuristic, MAX_EXACT_NODES


class ProtocolViolation(ValueError):
    """UAV scheduled to be serviced before the UGV reaches the stop."""


@dataclass(frozen=True)
class Waypoint:
    point: int
    arrival: int
    departure: int


@dataclass(frozen=True)
class Rendezvous:
    stop: int
    ugv_arrival: int
    uav_arrival: int
    recharge: int

    @property
    def wait(self) -> int:
        return self.uav_arrival + self.recharge - self.ugv_arrival


@dataclass(frozen=True)
class UgvRoute:
    waypoints: tuple[Waypoint, ...]
    waits: tuple[Rendezvous, ...] = ()

    @classmethod
    def at_depot(cls, depot: int = 0) -> "UgvRoute":
        return cls((Waypoint(depot, 0, 0),))

    @property
    def end_time(self) -> int:
        return self.waypoints[-1].departure

    @property
    def points(self) -> list[int]:
        return [w.point for w in self.waypoints]


def plan_spatial(plan, scenario) -> tuple[int, ...]:
    """Closed stop tour rooted at the depot, e.g. (0, 7, 3, 0)."""
    nodes = tuple(dict.fromkeys((0,) + tuple(plan.stops)))
    inst = TourInstance(nodes, 0, scenario.matrix.dist)
    if len(nodes) <= MAX_EXACT_NODES:
        return solve_tsp_exact(inst).order
    # beyond the DP budget; only reachable with unusually small UAV ranges
    return solve_tsp_heuristic(inst, seed=scenario.seed).order


def arrival_at_next_stop(route: UgvRoute, next_stop: int, scenario) -> int:
    last = route.waypoints[-1]
    return last.departure + scenario.matrix.travel_time(last.point, next_stop, scenario.ugv.speed)


def drive_to(route: UgvRoute, point: int, scenario) -> UgvRoute:
    t = arrival_at_next_stop(route, point, scenario)
    return replace(route, waypoints=route.waypoints + (Waypoint(point, t, t),))


def apply_rendezvous(route: UgvRoute, stop: int, uav_arrival: int, recharge: int) -> UgvRoute:
    """Hold the UGV at ``stop`` until the UAV has landed and recharged.

    The stop's latest occurrence on the route is updated and every later
    waypoint is shifted by the change in departure.
    """
    idx = max((k for k, w in enumerate(route.waypoints) if w.point == stop), default=None)
    if idx is None:
        raise KeyError(f"stop {stop} is not on the route")
    w = route.waypoints[idx]
    if uav_arrival < w.arrival:
        raise ProtocolViolation(
            f"UAV reaches stop {stop} at {uav_arrival} s, before the UGV at {w.arrival} s"
        )
    dep = uav_arrival + recharge
    shift = dep - w.departure
    wps = list(route.waypoints)
    wps[idx] = Waypoint(stop, w.arrival, dep)
    for k in range(idx + 1, len(wps)):
        o = wps[k]
        wps[k] = Waypoint(o.point, o.arrival + shift, o.departure + shift)
    rv = Rendezvous(stop, w.arrival, uav_arrival, recharge)
    return UgvRoute(tuple(wps), route.waits + (rv,))


def driving_time(route: UgvRoute) -> int:
    return sum(w.arrival - prev.departure for prev, w in zip(route.waypoints, route.waypoints[1:]))


def waiting_time(route: UgvRoute) -> int:
    # the final depot arrival ends the task, so its departure never adds time
    return sum(w.departure - w.arrival for w in route.waypoints[:-1])
