"""Single-sortie energy-constrained routing with a destination time window.

A sortie leaves stop S, visits every point once and lands at stop D, where
the UGV becomes available at ``window_open``.  Leg times are integer
seconds and fuel drains at the cruise power for every second aloft.  A UAV
that would reach D before the window opens waits at S instead of
loitering, so early arrival costs time but no fuel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAX_EXACT_VISITS = 12
FUEL_TOL = 1e-6  # J; absorbs float round-off in P * t against F


class Infeasible(Exception):
    def __init__(self, msg, instance=None):
        super().__init__(msg)
        self.instance = instance


@dataclass(frozen=True, eq=False)
class EvrptwInstance:
    start: int
    dest: int
    visits: tuple[int, ...]
    times: np.ndarray  # integer seconds, indexed by point id
    power: float  # W drawn while flying
    fuel_capacity: float
    window_open: int = 0
    window_close: int = 10**12
    earliest_departure: int = 0

    def leg_time(self, i, j) -> int:
        return int(self.times[i][j])

    def leg_energy(self, i, j) -> float:
        return self.power * int(self.times[i][j])

    @property
    def max_travel(self) -> int:
        """Longest total flight time the tank and the closing window allow."""
        by_fuel = math.floor((self.fuel_capacity + FUEL_TOL) / self.power) if self.power > 0 else 10**12
        by_window = self.window_close - self.earliest_departure
        return min(by_fuel, by_window)


@dataclass(frozen=True)
class Sortie:
    order: tuple[int, ...]
    node_times: tuple[int, ...]
    node_fuel: tuple[float, ...]
    departure: int
    arrival_at_D: int
    travel: int
    delay: int

    @property
    def duration(self) -> int:
        return self.arrival_at_D - self.departure

    @property
    def objective(self) -> int:
        """Travel time plus any forced wait at S."""
        return self.travel + self.delay

    @property
    def fuel_at_D(self) -> float:
        return self.node_fuel[-1]

    def recharge_need(self, capacity: float) -> float:
        return capacity - self.fuel_at_D


def build_sortie(instance: EvrptwInstance, order) -> Sortie:
    """Time and fuel along ``order`` (S ... D) with the departure rule applied."""
    order = tuple(order)
    legs = [instance.leg_time(a, b) for a, b in zip(order, order[1:])]
    travel = sum(legs)
    departure = max(instance.earliest_departure, instance.window_open - travel)
    t = departure
    f = instance.fuel_capacity
    times, fuel = [t], [f]
    for leg in legs:
        t += leg
        f -= instance.power * leg
        times.append(t)
        fuel.append(f)
    return Sortie(order, tuple(times), tuple(fuel), departure, t, travel,
                  departure - instance.earliest_departure)


def _check_basics(instance: EvrptwInstance):
    if instance.window_open > instance.window_close:
        raise Infeasible("destination window closes before it opens", instance)
    if instance.start in instance.visits or instance.dest in instance.visits:
        raise ValueError("visits must not include S or D")


def solve_exact(instance: EvrptwInstance) -> Sortie:
    """Minimum-time sortie by depth-first branch and bound.

    Partial paths from S are extended in ascending point-id order.  A branch
    is cut when its flight time already exceeds what the tank (or closing
    window) allows, when a min-incoming-leg bound cannot beat the incumbent,
    or when the same (visited set, last node) was reached earlier no slower.
    Because the departure rule makes arrival at D monotone in flight time,
    the shortest flight is also the earliest arrival.  Ties keep the
    lexicographically first order.
    """
    _check_basics(instance)
    visits = sorted(instance.visits)
    k = len(visits)
    if k > MAX_EXACT_VISITS:
        raise ValueError(f"{k} visits exceed the exact limit of {MAX_EXACT_VISITS}")
    S, D = instance.start, instance.dest
    cap = instance.max_travel
    ids = [S] + visits + [D]
    t = np.asarray(instance.times)[np.ix_(ids, ids)].tolist()
    dcol = k + 1

    best_time = cap + 1
    best_path = None
    seen: dict[tuple[int, int], int] = {}
    full = (1 << k) - 1

    def bound(mask, last):
        # every unvisited node and D still needs one incoming leg
        lb = 0
        rest = [i for i in range(k) if not mask >> i & 1]
        srcs = [last + 1 if last >= 0 else 0] + [i + 1 for i in rest]
        for j in rest:
            lb += min(t[s][j + 1] for s in srcs if s != j + 1)
        lb += min(t[s][dcol] for s in srcs)
        return lb

    def dfs(mask, last, elapsed, path):
        nonlocal best_time, best_path
        if mask == full:
            total = elapsed + t[last + 1 if last >= 0 else 0][dcol]
            if total < best_time:
                best_time, best_path = total, list(path)
            return
        key = (mask, last)
        prev = seen.get(key)
        if prev is not None and prev <= elapsed:
            return
        seen[key] = elapsed
        if elapsed + bound(mask, last) >= best_time:
            return
        src = last + 1 if last >= 0 else 0
        for i in range(k):
            if mask >> i & 1:
                continue
            e = elapsed + t[src][i + 1]
            if e > cap:
                continue
            path.append(visits[i])
            dfs(mask | (1 << i), i, e, path)
            path.pop()

    dfs(0, -1, 0, [])
    if best_path is None:
        raise Infeasible(
            f"no order of {k} visits from {S} to {D} fits {cap} s of flight", instance
        )
    return build_sortie(instance, [S] + best_path + [D])


def _path_travel(order, t):
    return sum(t[a][b] for a, b in zip(order, order[1:]))


def _cheapest_insertion(instance, t, cap, priority, sequential=False):
    """Grow S->D by insertion, never exceeding ``cap`` seconds of flight.

    By default each step places whichever remaining point is cheapest to
    add.  With ``sequential`` the points go in ``priority`` order, each at
    its own cheapest position, which gives restarts real diversity.
    """
    S, D = instance.start, instance.dest
    path = [S, D]
    travel = t[S][D]
    if travel > cap:
        return None
    left = list(priority)
    while left:
        best = None
        for v in left[:1] if sequential else left:
            for pos in range(1, len(path)):
                a, b = path[pos - 1], path[pos]
                delta = t[a][v] + t[v][b] - t[a][b]
                if travel + delta > cap:
                    continue
                if best is None or delta < best[0]:
                    best = (delta, v, pos)
        if best is None:
            return None
        delta, v, pos = best
        path.insert(pos, v)
        travel += delta
        left.remove(v)
    return path


def local_search(path, t):
    """2-opt reversals and or-opt relocation of 1-3 point segments, first improvement.

    Every accepted move shortens the flight, so fuel and window feasibility
    established during construction are preserved.  Endpoints stay fixed.
    """
    path = list(path)
    n = len(path)
    improved = True
    while improved:
        improved = False
        for i in range(0, n - 3):
            for j in range(i + 2, n - 1):
                a, b, c, e = path[i], path[i + 1], path[j], path[j + 1]
                if t[a][c] + t[b][e] < t[a][b] + t[c][e]:
                    path[i + 1 : j + 1] = reversed(path[i + 1 : j + 1])
                    improved = True
        for seg_len in (1, 2, 3):
            i = 1
            while i + seg_len < n:
                seg = path[i : i + seg_len]
                a, b = path[i - 1], path[i + seg_len]
                gain = t[a][seg[0]] + t[seg[-1]][b] - t[a][b]
                rest = path[:i] + path[i + seg_len :]
                best = None
                for pos in range(1, len(rest)):
                    p, q = rest[pos - 1], rest[pos]
                    for cand in (seg, seg[::-1]) if seg_len > 1 else (seg,):
                        cost = t[p][cand[0]] + t[cand[-1]][q] - t[p][q]
                        if cost < gain and (best is None or cost < best[0]):
                            best = (cost, pos, cand)
                if best is not None:
                    path = rest[: best[1]] + list(best[2]) + rest[best[1] :]
                    improved = True
                i += 1
    return path


def solve_heuristic(instance: EvrptwInstance, seed: int = 0, restarts: int = 8) -> Sortie:
    """Cheapest insertion + local search, keeping the best of several starts.

    The first start is plain cheapest insertion; the others insert the
    points in an order shuffled by a generator seeded with ``seed``.
    """
    _check_basics(instance)
    cap = instance.max_travel
    t = np.asarray(instance.times).tolist()
    rng = np.random.default_rng(seed)
    base = sorted(instance.visits)
    best = None
    for r in range(restarts + 1):
        prio = base if r == 0 else list(rng.permutation(base))
        path = _cheapest_insertion(instance, t, cap, [int(v) for v in prio], sequential=r > 0)
        if path is None:
            continue
        path = local_search(path, t)
        key = (_path_travel(path, t), path)
        if best is None or key < best:
            best = key
    if best is None:
        raise Infeasible(
            f"insertion could not place all {len(base)} visits within {cap} s of flight",
            instance,
        )
    return build_sortie(instance, best[1])


def solve(instance: EvrptwInstance, seed: int = 0) -> Sortie:
    if len(instance.visits) <= MAX_EXACT_VISITS:
        return solve_exact(instance)
    return solve_heuristic(instance, seed)


@dataclass
class Validation:
    ok: bool
    violation: str | None = None
    node: int | None = None
    details: dict = field(default_factory=dict)


def validate_sortie(sortie: Sortie, instance: EvrptwInstance) -> Validation:
    """Recompute flow, time and fuel along ``sortie.order`` from scratch.

    Returns the first violated constraint (by name) or ok=True.  Does not
    trust any timing or fuel stored on the sortie.
    """
    order = sortie.order
    if not order or order[0] != instance.start:
        return Validation(False, "start", order[0] if order else None)
    if order[-1] != instance.dest:
        return Validation(False, "end", order[-1])
    inner = order[1:-1]
    if instance.dest in inner or instance.start in inner:
        return Validation(False, "no-flow-after-D", instance.dest)
    if sorted(inner) != sorted(instance.visits):
        missing = set(instance.visits) - set(inner)
        node = min(missing) if missing else None
        return Validation(False, "flow-conservation", node)

    dep = sortie.departure
    if dep < instance.earliest_departure:
        return Validation(False, "release", instance.start)
    fuel = instance.fuel_capacity
    clock = dep
    for a, b in zip(order, order[1:]):
        leg = int(instance.times[a][b])
        clock += leg
        fuel -= instance.power * leg
        if fuel < -FUEL_TOL:
            return Validation(False, "fuel", b, {"fuel": fuel})
        if fuel > instance.fuel_capacity + FUEL_TOL:
            return Validation(False, "fuel", b, {"fuel": fuel})
    if clock != sortie.arrival_at_D:
        return Validation(False, "time-propagation", instance.dest,
                          {"recomputed": clock, "stored": sortie.arrival_at_D})
    if clock < instance.window_open:
        return Validation(False, "window", instance.dest, {"arrival": clock})
    if clock > instance.window_close:
        return Validation(False, "window", instance.dest, {"arrival": clock})
    return Validation(True, details={"arrival": clock, "fuel_at_D": fuel})
