"""Refuel-stop selection as a minimum set cover over the assignment points.

Targets are covered by a candidate stop when strictly closer than the UAV
coverage radius.  The depot is always a stop and never counts toward the
cover size.
"""
from __future__ import annotations

from dataclasses import dataclass, field

DEPOT = 0
MAX_EXACT_CANDIDATES = 128
DEFAULT_MAX_SOLUTIONS = 50
DEFAULT_NODE_CAP = 2_000_000


class Uncoverable(ValueError):
    def __init__(self, targets):
        self.targets = sorted(targets)
        super().__init__(f"targets not within radius of any candidate: {self.targets}")


@dataclass(frozen=True)
class CoverInstance:
    candidates: tuple[int, ...]
    targets: tuple[int, ...]
    radius: float
    cover_sets: dict = field(hash=False, compare=False)
    depot: int = DEPOT

    @classmethod
    def from_distances(cls, dist, candidates, targets, radius, depot=DEPOT):
        candidates = tuple(sorted(set(candidates) | {depot}))
        targets = tuple(sorted(targets))
        cover = {
            c: frozenset(t for t in targets if dist[c][t] < radius) for c in candidates
        }
        covered = set().union(*cover.values()) if cover else set()
        missing = set(targets) - covered
        if missing:
            raise Uncoverable(missing)
        return cls(candidates, targets, radius, cover, depot)


@dataclass(frozen=True)
class RefuelPlan:
    stops: tuple[int, ...]
    assignment: dict = field(hash=False, compare=False)
    incomplete: bool = False

    @property
    def size(self) -> int:
        """Number of stops excluding the depot."""
        return len(self.stops) - 1


def build_cover_instance(scenario) -> CoverInstance:
    radius = scenario.coverage_radius
    if radius <= 0:
        raise ValueError("coverage radius must be positive")
    ids = scenario.point_ids
    return CoverInstance.from_distances(scenario.matrix.dist, [DEPOT] + ids, ids, radius)


def _assign(instance: CoverInstance, stops) -> dict:
    out = {}
    for s in stops:
        for t in sorted(instance.cover_sets[s]):
            out.setdefault(t, s)
    return out


def greedy_cover(instance: CoverInstance) -> RefuelPlan:
    depot = instance.depot
    assignment = {t: depot for t in instance.cover_sets[depot]}
    todo = set(instance.targets) - set(assignment)
    stops = [depot]
    while todo:
        # max new coverage, lowest id on ties
        best = max(
            instance.candidates,
            key=lambda c: (len(instance.cover_sets[c] & todo), -c),
        )
        gained = instance.cover_sets[best] & todo
        if not gained:
            raise Uncoverable(todo)
        stops.append(best)
        for t in gained:
            assignment[t] = best
        todo -= gained
    return RefuelPlan(tuple(stops), assignment)


class _Search:
    def __init__(self, instance: CoverInstance, max_solutions: int, node_cap: int):
        self.instance = instance
        depot_cover = instance.cover_sets[instance.depot]
        self.targets = [t for t in instance.targets if t not in depot_cover]
        bit = {t: 1 << k for k, t in enumerate(self.targets)}
        self.cands = [c for c in instance.candidates if c != instance.depot]
        self.mask = {}
        for c in self.cands:
            m = 0
            for t in instance.cover_sets[c]:
                m |= bit.get(t, 0)
            if m:
                self.mask[c] = m
        self.cands = [c for c in self.cands if c in self.mask]
        self.coverers = []
        self.neigh = []
        for t in self.targets:
            b = bit[t]
            cs = [c for c in self.cands if self.mask[c] & b]
            if not cs:
                raise Uncoverable([t])
            self.coverers.append(cs)
            nb = 0
            for c in cs:
                nb |= self.mask[c]
            self.neigh.append(nb)
        self.max_solutions = max_solutions
        self.node_cap = node_cap
        self.nodes = 0
        self.incomplete = False
        self.best = len(greedy_cover(instance).stops) - 1
        self.solutions: list[tuple[int, ...]] = []

    def lower_bound(self, uncovered: int) -> int:
        # targets pairwise unreachable by a common candidate each need their own stop
        blocked = 0
        packed = 0
        rest = uncovered
        while rest:
            low = rest & -rest
            k = low.bit_length() - 1
            rest ^= low
            if not (blocked >> k) & 1:
                packed += 1
                blocked |= self.neigh[k]
        return packed

    def run(self):
        full = (1 << len(self.targets)) - 1
        if full == 0:
            self.best = 0
            self.solutions = [()]
            return
        self._dfs(full, [], frozenset())

    def _dfs(self, uncovered, chosen, excluded):
        if self.incomplete:
            return
        self.nodes += 1
        if self.nodes > self.node_cap:
            self.incomplete = True
            return
        if not uncovered:
            size = len(chosen)
            if size < self.best:
                self.best = size
                self.solutions = []
            if size == self.best and len(self.solutions) < self.max_solutions:
                self.solutions.append(tuple(sorted(chosen)))
            return
        bound = len(chosen) + self.lower_bound(uncovered)
        if bound > self.best or (
            bound == self.best and len(self.solutions) >= self.max_solutions
        ):
            return
        # branch on the uncovered target with the fewest remaining coverers
        pick, options = None, None
        rest = uncovered
        while rest:
            low = rest & -rest
            k = low.bit_length() - 1
            rest ^= low
            opts = [c for c in self.coverers[k] if c not in excluded]
            if options is None or len(opts) < len(options):
                pick, options = k, opts
                if len(opts) <= 1:
                    break
        tried = set(excluded)
        for c in options:
            chosen.append(c)
            self._dfs(uncovered & ~self.mask[c], chosen, frozenset(tried))
            chosen.pop()
            tried.add(c)
            if self.incomplete:
                return


def exact_min_covers(
    instance: CoverInstance,
    max_solutions: int = DEFAULT_MAX_SOLUTIONS,
    node_cap: int = DEFAULT_NODE_CAP,
) -> list[RefuelPlan]:
    """All minimum-cardinality covers (up to ``max_solutions``).

    Depth-first branch and bound: branch on the most constrained uncovered
    target, try each candidate covering it while excluding earlier siblings
    (so every cover set is generated once), and prune with a disjoint-target
    packing bound against the greedy incumbent.  If the node cap trips, the
    best covers found so far come back flagged ``incomplete``.
    """
    if len(instance.candidates) > MAX_EXACT_CANDIDATES:
        raise ValueError(
            f"{len(instance.candidates)} candidates exceed the exact search limit "
            f"of {MAX_EXACT_CANDIDATES}"
        )
    search = _Search(instance, max_solutions, node_cap)
    search.run()
    found = sorted(set(search.solutions))
    if not found:
        # node cap hit before any cover of the greedy size was re-found
        g = greedy_cover(instance)
        return [RefuelPlan(tuple([instance.depot] + sorted(g.stops[1:])),
                           _assign(instance, [instance.depot] + sorted(g.stops[1:])),
                           incomplete=True)]
    plans = []
    for chosen in found:
        stops = (instance.depot,) + chosen
        plans.append(RefuelPlan(stops, _assign(instance, stops), search.incomplete))
    return plans


def is_valid_cover(instance: CoverInstance, plan: RefuelPlan) -> bool:
    if not plan.stops or plan.stops[0] != instance.depot:
        return False
    if any(s not in instance.cover_sets for s in plan.stops):
        return False
    for t in instance.targets:
        s = plan.assignment.get(t)
        if s is None or s not in plan.stops or t not in instance.cover_sets[s]:
            return False
    return True
