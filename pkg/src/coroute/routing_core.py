"""Closed-tour TSP solvers over a subset of scenario nodes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_EXACT_NODES = 16
_EPS = 1e-9


@dataclass(frozen=True)
class TourInstance:
    nodes: tuple[int, ...]
    start: int
    dist: np.ndarray  # full matrix indexed by point id

    def __post_init__(self):
        if not self.nodes:
            raise ValueError("tour needs at least one node")
        if self.start not in self.nodes:
            raise ValueError("start must be one of the nodes")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("duplicate nodes")


@dataclass(frozen=True)
class Tour:
    order: tuple[int, ...]  # begins and ends at start
    length: float


def tour_length(order, dist) -> float:
    return float(sum(dist[a][b] for a, b in zip(order, order[1:])))


def _close(seq, dist) -> Tour:
    order = tuple(seq) + (seq[0],)
    return Tour(order, tour_length(order, dist))


def _canonical(seq, dist) -> Tour:
    """Pick the lexicographically smaller of a cycle and its reverse."""
    seq = list(seq)
    rev = [seq[0]] + seq[:0:-1]
    return _close(min(seq, rev), dist)


def solve_tsp_exact(instance: TourInstance) -> Tour:
    """Held-Karp over subsets of the non-start nodes.

    Subproblem keys are (visited mask, last node); ties between equal-length
    tours go to the lexicographically smallest order.
    """
    n = len(instance.nodes)
    if n > MAX_EXACT_NODES:
        raise ValueError(f"{n} nodes exceed the exact TSP limit of {MAX_EXACT_NODES}")
    start = instance.start
    rest = sorted(v for v in instance.nodes if v != start)
    if not rest:
        return Tour((start, start), 0.0)
    if len(rest) <= 2:
        return _canonical([start] + rest, instance.dist)

    ids = [start] + rest
    d = np.asarray(instance.dist)[np.ix_(ids, ids)]
    m = len(rest)
    full = 1 << m
    cost = np.full((full, m), np.inf)
    for k in range(m):
        cost[1 << k, k] = d[0, k + 1]
    sub = d[1:, 1:]
    bits = 1 << np.arange(m)
    for mask in range(1, full):
        row = cost[mask]
        # non-members are inf, so they never win the min
        cand = (row[:, None] + sub).min(axis=0)
        free = np.flatnonzero((mask & bits) == 0)
        if free.size == 0:
            continue
        nm = mask | bits[free]
        cost[nm, free] = np.minimum(cost[nm, free], cand[free])
    last_row = cost[full - 1] + d[1:, 0]
    best = last_row.min()

    order = _rebuild(cost, sub, d, m, best)
    seq = [start] + [rest[k] for k in order]
    return _canonical(seq, instance.dist)


def _rebuild(cost, sub, d, m, best):
    """Walk back from the full mask, always taking the lowest index that still
    lies on an optimal tour.  The result, reversed, is the lexicographically
    smallest optimal cycle; _canonical then picks that direction."""
    full = (1 << m) - 1
    path = []
    mask = full
    target = best
    nxt = None  # node after current position (None means return to start)
    while mask:
        chosen = None
        for k in range(m):
            if not mask >> k & 1:
                continue
            tail = d[k + 1, 0] if nxt is None else sub[k, nxt]
            if abs(cost[mask, k] + tail - target) <= 1e-9 * max(1.0, target):
                chosen = k
                break
        path.append(chosen)
        target = cost[mask, chosen]
        mask ^= 1 << chosen
        nxt = chosen
    return path[::-1]


def _nearest_neighbor(start, rest, d, rng=None, k_random=1):
    seq = [start]
    left = set(rest)
    cur = start
    while left:
        ranked = sorted(left, key=lambda v: (d[cur][v], v))
        if rng is not None and k_random > 1:
            nxt = ranked[int(rng.integers(min(k_random, len(ranked))))]
        else:
            nxt = ranked[0]
        seq.append(nxt)
        left.remove(nxt)
        cur = nxt
    return seq


def two_opt(seq, d) -> list:
    """Apply improving 2-opt moves (first improvement) until none remain.

    ``seq`` is an open sequence starting at the tour start; the closing edge
    back to ``seq[0]`` is implicit.
    """
    tour = list(seq)
    n = len(tour)
    if n < 4:
        return tour
    improved = True
    while improved:
        improved = False
        for i in range(n - 1):
            a, b = tour[i], tour[i + 1]
            dab = d[a][b]
            for j in range(i + 2, n if i > 0 else n - 1):
                c, e = tour[j], tour[(j + 1) % n]
                delta = d[a][c] + d[b][e] - dab - d[c][e]
                if delta < -1e-7:
                    tour[i + 1 : j + 1] = reversed(tour[i + 1 : j + 1])
                    improved = True
                    a, b = tour[i], tour[i + 1]
                    dab = d[a][b]
    return tour


def solve_tsp_heuristic(instance: TourInstance, seed: int = 0, restarts: int = 4) -> Tour:
    """Nearest-neighbour construction polished by 2-opt.

    Besides the plain nearest-neighbour start, ``restarts`` seeded randomized
    constructions (each step picks among the 3 nearest) are polished too and
    the shortest result is kept.
    """
    start = instance.start
    rest = sorted(v for v in instance.nodes if v != start)
    d = np.asarray(instance.dist)
    if len(rest) <= 2:
        return _canonical([start] + rest, d)
    dl = d.tolist()
    rng = np.random.default_rng(seed)
    best = None
    for r in range(restarts + 1):
        seq = _nearest_neighbor(start, rest, dl, rng if r else None, 3)
        seq = two_opt(seq, dl)
        length = tour_length(seq + [start], dl)
        if best is None or length < best[0] - _EPS:
            best = (length, seq)
    return _canonical(best[1], d)


def improving_two_opt_move(order, dist):
    """First 2-opt move that shortens a closed tour, or None."""
    seq = list(order[:-1])
    n = len(seq)
    for i in range(n - 1):
        for j in range(i + 2, n if i > 0 else n - 1):
            a, b, c, e = seq[i], seq[i + 1], seq[j], seq[(j + 1) % n]
            if dist[a][c] + dist[b][e] < dist[a][b] + dist[c][e] - 1e-7:
                return i, j
    return None
