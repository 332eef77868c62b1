import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coroute.routing_core import (
    TourInstance, improving_two_opt_move, solve_tsp_exact, solve_tsp_heuristic, tour_length,
)

from oracles import tsp_by_enumeration


def euclid(xy):
    xy = np.asarray(xy, dtype=float)
    return np.hypot(*(xy[:, None, :] - xy[None, :, :]).transpose(2, 0, 1))


def random_instance(seed, n):
    rng = np.random.default_rng(seed)
    d = euclid(rng.uniform(0, 1000, size=(n, 2)))
    return TourInstance(tuple(range(n)), 0, d)


def test_single_node():
    t = solve_tsp_exact(TourInstance((0,), 0, np.zeros((1, 1))))
    assert t.order == (0, 0) and t.length == 0


def test_unit_square():
    d = euclid([(0, 0), (1, 0), (1, 1), (0, 1)])
    t = solve_tsp_exact(TourInstance((0, 1, 2, 3), 0, d))
    assert t.length == pytest.approx(4.0)
    assert t.order == (0, 1, 2, 3, 0)


def test_subset_of_ids():
    d = euclid([(0, 0), (5, 5), (1, 0), (9, 9), (1, 1)])
    t = solve_tsp_exact(TourInstance((0, 2, 4), 0, d))
    assert set(t.order) == {0, 2, 4}
    assert t.order[0] == t.order[-1] == 0


@pytest.mark.parametrize("seed", range(10))
def test_exact_eight_nodes_against_enumeration(seed):
    inst = random_instance(seed, 8)
    assert solve_tsp_exact(inst).length == pytest.approx(
        tsp_by_enumeration(inst.nodes, 0, inst.dist), abs=1e-6)


def test_collinear_out_and_back():
    d = euclid([(0, 0), (3, 0), (1, 0), (2, 0), (-1, 0)])
    inst = TourInstance(tuple(range(5)), 0, d)
    assert solve_tsp_heuristic(inst, seed=1).length == pytest.approx(8.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 12))
def test_heuristic_close_to_exact(seed, n):
    inst = random_instance(seed, n)
    ex = solve_tsp_exact(inst).length
    h = solve_tsp_heuristic(inst, seed=seed)
    assert ex - 1e-6 <= h.length <= 1.10 * ex + 1e-6
    assert h.length == pytest.approx(tour_length(h.order, inst.dist))
    assert sorted(h.order[:-1]) == list(range(n))


def test_heuristic_is_deterministic_and_two_opt_optimal():
    inst = random_instance(3, 60)
    a, b = solve_tsp_heuristic(inst, seed=9), solve_tsp_heuristic(inst, seed=9)
    assert a == b
    assert improving_two_opt_move(a.order, inst.dist) is None
