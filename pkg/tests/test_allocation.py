import pytest
from hypothesis import given, settings, strategies as st

from coroute import energy, model, setcover
from coroute.allocation import Subproblem, allocate, cheapest_insertion, overflow_fallback
from coroute.evrptw import EvrptwInstance, Infeasible, solve

from toys import toy


def clusters():
    # depot cluster, then stop 4 and stop 7 each holding a far cluster
    pts = [(1500, 1000), (1000, 1500), (600, 600),
           (15000, 1000), (15500, 1200), (14600, 800),
           (15000, 15000), (15400, 15300), (14700, 14800)]
    return toy(pts, depot=(1000, 1000), extent=16000)


def test_two_stop_split():
    s = clusters()
    plan = setcover.RefuelPlan((0, 4, 7), {})
    sps = allocate(plan, (0, 4, 7, 0), s)
    assert [(sp.origin, sp.destination) for sp in sps] == [(0, 4), (4, 7), (7, 0)]
    assert set(sps[0].uav_points) == {1, 2, 3, 5, 6}
    assert set(sps[1].uav_points) == {8, 9}
    assert sps[2].uav_points == ()


def test_depot_only():
    s = toy([(100, 0), (0, 100)], extent=16000)
    sps = allocate(setcover.RefuelPlan((0,), {}), (0, 0), s)
    assert len(sps) == 1
    assert (sps[0].origin, sps[0].destination, sps[0].uav_points) == (0, 0, (1, 2))


def test_point_covered_twice_goes_to_earlier_stop():
    s = toy([(8000, 0), (16000, 0), (12000, 0)], extent=17000)
    sps = allocate(setcover.RefuelPlan((0, 1, 2), {}), (0, 1, 2, 0), s)
    owner = [sp.index for sp in sps if 3 in sp.uav_points]
    assert owner == [1]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_allocation_is_a_partition(seed):
    s = model.generate_scenario("small", seed % 50)
    inst = setcover.build_cover_instance(s)
    plan = setcover.greedy_cover(inst)
    order = (0,) + tuple(plan.stops[1:]) + (0,)
    sps = allocate(plan, order, s)
    got = sorted(p for sp in sps for p in sp.uav_points)
    assert got == sorted(set(s.point_ids) - set(plan.stops))


def feasible_under(s):
    times = s.matrix.times(s.uav.speed)

    def check(sp):
        inst = EvrptwInstance(sp.origin, sp.destination, sp.uav_points, times,
                              s.uav.cruise_power, s.uav.fuel_capacity)
        try:
            solve(inst)
        except Infeasible:
            return False
        return True
    return check


def test_feasible_subproblem_untouched():
    s = toy([(10000, 0), (5000, 500)], extent=16000)
    sp = Subproblem(1, 0, 1, (2,))
    assert overflow_fallback(sp, s, feasible_under(s)) == (sp, [], [])


def test_far_point_moves_to_ugv_leg():
    s = toy([(10000, 0), (5000, 500), (5000, 7000)], extent=16000)
    sp = Subproblem(1, 0, 1, (2, 3))
    cur, to_ugv, spilled = overflow_fallback(sp, s, feasible_under(s))
    assert to_ugv == [3] and spilled == []
    assert cur.uav_points == (2,) and cur.ugv_detours == (3,)


def test_everything_moved_leaves_direct_flight():
    s = toy([(10000, 0), (5000, 7000), (4000, 7000)], extent=16000)
    never = lambda sp: not sp.uav_points
    cur, to_ugv, _ = overflow_fallback(Subproblem(1, 0, 1, (2, 3)), s, never)
    assert cur.uav_points == () and sorted(to_ugv) == [2, 3]
    assert set(cur.ugv_detours) == {2, 3}


def test_spilled_points_skip_the_ugv():
    s = toy([(10000, 0), (5000, 7000)], extent=16000)
    cur, to_ugv, spilled = overflow_fallback(
        Subproblem(1, 0, 1, (2,)), s, lambda sp: not sp.uav_points, spill=lambda p: True)
    assert spilled == [2] and to_ugv == [] and cur.ugv_detours == ()


def test_cheapest_insertion_position():
    d = [[0, 1, 5, 2], [1, 0, 4, 1], [5, 4, 0, 3], [2, 1, 3, 0]]
    assert cheapest_insertion([0, 2], 1, d) == [0, 1, 2]
    assert cheapest_insertion([0, 1, 2], 3, d) == [0, 1, 3, 2]
