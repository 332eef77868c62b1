import dataclasses
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coroute import energy
from coroute.evrptw import (
    EvrptwInstance, Infeasible, build_sortie, solve, solve_exact, solve_heuristic, validate_sortie,
)

from oracles import sortie_by_enumeration

P = energy.uav_power(10.0)


def times_for(xy, speed=10.0):
    xy = np.asarray(xy, dtype=float)
    d = np.hypot(*(xy[:, None, :] - xy[None, :, :]).transpose(2, 0, 1))
    return np.ceil(d / speed - 1e-9).astype(np.int64)


def line_instance(fuel_s=950, **kw):
    t = times_for([(0, 0), (3000, 0), (6000, 0), (9000, 0)])
    return EvrptwInstance(0, 3, (1, 2), t, P, P * fuel_s, **kw)


def random_instance(seed, k, fuel_scale=None, window=False):
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0, 8000, size=(k + 2, 2))
    t = times_for(xy)
    fuel_s = fuel_scale if fuel_scale is not None else int(rng.integers(1500, 4000))
    kw = {}
    if window:
        kw = dict(earliest_departure=int(rng.integers(0, 500)), window_open=int(rng.integers(0, 4000)))
    return EvrptwInstance(0, k + 1, tuple(range(1, k + 1)), t, P, P * fuel_s, **kw)


def test_direct_leg():
    t = times_for([(0, 0), (6000, 0)])
    s = solve_exact(EvrptwInstance(0, 1, (), t, P, energy.fuel_for_radius(7370, 10)))
    assert s.duration == 600 and s.order == (0, 1)
    assert s.fuel_at_D == pytest.approx(energy.fuel_for_radius(7370, 10) - P * 600)
    assert solve_heuristic(EvrptwInstance(0, 1, (), t, P, 1e6)).order == (0, 1)


def test_two_visits_match_better_permutation():
    t = times_for([(0, 0), (4000, 3000), (1000, 2000), (6000, 0)])
    inst = EvrptwInstance(0, 3, (1, 2), t, P, 1e7)
    costs = {p: sum(int(t[a][b]) for a, b in zip((0,) + p + (3,), p + (3,)))
             for p in itertools.permutations((1, 2))}
    best = min(costs, key=lambda p: (costs[p], p))
    assert solve_exact(inst).order == (0,) + best + (3,)


def test_over_budget_in_every_order():
    with pytest.raises(Infeasible):
        solve_exact(line_instance(fuel_s=899))
    with pytest.raises(Infeasible):
        solve_heuristic(line_instance(fuel_s=899))


def test_late_window_delays_departure():
    s = solve_exact(line_instance(window_open=2000, earliest_departure=100))
    assert s.departure == 1100 and s.arrival_at_D == 2000
    assert s.delay == 1000 and s.objective == 1900


def test_window_closed_before_release():
    with pytest.raises(Infeasible):
        solve_exact(line_instance(window_open=0, window_close=500))


def test_swap_breaks_fuel_at_named_node():
    inst = line_instance()
    good = solve_exact(inst)
    assert validate_sortie(good, inst).ok
    bad = build_sortie(inst, (0, 2, 1, 3))
    v = validate_sortie(bad, inst)
    assert not v.ok and v.violation == "fuel" and v.node == 3


def test_early_arrival_without_delay_breaks_window():
    inst = line_instance(window_open=2000)
    s = build_sortie(line_instance(), (0, 1, 2, 3))  # no window: departs at 0
    v = validate_sortie(s, inst)
    assert v.violation == "window"


def test_missing_visit_flagged():
    inst = line_instance()
    s = build_sortie(inst, (0, 1, 3))
    assert validate_sortie(s, inst).violation == "flow-conservation"


def test_tampered_arrival_flagged():
    inst = line_instance()
    s = dataclasses.replace(solve_exact(inst), arrival_at_D=10)
    assert validate_sortie(s, inst).violation == "time-propagation"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 6), st.booleans())
def test_exact_matches_enumeration(seed, k, window):
    inst = random_instance(seed, k, window=window)
    ref = sortie_by_enumeration(inst)
    if ref is None:
        with pytest.raises(Infeasible):
            solve_exact(inst)
        return
    s = solve_exact(inst)
    assert s.objective == ref
    v = validate_sortie(s, inst)
    assert v.ok, v
    assert 0 <= s.recharge_need(inst.fuel_capacity) <= inst.fuel_capacity + 1e-6


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 6), st.integers(0, 3000))
def test_widening_window_never_hurts(seed, k, extra):
    base = random_instance(seed, k, fuel_scale=10**6)
    tight = dataclasses.replace(base, window_close=base.window_open + 2500)
    wide = dataclasses.replace(tight, window_close=tight.window_close + extra)
    try:
        a = solve_exact(tight).objective
    except Infeasible:
        return
    assert solve_exact(wide).objective <= a
    opened = solve_exact(dataclasses.replace(base, window_open=0))
    assert opened.objective <= a


def test_heuristic_deterministic_and_valid():
    inst = random_instance(11, 14, fuel_scale=10**6)
    a, b = solve_heuristic(inst, seed=4), solve_heuristic(inst, seed=4)
    assert a == b and validate_sortie(a, inst).ok
    assert solve(inst, seed=4) == a  # above the exact limit


def test_heuristic_close_to_exact():
    within = 0
    for seed in range(50):
        inst = random_instance(seed, 8, fuel_scale=10**6)
        ex, h = solve_exact(inst), solve_heuristic(inst, seed=seed)
        assert h.objective >= ex.objective
        within += h.objective <= 1.05 * ex.objective
    assert within == 50
