import pytest

from coroute import setcover
from coroute.routing_core import tour_length
from coroute.ugv_planner import (
    ProtocolViolation, UgvRoute, Waypoint, apply_rendezvous, arrival_at_next_stop, drive_to,
    driving_time, plan_spatial, waiting_time,
)

from oracles import tsp_by_enumeration
from toys import toy


def test_depot_only_tour():
    s = toy([(10, 10)])
    order = plan_spatial(setcover.RefuelPlan((0,), {}), s)
    assert order == (0, 0) and tour_length(order, s.matrix.dist) == 0


def test_three_stop_order_is_shortest():
    s = toy([(5000, 9000), (12000, 1000), (9000, 14000), (300, 200)], depot=(100, 100))
    order = plan_spatial(setcover.RefuelPlan((0, 1, 2, 3), {}), s)
    assert tour_length(order, s.matrix.dist) == pytest.approx(
        tsp_by_enumeration((0, 1, 2, 3), 0, s.matrix.dist))


def test_arrival_after_9km():
    s = toy([(9000, 0)])
    assert arrival_at_next_stop(UgvRoute.at_depot(), 1, s) == 2000
    assert arrival_at_next_stop(UgvRoute.at_depot(), 0, s) == 0


def test_arrivals_increase():
    s = toy([(9000, 0), (9000, 4500)])
    r = drive_to(drive_to(UgvRoute.at_depot(), 1, s), 2, s)
    assert [w.arrival for w in r.waypoints] == [0, 2000, 3000]


def route_at(stop_arrival):
    return UgvRoute((Waypoint(0, 0, 0), Waypoint(4, stop_arrival, stop_arrival),
                     Waypoint(0, stop_arrival + 500, stop_arrival + 500)))


def test_rendezvous_hold():
    r = apply_rendezvous(route_at(2000), 4, uav_arrival=2300, recharge=600)
    assert r.waypoints[1].departure == 2900
    assert r.waits[0].wait == 900
    # later waypoints shift with the departure
    assert r.waypoints[2].arrival == 3400
    assert waiting_time(r) == 900 and driving_time(r) == 2500


def test_rendezvous_without_wait():
    r = apply_rendezvous(route_at(2000), 4, uav_arrival=2000, recharge=0)
    assert r.waypoints[1].departure == 2000 and r.waits[0].wait == 0


def test_uav_early_is_a_protocol_violation():
    with pytest.raises(ProtocolViolation):
        apply_rendezvous(route_at(2000), 4, uav_arrival=1900, recharge=0)


def test_unknown_stop():
    with pytest.raises(KeyError):
        apply_rendezvous(route_at(2000), 7, 2500, 0)
