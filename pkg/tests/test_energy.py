import math

import pytest
from hypothesis import given, strategies as st

from coroute import energy, model
from coroute.energy import FuelExhausted, FuelState, drain


@pytest.mark.parametrize("v,expected", [(0, 229.6), (10, 198.599), (5, 211.397)])
def test_uav_power(v, expected):
    assert energy.uav_power(v) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("v,expected", [(0, 356.3), (4.5, 2447.9), (1, 821.1)])
def test_ugv_power(v, expected):
    assert energy.ugv_power(v) == pytest.approx(expected, abs=1e-9)


def test_uav_power_rejects_speeds_outside_fit():
    with pytest.raises(ValueError):
        energy.uav_power(-1)
    with pytest.raises(ValueError):
        energy.uav_power(energy.UAV_SPEED_CEILING + 1)


def test_drain_linear():
    assert drain(FuelState(1000), 2, 100).remaining == 800
    assert drain(FuelState(1000), 0, 12345).remaining == 1000
    with pytest.raises(FuelExhausted):
        drain(FuelState(100), 2, 100)


def test_drain_to_exactly_empty_is_allowed():
    assert drain(FuelState(200), 2, 100).remaining == 0


@given(st.floats(0, 1e6), st.floats(0, 1e4), st.floats(0, 1e3))
def test_drain_never_goes_negative(f0, t, p):
    try:
        left = drain(FuelState(f0), t, p).remaining
    except FuelExhausted:
        assert f0 - p * t < 0
    else:
        assert 0 <= left <= f0


def test_default_radius_is_7_37_km():
    uav = model.default_uav()
    assert energy.flight_range(uav) == pytest.approx(14740.0)
    assert energy.coverage_radius(uav) == pytest.approx(7370.0)


def test_zero_tank_has_zero_radius():
    uav = model.default_uav(fuel_capacity=0.0, recharge_rate=1.0)
    assert energy.coverage_radius(uav) == 0.0


def test_recharge_durations():
    uav = model.default_uav()
    F = uav.fuel_capacity
    assert energy.recharge_duration(FuelState(F), uav) == 0
    assert energy.recharge_duration(FuelState(0.0), uav) == 900
    assert energy.recharge_duration(FuelState(F / 2), uav) == 450


@given(st.floats(0, 1))
def test_recharge_monotone_in_deficit(frac):
    uav = model.default_uav()
    a = energy.recharge_duration(FuelState(uav.fuel_capacity * frac), uav)
    b = energy.recharge_duration(FuelState(0.0), uav)
    assert 0 <= a <= b == 900


def test_fuel_for_radius_inverts_coverage():
    F = energy.fuel_for_radius(7370.0, 10.0)
    assert F == pytest.approx(2 * 7370 * 198.599 / 10)
    assert math.isclose(F, 292734.926, rel_tol=1e-9)
