"""Power draw, fuel bookkeeping and derived ranges for the UAV and UGV.

All quantities are SI: speeds in m/s, power in W, energy in J, time in s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

UAV_COEFFS = (0.0461, -0.5834, -1.8761, 229.6)
UGV_COEFFS = (464.8, 356.3)
UAV_SPEED_CEILING = 20.0


class FuelExhausted(ValueError):
    """Raised when a leg would drive the UAV tank below zero."""


@dataclass(frozen=True)
class PowerModel:
    """Polynomial power curve, coefficients ordered highest degree first.

    ``kind`` is ``"UAV_cubic"`` or ``"UGV_affine"``.
    """

    kind: str
    coefficients: tuple[float, ...]
    speed_ceiling: float = math.inf

    def __call__(self, v: float) -> float:
        if v < 0 or v > self.speed_ceiling:
            raise ValueError(
                f"speed {v} m/s outside validated range [0, {self.speed_ceiling}] for {self.kind}"
            )
        p = 0.0
        for c in self.coefficients:
            p = p * v + c
        return p


DEFAULT_UAV_POWER = PowerModel("UAV_cubic", UAV_COEFFS, UAV_SPEED_CEILING)
DEFAULT_UGV_POWER = PowerModel("UGV_affine", UGV_COEFFS)


def uav_power(v: float, model: PowerModel = DEFAULT_UAV_POWER) -> float:
    return model(v)


def ugv_power(v: float, model: PowerModel = DEFAULT_UGV_POWER) -> float:
    return model(v)


@dataclass(frozen=True)
class FuelState:
    remaining: float

    def __post_init__(self):
        if self.remaining < 0:
            raise FuelExhausted(f"negative fuel {self.remaining} J")


def drain(fuel: FuelState, duration: float, power: float) -> FuelState:
    """Burn ``power`` watts for ``duration`` seconds.

    Underflow raises FuelExhausted instead of clamping so that callers can
    tell an infeasible leg from an empty tank.
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    left = fuel.remaining - power * duration
    if left < 0:
        raise FuelExhausted(
            f"leg needs {power * duration:.3f} J but only {fuel.remaining:.3f} J remain"
        )
    return FuelState(left)


def flight_range(uav) -> float:
    """Distance covered on one full charge at cruise speed, in meters."""
    p = uav.power(uav.speed)
    return uav.fuel_capacity * uav.speed / p


def coverage_radius(uav) -> float:
    # default fraction 0.5: any point inside admits a round trip
    return getattr(uav, "coverage_fraction", 0.5) * flight_range(uav)


def fuel_for_radius(radius: float, speed: float, model: PowerModel = DEFAULT_UAV_POWER,
                    fraction: float = 0.5) -> float:
    """Inverse of coverage_radius: tank size in J giving ``radius`` meters."""
    return radius * model(speed) / (fraction * speed)


def recharge_duration(fuel: FuelState, uav) -> int:
    if uav.recharge_rate <= 0:
        raise ValueError("recharge_rate must be positive")
    deficit = max(uav.fuel_capacity - fuel.remaining, 0.0)
    # guard against 900.0000000001 turning into 901
    return int(math.ceil(deficit / uav.recharge_rate - 1e-9))
