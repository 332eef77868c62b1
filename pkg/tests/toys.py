"""Small hand-placed scenarios."""
from __future__ import annotations

from coroute import energy, model


def toy(points, depot=(0.0, 0.0), extent=None, radius=7370.0, name="toy", seed=0,
        uav_speed=10.0, ugv_speed=4.5, full_charge_s=900.0):
    fuel = energy.fuel_for_radius(radius, uav_speed)
    if extent is None:
        extent = max([depot[0], depot[1]] + [c for p in points for c in p]) + 1.0
    doc = {
        "name": name,
        "map_extent_m": extent,
        "seed": seed,
        "depot": {"x": depot[0], "y": depot[1]},
        "points": [{"id": k + 1, "x": x, "y": y} for k, (x, y) in enumerate(points)],
        "uav": {"speed_mps": uav_speed, "fuel_capacity_j": fuel,
                "recharge_rate_w": fuel / full_charge_s},
        "ugv": {"speed_mps": ugv_speed},
    }
    return model.scenario_from_dict(doc)
