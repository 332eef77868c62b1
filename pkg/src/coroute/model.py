"""Scenario types, random instance generation and the shared travel matrix."""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import energy
from .energy import PowerModel

# (map side in meters, number of assignment points)
SCALES = {
    "small": (16_000.0, 30),
    "medium": (25_000.0, 60),
    "large": (40_000.0, 100),
}

DEFAULT_UAV_SPEED = 10.0
DEFAULT_UGV_SPEED = 4.5
DEFAULT_COVERAGE_RADIUS = 7370.0
DEFAULT_FULL_CHARGE_S = 900.0
DEFAULT_UAV_FUEL = energy.fuel_for_radius(DEFAULT_COVERAGE_RADIUS, DEFAULT_UAV_SPEED)

MAX_GENERATION_TRIES = 1000


class ScenarioError(ValueError):
    pass


class SchemaError(ScenarioError):
    """Malformed scenario document; ``field`` names the offending key."""

    def __init__(self, field: str, msg: str):
        super().__init__(f"{field}: {msg}")
        self.field = field


@dataclass(frozen=True)
class Point:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class VehicleSpec:
    kind: str  # "UAV" or "UGV"
    speed: float
    fuel_capacity: float = math.inf
    recharge_rate: float = 0.0
    power: PowerModel = energy.DEFAULT_UAV_POWER
    coverage_fraction: float = 0.5  # stop coverage radius as a share of single-charge range

    def __post_init__(self):
        if self.speed <= 0:
            raise ScenarioError(f"{self.kind} speed must be positive")
        if self.kind == "UAV":
            if not (0 <= self.fuel_capacity < math.inf):
                raise ScenarioError("UAV fuel capacity must be finite and non-negative")
            if not 0 < self.coverage_fraction <= 0.5:
                raise ScenarioError("UAV coverage_fraction must lie in (0, 0.5]")
            if self.speed > self.power.speed_ceiling:
                raise ScenarioError(
                    f"UAV speed {self.speed} m/s above the power model ceiling"
                )

    @property
    def cruise_power(self) -> float:
        return self.power(self.speed)


def default_uav(**kw) -> VehicleSpec:
    kw.setdefault("speed", DEFAULT_UAV_SPEED)
    kw.setdefault("fuel_capacity", DEFAULT_UAV_FUEL)
    kw.setdefault("recharge_rate", kw["fuel_capacity"] / DEFAULT_FULL_CHARGE_S)
    kw.setdefault("power", energy.DEFAULT_UAV_POWER)
    return VehicleSpec("UAV", **kw)


def default_ugv(**kw) -> VehicleSpec:
    kw.setdefault("speed", DEFAULT_UGV_SPEED)
    kw.setdefault("power", energy.DEFAULT_UGV_POWER)
    return VehicleSpec("UGV", **kw)


class TravelMatrix:
    """Symmetric Euclidean distances (m) over depot + points, indexed by point id."""

    def __init__(self, coords):
        xy = np.asarray(coords, dtype=float)
        diff = xy[:, None, :] - xy[None, :, :]
        self.dist = np.sqrt((diff**2).sum(axis=-1))
        self._times: dict[float, np.ndarray] = {}

    def __len__(self):
        return len(self.dist)

    def times(self, speed: float) -> np.ndarray:
        """Integer-second leg times at ``speed``; cached per speed."""
        t = self._times.get(speed)
        if t is None:
            t = np.ceil(self.dist / speed - 1e-9).astype(np.int64)
            np.fill_diagonal(t, 0)
            self._times[speed] = t
        return t

    def travel_time(self, i: int, j: int, speed: float) -> int:
        n = len(self.dist)
        if not (0 <= i < n and 0 <= j < n):
            raise KeyError(f"unknown point id {i if not 0 <= i < n else j}")
        return seconds(self.dist[i, j], speed)


def seconds(dist: float, speed: float) -> int:
    """Travel time rounded up to whole seconds."""
    if speed <= 0:
        raise ValueError("speed must be positive")
    return int(math.ceil(dist / speed - 1e-9))


def travel_time(matrix: TravelMatrix, i: int, j: int, speed: float) -> int:
    return matrix.travel_time(i, j, speed)


@dataclass(frozen=True)
class Scenario:
    name: str
    map_extent: float
    depot: Point
    points: tuple[Point, ...]
    uav: VehicleSpec = field(default_factory=default_uav)
    ugv: VehicleSpec = field(default_factory=default_ugv)
    seed: int = 0

    @property
    def nodes(self) -> tuple[Point, ...]:
        """Depot followed by the assignment points; position == id."""
        return (self.depot,) + tuple(self.points)

    @property
    def point_ids(self) -> list[int]:
        return [p.id for p in self.points]

    @cached_property
    def matrix(self) -> TravelMatrix:
        return TravelMatrix([(p.x, p.y) for p in self.nodes])

    @property
    def coverage_radius(self) -> float:
        return energy.coverage_radius(self.uav)

    def validate(self):
        ids = [p.id for p in self.nodes]
        if ids != list(range(len(ids))) or self.depot.id != 0:
            raise ScenarioError("point ids must be dense from 0 with the depot at 0")
        for p in self.nodes:
            if not (0 <= p.x <= self.map_extent and 0 <= p.y <= self.map_extent):
                raise ScenarioError(f"point {p.id} lies outside the map")
        return self


def farthest_from_depot(scenario: Scenario) -> float:
    if not scenario.points:
        return 0.0
    return float(scenario.matrix.dist[0, 1:].max())


def scale_factor(scenario: Scenario) -> float:
    r = scenario.coverage_radius
    if scenario.map_extent == 0:
        return 0.0
    return scenario.map_extent**2 / (math.pi * r * r)


# --- JSON ------------------------------------------------------------------

def _power_block(model: PowerModel) -> list[float]:
    return list(model.coefficients)


def scenario_to_dict(s: Scenario) -> dict:
    d = {
        "name": s.name,
        "map_extent_m": s.map_extent,
        "seed": s.seed,
        "depot": {"x": s.depot.x, "y": s.depot.y},
        "points": [{"id": p.id, "x": p.x, "y": p.y} for p in s.points],
        "uav": {
            "speed_mps": s.uav.speed,
            "fuel_capacity_j": s.uav.fuel_capacity,
            "recharge_rate_w": s.uav.recharge_rate,
        },
        "ugv": {"speed_mps": s.ugv.speed},
    }
    if s.uav.coverage_fraction != 0.5:
        d["uav"]["coverage_fraction"] = s.uav.coverage_fraction
    pm = {}
    if s.uav.power.coefficients != energy.UAV_COEFFS:
        pm["uav"] = _power_block(s.uav.power)
    if s.ugv.power.coefficients != energy.UGV_COEFFS:
        pm["ugv"] = _power_block(s.ugv.power)
    if pm:
        d["power_model"] = pm
    return d


def _num(doc, key, path):
    if key not in doc:
        raise SchemaError(path, "missing")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(path, f"expected a number, got {type(v).__name__}")
    return v


def _obj(doc, key, path):
    if key not in doc:
        raise SchemaError(path, "missing")
    v = doc[key]
    if not isinstance(v, dict):
        raise SchemaError(path, "expected an object")
    return v


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise SchemaError("<root>", "expected an object")
    name = doc.get("name", "scenario")
    if not isinstance(name, str):
        raise SchemaError("name", "expected a string")
    extent = float(_num(doc, "map_extent_m", "map_extent_m"))
    seed = int(_num(doc, "seed", "seed")) if "seed" in doc else 0
    dep = _obj(doc, "depot", "depot")
    depot = Point(0, float(_num(dep, "x", "depot.x")), float(_num(dep, "y", "depot.y")))
    raw_pts = doc.get("points")
    if not isinstance(raw_pts, list):
        raise SchemaError("points", "expected a list")
    pts = []
    for k, p in enumerate(raw_pts):
        if not isinstance(p, dict):
            raise SchemaError(f"points[{k}]", "expected an object")
        pid = _num(p, "id", f"points[{k}].id")
        if pid != k + 1:
            raise SchemaError(f"points[{k}].id", f"expected {k + 1}, got {pid}")
        pts.append(Point(int(pid), float(_num(p, "x", f"points[{k}].x")),
                         float(_num(p, "y", f"points[{k}].y"))))

    pm = doc.get("power_model", {}) or {}
    if not isinstance(pm, dict):
        raise SchemaError("power_model", "expected an object")
    uav_power = energy.DEFAULT_UAV_POWER
    ugv_power = energy.DEFAULT_UGV_POWER
    for key in pm:
        coeffs = pm[key]
        if key not in ("uav", "ugv"):
            raise SchemaError(f"power_model.{key}", "unknown vehicle")
        if not isinstance(coeffs, list) or not all(
            isinstance(c, (int, float)) and not isinstance(c, bool) for c in coeffs
        ):
            raise SchemaError(f"power_model.{key}", "expected a list of numbers")
        if key == "uav":
            uav_power = PowerModel("UAV_cubic", tuple(float(c) for c in coeffs),
                                   energy.UAV_SPEED_CEILING)
        else:
            ugv_power = PowerModel("UGV_affine", tuple(float(c) for c in coeffs))

    u = _obj(doc, "uav", "uav")
    g = _obj(doc, "ugv", "ugv")
    try:
        uav = VehicleSpec(
            "UAV",
            speed=float(_num(u, "speed_mps", "uav.speed_mps")),
            fuel_capacity=float(_num(u, "fuel_capacity_j", "uav.fuel_capacity_j")),
            recharge_rate=float(_num(u, "recharge_rate_w", "uav.recharge_rate_w")),
            power=uav_power,
            coverage_fraction=float(_num(u, "coverage_fraction", "uav.coverage_fraction"))
            if "coverage_fraction" in u else 0.5,
        )
        ugv = VehicleSpec("UGV", speed=float(_num(g, "speed_mps", "ugv.speed_mps")),
                          power=ugv_power)
    except SchemaError:
        raise
    except ScenarioError as exc:
        raise SchemaError("uav" if "UAV" in str(exc) else "ugv", str(exc)) from None
    return Scenario(name, extent, depot, tuple(pts), uav, ugv, seed).validate()


def dump_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2, sort_keys=False) + "\n"


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("<root>", f"invalid JSON: {exc}") from None
    return scenario_from_dict(doc)


# --- overrides -------------------------------------------------------------

def parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc: dict, overrides: dict | None) -> dict:
    """Set dotted ``key.sub=value`` paths inside a scenario document."""
    out = copy.deepcopy(doc)
    for key, value in (overrides or {}).items():
        parts = key.split(".")
        node = out
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise SchemaError(key, "path does not name an object")
        node[parts[-1]] = value
    return out


# --- generation ------------------------------------------------------------

def generate_scenario(scale: str, seed: int, overrides: dict | None = None) -> Scenario:
    """Draw a random instance at one of the named scales.

    Points and depot are uniform on the square map.  Draws are repeated until
    the farthest point lies outside the UAV coverage radius, so at least one
    refuel stop away from the depot is always needed.  ``overrides`` may carry
    ``n_points`` plus any dotted scenario-JSON path (``uav.speed_mps``...).
    """
    if scale not in SCALES:
        raise ScenarioError(f"unknown scale {scale!r}; choose from {sorted(SCALES)}")
    overrides = dict(overrides or {})
    extent, n = SCALES[scale]
    n = int(overrides.pop("n_points", n))

    base = {
        "name": f"{scale}-{seed}",
        "map_extent_m": extent,
        "seed": seed,
        "uav": {"speed_mps": DEFAULT_UAV_SPEED, "fuel_capacity_j": DEFAULT_UAV_FUEL},
        "ugv": {"speed_mps": DEFAULT_UGV_SPEED},
    }
    params = apply_overrides(base, overrides)
    uav_doc = params["uav"]
    uav_doc.setdefault("recharge_rate_w", uav_doc["fuel_capacity_j"] / DEFAULT_FULL_CHARGE_S)
    extent = float(params["map_extent_m"])

    rng = np.random.default_rng(seed)
    for _ in range(MAX_GENERATION_TRIES):
        xy = np.round(rng.uniform(0.0, extent, size=(n + 1, 2)), 2)
        doc = dict(params)
        doc["depot"] = {"x": float(xy[0, 0]), "y": float(xy[0, 1])}
        doc["points"] = [
            {"id": k, "x": float(xy[k, 0]), "y": float(xy[k, 1])} for k in range(1, n + 1)
        ]
        s = scenario_from_dict(doc)
        if farthest_from_depot(s) > s.coverage_radius:
            return s
    raise ScenarioError(
        f"no scenario with a point beyond the UAV coverage radius after "
        f"{MAX_GENERATION_TRIES} draws; check map extent against UAV range"
    )
