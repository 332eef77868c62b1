import json

import numpy as np
import pytest

from coroute import model
from coroute.model import SchemaError

from toys import toy


def test_small_scenario_shape():
    s = model.generate_scenario("small", 1)
    assert len(s.points) == 30
    assert s.map_extent == 16000
    assert all(0 <= p.x <= 16000 and 0 <= p.y <= 16000 for p in s.nodes)


def test_generation_is_deterministic():
    a = model.dump_scenario(model.generate_scenario("small", 1))
    b = model.dump_scenario(model.generate_scenario("small", 1))
    assert a == b
    assert a != model.dump_scenario(model.generate_scenario("small", 2))


@pytest.mark.parametrize("scale", list(model.SCALES))
def test_farthest_point_needs_a_refuel_stop(scale):
    s = model.generate_scenario(scale, 3)
    xs = np.array([[p.x, p.y] for p in s.points])
    far = np.hypot(xs[:, 0] - s.depot.x, xs[:, 1] - s.depot.y).max()
    assert far > s.coverage_radius


def test_unknown_scale():
    with pytest.raises(model.ScenarioError):
        model.generate_scenario("huge", 0)


def test_overrides_reach_the_scenario():
    s = model.generate_scenario("small", 0, {"n_points": 5, "ugv.speed_mps": 3.0})
    assert len(s.points) == 5 and s.ugv.speed == 3.0


def test_travel_time_rounds_up_to_seconds():
    s = toy([(9000.0, 0.0)])
    assert model.travel_time(s.matrix, 0, 1, 10.0) == 900
    assert model.travel_time(s.matrix, 0, 1, 4.5) == 2000
    assert model.travel_time(s.matrix, 1, 1, 4.5) == 0
    assert model.seconds(10.01, 10.0) == 2


def test_travel_time_unknown_id():
    s = toy([(1.0, 1.0)])
    with pytest.raises(KeyError):
        s.matrix.travel_time(0, 7, 10.0)


def test_scale_factor_matches_small_scale():
    s = model.generate_scenario("small", 0)
    assert model.scale_factor(s) == pytest.approx(1.5, abs=0.01)
    large = model.generate_scenario("large", 0)
    assert model.scale_factor(large) == pytest.approx(9.38, abs=0.01)


def test_scale_factor_of_empty_map():
    s = model.Scenario("z", 0.0, model.Point(0, 0, 0), ())
    assert model.scale_factor(s) == 0


def test_json_round_trip():
    s = model.generate_scenario("small", 4)
    text = model.dump_scenario(s)
    back = model.scenario_from_dict(json.loads(text))
    assert model.dump_scenario(back) == text


@pytest.mark.parametrize("mutate,field", [
    (lambda d: d["points"][3].__setitem__("x", "east"), "points[3].x"),
    (lambda d: d["points"][0].__setitem__("id", 9), "points[0].id"),
    (lambda d: d.pop("depot"), "depot"),
    (lambda d: d["uav"].pop("speed_mps"), "uav.speed_mps"),
])
def test_schema_errors_name_the_field(mutate, field):
    doc = model.scenario_to_dict(model.generate_scenario("small", 0))
    mutate(doc)
    with pytest.raises(SchemaError) as err:
        model.scenario_from_dict(doc)
    assert err.value.field == field


def test_invalid_json_file(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(SchemaError):
        model.load_scenario(p)
