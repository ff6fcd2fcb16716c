import json
from importlib import resources

import jsonschema
import pytest
from hypothesis import given, settings

from conftest import plans
from voxplan.errors import DimensionViolationError, PlanParseError, UnsupportedActionError
from voxplan.grid import GridDims
from voxplan.plan import (
    ACTION_COORDINATE_FIELDS,
    Absolute,
    ColorRef,
    StepRef,
    direct_output_space_size,
    output_space_size,
    parse_plan,
    parse_plan_3d,
    serialize_plan,
    validate_plan,
)

SCHEMA = json.loads(resources.files("voxplan.data").joinpath("plan.schema.json").read_text())

TWO_STEP = ('{"actions": [{"kind": "stack", "anchor": {"x": 5, "z": 6}, "color": "red", "count": 3},'
        ' {"kind": "place", "anchor": {"x": 6, "z": 6}, "color": "red"}]}')


def test_parse_two_step_plan():
    plan = parse_plan(TWO_STEP)
    assert [a.kind for a in plan] == ["stack", "place"]
    assert plan.actions[0].anchor == Absolute(5, 6)
    assert plan.actions[0].count == 3 and plan.actions[1].count == 1


def test_anchor_forms():
    plan = parse_plan(json.dumps({"actions": [
        {"kind": "place", "anchor": {"x": 0, "z": 0}, "color": "red"},
        {"kind": "place", "anchor": {"step": "previous", "offset": "east"}, "color": "red"},
        {"kind": "place", "anchor": {"step": 0}, "color": "red"},
        {"kind": "place", "anchor": {"color": "blue", "offset": "in-front"}, "color": "red"},
    ]}))
    assert [a.anchor for a in plan] == [Absolute(0, 0), StepRef(None, "east"), StepRef(0), ColorRef("blue", "in-front")]


def test_any_y_key_is_a_dimension_violation():
    text = '{"actions": [{"kind": "place", "anchor": {"x": 1, "y": 0, "z": 1}, "color": "red"}]}'
    with pytest.raises(DimensionViolationError) as err:
        parse_plan(text)
    assert err.value.path == "$.actions[0].anchor.y"


def test_top_level_y_on_action():
    with pytest.raises(DimensionViolationError, match=r"\$\.actions\[0\]\.y"):
        parse_plan('{"actions": [{"kind": "place", "y": 2, "anchor": {"x": 1, "z": 1}, "color": "red"}]}')


def test_unsupported_action_kind():
    with pytest.raises(UnsupportedActionError, match=r"\$\.actions\[0\]\.kind"):
        parse_plan('{"actions": [{"kind": "remove", "anchor": {"x": 1, "z": 1}, "color": "red"}]}')


@pytest.mark.parametrize("action, path", [
    ({"kind": "place", "anchor": {"x": 1, "z": 1}, "color": "pink"}, "$.actions[0].color"),
    ({"kind": "stack", "anchor": {"x": 1, "z": 1}, "color": "red", "count": 0}, "$.actions[0].count"),
    ({"kind": "place", "anchor": {"x": 1, "z": 1}, "color": "red", "count": 2}, "$.actions[0].count"),
    ({"kind": "stack", "anchor": {"x": 1, "z": 1}, "color": "red", "direction": "east"}, "$.actions[0].direction"),
    ({"kind": "row", "anchor": {"x": 1, "z": 1}, "color": "red", "direction": "up"}, "$.actions[0].direction"),
    ({"kind": "place", "anchor": {"x": "1", "z": 1}, "color": "red"}, "$.actions[0].anchor.x"),
    ({"kind": "place", "anchor": {"step": -1}, "color": "red"}, "$.actions[0].anchor.step"),
    ({"kind": "place", "anchor": {"q": 1}, "color": "red"}, "$.actions[0].anchor"),
    ({"kind": "place", "color": "red"}, "$.actions[0]"),
])
def test_parse_errors_carry_json_path(action, path):
    with pytest.raises(PlanParseError) as err:
        parse_plan(json.dumps({"actions": [action]}))
    assert err.value.path == path


def test_malformed_json():
    with pytest.raises(PlanParseError, match="malformed JSON"):
        parse_plan("{actions: [")


def test_validate_plan_diagnostics():
    plan = parse_plan(json.dumps({"actions": [
        {"kind": "place", "anchor": {"step": "previous"}, "color": "red"},
        {"kind": "row", "anchor": {"x": 12, "z": 0}, "color": "red", "count": 2},
        {"kind": "place", "anchor": {"step": 5}, "color": "red"},
    ]}))
    problems = validate_plan(plan, GridDims())
    assert any("previous step" in p for p in problems)
    assert any("out of bounds" in p for p in problems)
    assert any("requires a direction" in p for p in problems)
    assert any("forward reference" in p for p in problems)


def test_action_schema_has_no_vertical_field():
    assert ACTION_COORDINATE_FIELDS == ("x", "z")
    assert output_space_size(GridDims()) == 9 * 9 * 6
    assert direct_output_space_size(GridDims()) == 9 * 5 * 9 * 6
    # same ratio holds for the larger grid: the schema removes a factor of height
    d = GridDims(11, 9, 11)
    assert direct_output_space_size(d) // output_space_size(d) == 9


def test_json_schema_rejects_y():
    doc = json.loads(TWO_STEP)
    jsonschema.validate(doc, SCHEMA)
    doc["actions"][0]["anchor"]["y"] = 0
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(doc, SCHEMA)


def test_parse_plan_3d():
    p = parse_plan_3d('{"blocks": [{"x": 1, "y": 0, "z": 1, "color": "red"}]}')
    assert p.blocks[0].y == 0
    with pytest.raises(PlanParseError, match=r"\$\.blocks\[0\]\.y"):
        parse_plan_3d('{"blocks": [{"x": 1, "z": 1, "color": "red"}]}')


@settings(max_examples=300, deadline=None)
@given(plans())
def test_serialize_round_trip(plan):
    text = serialize_plan(plan)
    assert parse_plan(text) == plan
    assert serialize_plan(parse_plan(text)) == text
    jsonschema.validate(json.loads(text), SCHEMA)
