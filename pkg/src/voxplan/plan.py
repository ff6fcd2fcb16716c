"""Two-dimensional plan language.

A plan is an ordered list of typed actions. Actions carry horizontal
positions only; the executor derives every vertical level from column
occupancy, so the order of actions is what encodes height.

Wire format::

    {"actions": [
        {"kind": "stack", "anchor": {"x": 5, "z": 6}, "color": "red", "count": 3},
        {"kind": "extend", "anchor": {"color": "green"}, "color": "green",
         "count": 2, "direction": "east"},
        {"kind": "place", "anchor": {"step": "previous", "offset": "in-front"},
         "color": "blue", "count": 1}
    ]}

The direct-3D variant used by the ablation path is a separate schema,
``{"blocks": [{"x": .., "y": .., "z": .., "color": ..}, ...]}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

from .errors import ColorError, DimensionViolationError, PlanParseError, UnsupportedActionError
from .grid import BlockPlacement, Color, GridDims

ACTION_KINDS = ("place", "stack", "row", "extend")
DIRECTIONAL_KINDS = ("row", "extend")

# in-front is z+1 and behind z-1; north/south share those axes.
DIRECTIONS: dict[str, tuple[int, int]] = {
    "north": (0, -1),
    "south": (0, 1),
    "east": (1, 0),
    "west": (-1, 0),
    "in-front": (0, 1),
    "behind": (0, -1),
}

OPPOSITE = {
    "north": "south",
    "south": "north",
    "east": "west",
    "west": "east",
    "in-front": "behind",
    "behind": "in-front",
}

# Coordinate fields a planner may emit for one action.
ACTION_COORDINATE_FIELDS = ("x", "z")


def step(cell: tuple[int, int], direction: str, n: int = 1) -> tuple[int, int]:
    dx, dz = DIRECTIONS[direction]
    return (cell[0] + n * dx, cell[1] + n * dz)


def output_space_size(dims: GridDims) -> int:
    """Distinct (position, color) choices per action under the 2-D schema."""
    return dims.width * dims.depth * len(Color)


def direct_output_space_size(dims: GridDims) -> int:
    return dims.width * dims.height * dims.depth * len(Color)


@dataclass(frozen=True)
class Absolute:
    x: int
    z: int

    def to_dict(self) -> dict:
        return {"x": self.x, "z": self.z}


@dataclass(frozen=True)
class StepRef:
    """Position of a prior action's last block; ``index=None`` means the previous action."""

    index: int | None = None
    offset: str | None = None

    def to_dict(self) -> dict:
        d = {"step": "previous" if self.index is None else self.index}
        if self.offset is not None:
            d["offset"] = self.offset
        return d


@dataclass(frozen=True)
class ColorRef:
    """The structure of a given color already on the grid."""

    color: Color
    offset: str | None = None

    def to_dict(self) -> dict:
        d = {"color": self.color.value}
        if self.offset is not None:
            d["offset"] = self.offset
        return d


Anchor = Union[Absolute, StepRef, ColorRef]


@dataclass(frozen=True)
class PlanAction:
    kind: str
    anchor: Anchor
    color: Color
    count: int = 1
    direction: str | None = None

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "anchor": self.anchor.to_dict(),
            "color": self.color.value,
            "count": self.count,
        }
        if self.direction is not None:
            d["direction"] = self.direction
        return d


@dataclass(frozen=True)
class Plan:
    actions: tuple[PlanAction, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)

    def replace_action(self, index: int, action: PlanAction) -> Plan:
        acts = list(self.actions)
        acts[index] = action
        return Plan(tuple(acts))

    def to_dict(self) -> dict:
        return {"actions": [a.to_dict() for a in self.actions]}


@dataclass(frozen=True)
class Plan3D:
    """Direct-3D plan: explicit placements, executed verbatim."""

    blocks: tuple[BlockPlacement, ...] = ()

    def to_dict(self) -> dict:
        return {"blocks": [b.to_dict() for b in self.blocks]}


def _find_y(obj, path: str) -> str | None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            if k == "y":
                return f"{path}.y"
            hit = _find_y(v, f"{path}.{k}")
            if hit:
                return hit
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            hit = _find_y(v, f"{path}[{i}]")
            if hit:
                return hit
    return None


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _parse_offset(raw: dict, path: str) -> str | None:
    off = raw.get("offset")
    if off is None:
        return None
    if off not in DIRECTIONS:
        raise PlanParseError(f"unknown offset direction {off!r}", f"{path}.offset")
    return off


def _parse_color(raw, path: str) -> Color:
    try:
        return Color.parse(raw)
    except ColorError as exc:
        raise PlanParseError(str(exc), path) from None


def _parse_anchor(raw, path: str) -> Anchor:
    if not isinstance(raw, dict):
        raise PlanParseError("anchor must be an object", path)
    keys = set(raw) - {"offset"}
    if keys == {"x", "z"}:
        if "offset" in raw:
            raise PlanParseError("absolute anchors take no offset", f"{path}.offset")
        for k in ("x", "z"):
            if not _is_int(raw[k]):
                raise PlanParseError("coordinate must be an integer", f"{path}.{k}")
        return Absolute(raw["x"], raw["z"])
    if keys == {"step"}:
        s = raw["step"]
        if s == "previous":
            index = None
        elif _is_int(s) and s >= 0:
            index = s
        else:
            raise PlanParseError("step must be a non-negative integer or 'previous'", f"{path}.step")
        return StepRef(index, _parse_offset(raw, path))
    if keys == {"color"}:
        return ColorRef(_parse_color(raw["color"], f"{path}.color"), _parse_offset(raw, path))
    raise PlanParseError(
        "anchor must be {x,z}, {step[,offset]} or {color[,offset]}, got keys " + ",".join(sorted(raw)),
        path,
    )


def _parse_action(raw, path: str) -> PlanAction:
    if not isinstance(raw, dict):
        raise PlanParseError("action must be an object", path)
    kind = raw.get("kind")
    if kind not in ACTION_KINDS:
        raise UnsupportedActionError(f"unsupported action kind {kind!r}", f"{path}.kind")
    unknown = set(raw) - {"kind", "anchor", "color", "count", "direction"}
    if unknown:
        raise PlanParseError(f"unknown field(s) {', '.join(sorted(unknown))}", path)
    if "anchor" not in raw:
        raise PlanParseError("missing anchor", path)
    anchor = _parse_anchor(raw["anchor"], f"{path}.anchor")
    if "color" not in raw:
        raise PlanParseError("missing color", path)
    color = _parse_color(raw["color"], f"{path}.color")
    count = raw.get("count", 1)
    if not _is_int(count) or count < 1:
        raise PlanParseError("count must be a positive integer", f"{path}.count")
    if kind == "place" and count != 1:
        raise PlanParseError("place actions have count 1", f"{path}.count")
    direction = raw.get("direction")
    if direction is not None:
        if kind not in DIRECTIONAL_KINDS:
            raise PlanParseError(f"{kind} actions take no direction", f"{path}.direction")
        if direction not in DIRECTIONS:
            raise PlanParseError(f"unknown direction {direction!r}", f"{path}.direction")
    return PlanAction(kind, anchor, color, count, direction)


def _load(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanParseError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def plan_from_dict(doc) -> Plan:
    if not isinstance(doc, dict) or "actions" not in doc:
        raise PlanParseError("plan must be an object with an 'actions' array")
    actions = doc["actions"]
    if not isinstance(actions, list):
        raise PlanParseError("must be an array", "$.actions")
    parsed = []
    for i, raw in enumerate(actions):
        path = f"$.actions[{i}]"
        hit = _find_y(raw, path)
        if hit:
            raise DimensionViolationError("vertical coordinates are computed by the executor, not planned", hit)
        parsed.append(_parse_action(raw, path))
    return Plan(tuple(parsed))


def parse_plan(text: str) -> Plan:
    return plan_from_dict(_load(text))


def serialize_plan(plan: Plan) -> str:
    return json.dumps(plan.to_dict(), sort_keys=True, separators=(",", ":"))


def parse_plan_3d(text: str) -> Plan3D:
    doc = _load(text)
    if not isinstance(doc, dict) or not isinstance(doc.get("blocks"), list):
        raise PlanParseError("direct-3D plan must be an object with a 'blocks' array")
    blocks = []
    for i, raw in enumerate(doc["blocks"]):
        path = f"$.blocks[{i}]"
        if not isinstance(raw, dict):
            raise PlanParseError("block must be an object", path)
        for k in ("x", "y", "z"):
            if not _is_int(raw.get(k)):
                raise PlanParseError("coordinate must be an integer", f"{path}.{k}")
        blocks.append(BlockPlacement(raw["x"], raw["y"], raw["z"], _parse_color(raw.get("color"), f"{path}.color")))
    return Plan3D(tuple(blocks))


def serialize_plan_3d(plan: Plan3D) -> str:
    return json.dumps(plan.to_dict(), sort_keys=True, separators=(",", ":"))


def validate_plan(plan: Plan, dims: GridDims) -> list[str]:
    """Static diagnostics: bounds, missing directions, forward step references."""
    problems = []
    for i, act in enumerate(plan.actions):
        a = act.anchor
        if isinstance(a, Absolute) and not dims.contains_column(a.x, a.z):
            problems.append(f"action {i}: anchor ({a.x},{a.z}) out of bounds for {dims.width}x{dims.depth}")
        if act.kind in DIRECTIONAL_KINDS and act.direction is None:
            problems.append(f"action {i}: {act.kind} requires a direction")
        if isinstance(a, StepRef):
            if a.index is None and i == 0:
                problems.append(f"action {i}: references a previous step but none exists")
            elif a.index is not None and a.index >= i:
                problems.append(f"action {i}: forward reference to step {a.index}")
    return problems
