"""Deterministic plan interpreter.

Every block lands at its column's lowest free level. Relative anchors are
resolved against the positions of earlier actions (chained context) or
against colored structures already on the grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import AnchorError, BoundsError, ColumnFullError, ExecutionError
from .grid import BlockPlacement, Color, Grid, place_block, validate_grid, y_star
from .plan import Absolute, ColorRef, Plan, Plan3D, PlanAction, StepRef, step, DIRECTIONS

SKIP_FORWARD = "skip-forward"


@dataclass
class ExecContext:
    last_position: tuple[int, int] | None = None
    step_positions: list[tuple[int, int]] = field(default_factory=list)

    def copy(self) -> ExecContext:
        return ExecContext(self.last_position, list(self.step_positions))


@dataclass(frozen=True)
class ActionTrace:
    index: int
    kind: str
    resolved: tuple[int, int]
    start: tuple[int, int]
    placements: tuple[BlockPlacement, ...]
    rules: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "resolved_anchor": list(self.resolved),
            "start": list(self.start),
            "placements": [p.to_dict() for p in self.placements],
            "rules": list(self.rules),
        }


@dataclass(frozen=True)
class ExecTrace:
    actions: tuple[ActionTrace, ...] = ()

    def placements(self) -> list[BlockPlacement]:
        return [p for a in self.actions for p in a.placements]

    def fired(self, rule: str) -> list[int]:
        return [a.index for a in self.actions if rule in a.rules]

    def to_dict(self) -> dict:
        return {"actions": [a.to_dict() for a in self.actions]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _offset(cell: tuple[int, int], offset: str | None) -> tuple[int, int]:
    return step(cell, offset) if offset else cell


def _color_columns(grid: Grid, color: Color, ground_only: bool = False) -> list[tuple[int, int]]:
    cols = {(x, z) for (x, y, z), c in grid.cells.items() if c == color and (y == 0 or not ground_only)}
    return sorted(cols)


def far_endpoint(grid: Grid, color: Color, direction: str) -> tuple[int, int]:
    """Column of `color` furthest along `direction` (ground blocks preferred)."""
    cols = _color_columns(grid, color, ground_only=True) or _color_columns(grid, color)
    if not cols:
        raise AnchorError(f"no {color} structure on the grid")
    dx, dz = DIRECTIONS[direction]
    return max(cols, key=lambda c: (c[0] * dx + c[1] * dz, -c[0], -c[1]))


def resolve_anchor(action: PlanAction, ctx: ExecContext, grid: Grid) -> tuple[int, int]:
    """Turn an action's anchor into a concrete column.

    Color references pick the block of that color nearest to the most recent
    placement (Manhattan distance, ties by (x, z)); with no placement yet the
    lexicographically first column wins. Extends anchored by color start at the
    structure's far end along their direction instead.
    """
    a = action.anchor
    if isinstance(a, Absolute):
        return (a.x, a.z)
    if isinstance(a, StepRef):
        if a.index is None:
            if not ctx.step_positions:
                raise AnchorError("no previous step to reference")
            base = ctx.step_positions[-1]
        else:
            if a.index >= len(ctx.step_positions):
                raise AnchorError(f"step {a.index} has not been executed")
            base = ctx.step_positions[a.index]
        return _offset(base, a.offset)
    if isinstance(a, ColorRef):
        if action.kind == "extend" and action.direction is not None:
            return _offset(far_endpoint(grid, a.color, action.direction), a.offset)
        cols = _color_columns(grid, a.color)
        if not cols:
            raise AnchorError(f"no {a.color} block on the grid")
        if ctx.last_position is None:
            base = cols[0]
        else:
            lx, lz = ctx.last_position
            base = min(cols, key=lambda c: (abs(c[0] - lx) + abs(c[1] - lz), c))
        return _offset(base, a.offset)
    raise TypeError(f"unknown anchor {a!r}")


def apply_skip_forward(action: PlanAction, start_cell: tuple[int, int], grid: Grid) -> tuple[int, int]:
    """Advance an extend one step when its start column's ground block has the same color.

    Applied once; a second same-color block further on is not skipped.
    """
    if action.kind != "extend":
        raise ValueError("skip-forward applies to extend actions only")
    x, z = start_cell
    if grid.get((x, 0, z)) != action.color:
        return start_cell
    nxt = step(start_cell, action.direction)
    if not grid.dims.contains_column(*nxt):
        raise ExecutionError(f"skip-forward from {start_cell} leaves the grid at {nxt}")
    return nxt


def _action_columns(action: PlanAction, start: tuple[int, int]) -> list[tuple[int, int]]:
    if action.kind == "place":
        return [start]
    if action.kind == "stack":
        return [start] * action.count
    return [step(start, action.direction, k) for k in range(action.count)]


def execute(
    plan: Plan,
    start: Grid,
    ctx: ExecContext | None = None,
    skip_forward: bool = True,
) -> tuple[Grid, ExecTrace]:
    """Run every action in order; any failure aborts the whole plan."""
    grid, trace, _ = execute_with_context(plan, start, ctx, skip_forward)
    return grid, trace


def execute_with_context(
    plan: Plan,
    start: Grid,
    ctx: ExecContext | None = None,
    skip_forward: bool = True,
) -> tuple[Grid, ExecTrace, ExecContext]:
    ctx = ctx.copy() if ctx is not None else ExecContext()
    grid = start
    records = []
    for i, act in enumerate(plan.actions):
        if act.kind in ("row", "extend") and act.direction is None:
            raise ExecutionError(f"{act.kind} has no direction", i)
        try:
            resolved = resolve_anchor(act, ctx, grid)
        except AnchorError as exc:
            raise AnchorError(str(exc), i) from None
        begin = resolved
        rules = ()
        if act.kind == "extend" and skip_forward:
            try:
                begin = apply_skip_forward(act, resolved, grid)
            except ExecutionError as exc:
                raise ExecutionError(str(exc), i) from None
            if begin != resolved:
                rules = (SKIP_FORWARD,)
        placed = []
        for col in _action_columns(act, begin):
            if not grid.dims.contains_column(*col):
                raise ExecutionError(f"column {col} is outside the grid", i)
            try:
                y = y_star(grid, *col)
                grid = place_block(grid, col[0], col[1], act.color)
            except (ColumnFullError, BoundsError) as exc:
                raise ExecutionError(str(exc), i) from None
            placed.append(BlockPlacement(col[0], y, col[1], act.color))
            ctx.last_position = col
        ctx.step_positions.append(ctx.last_position if placed else resolved)
        records.append(ActionTrace(i, act.kind, resolved, begin, tuple(placed), rules))
    return grid, ExecTrace(tuple(records)), ctx


def execute_3d(plan: Plan3D, start: Grid) -> tuple[Grid, ExecTrace]:
    """Place explicit (x, y, z) blocks as given, then insist on gravity."""
    cells = dict(start.cells)
    records = []
    for i, blk in enumerate(plan.blocks):
        if not start.dims.contains(blk.x, blk.y, blk.z):
            raise ExecutionError(f"block ({blk.x},{blk.y},{blk.z}) is out of bounds", i)
        if blk.cell in cells:
            raise ExecutionError(f"cell ({blk.x},{blk.y},{blk.z}) is already occupied", i)
        cells[blk.cell] = blk.color
        records.append(ActionTrace(i, "block", (blk.x, blk.z), (blk.x, blk.z), (blk,)))
    grid = Grid(start.dims, cells)
    problems = validate_grid(grid)
    if problems:
        raise ExecutionError("; ".join(problems))
    return grid, ExecTrace(tuple(records))


def lower_to_3d(plan: Plan, start: Grid, skip_forward: bool = True) -> Plan3D:
    """The direct-3D plan that reproduces what `plan` builds on `start`."""
    _, trace = execute(plan, start, skip_forward=skip_forward)
    return Plan3D(tuple(trace.placements()))
