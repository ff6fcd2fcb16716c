"""Detect rows, stacks, L-shapes and T-shapes in a grid.

Rows live on the ground (y = 0) and run along x or z; stacks are vertical
runs inside one column. All primitives are single-colored. When two
perpendicular rows of one color meet, they are reported as a single L or T
instead of as separate rows.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ShapeBrokenError
from .grid import BlockPlacement, Cell, Color, Grid

KIND_ORDER = {"row": 0, "stack": 1, "l_shape": 2, "t_shape": 3}

_AXIS_DIRS = {("x", 1): "east", ("x", -1): "west", ("z", 1): "south", ("z", -1): "north"}


@dataclass(frozen=True)
class Primitive:
    kind: str
    color: Color
    cells: frozenset[Cell]
    orientation: str
    endpoints: tuple[Cell, ...]
    junction: Cell | None = None
    stem: str | None = None

    @property
    def size(self) -> int:
        return len(self.cells)

    def sort_key(self):
        return (KIND_ORDER[self.kind], min(self.cells))

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "color": self.color.value,
            "orientation": self.orientation,
            "cells": [list(c) for c in sorted(self.cells)],
            "endpoints": [list(c) for c in self.endpoints],
        }
        if self.junction is not None:
            d["junction"] = list(self.junction)
        if self.stem is not None:
            d["stem"] = self.stem
        return d


@dataclass(frozen=True)
class _Run:
    axis: str  # "x" or "z"
    color: Color
    cells: tuple[Cell, ...]  # sorted along axis

    @property
    def lo(self) -> Cell:
        return self.cells[0]

    @property
    def hi(self) -> Cell:
        return self.cells[-1]


def _runs(cells: list[Cell], key) -> list[list[Cell]]:
    out, cur = [], []
    for c in sorted(cells, key=key):
        if cur and key(c)[0] == key(cur[-1])[0] and key(c)[1] == key(cur[-1])[1] + 1:
            cur.append(c)
        else:
            if len(cur) >= 2:
                out.append(cur)
            cur = [c]
    if len(cur) >= 2:
        out.append(cur)
    return out


def _ground_rows(grid: Grid) -> list[_Run]:
    rows = []
    for color in Color:
        ground = [c for c, col in grid.cells.items() if col == color and c[1] == 0]
        # runs along x share z; runs along z share x
        for run in _runs(ground, key=lambda c: (c[2], c[0])):
            rows.append(_Run("x", color, tuple(run)))
        for run in _runs(ground, key=lambda c: (c[0], c[2])):
            rows.append(_Run("z", color, tuple(run)))
    return rows


def _stacks(grid: Grid) -> list[Primitive]:
    out = []
    columns = sorted({(x, z) for (x, _, z) in grid.cells})
    for x, z in columns:
        run: list[Cell] = []
        color = None
        for y in range(grid.dims.height + 1):
            c = grid.get((x, y, z))
            if c is not None and c == color:
                run.append((x, y, z))
                continue
            if len(run) >= 2:
                out.append(Primitive("stack", color, frozenset(run), "y", (run[0], run[-1])))
            run = [(x, y, z)] if c is not None else []
            color = c
    return out


def _along(cell: Cell, axis: str) -> int:
    return cell[0] if axis == "x" else cell[2]


def _direction(frm: Cell, to: Cell, axis: str) -> str:
    sign = 1 if _along(to, axis) > _along(frm, axis) else -1
    return _AXIS_DIRS[(axis, sign)]


def _composite(a: _Run, b: _Run) -> Primitive | None:
    """L or T formed by an x-run `a` and a z-run `b`, if they meet."""
    junction = (b.lo[0], 0, a.lo[2])
    if junction not in a.cells or junction not in b.cells:
        return None
    a_end = junction in (a.lo, a.hi)
    b_end = junction in (b.lo, b.hi)
    cells = frozenset(a.cells) | frozenset(b.cells)
    if a_end and b_end:
        far_a = a.hi if junction == a.lo else a.lo
        far_b = b.hi if junction == b.lo else b.lo
        arms = f"{_direction(junction, far_a, 'x')}+{_direction(junction, far_b, 'z')}"
        return Primitive("l_shape", a.color, cells, arms, (junction, far_a, far_b), junction)
    if a_end == b_end:
        return None  # crossing, not a T
    base, stem = (b, a) if a_end else (a, b)
    far = stem.hi if junction == stem.lo else stem.lo
    return Primitive(
        "t_shape",
        a.color,
        cells,
        base.axis,
        (junction, base.lo, base.hi, far),
        junction,
        _direction(junction, far, stem.axis),
    )


def analyze(grid: Grid) -> list[Primitive]:
    rows = _ground_rows(grid)
    xs = [r for r in rows if r.axis == "x"]
    zs = [r for r in rows if r.axis == "z"]
    candidates = []
    for a in xs:
        for b in zs:
            if a.color != b.color:
                continue
            shape = _composite(a, b)
            if shape is not None:
                candidates.append((shape, a, b))
    # T before L, larger first, then position
    candidates.sort(key=lambda t: (-KIND_ORDER[t[0].kind], -t[0].size, min(t[0].cells)))
    used: set[_Run] = set()
    found: list[Primitive] = []
    for shape, a, b in candidates:
        if a in used or b in used:
            continue
        used.update((a, b))
        found.append(shape)
    for r in rows:
        if r not in used:
            found.append(Primitive("row", r.color, frozenset(r.cells), r.axis, (r.lo, r.hi)))
    found.extend(_stacks(grid))
    return sorted(found, key=Primitive.sort_key)


def _fmt(c: Cell) -> str:
    return f"({c[0]},{c[1]},{c[2]})"


def describe(primitives: list[Primitive]) -> str:
    if not primitives:
        return "grid is empty"
    lines = []
    for p in primitives:
        if p.kind == "row":
            lo, hi = p.endpoints
            lines.append(f"row {p.color} along {p.orientation} length {p.size} from {_fmt(lo)} to {_fmt(hi)}")
        elif p.kind == "stack":
            lo, hi = p.endpoints
            lines.append(
                f"stack {p.color} height {p.size} at ({lo[0]},{lo[2]}) from {_fmt(lo)} to {_fmt(hi)}"
            )
        elif p.kind == "l_shape":
            j, ea, eb = p.endpoints
            da, db = p.orientation.split("+")
            lines.append(
                f"l_shape {p.color} junction {_fmt(j)} arms {da} to {_fmt(ea)} and {db} to {_fmt(eb)}"
                f" ({p.size} blocks)"
            )
        else:
            j, lo, hi, end = p.endpoints
            stem_axis = "z" if p.orientation == "x" else "x"
            lines.append(
                f"t_shape {p.color} base along {p.orientation} from {_fmt(lo)} to {_fmt(hi)},"
                f" stem along {stem_axis} heading {p.stem} to {_fmt(end)}, junction {_fmt(j)}"
                f" ({p.size} blocks)"
            )
    return "\n".join(lines)


def _segments(p: Primitive) -> list[tuple[str, list[Cell]]]:
    if p.kind == "stack":
        return [("y", sorted(p.cells))]
    if p.kind == "row":
        return [(p.orientation, sorted(p.cells, key=lambda c: _along(c, p.orientation)))]
    j = p.junction
    on_x = sorted((c for c in p.cells if c[2] == j[2]), key=lambda c: c[0])
    on_z = sorted((c for c in p.cells if c[0] == j[0]), key=lambda c: c[2])
    return [("x", on_x), ("z", on_z)]


def _on_line(cell: Cell, axis: str, ref: Cell) -> bool:
    if axis == "y":
        return cell[0] == ref[0] and cell[2] == ref[2]
    if cell[1] != 0:
        return False
    return cell[2] == ref[2] if axis == "x" else cell[0] == ref[0]


def endpoints_after(primitive: Primitive, applied) -> tuple[Cell, ...]:
    """Endpoints of `primitive` once `applied` blocks have been added along its lines."""
    segs = _segments(primitive)
    grown = [list(cells) for _, cells in segs]
    for blk in applied:
        cell = blk.cell if isinstance(blk, BlockPlacement) else tuple(blk)
        for k, (axis, cells) in enumerate(segs):
            if _on_line(cell, axis, cells[0]):
                grown[k].append(cell)
                break
        else:
            raise ShapeBrokenError(f"{_fmt(cell)} is not collinear with the {primitive.kind}")

    def span(axis, cells):
        key = (lambda c: c[1]) if axis == "y" else (lambda c: _along(c, axis))
        return min(cells, key=key), max(cells, key=key)

    if primitive.kind in ("row", "stack"):
        return span(segs[0][0], grown[0])
    j = primitive.junction
    if primitive.kind == "l_shape":
        ends = []
        for (axis, _), cells in zip(segs, grown):
            lo, hi = span(axis, cells)
            ends.append(hi if lo == j else lo)
        return (j, ends[0], ends[1])
    base_axis = primitive.orientation
    base_cells = grown[0] if base_axis == "x" else grown[1]
    stem_cells = grown[1] if base_axis == "x" else grown[0]
    lo, hi = span(base_axis, base_cells)
    stem_axis = "z" if base_axis == "x" else "x"
    s_lo, s_hi = span(stem_axis, stem_cells)
    far = s_hi if s_lo == j else s_lo
    return (j, lo, hi, far)
