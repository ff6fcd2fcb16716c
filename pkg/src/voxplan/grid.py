"""Gravity-constrained voxel grid, column placement and block-level metrics.

Coordinates are always ``(x, y, z)`` with ``y`` vertical. Grids are
immutable: every operation that adds blocks returns a new grid.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType

from .errors import BoundsError, ColorError, ColumnFullError, GridFormatError

Cell = tuple[int, int, int]
Column = tuple[int, int]


class Color(str, Enum):
    RED = "red"
    BLUE = "blue"
    GREEN = "green"
    ORANGE = "orange"
    YELLOW = "yellow"
    PURPLE = "purple"

    @classmethod
    def parse(cls, name: str) -> Color:
        if isinstance(name, Color):
            return name
        if not isinstance(name, str):
            raise ColorError(f"color must be a string, got {type(name).__name__}")
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ColorError(f"unknown color {name!r}") from None

    def __str__(self) -> str:
        return self.value


COLOR_NAMES: tuple[str, ...] = tuple(c.value for c in Color)


@dataclass(frozen=True)
class GridDims:
    width: int = 9
    height: int = 5
    depth: int = 9

    def __post_init__(self):
        for name in ("width", "height", "depth"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f"grid {name} must be a positive integer, got {value!r}")

    def contains(self, x: int, y: int, z: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height and 0 <= z < self.depth

    def contains_column(self, x: int, z: int) -> bool:
        return 0 <= x < self.width and 0 <= z < self.depth

    def to_dict(self) -> dict:
        return {"width": self.width, "height": self.height, "depth": self.depth}


DEFAULT_DIMS = GridDims()
IGLU_DIMS = GridDims(11, 9, 11)


@dataclass(frozen=True, order=True)
class BlockPlacement:
    x: int
    y: int
    z: int
    color: Color

    @property
    def cell(self) -> Cell:
        return (self.x, self.y, self.z)

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "z": self.z, "color": self.color.value}


class Grid:
    """Bounded map from cells to colors.

    The constructor does not enforce gravity so that arbitrary states can be
    inspected with :func:`validate_grid`; :meth:`from_json` and
    :func:`place_block` only ever produce gravity-valid grids.
    """

    __slots__ = ("_dims", "_cells", "_hash")

    def __init__(self, dims: GridDims = DEFAULT_DIMS, cells: Mapping[Cell, Color] | None = None):
        self._dims = dims
        self._cells = MappingProxyType(dict(cells or {}))
        self._hash = None

    @classmethod
    def from_blocks(cls, blocks: Iterable[BlockPlacement], dims: GridDims = DEFAULT_DIMS) -> Grid:
        cells = {}
        for b in blocks:
            cells[b.cell] = b.color
        return cls(dims, cells)

    @property
    def dims(self) -> GridDims:
        return self._dims

    @property
    def cells(self) -> Mapping[Cell, Color]:
        return self._cells

    def __len__(self) -> int:
        return len(self._cells)

    def __contains__(self, cell: Cell) -> bool:
        return cell in self._cells

    def __iter__(self) -> Iterator[BlockPlacement]:
        return iter(self.blocks())

    def get(self, cell: Cell) -> Color | None:
        return self._cells.get(cell)

    def blocks(self) -> list[BlockPlacement]:
        """Placements ordered by (x, z, y)."""
        return [
            BlockPlacement(x, y, z, c)
            for (x, y, z), c in sorted(self._cells.items(), key=lambda kv: (kv[0][0], kv[0][2], kv[0][1]))
        ]

    def placements(self) -> frozenset[BlockPlacement]:
        return frozenset(BlockPlacement(x, y, z, c) for (x, y, z), c in self._cells.items())

    def column(self, x: int, z: int) -> list[Color | None]:
        return [self._cells.get((x, y, z)) for y in range(self._dims.height)]

    def column_height(self, x: int, z: int) -> int:
        """Number of contiguous occupied levels from the ground up."""
        h = 0
        while (x, h, z) in self._cells:
            h += 1
        return h

    def with_block(self, cell: Cell, color: Color) -> Grid:
        cells = dict(self._cells)
        cells[cell] = color
        return Grid(self._dims, cells)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return self._dims == other._dims and self._cells == other._cells

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._dims, frozenset(self._cells.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Grid({self._dims.width}x{self._dims.height}x{self._dims.depth}, {len(self)} blocks)"

    def to_dict(self) -> dict:
        return {"dims": self._dims.to_dict(), "blocks": [b.to_dict() for b in self.blocks()]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(", ", ": "))

    @classmethod
    def from_dict(cls, doc) -> Grid:
        if not isinstance(doc, dict):
            raise GridFormatError("$: grid document must be an object")
        raw_dims = doc.get("dims", DEFAULT_DIMS.to_dict())
        if not isinstance(raw_dims, dict):
            raise GridFormatError("$.dims: must be an object")
        try:
            dims = GridDims(
                raw_dims.get("width", DEFAULT_DIMS.width),
                raw_dims.get("height", DEFAULT_DIMS.height),
                raw_dims.get("depth", DEFAULT_DIMS.depth),
            )
        except ValueError as exc:
            raise GridFormatError(f"$.dims: {exc}") from None
        raw_blocks = doc.get("blocks", [])
        if not isinstance(raw_blocks, list):
            raise GridFormatError("$.blocks: must be an array")
        cells: dict[Cell, Color] = {}
        for i, raw in enumerate(raw_blocks):
            where = f"$.blocks[{i}]"
            if not isinstance(raw, dict):
                raise GridFormatError(f"{where}: block must be an object")
            try:
                x, y, z = (raw[k] for k in ("x", "y", "z"))
            except KeyError as exc:
                raise GridFormatError(f"{where}: missing coordinate {exc.args[0]!r}") from None
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in (x, y, z)):
                raise GridFormatError(f"{where}: coordinates must be integers")
            try:
                color = Color.parse(raw.get("color"))
            except ColorError as exc:
                raise GridFormatError(f"{where}.color: {exc}") from None
            if not dims.contains(x, y, z):
                raise GridFormatError(f"{where}: block ({x},{y},{z}) is out of bounds")
            if (x, y, z) in cells:
                raise GridFormatError(f"{where}: duplicate block at ({x},{y},{z})")
            cells[(x, y, z)] = color
        for i, raw in enumerate(raw_blocks):
            x, y, z = raw["x"], raw["y"], raw["z"]
            if y > 0 and (x, y - 1, z) not in cells:
                raise GridFormatError(
                    f"$.blocks[{i}]: floating block at ({x},{y},{z}); ({x},{y - 1},{z}) is empty"
                )
        return cls(dims, cells)

    @classmethod
    def from_json(cls, text: str) -> Grid:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GridFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(doc)


def empty_grid(dims: GridDims = DEFAULT_DIMS) -> Grid:
    return Grid(dims)


def _check_column(grid: Grid, x: int, z: int) -> None:
    if not grid.dims.contains_column(x, z):
        d = grid.dims
        raise BoundsError(f"column ({x},{z}) outside {d.width}x{d.depth} footprint")


def y_star(grid: Grid, x: int, z: int) -> int | None:
    """Lowest unoccupied level of column (x, z), or None if the column is full."""
    _check_column(grid, x, z)
    for y in range(grid.dims.height):
        if (x, y, z) not in grid.cells:
            return y
    return None


def place_block(grid: Grid, x: int, z: int, color: Color) -> Grid:
    y = y_star(grid, x, z)
    if y is None:
        raise ColumnFullError(f"column ({x},{z}) is full ({grid.dims.height} levels)")
    return grid.with_block((x, y, z), Color.parse(color))


def grid_diff(before: Grid, after: Grid) -> tuple[set[BlockPlacement], set[BlockPlacement]]:
    """Return ``(added, removed)``; a recolored cell shows up in both."""
    if before.dims != after.dims:
        raise ValueError(f"dims mismatch: {before.dims} vs {after.dims}")
    a = before.placements()
    b = after.placements()
    return set(b - a), set(a - b)


def apply_diff(grid: Grid, added: Iterable[BlockPlacement], removed: Iterable[BlockPlacement]) -> Grid:
    cells = dict(grid.cells)
    for blk in removed:
        if cells.get(blk.cell) == blk.color:
            del cells[blk.cell]
    for blk in added:
        cells[blk.cell] = blk.color
    return Grid(grid.dims, cells)


def block_f1(predicted: Iterable[BlockPlacement], target: Iterable[BlockPlacement]) -> float:
    """Dice overlap of two placement sets; two empty sets score 1.0."""
    p = set(predicted)
    t = set(target)
    if not p and not t:
        return 1.0
    return 2 * len(p & t) / (len(p) + len(t))


def validate_grid(grid: Grid) -> list[str]:
    """List gravity and bounds violations; an empty list means the grid is valid."""
    problems = []
    for (x, y, z) in sorted(grid.cells, key=lambda c: (c[0], c[2], c[1])):
        if not grid.dims.contains(x, y, z):
            problems.append(f"out-of-bounds block at ({x},{y},{z})")
        elif y > 0 and (x, y - 1, z) not in grid.cells:
            problems.append(f"floating block at ({x},{y},{z})")
    return problems
