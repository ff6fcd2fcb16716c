from __future__ import annotations

import random

import pytest
from hypothesis import strategies as st

from voxplan.grid import Color, Grid, GridDims
from voxplan.plan import Absolute, DIRECTIONS, Plan, PlanAction, StepRef

COLORS = list(Color)
SMALL = GridDims(5, 4, 5)


def random_grid(rng: random.Random, dims: GridDims = GridDims(), fill: float = 0.4) -> Grid:
    """Gravity-valid grid: each column gets a random-height stack."""
    cells = {}
    for x in range(dims.width):
        for z in range(dims.depth):
            if rng.random() < fill:
                for y in range(rng.randint(1, dims.height)):
                    cells[(x, y, z)] = rng.choice(COLORS)
    return Grid(dims, cells)


def random_plan(rng: random.Random, dims: GridDims = GridDims(), n: int | None = None) -> Plan:
    """Plans whose actions stay inside the grid horizontally (columns may still overflow)."""
    actions = []
    for i in range(n if n is not None else rng.randint(1, 4)):
        kind = rng.choice(("place", "stack", "row"))
        color = rng.choice(COLORS)
        if i and rng.random() < 0.3:
            anchor = StepRef(None, rng.choice([None, *sorted(DIRECTIONS)]))
        else:
            anchor = Absolute(rng.randrange(dims.width), rng.randrange(dims.depth))
        if kind == "place":
            actions.append(PlanAction("place", anchor, color))
        elif kind == "stack":
            actions.append(PlanAction("stack", anchor, color, rng.randint(1, 3)))
        else:
            actions.append(PlanAction("row", anchor, color, rng.randint(1, 4), rng.choice(sorted(DIRECTIONS))))
    return Plan(tuple(actions))


@st.composite
def grids(draw, dims: GridDims = SMALL):
    heights = draw(st.lists(st.integers(0, dims.height), min_size=dims.width * dims.depth,
                            max_size=dims.width * dims.depth))
    colors = draw(st.lists(st.sampled_from(COLORS), min_size=dims.width * dims.depth * dims.height,
                           max_size=dims.width * dims.depth * dims.height))
    cells = {}
    for i, h in enumerate(heights):
        x, z = divmod(i, dims.depth)
        for y in range(h):
            cells[(x, y, z)] = colors[i * dims.height + y]
    return Grid(dims, cells)


@st.composite
def plans(draw, dims: GridDims = SMALL, max_actions: int = 4):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(1, max_actions))
    return random_plan(random.Random(seed), dims, n)


@pytest.fixture
def rng():
    return random.Random(1234)
