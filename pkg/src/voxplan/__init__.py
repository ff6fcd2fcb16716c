"""Gravity-aware block building: a 2-D plan language over a 3-D grid.

The planner picks horizontal positions; each block's height is the lowest
free level of its column, so floating blocks cannot be planned.
"""

from .analyzer import Primitive, analyze, describe
from .clarify import decide, detect_underspecification, ev_ask, ev_guess, should_ask
from .enrichment import enrich_prompt, load_rules, match_rules
from .errors import (
    ColumnFullError,
    DimensionViolationError,
    ExecutionError,
    InputError,
    PlanParseError,
    VoxplanError,
)
from .executor import execute, execute_3d
from .grid import BlockPlacement, Color, Grid, GridDims, block_f1, empty_grid, grid_diff, place_block, validate_grid, y_star
from .harness import AgentConfig, ArchitectModel, Scenario, Toggles, run_ablation, run_round, run_scenario
from .plan import Plan, PlanAction, parse_plan, serialize_plan
from .stats import welch_t
from .verifier import verify

__version__ = "0.1.0"

__all__ = [
    "AgentConfig", "ArchitectModel", "BlockPlacement", "Color", "ColumnFullError", "DimensionViolationError",
    "ExecutionError", "Grid", "GridDims", "InputError", "Plan", "PlanAction", "PlanParseError", "Primitive",
    "Scenario", "Toggles", "VoxplanError", "analyze", "block_f1", "decide", "describe",
    "detect_underspecification", "empty_grid", "enrich_prompt", "ev_ask", "ev_guess", "execute", "execute_3d",
    "grid_diff", "load_rules", "match_rules", "parse_plan", "place_block", "run_ablation", "run_round",
    "run_scenario", "serialize_plan", "should_ask", "validate_grid", "verify", "welch_t", "y_star",
]
