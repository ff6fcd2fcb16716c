"""Peephole-style plan verification.

Four passes run in a fixed order, each over the previous pass's output:

1. ``direction_consistency`` flips row/extend directions that contradict the
   single direction the instruction names, and re-anchors chain references
   that drifted onto an original block instead of the step just built.
2. ``endpoint_cap`` re-anchors "each end" caps onto post-extension endpoints.
3. ``t_shape_extend`` redirects extends of a T onto its stem.
4. ``stacking_plausibility`` clips overflowing stacks or flags stacks the
   instruction never asked for.

A pass that can rewrite confidently reports ``corrected``; anything it cannot
fix is ``critical`` and asks for a re-plan.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .analyzer import Primitive, analyze, endpoints_after
from .errors import ShapeBrokenError, VoxplanError
from .executor import ExecContext, execute_with_context, resolve_anchor
from .grid import COLOR_NAMES, Color, Grid, y_star
from .plan import DIRECTIONS, Absolute, ColorRef, Plan, PlanAction, StepRef, step

PASSES = ("direction_consistency", "endpoint_cap", "t_shape_extend", "stacking_plausibility")

_DIRECTION_WORDS = [
    (r"\bin front of\b", "in-front"),
    (r"\bbehind\b", "behind"),
    (r"\beast(?:ward)?\b", "east"),
    (r"\bwest(?:ward)?\b", "west"),
    (r"\bnorth(?:ward)?\b", "north"),
    (r"\bsouth(?:ward)?\b", "south"),
    (r"\bright\b", "east"),
    (r"\bleft\b", "west"),
]
_VERTICAL = re.compile(r"\b(stack|stacks|stacked|tower|on top|on the|upward|vertical|tall|higher|taller|column)\b", re.I)
_HORIZONTAL = re.compile(r"\b(row|line|horizontal|extend|extends|lengthen)\b", re.I)
_EXTEND = re.compile(r"\b(extend|extends|extended|lengthen|continue)\b", re.I)
_EACH_END = re.compile(r"\beach\s+ends?\b|\bboth\s+ends\b", re.I)
_SHAPE = re.compile(r"\b([LT])[- ]?shape", re.I)
_CHAIN = re.compile(rf"\bthe\s+({'|'.join(COLOR_NAMES)})\s+one\b(?!-)", re.I)
_COLOR = re.compile(rf"\b({'|'.join(COLOR_NAMES)})\b", re.I)
_NUMBER = re.compile(r"\b(\d+|one|two|three|four|five|six|seven|eight|nine|ten)\b", re.I)


@dataclass(frozen=True)
class InstructionFacts:
    directions: tuple[str, ...] = ()
    each_end: bool = False
    shapes: frozenset[str] = frozenset()
    colors: tuple[Color, ...] = ()
    counts: tuple[str, ...] = ()
    vertical: bool = False
    horizontal: bool = False
    extend: bool = False
    chain_color: Color | None = None

    @classmethod
    def from_text(cls, text: str) -> InstructionFacts:
        found = []
        for pattern, name in _DIRECTION_WORDS:
            for m in re.finditer(pattern, text, re.I):
                found.append((m.start(), name))
        directions = tuple(name for _, name in sorted(found))
        chain = _CHAIN.search(text)
        return cls(
            directions=directions,
            each_end=bool(_EACH_END.search(text)),
            shapes=frozenset(m.group(1).upper() for m in _SHAPE.finditer(text)),
            colors=tuple(Color.parse(m.group(1)) for m in _COLOR.finditer(text)),
            counts=tuple(m.group(1).lower() for m in _NUMBER.finditer(text)),
            vertical=bool(_VERTICAL.search(text)),
            horizontal=bool(_HORIZONTAL.search(text)) or bool(directions),
            extend=bool(_EXTEND.search(text)),
            chain_color=Color.parse(chain.group(1)) if chain else None,
        )

    def single_direction(self) -> str | None:
        """The one direction named, if all mentions agree on a vector."""
        vectors = {DIRECTIONS[d] for d in self.directions}
        if len(vectors) != 1:
            return None
        return self.directions[0]


extract_facts = InstructionFacts.from_text


@dataclass(frozen=True)
class Diagnostic:
    pass_name: str
    severity: str  # "corrected" or "critical"
    action_index: int
    message: str

    def to_dict(self) -> dict:
        return {
            "pass": self.pass_name,
            "severity": self.severity,
            "action_index": self.action_index,
            "message": self.message,
        }


def _prefix(plan: Plan, i: int, grid: Grid, skip_forward: bool = True) -> tuple[Grid, ExecContext] | None:
    """Grid and context just before action `i`, or None if the prefix fails."""
    try:
        g, _, ctx = execute_with_context(Plan(plan.actions[:i]), grid, skip_forward=skip_forward)
    except VoxplanError:
        return None
    return g, ctx


def _resolve(plan: Plan, i: int, grid: Grid):
    pre = _prefix(plan, i, grid)
    if pre is None:
        return None
    g, ctx = pre
    try:
        return resolve_anchor(plan.actions[i], ctx, g), g, ctx
    except VoxplanError:
        return None


def pass_direction_consistency(plan: Plan, facts: InstructionFacts, grid: Grid):
    diags = []
    wanted = facts.single_direction()
    for i, act in enumerate(plan.actions):
        if act.kind in ("row", "extend") and wanted and act.direction:
            dx, dz = DIRECTIONS[act.direction]
            wx, wz = DIRECTIONS[wanted]
            if (dx, dz) == (-wx, -wz):
                plan = plan.replace_action(i, _with(act, direction=wanted))
                diags.append(Diagnostic(
                    "direction_consistency", "corrected", i,
                    f"direction {act.direction} contradicts instruction; now {wanted}",
                ))
    plan, drift = _fix_chain_drift(plan, facts, grid)
    return plan, diags + drift


def _fix_chain_drift(plan: Plan, facts: InstructionFacts, grid: Grid):
    """Re-anchor actions aimed at an original block when the instruction chains off the newest one."""
    c = facts.chain_color
    if c is None or facts.vertical:
        return plan, []
    offset = facts.single_direction()
    originals = {(x, z) for (x, _, z), col in grid.cells.items() if col == c}
    diags = []
    for i, act in enumerate(plan.actions):
        a = act.anchor
        if i == 0 or not isinstance(a, Absolute):
            continue
        built = [j for j in range(i) if plan.actions[j].color == c]
        if not built:
            continue
        hits = [o for o in originals if (step(o, offset) if offset else o) == (a.x, a.z)]
        if not hits:
            continue
        j = built[-1]
        pre = _prefix(plan, j + 1, grid)
        if pre is None or pre[1].step_positions[j] in hits:
            continue
        plan = plan.replace_action(i, _with(act, anchor=StepRef(j, offset)))
        diags.append(Diagnostic(
            "direction_consistency", "corrected", i,
            f"chain reference drifted to original {c} block at {hits[0]}; re-anchored to step {j}",
        ))
    return plan, diags


def _with(act: PlanAction, **changes) -> PlanAction:
    fields = dict(kind=act.kind, anchor=act.anchor, color=act.color, count=act.count, direction=act.direction)
    fields.update(changes)
    return PlanAction(**fields)


def _collinear(primitive: Primitive, placements) -> list:
    keep = []
    for p in placements:
        if p.color != primitive.color:
            continue
        try:
            endpoints_after(primitive, [p])
        except ShapeBrokenError:
            continue
        keep.append(p)
    return keep


def _outward(inner, outer) -> str | None:
    """Direction pointing from a structure's inside toward endpoint `outer`."""
    dx = (outer[0] > inner[0]) - (outer[0] < inner[0])
    dz = (outer[2] > inner[2]) - (outer[2] < inner[2])
    for name in ("east", "west", "south", "north"):
        if DIRECTIONS[name] == (dx, dz):
            return name
    return None


def pass_endpoint_cap(plan: Plan, facts: InstructionFacts, grid: Grid, primitives: list[Primitive]):
    if not facts.each_end:
        return plan, []
    diags = []
    rows = [p for p in primitives if p.kind == "row"]
    for i, act in enumerate(plan.actions):
        a = act.anchor
        if act.kind not in ("place", "stack") or not isinstance(a, Absolute) or i == 0:
            continue
        pre = _prefix(plan, i, grid)
        if pre is None:
            continue
        g_i, _ = pre
        added = [b for b in g_i.placements() if b.cell not in grid.cells]
        for prim in rows:
            old = prim.endpoints
            try:
                new = endpoints_after(prim, _collinear(prim, added))
            except ShapeBrokenError:
                continue
            if new == old or (a.x, a.z) in {(c[0], c[2]) for c in new}:
                continue
            fixed = None
            for side in (0, 1):
                o, n = old[side], new[side]
                out = _outward(old[1 - side], o)
                for k in (0, 1):
                    if out and (a.x, a.z) == step((o[0], o[2]), out, k) and o != n:
                        fixed = step((n[0], n[2]), out, k)
            if fixed is not None:
                plan = plan.replace_action(i, _with(act, anchor=Absolute(*fixed)))
                diags.append(Diagnostic(
                    "endpoint_cap", "corrected", i,
                    f"cap used pre-extension endpoint ({a.x},{a.z}); moved to {fixed}",
                ))
                break
    return plan, diags


def pass_t_shape_extend(plan: Plan, primitives: list[Primitive], facts: InstructionFacts | None = None,
                        grid: Grid | None = None):
    tees = [p for p in primitives if p.kind == "t_shape"]
    if not tees or (facts is not None and "T" not in facts.shapes):
        return plan, []
    diags = []
    for i, act in enumerate(plan.actions):
        if act.kind != "extend":
            continue
        for t in tees:
            if act.color != t.color:
                continue
            end = t.endpoints[3]
            stem_end = (end[0], end[2])
            footprint = {(c[0], c[2]) for c in t.cells}
            resolved = None
            if grid is not None:
                r = _resolve(plan, i, grid)
                resolved = r[0] if r else None
            elif isinstance(act.anchor, Absolute):
                resolved = (act.anchor.x, act.anchor.z)
            targets_t = resolved in footprint or (
                isinstance(act.anchor, ColorRef) and act.anchor.color == t.color
            )
            if not targets_t:
                continue
            if resolved == stem_end and act.direction == t.stem:
                continue
            plan = plan.replace_action(i, _with(act, anchor=Absolute(*stem_end), direction=t.stem))
            diags.append(Diagnostic(
                "t_shape_extend", "corrected", i,
                f"extend targeted the T at {resolved} heading {act.direction}; "
                f"continuing the stem from {stem_end} heading {t.stem}",
            ))
            break
    return plan, diags


def pass_stacking_plausibility(plan: Plan, facts: InstructionFacts, grid: Grid):
    diags = []
    for i, act in enumerate(plan.actions):
        if act.kind != "stack":
            continue
        if facts.horizontal and not facts.vertical:
            diags.append(Diagnostic(
                "stacking_plausibility", "critical", i,
                "stack generated for an instruction with only horizontal cues",
            ))
            continue
        r = _resolve(plan, i, grid)
        if r is None:
            continue
        (x, z), g_i, _ = r
        if not g_i.dims.contains_column(x, z):
            continue
        ys = y_star(g_i, x, z)
        capacity = 0 if ys is None else g_i.dims.height - ys
        if act.count <= capacity:
            continue
        if facts.vertical and capacity >= 1:
            plan = plan.replace_action(i, _with(act, count=capacity))
            diags.append(Diagnostic(
                "stacking_plausibility", "corrected", i,
                f"stack of {act.count} overflows column ({x},{z}); clipped to {capacity}",
            ))
        else:
            diags.append(Diagnostic(
                "stacking_plausibility", "critical", i,
                f"stack of {act.count} cannot fit column ({x},{z}) with capacity {capacity}",
            ))
    return plan, diags


def verify(
    plan: Plan,
    facts: InstructionFacts,
    grid: Grid,
    primitives: list[Primitive] | None = None,
    enabled: tuple[str, ...] = PASSES,
) -> tuple[Plan, list[Diagnostic]]:
    if primitives is None:
        primitives = analyze(grid)
    diags: list[Diagnostic] = []
    for name in PASSES:
        if name not in enabled:
            continue
        if name == "direction_consistency":
            plan, d = pass_direction_consistency(plan, facts, grid)
        elif name == "endpoint_cap":
            plan, d = pass_endpoint_cap(plan, facts, grid, primitives)
        elif name == "t_shape_extend":
            plan, d = pass_t_shape_extend(plan, primitives, facts, grid)
        else:
            plan, d = pass_stacking_plausibility(plan, facts, grid)
        diags.extend(d)
    return plan, diags


def needs_replan(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity == "critical" for d in diagnostics)


def replan_hints(diagnostics: list[Diagnostic]) -> str:
    return "\n".join(
        f"- action {d.action_index} ({d.pass_name}): {d.message}" for d in diagnostics if d.severity == "critical"
    )
