"""Ask-or-guess policy for instructions that omit a color or a block count.

A correct build scores +10, a wrong one -10, and a question costs 5, so
guessing with success probability p is worth 20p - 10 while asking (and then
building correctly with probability p_a) is worth 20 p_a - 15. With a
reliable answerer asking wins exactly when p < 0.75.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

from .analyzer import Primitive, analyze
from .grid import COLOR_NAMES, Color, Grid, y_star

P_STAR = 0.75
P_COLOR_INFERABLE = 0.9
P_COLOR_AMBIGUOUS = 1 / 6
P_COUNT = 0.65
DEFAULT_COUNT = 3

GENERIC_COUNT_QUESTION = "How many blocks should be in the stack?"

NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
}
_COLORS = "|".join(COLOR_NAMES)
_NUM = r"\d+|" + "|".join(NUMBER_WORDS)
STRUCTURE_NOUNS = ("stack", "row", "tower", "column", "line")

_PHRASE = re.compile(
    rf"\b(?P<det>a|an|another|some|{_NUM})\s+"
    rf"(?:(?P<color>{_COLORS})\s+)?"
    rf"(?P<noun>blocks?|stack|row|tower|column|line)\b"
    rf"(?:\s+of\s+(?:(?P<count2>{_NUM})\s+)?(?:(?P<color2>{_COLORS})\s+)?blocks?\b)?",
    re.IGNORECASE,
)
_LANDMARK = re.compile(
    rf"\b(?P<rel>next to|beside|near|on top of|in front of|behind|on)\s+the\s+"
    rf"(?P<color>{_COLORS})\s+(?P<noun>stack|row|tower|column|block|structure|one)\b",
    re.IGNORECASE,
)
_COORD = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")
_PREPOSITIONS = ("to", "of", "on", "onto", "beside", "near", "by", "from", "behind", "with", "at")
_COLOR_WORD = re.compile(rf"\b({_COLORS})\b", re.IGNORECASE)


def _check_prob(p: float, name: str) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def ev_guess(p: float) -> float:
    _check_prob(p, "p")
    return 20 * p - 10


def ev_ask(p_a: float) -> float:
    _check_prob(p_a, "p_a")
    return 20 * p_a - 15


def should_ask(p: float, p_a: float = 1.0, question_available: bool = True) -> bool:
    # ties go to guessing, which keeps the question budget intact
    return question_available and ev_ask(p_a) > ev_guess(p)


@dataclass(frozen=True)
class UnderspecItem:
    target: str  # "color" or "count"
    phrase: str
    span: tuple[int, int]
    noun: str
    p: float
    candidate: Color | None = None
    color: Color | None = None  # color the phrase itself names, if any
    anchor: tuple[int, int] | None = None
    landmark: str | None = None
    relation: str | None = None

    @property
    def ambiguous(self) -> bool:
        return self.target == "color" and self.candidate is None

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "phrase": self.phrase,
            "noun": self.noun,
            "p": self.p,
            "candidate": self.candidate.value if self.candidate else None,
            "color": self.color.value if self.color else None,
            "anchor": list(self.anchor) if self.anchor else None,
            "landmark": self.landmark,
        }


@dataclass(frozen=True)
class UnderspecReport:
    items: tuple[UnderspecItem, ...] = ()

    @property
    def missing_color(self) -> list[UnderspecItem]:
        return [i for i in self.items if i.target == "color"]

    @property
    def missing_count(self) -> list[UnderspecItem]:
        return [i for i in self.items if i.target == "count"]

    def __bool__(self) -> bool:
        return bool(self.items)


@dataclass(frozen=True)
class ClarifyDecision:
    action: str  # "ask" or "guess"
    target: str
    item: UnderspecItem
    ev_ask: float
    ev_guess: float
    question: str | None = None
    fallback_value: object = None

    def to_dict(self) -> dict:
        fb = self.fallback_value
        return {
            "action": self.action,
            "target": self.target,
            "phrase": self.item.phrase,
            "p": self.item.p,
            "ev_ask": self.ev_ask,
            "ev_guess": self.ev_guess,
            "question": self.question,
            "fallback_value": fb.value if isinstance(fb, Color) else fb,
        }


@dataclass(frozen=True)
class PolicyConstants:
    p_color_inferable: float = P_COLOR_INFERABLE
    p_color_ambiguous: float = P_COLOR_AMBIGUOUS
    p_count: float = P_COUNT
    default_count: int = DEFAULT_COUNT


def _number(tok: str | None) -> int | None:
    if tok is None:
        return None
    tok = tok.lower()
    return int(tok) if tok.isdigit() else NUMBER_WORDS.get(tok)


def _preceded_by_preposition(text: str, start: int) -> bool:
    words = text[:start].split()
    return bool(words) and words[-1].lower().strip(",") in _PREPOSITIONS


def _landmark_anchor(grid: Grid, primitives, color: Color, noun: str, rel: str) -> tuple[int, int] | None:
    kinds = {"stack": ("stack",), "tower": ("stack",), "column": ("stack",), "row": ("row",)}.get(noun)
    cols = []
    for p in primitives:
        if p.color == color and (kinds is None or p.kind in kinds):
            cols = sorted({(c[0], c[2]) for c in p.cells})
            break
    if not cols:
        cols = sorted({(x, z) for (x, _, z), c in grid.cells.items() if c == color})
    if not cols:
        return None
    rel = rel.lower()
    if rel in ("on", "on top of"):
        return cols[0]
    if rel == "in front of":
        cands = [(x, z + 1) for x, z in cols]
    elif rel == "behind":
        cands = [(x, z - 1) for x, z in cols]
    else:
        cands = sorted({(x + dx, z + dz) for x, z in cols for dx, dz in ((1, 0), (0, 1), (-1, 0), (0, -1))})
    for c in cands:
        if grid.dims.contains_column(*c) and y_star(grid, *c) == 0:
            return c
    return None


def detect_underspecification(
    instruction: str,
    grid: Grid,
    primitives: list[Primitive] | None = None,
    constants: PolicyConstants = PolicyConstants(),
) -> UnderspecReport:
    if primitives is None:
        primitives = analyze(grid)
    items = []
    for m in _PHRASE.finditer(instruction):
        if _preceded_by_preposition(instruction, m.start()):
            continue
        det = m.group("det").lower()
        noun = m.group("noun").lower()
        color_tok = m.group("color") or m.group("color2")
        color = Color.parse(color_tok) if color_tok else None
        if noun in STRUCTURE_NOUNS:
            count_missing = m.group("count2") is None
        else:
            count_missing = det == "some"
        # the rest of the sentence carries coordinates and landmarks
        sentence_end = instruction.find(".", m.end())
        tail = instruction[m.end(): sentence_end if sentence_end >= 0 else len(instruction)]
        anchor = None
        landmark = relation = None
        coord = _COORD.search(tail)
        if coord:
            anchor = (int(coord.group(1)), int(coord.group(2)))
        lm = _LANDMARK.search(tail)
        if lm:
            relation = lm.group("rel").lower()
            lm_noun = lm.group("noun").lower()
            landmark = f"{lm.group('color').lower()} {lm_noun}"
            if anchor is None:
                anchor = _landmark_anchor(grid, primitives, Color.parse(lm.group("color")), lm_noun, relation)
        cand = None
        if color is None:
            others = {
                c.group(1).lower() for c in _COLOR_WORD.finditer(instruction) if not (m.start() <= c.start() < m.end())
            }
            if len(others) == 1:
                cand, p = Color.parse(others.pop()), constants.p_color_inferable
            else:
                cand, p = None, constants.p_color_ambiguous
            items.append(
                UnderspecItem("color", m.group(0), m.span(), noun, p, cand, None, anchor, landmark, relation)
            )
        if count_missing:
            items.append(
                UnderspecItem(
                    "count", m.group(0), m.span(), noun, constants.p_count, cand, color, anchor, landmark, relation
                )
            )
    return UnderspecReport(tuple(items))


def prioritize(report: UnderspecReport) -> list[UnderspecItem]:
    """Ambiguous colors first, then counts, then inferable colors; stable within each group."""
    items = list(report.items)
    return (
        [i for i in items if i.ambiguous]
        + [i for i in items if i.target == "count"]
        + [i for i in items if i.target == "color" and not i.ambiguous]
    )


def load_templates() -> dict[str, str]:
    return json.loads(resources.files("voxplan.data").joinpath("questions.json").read_text())


def generate_question(
    item: UnderspecItem,
    grid: Grid,
    primitives: list[Primitive] | None = None,
    templates: dict[str, str] | None = None,
    color_hint: Color | None = None,
) -> str:
    """Build a question that lets the answerer pick out the referent.

    Count questions always name the new structure's color when it is known
    (from the phrase, an inferable context color, or `color_hint`), otherwise
    its coordinates.
    """
    t = templates or load_templates()
    noun = item.noun if item.noun in STRUCTURE_NOUNS else "blocks"
    if item.target == "count":
        color = item.color or color_hint or item.candidate
        if color is not None:
            key = "count_color" if noun != "blocks" else "count_color_blocks"
            return t[key].format(color=color.value, noun=noun)
        if item.anchor is not None:
            return t["count_position"].format(noun=noun, x=item.anchor[0], z=item.anchor[1])
        return t["count_phrase"].format(noun=noun, phrase=item.phrase)
    if item.landmark is not None:
        return t["color_landmark"].format(noun=noun, relation=item.relation, landmark=item.landmark)
    if item.anchor is not None:
        if primitives is None:
            primitives = analyze(grid)
        near = _nearest_primitive(primitives, item.anchor)
        if near is not None:
            return t["color_landmark"].format(noun=noun, relation="next to", landmark=f"{near.color} {_kind_word(near)}")
        return t["color_position"].format(noun=noun, x=item.anchor[0], z=item.anchor[1])
    return t["color_phrase"].format(phrase=item.phrase)


def _kind_word(p: Primitive) -> str:
    return {"l_shape": "L shape", "t_shape": "T shape"}.get(p.kind, p.kind)


def _nearest_primitive(primitives, anchor) -> Primitive | None:
    best = None
    for p in primitives:
        d = min(abs(c[0] - anchor[0]) + abs(c[2] - anchor[1]) for c in p.cells)
        if d <= 1 and (best is None or d < best[0]):
            best = (d, p)
    return best[1] if best else None


def infer_count(grid: Grid, anchor: tuple[int, int] | None, primitives: list[Primitive] | None = None) -> int:
    """Copy an adjacent stack's height, else the tallest stack, else 3."""
    if primitives is None:
        primitives = analyze(grid)
    stacks = [p for p in primitives if p.kind == "stack"]
    if anchor is not None:
        ax, az = anchor
        near = {(ax + 1, az), (ax - 1, az), (ax, az + 1), (ax, az - 1)}
        adjacent = [s for s in stacks if (s.endpoints[0][0], s.endpoints[0][2]) in near]
        if adjacent:
            best = min(adjacent, key=lambda s: (-s.size, s.endpoints[0][0], s.endpoints[0][2]))
            return best.size
    if stacks:
        return max(s.size for s in stacks)
    return DEFAULT_COUNT


def guess_color(item: UnderspecItem, grid: Grid) -> Color:
    if item.candidate is not None:
        return item.candidate
    if item.landmark:
        return Color.parse(item.landmark.split()[0])
    if len(grid):
        counts: dict[Color, int] = {}
        for c in grid.cells.values():
            counts[c] = counts.get(c, 0) + 1
        return max(sorted(counts, key=lambda c: c.value), key=lambda c: counts[c])
    return Color.RED


def decide(
    report: UnderspecReport,
    grid: Grid,
    primitives: list[Primitive] | None = None,
    p_a: float = 1.0,
    question_available: bool = True,
    templates: dict[str, str] | None = None,
) -> list[ClarifyDecision]:
    """One decision per underspecified item in priority order; at most one asks."""
    if primitives is None:
        primitives = analyze(grid)
    decisions = []
    budget = question_available
    color_hint = None
    for item in prioritize(report):
        ea, eg = ev_ask(p_a), ev_guess(item.p)
        if should_ask(item.p, p_a, budget):
            q = generate_question(item, grid, primitives, templates, color_hint)
            decisions.append(ClarifyDecision("ask", item.target, item, ea, eg, question=q))
            budget = False
            continue
        if item.target == "color":
            value = guess_color(item, grid)
            color_hint = color_hint or value
        else:
            value = infer_count(grid, item.anchor, primitives)
        decisions.append(ClarifyDecision("guess", item.target, item, ea, eg, fallback_value=value))
    return decisions
