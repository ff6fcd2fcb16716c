"""Round orchestration, simulated architect, scoring and ablations.

A round runs parse -> analyze -> clarify -> enrich -> plan -> verify ->
execute -> score. The planner is called at most twice per round: once to
plan and once more either to re-plan with hints or, after an execution
failure, as the direct-3D fallback.
"""

from __future__ import annotations

import json
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from . import clarify
from .analyzer import analyze, describe
from .enrichment import EnrichmentRule, enrich_prompt, fired_rules, load_rules
from .errors import InputError, PlanParseError, PlannerError, TransportError, VoxplanError
from .executor import execute, execute_3d
from .grid import COLOR_NAMES, Color, Grid, GridDims, block_f1, grid_diff, place_block, validate_grid
from .plan import parse_plan, parse_plan_3d, serialize_plan, validate_plan, Plan, PlanAction, Absolute
from .planner import MODE_2D, MODE_3D, SYSTEM_PROMPT, SYSTEM_PROMPT_3D, PlanRequest, Planner, ScriptedPlanner
from .stats import ci95, mean, sample_sd
from .verifier import PASSES, extract_facts, needs_replan, replan_hints, verify

MAX_PLANNER_CALLS = 2
CORRECT_REWARD = 10
INCORRECT_PENALTY = -10
QUESTION_COST = 5
CANNOT_IDENTIFY = "cannot identify"


def score_delta(correct: bool, questions: int) -> int:
    return (CORRECT_REWARD if correct else INCORRECT_PENALTY) - QUESTION_COST * questions


@dataclass(frozen=True)
class ScenarioRound:
    id: str
    instruction: str
    start_grid: Grid
    target_grid: Grid
    architect_info: dict = field(default_factory=dict)
    tags: tuple[str, ...] = ()

    def new_blocks(self):
        added, _ = grid_diff(self.start_grid, self.target_grid)
        return added


@dataclass(frozen=True)
class Scenario:
    rounds: tuple[ScenarioRound, ...]
    name: str = "scenario"

    def __len__(self) -> int:
        return len(self.rounds)

    def subset(self, tag: str) -> Scenario:
        return Scenario(tuple(r for r in self.rounds if tag in r.tags), f"{self.name}[{tag}]")

    @classmethod
    def from_dict(cls, doc: dict) -> Scenario:
        if not isinstance(doc, dict) or not isinstance(doc.get("rounds"), list):
            raise InputError("scenario must be an object with a 'rounds' array")
        dims_doc = doc.get("dims")
        rounds = []
        for i, raw in enumerate(doc["rounds"]):
            where = f"$.rounds[{i}]"
            try:
                start = _grid_from(raw.get("start_grid", {}), dims_doc)
                target = _grid_from(raw["target_grid"], dims_doc)
                rid = str(raw["id"])
                instruction = str(raw["instruction"])
            except KeyError as exc:
                raise InputError(f"{where}: missing {exc.args[0]!r}") from None
            except InputError as exc:
                raise InputError(f"{where}: {exc}") from None
            if not start.placements() <= target.placements():
                raise InputError(f"{where}: target grid must contain the start grid")
            rounds.append(ScenarioRound(
                rid, instruction, start, target, dict(raw.get("architect_info", {})), tuple(raw.get("tags", ()))
            ))
        ids = [r.id for r in rounds]
        if len(set(ids)) != len(ids):
            raise InputError("scenario round ids must be unique")
        return cls(tuple(rounds), doc.get("name", "scenario"))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rounds": [
                {
                    "id": r.id,
                    "instruction": r.instruction,
                    "tags": list(r.tags),
                    "start_grid": r.start_grid.to_dict(),
                    "target_grid": r.target_grid.to_dict(),
                    "architect_info": r.architect_info,
                }
                for r in self.rounds
            ],
        }


def _grid_from(doc, dims_doc) -> Grid:
    if dims_doc and isinstance(doc, dict) and "dims" not in doc:
        doc = {**doc, "dims": dims_doc}
    return Grid.from_dict(doc)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise InputError(f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}") from None
    return Scenario.from_dict(doc)


def load_fixtures(path) -> dict[str, str]:
    doc = json.loads(Path(path).read_text())
    return {k: v if isinstance(v, str) else json.dumps(v) for k, v in doc.items()}


def bundled_scenario() -> Scenario:
    return Scenario.from_dict(json.loads(resources.files("voxplan.data").joinpath("scenario.json").read_text()))


def bundled_fixtures() -> dict[str, str]:
    doc = json.loads(resources.files("voxplan.data").joinpath("oracle_plans.json").read_text())
    return {k: v if isinstance(v, str) else json.dumps(v) for k, v in doc.items()}


# --- architect -------------------------------------------------------------

@dataclass(frozen=True)
class ArchitectModel:
    generic_error_rate: float = 0.23
    # no published figure for color-specific questions; an assumption
    specific_error_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        for name in ("generic_error_rate", "specific_error_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


RATIONAL_ARCHITECT = ArchitectModel(0.0, 0.0)

_COLOR_RE = re.compile(rf"\b({'|'.join(COLOR_NAMES)})\b", re.I)
_COORD_RE = re.compile(r"\((\d+)\s*,\s*(\d+)\)")


def question_intent(question: str) -> tuple[str | None, Color | None, tuple[int, int] | None]:
    q = question.lower()
    target = "count" if "how many" in q else "color" if "what color" in q else None
    m = _COLOR_RE.search(q) if target == "count" else None
    c = _COORD_RE.search(q)
    return target, Color.parse(m.group(1)) if m else None, (int(c.group(1)), int(c.group(2))) if c else None


def is_color_specific(question: str) -> bool:
    return question_intent(question)[1] is not None


def _true_answer(question: str, rnd: ScenarioRound) -> str | None:
    target, color, column = question_intent(question)
    info = rnd.architect_info
    new = rnd.new_blocks()
    if target == "count":
        if color is not None:
            if f"count:{color.value}" in info:
                return str(info[f"count:{color.value}"])
            n = sum(1 for b in new if b.color == color)
        elif column is not None:
            n = sum(1 for b in new if (b.x, b.z) == column)
        else:
            if "count" in info:
                return str(info["count"])
            n = len(new)
        return str(n) if n else None
    if target == "color":
        if "color" in info:
            return str(info["color"])
        if column is not None:
            new = [b for b in new if (b.x, b.z) == column]
        colors = {b.color for b in new}
        return colors.pop().value if len(colors) == 1 else None
    return None


def architect_answer(question: str, rnd: ScenarioRound, model: ArchitectModel, seed: int = 0) -> str:
    """Answer from the target grid, wrong with the configured probability."""
    truth = _true_answer(question, rnd)
    if truth is None:
        return CANNOT_IDENTIFY
    rate = model.specific_error_rate if is_color_specific(question) else model.generic_error_rate
    rng = random.Random(f"{model.seed}:{seed}:{rnd.id}:{question}")
    if rng.random() >= rate:
        return truth
    if truth.isdigit():
        n = int(truth)
        wrong = n + rng.choice((-1, 1))
        return str(wrong if wrong >= 1 else n + 1)
    return rng.choice([c for c in COLOR_NAMES if c != truth])


# --- agent -----------------------------------------------------------------

@dataclass(frozen=True)
class Toggles:
    decomposition: bool = True
    questions: bool = True
    enrichment: bool = True
    skip_forward: bool = True
    verifier: bool = True


ABLATIONS: dict[str, Toggles] = {
    "full": Toggles(),
    "-decomposition": Toggles(decomposition=False),
    "-questions": Toggles(questions=False),
    "-enrichment": Toggles(enrichment=False),
    "-skip-forward": Toggles(skip_forward=False),
    "-verifier": Toggles(verifier=False),
}


@dataclass(frozen=True)
class AgentConfig:
    planner: Planner
    architect: ArchitectModel = ArchitectModel()
    toggles: Toggles = Toggles()
    rules: tuple[EnrichmentRule, ...] | None = None
    p_a: float = 1.0
    constants: clarify.PolicyConstants = clarify.PolicyConstants()
    temperature: float = 0.1
    verifier_passes: tuple[str, ...] = PASSES

    def with_toggles(self, toggles: Toggles) -> AgentConfig:
        return replace(self, toggles=toggles)


@dataclass(frozen=True)
class RoundResult:
    round_id: str
    built_grid: Grid
    correct: bool
    questions_used: int
    score_delta: int
    f1: float
    fallback_used: bool = False
    planner_calls: int = 0
    diagnostics: tuple[str, ...] = ()
    fired_rules: tuple[str, ...] = ()
    question: str | None = None
    answer: str | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "round_id": self.round_id,
            "correct": self.correct,
            "questions_used": self.questions_used,
            "score_delta": self.score_delta,
            "f1": self.f1,
            "fallback_used": self.fallback_used,
            "planner_calls": self.planner_calls,
            "diagnostics": list(self.diagnostics),
            "fired_rules": list(self.fired_rules),
            "question": self.question,
            "answer": self.answer,
            "error": self.error,
            "built_grid": self.built_grid.to_dict(),
        }


_SPEAKER = re.compile(r"^\s*(?:\[?(?:architect|instruction|build(?:er)?)\]?\s*[:>-]\s*)", re.I)


def parse_instruction(message: str) -> str:
    """Strip speaker tags and collapse whitespace."""
    return " ".join(_SPEAKER.sub("", message).split())


def grid_description(grid: Grid, primitives=None) -> str:
    if not len(grid):
        return "grid is empty"
    prims = analyze(grid) if primitives is None else primitives
    lines = [describe(prims)] if prims else ["no structures detected"]
    lines.append("blocks: " + ", ".join(f"{b.color} ({b.x},{b.y},{b.z})" for b in grid.blocks()))
    return "\n".join(lines)


def _interpret_answer(target: str, answer: str):
    if target == "count":
        m = re.search(r"\d+", answer)
        return int(m.group()) if m and int(m.group()) >= 1 else None
    m = _COLOR_RE.search(answer)
    return Color.parse(m.group(1)) if m else None


def _clarify(rnd: ScenarioRound, instruction: str, primitives, agent: AgentConfig, seed: int):
    """Returns (slots, question, answer, note for the planner)."""
    grid = rnd.start_grid
    report = clarify.detect_underspecification(instruction, grid, primitives, agent.constants)
    if not report:
        return {}, None, None, ""
    decisions = clarify.decide(report, grid, primitives, agent.p_a, question_available=agent.toggles.questions)
    slots: dict[str, object] = {}
    question = answer = None
    notes = []
    for d in decisions:
        if d.action == "ask":
            question = d.question
            answer = architect_answer(question, rnd, agent.architect, seed)
            value = _interpret_answer(d.target, answer)
            if value is None:
                value = (
                    clarify.infer_count(grid, d.item.anchor, primitives)
                    if d.target == "count"
                    else clarify.guess_color(d.item, grid)
                )
            notes.append(f"Q: {question} A: {answer}")
        else:
            value = d.fallback_value
        slots.setdefault(d.target, value.value if isinstance(value, Color) else value)
    for k, v in slots.items():
        notes.append(f"use {k} = {v}")
    return slots, question, answer, "; ".join(notes)


class _Attempt:
    """Result of turning one planner response into a grid."""

    def __init__(self, grid=None, failure=None, kind=None, diagnostics=()):
        self.grid = grid
        self.failure = failure
        self.kind = kind  # "parse" | "critical" | "execution" | None
        self.diagnostics = list(diagnostics)


def _build_2d(text, rnd, facts, primitives, agent, last_chance) -> _Attempt:
    start = rnd.start_grid
    try:
        plan = parse_plan(text)
    except PlanParseError as exc:
        return _Attempt(failure=f"plan did not parse: {exc}", kind="parse")
    problems = validate_plan(plan, start.dims)
    diagnostics = []
    if agent.toggles.verifier:
        plan, diags = verify(plan, facts, start, primitives, agent.verifier_passes)
        diagnostics = [f"{d.pass_name}:{d.severity}:{d.message}" for d in diags]
        if needs_replan(diags) and not last_chance:
            return _Attempt(failure=replan_hints(diags), kind="critical", diagnostics=diagnostics)
    if problems and not last_chance:
        return _Attempt(failure="\n".join(problems), kind="critical", diagnostics=diagnostics + problems)
    try:
        grid, _ = execute(plan, start, skip_forward=agent.toggles.skip_forward)
    except VoxplanError as exc:
        return _Attempt(failure=f"execution failed: {exc}", kind="execution", diagnostics=diagnostics)
    return _Attempt(grid=grid, diagnostics=diagnostics)


def _build_3d(text, rnd) -> _Attempt:
    try:
        plan = parse_plan_3d(text)
    except PlanParseError as exc:
        return _Attempt(failure=f"plan did not parse: {exc}", kind="parse")
    try:
        grid, _ = execute_3d(plan, rnd.start_grid)
    except VoxplanError as exc:
        return _Attempt(failure=f"execution failed: {exc}", kind="execution")
    return _Attempt(grid=grid)


def _call(planner: Planner, request: PlanRequest) -> str:
    try:
        return planner.plan(request)
    except TransportError:
        return planner.plan(request)


def run_round(rnd: ScenarioRound, agent: AgentConfig, seed: int = 0) -> RoundResult:
    start = rnd.start_grid
    questions = 0
    question = answer = None
    fallback = False
    calls = 0
    diagnostics: list[str] = []
    fired: list[str] = []
    built = None
    error = None
    try:
        instruction = parse_instruction(rnd.instruction)
        primitives = analyze(start)
        description = grid_description(start, primitives)
        facts = extract_facts(instruction)
        slots, question, answer, note = _clarify(rnd, instruction, primitives, agent, seed)
        questions = 1 if question else 0
        rules = list(agent.rules) if agent.rules is not None else load_rules()
        mode = MODE_2D if agent.toggles.decomposition else MODE_3D
        base = SYSTEM_PROMPT if mode == MODE_2D else SYSTEM_PROMPT_3D
        hits = fired_rules(instruction, rules) if agent.toggles.enrichment else []
        fired = [r.id for r in hits]
        prompt = enrich_prompt(base, hits)
        planner_instruction = instruction + (f"\n[clarified: {note}]" if note else "")
        hints = None
        while calls < MAX_PLANNER_CALLS and built is None:
            calls += 1
            request = PlanRequest(
                round_id=rnd.id,
                instruction=planner_instruction,
                grid_description=description,
                enriched_system_prompt=prompt,
                replan_hints=hints,
                temperature=agent.temperature,
                mode=mode,
                grid=start,
                slots=slots,
                seed=seed,
                attempt=calls,
            )
            try:
                text = _call(agent.planner, request)
            except PlannerError as exc:
                error = f"planner failed: {exc}"
                if mode == MODE_2D:
                    mode, fallback, prompt, hints = MODE_3D, True, SYSTEM_PROMPT_3D, None
                continue
            last = calls == MAX_PLANNER_CALLS
            if mode == MODE_2D:
                attempt = _build_2d(text, rnd, facts, primitives, agent, last)
            else:
                attempt = _build_3d(text, rnd)
            diagnostics.extend(attempt.diagnostics)
            if attempt.grid is not None:
                built = attempt.grid
                error = None
                break
            error = attempt.failure
            if attempt.kind == "execution" and mode == MODE_2D:
                mode, fallback, prompt, hints = MODE_3D, True, SYSTEM_PROMPT_3D, None
            else:
                hints = attempt.failure
    except VoxplanError as exc:
        error = f"pipeline error: {exc}"
    if built is None:
        built = start
    correct = built == rnd.target_grid
    added, _ = grid_diff(start, built)
    f1 = block_f1(added, rnd.new_blocks())
    return RoundResult(
        rnd.id, built, correct, questions, score_delta(correct, questions), f1,
        fallback, calls, tuple(diagnostics), tuple(fired), question, answer, error,
    )


# --- runs and statistics ---------------------------------------------------

@dataclass(frozen=True)
class RunSummary:
    seed: int
    results: tuple[RoundResult, ...]

    @property
    def n_rounds(self) -> int:
        return len(self.results)

    @property
    def correct(self) -> int:
        return sum(r.correct for r in self.results)

    @property
    def accuracy(self) -> float:
        return self.correct / self.n_rounds if self.results else 0.0

    @property
    def score(self) -> int:
        return sum(r.score_delta for r in self.results)

    @property
    def questions(self) -> int:
        return sum(r.questions_used for r in self.results)

    @property
    def mean_f1(self) -> float:
        return mean(r.f1 for r in self.results) if self.results else 0.0

    @property
    def fallbacks(self) -> int:
        return sum(r.fallback_used for r in self.results)

    def to_dict(self, rounds: bool = True) -> dict:
        d = {
            "seed": self.seed,
            "n_rounds": self.n_rounds,
            "correct": self.correct,
            "accuracy": self.accuracy,
            "score": self.score,
            "questions": self.questions,
            "mean_f1": self.mean_f1,
            "fallbacks": self.fallbacks,
        }
        if rounds:
            d["rounds"] = [r.to_dict() for r in self.results]
        return d


@dataclass(frozen=True)
class RunStats:
    runs: tuple[RunSummary, ...]
    label: str = "run"

    @property
    def n_runs(self) -> int:
        return len(self.runs)

    @property
    def n_rounds(self) -> int:
        return self.runs[0].n_rounds if self.runs else 0

    @property
    def accuracies(self) -> list[float]:
        return [r.accuracy for r in self.runs]

    @property
    def accuracy_mean(self) -> float:
        return mean(self.accuracies)

    @property
    def accuracy_sd(self) -> float | None:
        return sample_sd(self.accuracies)

    @property
    def accuracy_ci(self) -> tuple[float, float] | None:
        return ci95(self.accuracies)

    @property
    def score_mean(self) -> float:
        return mean(r.score for r in self.runs)

    @property
    def f1_mean(self) -> float:
        return mean(r.mean_f1 for r in self.runs)

    def to_dict(self, rounds: bool = True) -> dict:
        ci = self.accuracy_ci
        return {
            "label": self.label,
            "n_runs": self.n_runs,
            "n_rounds": self.n_rounds,
            "accuracy": {
                "mean": self.accuracy_mean,
                "sd": self.accuracy_sd,
                "ci95": list(ci) if ci else None,
            },
            "score": self.score_mean,
            "f1": self.f1_mean,
            "runs": [r.to_dict(rounds) for r in self.runs],
        }


def run_once(scenario: Scenario, agent: AgentConfig, seed: int = 0, parallel: bool = False) -> RunSummary:
    if parallel:
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(lambda r: run_round(r, agent, seed), scenario.rounds))
    else:
        results = [run_round(r, agent, seed) for r in scenario.rounds]
    return RunSummary(seed, tuple(results))


def run_scenario(
    scenario: Scenario,
    agent: AgentConfig,
    repeats: int = 1,
    seeds: list[int] | None = None,
    parallel: bool = False,
    label: str = "run",
) -> RunStats:
    seeds = list(range(repeats)) if seeds is None else list(seeds)
    if repeats < 1 or len(seeds) != repeats:
        raise ValueError(f"need one seed per repeat ({repeats} repeats, {len(seeds)} seeds)")
    return RunStats(tuple(run_once(scenario, agent, s, parallel) for s in seeds), label)


def run_ablation(
    scenario: Scenario,
    agent: AgentConfig,
    configs: list[str] | None = None,
    repeats: int = 1,
    seeds: list[int] | None = None,
    parallel: bool = False,
) -> dict[str, RunStats]:
    """One RunStats per configuration, all run on the same seeds."""
    names = list(ABLATIONS) if configs is None else configs
    return {
        name: run_scenario(scenario, agent.with_toggles(ABLATIONS[name]), repeats, seeds, parallel, label=name)
        for name in names
    }


# --- synthetic rounds ------------------------------------------------------

_WORDS = {1: "one", 2: "two", 3: "three", 4: "four"}


def synthetic_scenario(n: int, seed: int = 0, dims: GridDims = GridDims()) -> tuple[Scenario, dict[str, str]]:
    """Random fully-specified rounds with oracle plans, for ablation statistics."""
    rng = random.Random(seed)
    rounds, fixtures = [], {}
    colors = list(Color)
    while len(rounds) < n:
        start = Grid(dims)
        for _ in range(rng.randint(0, 5)):
            x, z = rng.randrange(dims.width), rng.randrange(dims.depth)
            try:
                start = place_block(start, x, z, rng.choice(colors))
            except VoxplanError:
                pass
        actions, sentences = [], []
        for _ in range(rng.randint(1, 3)):
            kind = rng.choice(("place", "stack", "row"))
            color = rng.choice(colors)
            x, z = rng.randrange(dims.width), rng.randrange(dims.depth)
            if kind == "place":
                actions.append(PlanAction("place", Absolute(x, z), color))
                sentences.append(f"Place a {color} block at ({x},{z}).")
            elif kind == "stack":
                k = rng.randint(2, 3)
                actions.append(PlanAction("stack", Absolute(x, z), color, k))
                sentences.append(f"Stack {_WORDS[k]} {color} blocks at ({x},{z}).")
            else:
                k = rng.randint(2, 4)
                d = rng.choice(("east", "west", "north", "south"))
                actions.append(PlanAction("row", Absolute(x, z), color, k, d))
                sentences.append(f"Build a row of {_WORDS[k]} {color} blocks from ({x},{z}) going {d}.")
        plan = Plan(tuple(actions))
        try:
            target, _ = execute(plan, start)
        except VoxplanError:
            continue
        rid = f"syn-{seed}-{len(rounds):04d}"
        rounds.append(ScenarioRound(rid, " ".join(sentences), start, target, {}, ("synthetic",)))
        fixtures[rid] = serialize_plan(plan)
    return Scenario(tuple(rounds), f"synthetic-{seed}"), fixtures
