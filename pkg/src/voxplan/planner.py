"""Planner boundary: turns a request into plan text.

Three implementations share the ``plan(request) -> str`` contract:

* :class:`ScriptedPlanner` looks plans up by round id (offline fixtures).
* :class:`FaultyPlanner` wraps another planner and injects seeded errors.
* :class:`RemotePlanner` calls an OpenAI-compatible chat-completions route.

Returned text is not guaranteed to parse; callers validate it.
"""

from __future__ import annotations

import json
import logging
import os
import random
import socket
import string
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Protocol

from .errors import FixtureError, PlannerTimeout, TransportError, VoxplanError
from .executor import lower_to_3d
from .grid import COLOR_NAMES, Grid
from .plan import DIRECTIONS, OPPOSITE, parse_plan, serialize_plan_3d

log = logging.getLogger(__name__)

MODE_2D = "2.5d"
MODE_3D = "3d"

SYSTEM_PROMPT = """You are a block-building planner on a 9x5x9 grid (x = width, z = depth).
Return JSON {"actions": [...]} where each action has kind (place | stack | row | extend),
anchor ({"x","z"} | {"step": k or "previous", "offset"?} | {"color", "offset"?}),
color, count, and direction (row/extend only: north, south, east, west, in-front, behind).
Never give a y coordinate: heights are computed from what is already in each column.

Example: "stack 3 red at (5,6), place red at (6,6)" ->
{"actions": [{"kind": "stack", "anchor": {"x": 5, "z": 6}, "color": "red", "count": 3},
             {"kind": "place", "anchor": {"x": 6, "z": 6}, "color": "red", "count": 1}]}"""

SYSTEM_PROMPT_3D = """You are a block-building agent on a 9x5x9 grid (x = width, y = height, z = depth).
Blocks need support: y = 0 or a block directly below. Return JSON
{"blocks": [{"x": .., "y": .., "z": .., "color": ..}, ...]} listing only the new blocks."""


@dataclass(frozen=True)
class PlanRequest:
    round_id: str
    instruction: str
    grid_description: str = ""
    enriched_system_prompt: str = SYSTEM_PROMPT
    replan_hints: str | None = None
    temperature: float = 0.1
    mode: str = MODE_2D
    grid: Grid | None = None
    slots: dict = field(default_factory=dict)
    seed: int = 0
    attempt: int = 1

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.mode not in (MODE_2D, MODE_3D):
            raise ValueError(f"unknown planner mode {self.mode!r}")


class Planner(Protocol):
    def plan(self, request: PlanRequest) -> str: ...


def _fill(text: str, slots: dict) -> str:
    # count slots are bare numbers, color slots sit inside quotes in the fixture
    return string.Template(text).safe_substitute({k: str(v) for k, v in slots.items()})


class ScriptedPlanner:
    """Replays fixture plans keyed by round id.

    Fixture text may contain ``$count`` / ``$color`` placeholders filled from
    ``request.slots`` (clarification answers or heuristic guesses). In
    direct-3D mode the 2-D fixture is lowered to explicit placements unless a
    3-D fixture exists for the round.
    """

    def __init__(self, fixtures: dict[str, str], fixtures_3d: dict[str, str] | None = None):
        self.fixtures = dict(fixtures)
        self.fixtures_3d = dict(fixtures_3d or {})

    def plan(self, request: PlanRequest) -> str:
        rid = request.round_id
        if request.mode == MODE_3D and rid in self.fixtures_3d:
            return _fill(self.fixtures_3d[rid], request.slots)
        if rid not in self.fixtures:
            raise FixtureError(f"no fixture plan for round {rid!r}")
        text = _fill(self.fixtures[rid], request.slots)
        if request.mode == MODE_3D:
            if request.grid is None:
                raise FixtureError("direct-3D lowering needs the start grid")
            try:
                return serialize_plan_3d(lower_to_3d(parse_plan(text), request.grid))
            except VoxplanError:
                return text
        return text


def scripted_planner(fixtures: dict[str, str], fixtures_3d: dict[str, str] | None = None) -> ScriptedPlanner:
    return ScriptedPlanner(fixtures, fixtures_3d)


@dataclass(frozen=True)
class ErrorProfile:
    """Per-plan probabilities of each error type.

    ``xz``, ``color``, ``count`` and ``direction`` errors can happen in either
    mode. ``y``, ``duplicate`` and ``height`` errors need explicit vertical
    coordinates and therefore only show up in direct-3D output.
    """

    xz: float = 0.0
    color: float = 0.0
    count: float = 0.0
    direction: float = 0.0
    y: float = 0.0
    duplicate: float = 0.0
    height: float = 0.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"error rate {name} must be in [0, 1], got {value}")

    @classmethod
    def from_dict(cls, doc: dict) -> ErrorProfile:
        return cls(**{k: float(v) for k, v in doc.items()})

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# Bundled profile for ablation runs.
DEFAULT_PROFILE = ErrorProfile(xz=0.03, color=0.02, count=0.03, direction=0.02, y=0.35, duplicate=0.1, height=0.15)


def _other_color(rng: random.Random, current: str) -> str:
    return rng.choice([c for c in COLOR_NAMES if c != current])


class FaultyPlanner:
    def __init__(self, base: Planner, profile: ErrorProfile, seed: int = 0):
        self.base = base
        self.profile = profile
        self.seed = seed

    def _rng(self, request: PlanRequest) -> random.Random:
        return random.Random(f"{self.seed}:{request.seed}:{request.round_id}:{request.attempt}:{request.mode}")

    def plan(self, request: PlanRequest) -> str:
        text = self.base.plan(request)
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            return text
        rng = self._rng(request)
        if request.mode == MODE_3D and isinstance(doc, dict) and isinstance(doc.get("blocks"), list):
            self._perturb_3d(doc["blocks"], rng)
        elif isinstance(doc, dict) and isinstance(doc.get("actions"), list):
            self._perturb_2d(doc["actions"], rng)
        else:
            return text
        return json.dumps(doc, sort_keys=True)

    def _perturb_2d(self, actions: list, rng: random.Random) -> None:
        p = self.profile
        # draw every rate so the random stream does not depend on which errors fire
        draws = [rng.random() for _ in range(4)]
        if not actions:
            return
        if draws[0] < p.xz:
            act = rng.choice(actions)
            anchor = act.get("anchor", {})
            if "x" in anchor:
                axis = rng.choice(("x", "z"))
                anchor[axis] += rng.choice((-1, 1))
            else:
                anchor["offset"] = rng.choice(sorted(DIRECTIONS))
        if draws[1] < p.color:
            act = rng.choice(actions)
            act["color"] = _other_color(rng, act.get("color"))
        if draws[2] < p.count:
            multi = [a for a in actions if a.get("kind") != "place"]
            if multi:
                act = rng.choice(multi)
                act["count"] = max(1, act.get("count", 1) + rng.choice((-1, 1)))
        if draws[3] < p.direction:
            directed = [a for a in actions if a.get("direction") in OPPOSITE]
            if directed:
                act = rng.choice(directed)
                act["direction"] = OPPOSITE[act["direction"]]

    def _perturb_3d(self, blocks: list, rng: random.Random) -> None:
        p = self.profile
        draws = [rng.random() for _ in range(6)]
        if not blocks:
            return
        if draws[0] < p.xz:
            b = rng.choice(blocks)
            b[rng.choice(("x", "z"))] += rng.choice((-1, 1))
        if draws[1] < p.color:
            b = rng.choice(blocks)
            b["color"] = _other_color(rng, b.get("color"))
        if draws[2] < p.y:
            b = rng.choice(blocks)
            b["y"] += rng.choice((-1, 1))
        if draws[3] < p.duplicate:
            blocks.append(dict(rng.choice(blocks)))
        if draws[4] < p.height:
            b = rng.choice(blocks)
            column = [c for c in blocks if c["x"] == b["x"] and c["z"] == b["z"]]
            top = max(column, key=lambda c: c["y"])
            if rng.random() < 0.5 and len(column) > 1:
                blocks.remove(top)
            else:
                blocks.append({**top, "y": top["y"] + 1})
        if draws[5] < p.count and len(blocks) > 1:
            blocks.remove(rng.choice(blocks))


def faulty_planner(base: Planner, profile: ErrorProfile, seed: int = 0) -> FaultyPlanner:
    return FaultyPlanner(base, profile, seed)


ENV_URL = "VOXPLAN_PLANNER_URL"
ENV_MODEL = "VOXPLAN_PLANNER_MODEL"
ENV_TOKEN = "VOXPLAN_PLANNER_TOKEN"


class RemotePlanner:
    """Chat-completions client; one request per ``plan`` call."""

    def __init__(
        self,
        endpoint: str,
        model_name: str,
        temperature: float = 0.1,
        credentials: str | None = None,
        timeout: float = 120.0,
        trace: bool = False,
    ):
        self.url = endpoint.rstrip("/")
        if not self.url.endswith("/chat/completions"):
            self.url += "/chat/completions"
        self.model_name = model_name
        self.temperature = temperature
        self._credentials = credentials
        self.timeout = timeout
        self.trace = trace

    @classmethod
    def from_env(cls, **kwargs) -> RemotePlanner:
        try:
            endpoint = os.environ[ENV_URL]
        except KeyError:
            raise TransportError(f"set {ENV_URL} to use the remote planner") from None
        return cls(endpoint, os.environ.get(ENV_MODEL, "gpt-4o-mini"), credentials=os.environ.get(ENV_TOKEN), **kwargs)

    def build_body(self, request: PlanRequest) -> dict:
        user = request.instruction
        if request.grid_description:
            user += "\n\nCurrent grid:\n" + request.grid_description
        if request.replan_hints:
            user += "\n\nYour previous plan had these problems:\n" + request.replan_hints
        return {
            "model": self.model_name,
            "temperature": self.temperature,
            "messages": [
                {"role": "system", "content": request.enriched_system_prompt},
                {"role": "user", "content": user},
            ],
        }

    def plan(self, request: PlanRequest) -> str:
        body = json.dumps(self.build_body(request)).encode()
        headers = {"Content-Type": "application/json"}
        if self._credentials:
            headers["Authorization"] = f"Bearer {self._credentials}"
        req = urllib.request.Request(self.url, data=body, headers=headers, method="POST")
        if self.trace:
            log.info("planner request: %s", body.decode())
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = resp.read().decode()
        except urllib.error.HTTPError as exc:
            raise TransportError(f"planner returned HTTP {exc.code}", status=exc.code) from None
        except (socket.timeout, TimeoutError):
            raise PlannerTimeout(f"planner timed out after {self.timeout}s") from None
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, (socket.timeout, TimeoutError)):
                raise PlannerTimeout(f"planner timed out after {self.timeout}s") from None
            raise TransportError(f"planner unreachable: {exc.reason}") from None
        if self.trace:
            log.info("planner response: %s", payload)
        try:
            return json.loads(payload)["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError):
            raise TransportError("malformed completion response") from None


def remote_planner(endpoint: str, model_name: str, temperature: float = 0.1, credentials: str | None = None,
                   **kwargs) -> RemotePlanner:
    return RemotePlanner(endpoint, model_name, temperature, credentials, **kwargs)
