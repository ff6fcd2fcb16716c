"""Regenerate the bundled scenario, oracle plans and verifier fixtures.

Targets are written out block by block and checked against what the oracle
plan builds, so a fixture can only be committed if the two agree.

    python3 tools/author_fixtures.py
"""

from __future__ import annotations

import json
import string
from pathlib import Path

from voxplan.executor import execute
from voxplan.grid import Grid
from voxplan.plan import parse_plan

DATA = Path(__file__).resolve().parents[1] / "src" / "voxplan" / "data"


def grid(*specs):
    return Grid.from_dict({"blocks": blocks_(*specs)})


def blocks_(*specs):
    return [{"x": x, "y": y, "z": z, "color": c} for x, y, z, c in specs]


def act(kind, anchor, color, count=1, direction=None):
    d = {"kind": kind, "anchor": anchor, "color": color, "count": count}
    if direction:
        d["direction"] = direction
    return d


def at(x, z):
    return {"x": x, "z": z}


def prev(offset=None):
    return {"step": "previous", **({"offset": offset} if offset else {})}


def ref(color, offset=None):
    return {"color": color, **({"offset": offset} if offset else {})}


GREEN_ROW = [(2, 0, 2, "green"), (3, 0, 2, "green"), (4, 0, 2, "green")]
ORANGE_ROW = [(3, 0, 6, "orange"), (4, 0, 6, "orange"), (5, 0, 6, "orange")]
BLUE_L = [(2, 0, 2, "blue"), (3, 0, 2, "blue"), (4, 0, 2, "blue"), (2, 0, 3, "blue"), (2, 0, 4, "blue")]
GREEN_T = [(x, 0, 2, "green") for x in range(2, 7)] + [(4, 0, 3, "green"), (4, 0, 4, "green")]

# (id, tags, instruction, start blocks, new blocks, oracle plan)
ROUNDS = [
    ("r01", ["place"], "Place a red block at (4,4).",
     [], [(4, 0, 4, "red")],
     [act("place", at(4, 4), "red")]),
    ("r02", ["stack", "place"], "Stack three red blocks at (5,6), then place a red block at (6,6).",
     [], [(5, 0, 6, "red"), (5, 1, 6, "red"), (5, 2, 6, "red"), (6, 0, 6, "red")],
     [act("stack", at(5, 6), "red", 3), act("place", at(6, 6), "red")]),
    ("r03", ["row"], "Build a row of four blue blocks starting at (1,2) going east.",
     [], [(1, 0, 2, "blue"), (2, 0, 2, "blue"), (3, 0, 2, "blue"), (4, 0, 2, "blue")],
     [act("row", at(1, 2), "blue", 4, "east")]),
    ("r04", ["in-front"], "Place a yellow block in front of the red block.",
     [(3, 0, 3, "red")], [(3, 0, 4, "yellow")],
     [act("place", ref("red", "in-front"), "yellow")]),
    ("r05", ["chain", "in-front"], "Place a red block at (6,3), then put a yellow block in front of the red one.",
     [(1, 0, 1, "red")], [(6, 0, 3, "red"), (6, 0, 4, "yellow")],
     [act("place", at(6, 3), "red"), act("place", prev("in-front"), "yellow")]),
    ("r06", ["occupied-start", "row", "extend"], "Extend the green row east by two blocks.",
     GREEN_ROW, [(5, 0, 2, "green"), (6, 0, 2, "green")],
     [act("extend", ref("green"), "green", 2, "east")]),
    ("r07", ["occupied-start", "row", "extend", "each-end"],
     "Extend the orange row west by one block, then put a purple block on each end.",
     ORANGE_ROW, [(2, 0, 6, "orange"), (2, 1, 6, "purple"), (5, 1, 6, "purple")],
     [act("extend", ref("orange"), "orange", 1, "west"), act("place", at(2, 6), "purple"),
      act("place", at(5, 6), "purple")]),
    ("r08", ["occupied-start", "l-shape", "extend"], "Extend the east arm of the blue L-shape by two blocks.",
     BLUE_L, [(5, 0, 2, "blue"), (6, 0, 2, "blue")],
     [act("extend", at(4, 2), "blue", 2, "east")]),
    ("r09", ["occupied-start", "t-shape", "extend"], "Extend the stem of the green T-shape by two blocks.",
     GREEN_T, [(4, 0, 5, "green"), (4, 0, 6, "green")],
     [act("extend", at(4, 4), "green", 2, "south")]),
    ("r10", ["occupied-start", "t-shape", "extend", "each-end"],
     "Extend the stem of the green T-shape by one block, then place a purple block on each end of the T's arms.",
     GREEN_T, [(4, 0, 5, "green"), (2, 1, 2, "purple"), (6, 1, 2, "purple")],
     [act("extend", at(4, 4), "green", 1, "south"), act("place", at(2, 2), "purple"),
      act("place", at(6, 2), "purple")]),
    ("r11", ["underspecified-count", "stack"], "Add a stack of green blocks at (4,3), next to the red stack.",
     [(3, 0, 3, "red"), (3, 1, 3, "red"), (3, 2, 3, "red")],
     [(4, y, 3, "green") for y in range(4)],
     '{"actions":[{"anchor":{"x":4,"z":3},"color":"green","count":$count,"kind":"stack"}]}'),
    ("r12", ["underspecified-color"], "Place a block at (4,4).",
     [], [(4, 0, 4, "orange")],
     '{"actions":[{"anchor":{"x":4,"z":4},"color":"$color","count":1,"kind":"place"}]}'),
    ("r13", ["inferable-color"], "Next to the yellow block, at (6,1), place a block of the same color.",
     [(5, 0, 1, "yellow")], [(6, 0, 1, "yellow")],
     [act("place", at(6, 1), "yellow")]),
    ("r14", ["underspecified-color", "underspecified-count"], "Add some blocks at (2,6).",
     [], [(2, y, 6, "purple") for y in range(3)],
     '{"actions":[{"anchor":{"x":2,"z":6},"color":"$color","count":$count,"kind":"stack"}]}'),
    ("r15", ["row"], "Build a row of three orange blocks from (7,7) going west.",
     [], [(7, 0, 7, "orange"), (6, 0, 7, "orange"), (5, 0, 7, "orange")],
     [act("row", at(7, 7), "orange", 3, "west")]),
    ("r16", ["stack"], "Stack two more blue blocks on the blue stack at (1,7).",
     [(1, 0, 7, "blue"), (1, 1, 7, "blue")], [(1, 2, 7, "blue"), (1, 3, 7, "blue")],
     [act("stack", at(1, 7), "blue", 2)]),
    ("r17", ["behind"], "Place an orange block behind the purple block.",
     [(4, 0, 6, "purple")], [(4, 0, 5, "orange")],
     [act("place", ref("purple", "behind"), "orange")]),
    ("r18", ["chain", "in-front", "stack"], "Place a blue block at (2,2), then stack two yellow blocks in front of it.",
     [], [(2, 0, 2, "blue"), (2, 0, 3, "yellow"), (2, 1, 3, "yellow")],
     [act("place", at(2, 2), "blue"), act("stack", prev("in-front"), "yellow", 2)]),
    ("r19", ["underspecified-count", "stack"], "Add a tower at (6,6) matching the height of the orange tower beside it.",
     [(7, y, 6, "orange") for y in range(4)], [(6, y, 6, "orange") for y in range(4)],
     '{"actions":[{"anchor":{"x":6,"z":6},"color":"orange","count":$count,"kind":"stack"}]}'),
    ("r20", ["l-shape", "row"],
     "Build an L-shape: a row of three red blocks from (1,5) going east and a row of two red blocks from (1,6) going south.",
     [], [(1, 0, 5, "red"), (2, 0, 5, "red"), (3, 0, 5, "red"), (1, 0, 6, "red"), (1, 0, 7, "red")],
     [act("row", at(1, 5), "red", 3, "east"), act("row", at(1, 6), "red", 2, "south")]),
]

# slot values a rational architect would give, used only to check templated plans
ORACLE_SLOTS = {"r11": {"count": 4}, "r12": {"color": "orange"}, "r14": {"color": "purple", "count": 3},
                "r19": {"count": 4}}

# pass name -> (instruction, start blocks, known-bad plan, target new blocks)
VERIFIER_FIXTURES = {
    "direction_consistency": (
        "Build a row of three blue blocks from (2,4) going east.",
        [], [act("row", at(2, 4), "blue", 3, "west")],
        [(2, 0, 4, "blue"), (3, 0, 4, "blue"), (4, 0, 4, "blue")],
    ),
    "endpoint_cap": (
        "Extend the orange row west by one block, then put a purple block on each end.",
        ORANGE_ROW,
        [act("extend", ref("orange"), "orange", 1, "west"), act("place", at(3, 6), "purple"),
         act("place", at(5, 6), "purple")],
        [(2, 0, 6, "orange"), (2, 1, 6, "purple"), (5, 1, 6, "purple")],
    ),
    "t_shape_extend": (
        "Extend the green T-shape by two blocks.",
        GREEN_T, [act("extend", at(6, 2), "green", 2, "east")],
        [(4, 0, 5, "green"), (4, 0, 6, "green")],
    ),
    "stacking_plausibility": (
        "Stack four green blocks on top of the red tower at (1,1).",
        [(1, 0, 1, "red"), (1, 1, 1, "red")], [act("stack", at(1, 1), "green", 4)],
        [(1, 2, 1, "green"), (1, 3, 1, "green"), (1, 4, 1, "green")],
    ),
}

ENRICHMENT_POSITIVES = {
    "in-front-of": "Place a green block in front of the yellow stack.",
    "each-end-after-extend": "Extend the blue row east by two, then add a red block at each end.",
    "l-shape-extend": "Extend the long arm of the orange L-shape by one block.",
    "chain-reference": "Build a purple stack at (3,3) and put a blue block beside the purple one.",
    "t-shape-extend": "Extend the purple T-shape by three blocks.",
}
DOUBLE_FIRE = ("Put a yellow block in front of the red one.", ["chain-reference", "in-front-of"])

CONTROL_CORPUS = [
    "Place a red block at (4,4).",
    "Stack three blue blocks at (2,5).",
    "Build a row of four green blocks from (1,1) going east.",
    "Put a yellow block on top of the orange tower.",
    "Add two purple blocks to the north of the blue block.",
    "Build a column of five red blocks at (8,8).",
    "Place an orange block behind the green stack.",
    "Make a line of three yellow blocks along z starting at (6,0).",
    "Add a blue block next to each red block.",
    "Build a tower of two purple blocks at (0,0).",
    "Place a green block to the west of the yellow row.",
    "Stack one more red block on the red stack.",
    "Build a square of four orange blocks at (3,3), (4,3), (3,4) and (4,4).",
    "Put the blue block at the end of the row.",
    "Remove nothing; just add a yellow block at (5,5).",
    "Lay a row of two red blocks from (7,2) heading south.",
    "Place a purple block beside the orange one-block stack.",
    "Cap the green tower with a blue block.",
    "Add a red block directly east of (2,2).",
    "Build a short wall of three blue blocks from (0,8) going east.",
]


def check(start, new, plan, slots=None):
    start_grid = grid(*start)
    target = grid(*start, *new)
    text = plan if isinstance(plan, str) else json.dumps({"actions": plan})
    if slots:
        text = string.Template(text).substitute({k: str(v) for k, v in slots.items()})
    built, _ = execute(parse_plan(text), start_grid)
    assert built == target, f"oracle plan builds {built.to_dict()}\nexpected {target.to_dict()}"
    return start_grid, target


def main():
    rounds, oracle = [], {}
    for rid, tags, instruction, start, new, plan in ROUNDS:
        s, t = check(start, new, plan, ORACLE_SLOTS.get(rid))
        rounds.append({
            "id": rid, "tags": tags, "instruction": instruction,
            "start_grid": {"blocks": blocks_(*start)}, "target_grid": {"blocks": blocks_(*start, *new)},
            "architect_info": {},
        })
        oracle[rid] = plan if isinstance(plan, str) else {"actions": plan}
    scenario = {"name": "bundled-20", "dims": {"width": 9, "height": 5, "depth": 9}, "rounds": rounds}

    fixtures = {}
    for name, (instruction, start, bad, new) in VERIFIER_FIXTURES.items():
        fixtures[name] = {
            "instruction": instruction,
            "start_grid": {"blocks": blocks_(*start)},
            "bad_plan": {"actions": bad},
            "target_grid": {"blocks": blocks_(*start, *new)},
        }
    enrichment = {"positives": ENRICHMENT_POSITIVES, "double_fire": {"instruction": DOUBLE_FIRE[0],
                  "rules": DOUBLE_FIRE[1]}, "control": CONTROL_CORPUS}

    for name, doc in [("scenario.json", scenario), ("oracle_plans.json", oracle),
                      ("verifier_fixtures.json", fixtures), ("enrichment_fixtures.json", enrichment)]:
        (DATA / name).write_text(json.dumps(doc, indent=1) + "\n")
        print("wrote", DATA / name)


if __name__ == "__main__":
    main()
