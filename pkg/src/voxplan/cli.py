"""Command-line front end.

Each subcommand reads its inputs, calls one library operation and prints
stable-ordered JSON (or the summary table for ``run``).

Exit codes: 0 ok, 2 input error, 3 execution error, 4 check failure,
5 verifier asked for a re-plan.
"""

from __future__ import annotations

import argparse
import json
import logging
import operator
import sys
from pathlib import Path

from . import clarify as clarify_mod
from .analyzer import analyze, describe
from .enrichment import load_rules
from .errors import ExecutionError, InputError, PlannerError, VoxplanError
from .executor import execute, execute_3d
from .grid import Grid, IGLU_DIMS, empty_grid
from .harness import (
    ABLATIONS,
    AgentConfig,
    ArchitectModel,
    bundled_fixtures,
    bundled_scenario,
    load_fixtures,
    load_scenario,
    run_ablation,
    synthetic_scenario,
)
from .plan import parse_plan, parse_plan_3d, serialize_plan
from .planner import DEFAULT_PROFILE, ErrorProfile, FaultyPlanner, RemotePlanner, ScriptedPlanner
from .report import compare, dumps, load_summary, summary_table, write_report
from .verifier import PASSES, extract_facts, needs_replan, verify

EXIT_OK, EXIT_INPUT, EXIT_EXEC, EXIT_CHECK, EXIT_REPLAN = 0, 2, 3, 4, 5

log = logging.getLogger("voxplan")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None


def _grid(path: str | None, iglu: bool = False) -> Grid:
    if path is None:
        return empty_grid(IGLU_DIMS) if iglu else empty_grid()
    return Grid.from_json(_read(path))


def _emit(doc) -> None:
    sys.stdout.write(dumps(doc))


def cmd_execute(args) -> int:
    grid = _grid(args.grid, args.iglu)
    text = _read(args.plan)
    if args.direct_3d:
        built, trace = execute_3d(parse_plan_3d(text), grid)
    else:
        built, trace = execute(parse_plan(text), grid, skip_forward=not args.no_skip_forward)
    doc = built.to_dict()
    if args.trace:
        doc = {"grid": doc, "trace": trace.to_dict()}
    _emit(doc)
    return EXIT_OK


def cmd_analyze(args) -> int:
    prims = analyze(_grid(args.grid, args.iglu))
    _emit({"primitives": [p.to_dict() for p in prims], "description": describe(prims)})
    return EXIT_OK


def cmd_verify(args) -> int:
    grid = _grid(args.grid, args.iglu)
    plan = parse_plan(_read(args.plan))
    passes = tuple(args.passes.split(",")) if args.passes else PASSES
    unknown = set(passes) - set(PASSES)
    if unknown:
        raise InputError(f"unknown verifier pass(es): {', '.join(sorted(unknown))}")
    fixed, diags = verify(plan, extract_facts(args.instruction), grid, enabled=passes)
    _emit({"plan": json.loads(serialize_plan(fixed)), "diagnostics": [d.to_dict() for d in diags]})
    return EXIT_REPLAN if needs_replan(diags) else EXIT_OK


def cmd_clarify(args) -> int:
    grid = _grid(args.grid, args.iglu)
    prims = analyze(grid)
    report = clarify_mod.detect_underspecification(args.instruction, grid, prims)
    decisions = clarify_mod.decide(report, grid, prims, args.p_a, question_available=not args.no_questions)
    _emit({"items": [i.to_dict() for i in report.items], "decisions": [d.to_dict() for d in decisions]})
    return EXIT_OK


def _planner(args, fixtures):
    if args.planner == "remote":
        return RemotePlanner.from_env(temperature=args.temperature, trace=args.trace)
    base = ScriptedPlanner(fixtures)
    if args.planner == "faulty":
        profile = DEFAULT_PROFILE
        if args.profile:
            try:
                profile = ErrorProfile.from_dict(json.loads(_read(args.profile)))
            except (json.JSONDecodeError, TypeError, ValueError) as exc:
                raise InputError(f"bad error profile: {exc}") from None
        return FaultyPlanner(base, profile, seed=args.planner_seed)
    return base


_OPS = {">=": operator.ge, ">": operator.gt, "<=": operator.le, "<": operator.lt, "==": operator.eq}
_METRICS = {
    "accuracy": lambda s: s.accuracy_mean,
    "sd": lambda s: s.accuracy_sd,
    "score": lambda s: s.score_mean,
    "f1": lambda s: s.f1_mean,
}


def check_manifest(manifest: dict, configs) -> list[str]:
    """Evaluate ``{"checks": [{"config", "metric", "op", "value"}]}``; returns failure messages."""
    failures = []
    for i, c in enumerate(manifest.get("checks", [])):
        name = c.get("config", next(iter(configs)))
        metric, op, want = c.get("metric"), c.get("op", ">="), c.get("value")
        if name not in configs or metric not in _METRICS or op not in _OPS or want is None:
            raise InputError(f"$.checks[{i}]: malformed check {c!r}")
        got = _METRICS[metric](configs[name])
        ok = got is not None and _OPS[op](got, want)
        if not ok:
            failures.append(f"{name}: {metric} = {got} fails {op} {want}")
    return failures


def cmd_run(args) -> int:
    if args.synthetic:
        scenario, fixtures = synthetic_scenario(args.synthetic, args.synthetic_seed)
    else:
        scenario = load_scenario(args.scenario) if args.scenario else bundled_scenario()
        fixtures = load_fixtures(args.fixtures) if args.fixtures else bundled_fixtures()
    if args.subset:
        scenario = scenario.subset(args.subset)
        if not len(scenario):
            raise InputError(f"no rounds tagged {args.subset!r}")
    seeds = args.seeds if args.seeds else list(range(args.repeats))
    if args.seeds and len(args.seeds) != args.repeats and args.repeats != 1:
        raise InputError("--seeds must list one seed per repeat")
    configs = args.ablation.split(",") if args.ablation else ["full"]
    if configs == ["all"]:
        configs = list(ABLATIONS)
    bad = [c for c in configs if c not in ABLATIONS]
    if bad:
        raise InputError(f"unknown configuration(s) {', '.join(bad)}; choose from {', '.join(ABLATIONS)}")
    agent = AgentConfig(
        planner=_planner(args, fixtures),
        architect=ArchitectModel(args.generic_error, args.specific_error, args.architect_seed),
        rules=tuple(load_rules(args.rules)) if args.rules else None,
        temperature=args.temperature,
    )
    results = run_ablation(scenario, agent, configs, len(seeds), seeds, parallel=args.parallel)
    sys.stdout.write(summary_table(results))
    if args.out:
        meta = {"scenario": scenario.name, "seeds": seeds, "planner": args.planner}
        for p in write_report(results, args.out, meta, figures=not args.no_figures):
            log.info("wrote %s", p)
    if args.check:
        failures = check_manifest(json.loads(_read(args.check)), results)
        for f in failures:
            print(f"check failed: {f}", file=sys.stderr)
        if failures:
            return EXIT_CHECK
    return EXIT_OK


def cmd_stats(args) -> int:
    a = load_summary(args.report_a, args.config_a)
    b = load_summary(args.report_b, args.config_b)
    _emit(compare(a, b))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="voxplan", description="Gravity-aware block-building planner toolkit.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def grid_opts(sp, required=False):
        sp.add_argument("--grid", required=required, help="grid JSON file ('-' for stdin); default empty 9x5x9")
        sp.add_argument("--iglu", action="store_true", help="default to an empty 11x9x11 grid")

    sp = sub.add_parser("execute", help="run a plan on a grid and print the result")
    sp.add_argument("plan", help="plan JSON file ('-' for stdin)")
    grid_opts(sp)
    sp.add_argument("--trace", action="store_true", help="include the per-action execution trace")
    sp.add_argument("--direct-3d", action="store_true", help="plan lists explicit x, y, z blocks")
    sp.add_argument("--no-skip-forward", action="store_true", help="disable the same-color extend rule")
    sp.set_defaults(func=cmd_execute)

    sp = sub.add_parser("analyze", help="detect rows, stacks, L and T shapes")
    sp.add_argument("grid", nargs="?", help="grid JSON file; default empty grid")
    sp.add_argument("--iglu", action="store_true")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("verify", help="apply verifier passes to a plan")
    sp.add_argument("plan")
    sp.add_argument("--instruction", required=True)
    grid_opts(sp)
    sp.add_argument("--passes", help=f"comma-separated subset of {','.join(PASSES)}")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("clarify", help="show the ask-or-guess decision for an instruction")
    sp.add_argument("--instruction", required=True)
    grid_opts(sp)
    sp.add_argument("--p-a", type=float, default=1.0, help="probability the answer is correct (default 1.0)")
    sp.add_argument("--no-questions", action="store_true", help="question budget exhausted")
    sp.set_defaults(func=cmd_clarify)

    sp = sub.add_parser("run", help="run a scenario and write reports")
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--scenario", help="scenario JSON; default the bundled 20-round suite")
    src.add_argument("--synthetic", type=int, metavar="N", help="generate N synthetic rounds instead")
    sp.add_argument("--synthetic-seed", type=int, default=0)
    sp.add_argument("--fixtures", help="oracle plan fixtures keyed by round id")
    sp.add_argument("--subset", help="only rounds carrying this tag (e.g. occupied-start)")
    sp.add_argument("--planner", choices=("oracle", "faulty", "remote"), default="oracle")
    sp.add_argument("--profile", help="error profile JSON for --planner faulty")
    sp.add_argument("--planner-seed", type=int, default=0)
    sp.add_argument("--temperature", type=float, default=0.1)
    sp.add_argument("--repeats", type=int, default=1)
    sp.add_argument("--seeds", type=int, nargs="+")
    sp.add_argument("--ablation", help="comma-separated configurations or 'all'")
    sp.add_argument("--generic-error", type=float, default=0.23, help="architect error rate, generic questions")
    sp.add_argument("--specific-error", type=float, default=0.05, help="architect error rate, color-specific questions")
    sp.add_argument("--architect-seed", type=int, default=0)
    sp.add_argument("--rules", help="enrichment rule file replacing the bundled rules")
    sp.add_argument("--out", help="directory for report.json, summary.txt, rounds.csv and figures")
    sp.add_argument("--no-figures", action="store_true")
    sp.add_argument("--check", help="threshold manifest; exit 4 if any check fails")
    sp.add_argument("--parallel", action="store_true", help="run rounds concurrently")
    sp.add_argument("--trace", action="store_true", help="log remote planner traffic")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("stats", help="Welch t-test between two reports")
    sp.add_argument("report_a")
    sp.add_argument("report_b")
    sp.add_argument("--config-a")
    sp.add_argument("--config-b")
    sp.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ExecutionError as exc:
        print(f"execution error: {exc}", file=sys.stderr)
        return EXIT_EXEC
    except (InputError, PlannerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VoxplanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXEC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
