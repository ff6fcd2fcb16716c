"""CLI behaviour, checked against golden stdout files in tests/golden/."""

import json
from pathlib import Path

import pytest

from voxplan.cli import main

HERE = Path(__file__).parent
INPUTS = HERE / "inputs"
GOLDEN = HERE / "golden"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("argv, golden", [
    (["execute", INPUTS / "two_step_plan.json"], "execute_two_step.json"),
    (["execute", INPUTS / "two_step_plan.json", "--trace"], "execute_two_step_trace.json"),
    (["analyze"], "analyze_empty.json"),
    (["analyze", INPUTS / "t_grid.json"], "analyze_t.json"),
    (["analyze", INPUTS / "stack_grid.json"], "analyze_stack.json"),
    (["verify", INPUTS / "t_bad_plan.json", "--grid", INPUTS / "t_grid.json",
      "--instruction", "Extend the green T-shape by two blocks."], "verify_t.json"),
    (["clarify", "--instruction", "Add some blocks at (2,6)."], "clarify_some.json"),
    (["run", "--no-figures", "--generic-error", "0", "--specific-error", "0", "--repeats", "3"], "run_oracle.txt"),
    (["stats", INPUTS / "full_summary.json", INPUTS / "no_decomp_summary.json"], "stats_reference.json"),
])
def test_golden_stdout(capsys, argv, golden):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out == (GOLDEN / golden).read_text()
    assert out.endswith("\n")


def test_two_step_has_four_red_blocks(capsys):
    _, out, _ = run(capsys, "execute", INPUTS / "two_step_plan.json")
    blocks = json.loads(out)["blocks"]
    assert [(b["x"], b["y"], b["z"], b["color"]) for b in blocks] == [
        (5, 0, 6, "red"), (5, 1, 6, "red"), (5, 2, 6, "red"), (6, 0, 6, "red")]


def test_malformed_plan_exit_2(capsys):
    code, out, err = run(capsys, "execute", INPUTS / "malformed_plan.json")
    assert code == 2 and out == ""
    assert "$.actions[0].count" in err


def test_overflow_exit_3(capsys):
    code, _, err = run(capsys, "execute", INPUTS / "overflow_plan.json")
    assert code == 3 and "action 1" in err


def test_invalid_grid_exit_2(capsys, tmp_path):
    bad = tmp_path / "g.json"
    bad.write_text('{"blocks": [{"x": 0, "y": 2, "z": 0, "color": "red"}]}')
    code, _, err = run(capsys, "analyze", bad)
    assert code == 2 and "floating" in err


def test_clean_plan_verifies_to_identity(capsys):
    code, out, _ = run(capsys, "verify", INPUTS / "row_plan.json",
                       "--instruction", "Build a row of three red blocks from (1,1) going east.")
    assert code == 0
    doc = json.loads(out)
    assert doc["diagnostics"] == []
    assert doc["plan"] == json.loads((INPUTS / "row_plan.json").read_text())


def test_critical_plan_signals_replan(capsys):
    code, out, _ = run(capsys, "verify", INPUTS / "stack_plan.json",
                       "--instruction", "Build a row of three red blocks from (1,1) going east.")
    assert code == 5
    assert json.loads(out)["diagnostics"][0]["severity"] == "critical"


def test_unknown_pass_rejected(capsys):
    code, _, err = run(capsys, "verify", INPUTS / "row_plan.json", "--instruction", "x", "--passes", "bogus")
    assert code == 2 and "bogus" in err


def test_missing_scenario_exit_2(capsys):
    code, _, err = run(capsys, "run", "--scenario", INPUTS / "missing.json")
    assert code == 2 and "not found" in err


def test_run_writes_reports_and_figures(capsys, tmp_path):
    code, _, _ = run(capsys, "run", "--out", tmp_path, "--ablation", "full,-skip-forward",
                     "--subset", "occupied-start", "--repeats", "2")
    assert code == 0
    for name in ("report.json", "summary.txt", "rounds.csv", "accuracy.png", "per_run.png"):
        assert (tmp_path / name).stat().st_size > 0, name
    assert (tmp_path / "accuracy.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    rep = json.loads((tmp_path / "report.json").read_text())
    assert set(rep["configs"]) == {"full", "-skip-forward"}
    csv_lines = (tmp_path / "rounds.csv").read_text().splitlines()
    assert len(csv_lines) == 1 + 2 * 2 * 5


def test_faulty_runs_write_identical_reports(capsys, tmp_path):
    args = ["run", "--planner", "faulty", "--ablation", "all", "--repeats", "2", "--no-figures"]
    run(capsys, *args, "--out", tmp_path / "a")
    run(capsys, *args, "--out", tmp_path / "b")
    for name in ("report.json", "summary.txt", "rounds.csv"):
        assert (tmp_path / "a" / name).read_text() == (tmp_path / "b" / name).read_text()


def test_check_manifest(capsys):
    base = ["run", "--no-figures", "--generic-error", "0", "--specific-error", "0"]
    assert run(capsys, *base, "--check", INPUTS / "check_pass.json")[0] == 0
    code, _, err = run(capsys, *base, "--check", INPUTS / "check_fail.json")
    assert code == 4 and "accuracy" in err


def test_stats_identical_reports_t_zero(capsys, tmp_path):
    run(capsys, "run", "--planner", "faulty", "--repeats", "3", "--no-figures", "--out", tmp_path)
    rep = tmp_path / "report.json"
    code, out, _ = run(capsys, "stats", rep, rep)
    assert code == 0 and json.loads(out)["t"] == 0


def test_stats_single_run_report_errors(capsys, tmp_path):
    run(capsys, "run", "--no-figures", "--out", tmp_path)
    rep = tmp_path / "report.json"
    code, _, err = run(capsys, "stats", rep, rep)
    assert code == 2 and "σ unavailable" in err


def test_stats_on_reference_inputs(capsys):
    _, out, _ = run(capsys, "stats", INPUTS / "full_summary.json", INPUTS / "no_decomp_summary.json")
    doc = json.loads(out)
    assert doc["t"] == pytest.approx(14.3, abs=0.3) and doc["df"] == pytest.approx(13.5, abs=0.2)


def test_remote_planner_needs_env(capsys, monkeypatch):
    monkeypatch.delenv("VOXPLAN_PLANNER_URL", raising=False)
    code, _, err = run(capsys, "run", "--planner", "remote", "--no-figures")
    assert code == 2 and "VOXPLAN_PLANNER_URL" in err


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "voxplan", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("execute", "analyze", "verify", "run", "stats", "clarify"):
        assert cmd in res.stdout
