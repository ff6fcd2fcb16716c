"""Serialized run reports: JSON, a plain-text table and a per-round CSV."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .errors import InputError
from .harness import RunStats
from .stats import WelchResult, cohens_d, welch_t

REPORT_VERSION = 1


def report_dict(configs: dict[str, RunStats], meta: dict | None = None) -> dict:
    return {
        "version": REPORT_VERSION,
        "meta": meta or {},
        "configs": {name: stats.to_dict() for name, stats in configs.items()},
    }


def dumps(doc) -> str:
    """Stable-ordered JSON with a trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _pct(v: float | None) -> str:
    return "-" if v is None else f"{100 * v:.1f}"


def summary_table(configs: dict[str, RunStats]) -> str:
    """Config / Acc. / sigma / 95% CI / Score / F1 / Delta, one row per configuration."""
    header = ("Config", "Runs", "Acc.", "σ", "95% CI", "Score", "F1", "Δ")
    base = next(iter(configs.values())).accuracy_mean if configs else 0.0
    rows = []
    for i, (name, s) in enumerate(configs.items()):
        ci = s.accuracy_ci
        rows.append((
            name,
            str(s.n_runs),
            _pct(s.accuracy_mean),
            _pct(s.accuracy_sd),
            "-" if ci is None else f"[{_pct(ci[0])}, {_pct(ci[1])}]",
            f"{s.score_mean:+.1f}",
            f"{s.f1_mean:.3f}",
            "-" if i == 0 else f"{100 * (s.accuracy_mean - base):+.1f}",
        ))
    widths = [max(len(r[c]) for r in [header, *rows]) for c in range(len(header))]
    fmt = lambda r: "  ".join(v.ljust(w) if c == 0 else v.rjust(w) for c, (v, w) in enumerate(zip(r, widths)))
    lines = [fmt(header), "  ".join("-" * w for w in widths)]
    lines += [fmt(r) for r in rows]
    return "\n".join(lines) + "\n"


CSV_FIELDS = ("config", "seed", "round_id", "correct", "questions_used", "score_delta", "f1",
              "fallback_used", "planner_calls", "fired_rules", "error")


def rounds_csv(configs: dict[str, RunStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for name, s in configs.items():
        for run in s.runs:
            for r in run.results:
                w.writerow((name, run.seed, r.round_id, int(r.correct), r.questions_used, r.score_delta,
                            f"{r.f1:.6f}", int(r.fallback_used), r.planner_calls, ";".join(r.fired_rules),
                            r.error or ""))
    return buf.getvalue()


def write_report(configs: dict[str, RunStats], out_dir, meta: dict | None = None, figures: bool = True) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in (
        ("report.json", dumps(report_dict(configs, meta))),
        ("summary.txt", summary_table(configs)),
        ("rounds.csv", rounds_csv(configs)),
    ):
        (out / name).write_text(text)
        written.append(out / name)
    if figures:
        from .plotting import plot_report

        written += plot_report(configs, out)
    return written


# --- reading reports back for comparisons ------------------------------------

def summary_from_doc(doc: dict, config: str | None = None) -> tuple[float, float | None, int]:
    """(mean, sd, n) of per-run accuracy from a report or a bare summary.

    A bare summary is ``{"mean": .., "sd": .., "n": ..}``; use it to compare
    against published numbers.
    """
    if {"mean", "sd", "n"} <= doc.keys():
        return float(doc["mean"]), None if doc["sd"] is None else float(doc["sd"]), int(doc["n"])
    configs = doc.get("configs")
    if not isinstance(configs, dict) or not configs:
        raise InputError("not a report: expected 'configs' or a {mean, sd, n} summary")
    if config is None:
        config = next(iter(configs))
    if config not in configs:
        raise InputError(f"report has no configuration {config!r} (have {', '.join(configs)})")
    acc = configs[config]["accuracy"]
    return acc["mean"], acc["sd"], configs[config]["n_runs"]


def load_summary(path, config: str | None = None) -> tuple[float, float | None, int]:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"report not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}") from None
    return summary_from_doc(doc, config)


def compare(a: tuple[float, float | None, int], b: tuple[float, float | None, int]) -> dict:
    (ma, sa, na), (mb, sb, nb) = a, b
    if sa is None or sb is None or na < 2 or nb < 2:
        raise InputError("σ unavailable: each side needs at least two runs")
    res: WelchResult = welch_t(ma, sa, na, mb, sb, nb)
    d = None if sa == sb == 0 else cohens_d(ma, sa, mb, sb)
    return {
        "a": {"mean": ma, "sd": sa, "n": na},
        "b": {"mean": mb, "sd": sb, "n": nb},
        **res.to_dict(),
        "cohens_d": d,
        "significant_0.05": not math.isnan(res.p) and res.p < 0.05,
    }
