"""Report figures. Uses the Agg backend so it runs headless."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .harness import RunStats  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 3.6),
    "figure.dpi": 120,
    "axes.grid": True,
    "axes.axisbelow": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
}
BAR = "#3b6ea5"
POINT = "#c0392b"


def accuracy_bars(configs: dict[str, RunStats], path) -> Path:
    names = list(configs)
    means = [100 * configs[n].accuracy_mean for n in names]
    errs = []
    for n in names:
        ci = configs[n].accuracy_ci
        errs.append(0.0 if ci is None else 100 * (ci[1] - ci[0]) / 2)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.bar(names, means, yerr=errs, color=BAR, capsize=4, width=0.6)
        for i, m in enumerate(means):
            ax.text(i, m + 1, f"{m:.1f}", ha="center", va="bottom", fontsize=8)
        ax.set_ylim(0, 110)
        ax.set_ylabel("accuracy (%)")
        ax.set_title("Accuracy by configuration (95% CI)")
        ax.tick_params(axis="x", rotation=20)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def per_run_strip(configs: dict[str, RunStats], path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for i, (name, s) in enumerate(configs.items()):
            accs = [100 * a for a in s.accuracies]
            k = len(accs)
            xs = [i + (j - (k - 1) / 2) * min(0.5 / max(k, 1), 0.08) for j in range(k)]
            ax.scatter(xs, accs, s=14, color=POINT, alpha=0.8, zorder=3)
            ax.hlines(100 * s.accuracy_mean, i - 0.3, i + 0.3, color="black", lw=1)
        ax.set_xticks(range(len(configs)), list(configs), rotation=20)
        ax.set_ylabel("accuracy per run (%)")
        ax.set_title("Per-run accuracy")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_report(configs: dict[str, RunStats], out_dir) -> list[Path]:
    out = Path(out_dir)
    return [accuracy_bars(configs, out / "accuracy.png"), per_run_strip(configs, out / "per_run.png")]
