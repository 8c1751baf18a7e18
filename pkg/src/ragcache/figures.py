"""Figure rendering for run outputs: controller trace and comparison chart."""
from __future__ import annotations

from typing import Iterable

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .simulator import ExperimentReport
from .tuning import TuningDecision

plt.rcParams.update(
    {
        "figure.figsize": (9, 5),
        "axes.grid": True,
        "font.size": 10,
    }
)


def plot_tuning_trace(
    decisions: Iterable[TuningDecision], path: str, target_hit_ratio: float | None = None
) -> None:
    """Applied capacity and observed hit ratio per epoch, saved to path."""
    decisions = list(decisions)
    epochs = list(range(1, len(decisions) + 1))
    capacities = [d.applied_capacity for d in decisions]
    ratios = [d.observed_hit_ratio for d in decisions]

    fig, ax_cap = plt.subplots()
    ax_cap.step(epochs, capacities, where="post", color="tab:blue", label="applied capacity")
    ax_cap.set_xlabel("epoch")
    ax_cap.set_ylabel("cache capacity (entries)", color="tab:blue")
    ax_cap.tick_params(axis="y", labelcolor="tab:blue")

    ax_hr = ax_cap.twinx()
    ax_hr.plot(epochs, ratios, color="tab:red", marker=".", label="windowed hit ratio")
    if target_hit_ratio is not None:
        ax_hr.axhline(target_hit_ratio, color="tab:red", linestyle="--", alpha=0.5,
                      label="target hit ratio")
    ax_hr.set_ylabel("hit ratio", color="tab:red")
    ax_hr.set_ylim(0.0, 1.05)
    ax_hr.tick_params(axis="y", labelcolor="tab:red")
    ax_hr.grid(False)

    fig.suptitle("Cache tuning trace")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_comparison(report: ExperimentReport, path: str) -> None:
    """Static-vs-tuned bars, one panel per metric, saved to path."""
    rows = ExperimentReport.TABLE_ROWS
    fig, axes = plt.subplots(2, 3, figsize=(11, 6))
    for ax, (label, name) in zip(axes.flat, rows):
        pre = getattr(report.baseline, name)
        post = getattr(report.tuned, name)
        ax.bar(["static", "tuned"], [pre, post], color=["tab:gray", "tab:green"])
        delta = report.deltas[name]
        suffix = "" if delta is None else f"  ({delta:+.1f}%)"
        ax.set_title(label + suffix, fontsize=9)
    fig.suptitle("Static cache vs tuned cache")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
