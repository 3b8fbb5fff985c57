"""Figures written next to JSON reports."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed metadata keeps PNG bytes stable between identical runs
_SAVE_KW = {"dpi": 100, "metadata": {"Software": None}}


def figure_path(report_path, kind: str) -> Path:
    report_path = Path(report_path)
    return report_path.with_name(f"{report_path.stem}.{kind}.png")


def get_plot(width=8, height=None):
    golden_ratio = (math.sqrt(5) - 1.0) / 2.0
    if not height:
        height = width * golden_ratio
    fig, ax = plt.subplots(figsize=(width, height), facecolor="w")
    ax.tick_params(labelsize=width * 1.4)
    return fig, ax


def plot_training_curve(history, path, title="") -> Path:
    epochs = [h["epoch"] + 1 for h in history]
    fig, ax = get_plot()
    ax.plot(epochs, [h["train_loss"] for h in history], "o-", color="tab:blue", label="train loss")
    ax.set_xlabel("epoch", fontsize=12)
    ax.set_ylabel("mean token cross-entropy", fontsize=12, color="tab:blue")
    ax2 = ax.twinx()
    ax2.plot(epochs, [h["dev_accuracy"] for h in history], "s-", color="tab:red", label="dev accuracy")
    ax2.plot(epochs, [h["dropout"] for h in history], ":", color="gray", label="dropout")
    ax2.set_ylim(0, 1.02)
    ax2.set_ylabel("dev accuracy / dropout", fontsize=12, color="tab:red")
    lines = ax.get_lines() + ax2.get_lines()
    ax.legend(lines, [ln.get_label() for ln in lines], loc="center right")
    if title:
        ax.set_title(title, fontsize=13)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return Path(path)


def plot_per_class_f1(per_class: dict, path, title="", max_classes=40) -> Path:
    """Bar chart of per-class F1, largest support first."""
    rows = sorted(per_class.items(), key=lambda kv: (-kv[1]["support"], kv[0]))[:max_classes]
    names = [k for k, _ in rows]
    f1 = [v["f1"] for _, v in rows]
    fig, ax = get_plot(width=max(6, 0.35 * len(names) + 2))
    ax.bar(range(len(names)), f1, color="tab:green")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=70, ha="right", fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("F1", fontsize=12)
    if title:
        ax.set_title(title, fontsize=13)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return Path(path)
