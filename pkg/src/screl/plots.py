"""Report figures, rendered headlessly to PNG next to the TSV output."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import Scores  # noqa: E402


def _finish(fig, path: str | Path, config_hash: Optional[str]) -> Path:
    path = Path(path)
    if config_hash:
        fig.text(0.99, 0.01, f"config {config_hash}", ha="right", va="bottom",
                 fontsize=7, color="0.5")
    fig.savefig(path, dpi=150, bbox_inches="tight",
                metadata={"Software": "screl"})
    plt.close(fig)
    return path


def per_class_figure(
    scores: Scores, path: str | Path, config_hash: Optional[str] = None
) -> Path:
    """Grouped P/R/F1 bars per class, macro-F1 as a reference line."""
    names = list(scores.per_class)
    x = range(len(names))
    width = 0.27
    fig, ax = plt.subplots(figsize=(max(6, 1.3 * len(names)), 4))
    ax.bar([i - width for i in x], [scores.per_class[c].precision for c in names],
           width, label="precision")
    ax.bar(list(x), [scores.per_class[c].recall for c in names],
           width, label="recall")
    ax.bar([i + width for i in x], [scores.per_class[c].f1 for c in names],
           width, label="F1")
    ax.axhline(scores.macro_f1, linestyle="--", linewidth=1, color="0.3",
               label=f"macro F1 = {scores.macro_f1:.3f}")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title("Per-class scores")
    return _finish(fig, path, config_hash)


def loss_figure(
    histories: Sequence[Sequence[float]],
    labels: Sequence[str],
    path: str | Path,
    config_hash: Optional[str] = None,
) -> Path:
    """Training loss per epoch, one line per ensemble member."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for history, label in zip(histories, labels):
        ax.plot(range(1, len(history) + 1), history, label=label, linewidth=1)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean training loss")
    ax.set_title("Training loss")
    if len(labels) <= 12:
        ax.legend(fontsize=7)
    return _finish(fig, path, config_hash)


def sweep_figure(
    values: Sequence,
    scores: Sequence[float],
    param: str,
    path: str | Path,
    config_hash: Optional[str] = None,
    log_x: bool = False,
) -> Path:
    """Score as a function of one swept parameter."""
    fig, ax = plt.subplots(figsize=(6, 4))
    numeric = all(isinstance(v, (int, float)) for v in values)
    if numeric:
        ax.plot(values, scores, marker="o")
        if log_x:
            ax.set_xscale("log")
    else:
        ax.plot(range(len(values)), scores, marker="o")
        ax.set_xticks(range(len(values)))
        ax.set_xticklabels([str(v) for v in values], rotation=30, ha="right")
    ax.set_xlabel(param)
    ax.set_ylabel("macro F1")
    ax.set_title(f"Sweep over {param}")
    return _finish(fig, path, config_hash)


def cv_figure(
    fold_scores: Sequence[float],
    path: str | Path,
    config_hash: Optional[str] = None,
) -> Path:
    """Macro-F1 per fold with the mean as a reference line."""
    fig, ax = plt.subplots(figsize=(6, 4))
    k = len(fold_scores)
    mean = sum(fold_scores) / k if k else 0.0
    ax.bar(range(1, k + 1), fold_scores, color="tab:blue")
    ax.axhline(mean, linestyle="--", linewidth=1, color="0.3",
               label=f"mean = {mean:.3f}")
    ax.set_xticks(range(1, k + 1))
    ax.set_xlabel("fold")
    ax.set_ylabel("macro F1")
    ax.set_ylim(0, 1.05)
    ax.set_title(f"{k}-fold cross-validation")
    ax.legend(fontsize=8)
    return _finish(fig, path, config_hash)


def lm_score_figure(
    kept_scores: Sequence[float],
    dropped_scores: Sequence[float],
    threshold: float,
    path: str | Path,
    config_hash: Optional[str] = None,
) -> Path:
    """Histogram of sampled-sentence log-probabilities around the cutoff."""
    fig, ax = plt.subplots(figsize=(6, 4))
    all_scores = list(kept_scores) + list(dropped_scores)
    if all_scores:
        lo, hi = min(all_scores), max(all_scores)
        if lo == hi:
            lo, hi = lo - 1.0, hi + 1.0
        bins = [lo + (hi - lo) * i / 30 for i in range(31)]
        ax.hist(dropped_scores, bins=bins, alpha=0.6, label="rejected",
                color="tab:red")
        ax.hist(kept_scores, bins=bins, alpha=0.6, label="kept",
                color="tab:green")
    ax.axvline(threshold, linestyle="--", color="0.2", linewidth=1,
               label=f"threshold = {threshold:g}")
    ax.set_xlabel("log10 probability")
    ax.set_ylabel("sentences")
    ax.set_title("Generated sentence scores")
    ax.legend(fontsize=8)
    return _finish(fig, path, config_hash)
