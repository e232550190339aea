"""Figure rendering for evaluation output.

Renders the PR curve(s) the eval command computes into an image file next
to the delimited curve text, so a run leaves both machine-readable and
eyeball-readable artifacts.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluate import PrCurve


def render_pr_figure(
    curves: Sequence[tuple[str, PrCurve]],
    out_path: str | Path,
    title: str = "Precision/recall over ranked facts",
    max_recall: float | None = None,
) -> Path:
    """Plot one or more labelled PR curves and write the figure to out_path."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    for label, curve in curves:
        recalls = [r for r, _ in curve.points]
        precisions = [p for _, p in curve.points]
        ax.plot(recalls, precisions, label=f"{label} (AUC {curve.auc * 100:.2f})", linewidth=1.4)
    ax.set_xlabel("Recall")
    ax.set_ylabel("Precision")
    ax.set_title(title)
    ax.set_ylim(0.0, 1.02)
    if max_recall is not None:
        ax.set_xlim(0.0, max_recall)
    ax.grid(alpha=0.3)
    ax.legend(loc="lower left", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=160)
    plt.close(fig)
    return out_path
