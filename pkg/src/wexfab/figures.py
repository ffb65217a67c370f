"""Render evaluation tables as bar-chart figures.

Kept separate from the scoring code so matplotlib only loads when a figure
is actually requested.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import EvaluationRow  # noqa: E402


def render_evaluation_figure(rows: list[EvaluationRow], path: str | Path) -> None:
    """Horizontal recall/accuracy bars per source, written to `path`; the
    format follows the file suffix (png, svg, pdf)."""
    sources = [row.source for row in rows]
    recalls = [row.recall for row in rows]
    accuracies = [row.accuracy if row.accuracy is not None else 0.0 for row in rows]

    height = max(2.5, 0.45 * len(rows) + 1.2)
    fig, ax = plt.subplots(figsize=(7.5, height))
    positions = range(len(rows))
    bar = 0.38
    ax.barh([p + bar / 2 for p in positions], recalls, bar, label="recall", color="#4878a8")
    ax.barh([p - bar / 2 for p in positions], accuracies, bar, label="accuracy", color="#e1812c")
    ax.set_yticks(list(positions))
    ax.set_yticklabels(sources)
    ax.invert_yaxis()
    ax.set_xlim(0.0, 1.05)
    ax.set_xlabel("ratio")
    ax.set_title("Extraction results")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
