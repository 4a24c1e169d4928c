"""Matplotlib renderings of the progress dashboard for report exports.

Renders the engagement heatmap (contribution-calendar style, darker squares
for more activity) and per-chapter progress bars to image files next to the
exported report and its CSV summary.
"""

from __future__ import annotations

from datetime import date, timedelta
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_heatmap(
    heatmap: dict[str, int], out_path: str | Path, weeks: int = 26, end: date | None = None
) -> Path:
    """Weekly activity grid ending at ``end`` (default: latest active day)."""
    out_path = Path(out_path)
    if end is None:
        end = max((date.fromisoformat(d) for d in heatmap), default=date.today())
    # Align the last column to the week containing `end` (rows Mon..Sun).
    last_monday = end - timedelta(days=end.weekday())
    grid = np.zeros((7, weeks))
    for day_str, count in heatmap.items():
        day = date.fromisoformat(day_str)
        week_offset = (last_monday - (day - timedelta(days=day.weekday()))).days // 7
        col = weeks - 1 - week_offset
        if 0 <= col < weeks:
            grid[day.weekday(), col] = count

    fig, ax = plt.subplots(figsize=(max(4.0, weeks * 0.22), 2.0))
    ax.imshow(grid, aspect="equal", cmap="Greens", vmin=0)
    ax.set_yticks([0, 2, 4, 6], ["Mon", "Wed", "Fri", "Sun"], fontsize=7)
    ax.set_xticks([])
    ax.set_title("Quiz activity", fontsize=9)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_chapter_progress(progress: dict[str, float], out_path: str | Path) -> Path:
    """Horizontal progress bars, one per chapter."""
    out_path = Path(out_path)
    chapters = sorted(progress)
    values = [progress[c] for c in chapters] or [0.0]
    chapters = chapters or ["(no chapters)"]

    fig, ax = plt.subplots(figsize=(5.0, 0.4 * len(chapters) + 1.2))
    positions = np.arange(len(chapters))
    ax.barh(positions, [1.0] * len(chapters), color="#e8e8e8")
    ax.barh(positions, values, color="#2f7d32")
    ax.set_yticks(positions, chapters, fontsize=8)
    ax.set_xlim(0, 1)
    ax.set_xlabel("sections passed / required", fontsize=8)
    ax.set_title("Chapter progress", fontsize=9)
    ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
