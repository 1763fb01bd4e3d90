"""Figure output for benchmark reports.

One plot style: per-solver node expansions on a log scale, with levels
sorted independently for each solver from easiest to hardest.  Rendering
is headless (Agg) and always goes to a file.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_expansion_series_figure(
    series: Mapping[str, Sequence[int]],
    path: str,
    *,
    title: str = "Node expansions per level",
) -> None:
    """Plot each solver's sorted expansion counts and write the figure.

    ``series`` maps a solver label to its per-level expansion counts;
    counts are sorted here, so callers can pass records in level order.
    """
    if not series:
        raise ValueError("nothing to plot: no series given")
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for label, values in series.items():
        ordered = sorted(values)
        ax.plot(range(1, len(ordered) + 1), ordered, label=label, linewidth=1.4)
    ax.set_yscale("log")
    ax.set_xlabel("levels, sorted easiest to hardest per solver")
    ax.set_ylabel("node expansions")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
