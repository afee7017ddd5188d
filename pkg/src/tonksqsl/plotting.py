"""Deterministic SVG line plots.

Plots are presentation only: nothing here feeds back into the CSV records.
The SVG writer is pinned (fixed hash salt, no date stamp) so repeated runs
give identical files.
"""
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.hashsalt": "tonksqsl", "svg.fonttype": "path", "font.size": 10}


def line_plot(path, x, series, xlabel="", ylabel="", title="", logx=False, logy=False,
              markers=False, inset=None):
    """Write one panel with a line per ``series`` entry (label -> y values).

    ``inset`` is an optional ``(x, series, logy)`` triple drawn in the upper
    right corner.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        _draw(ax, x, series, logx, logy, markers)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend(frameon=False, fontsize=8, loc="best")
        if inset is not None:
            ix, iseries, ilogy = inset
            sub = ax.inset_axes([0.58, 0.55, 0.38, 0.38])
            _draw(sub, ix, iseries, False, ilogy, False)
            sub.tick_params(labelsize=6)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def _draw(ax, x, series, logx, logy, markers):
    x = np.asarray(x, dtype=float)
    for label, y in series.items():
        y = np.asarray(y, dtype=float)
        if logy:
            y = np.where(y > 0, y, np.nan)
        ax.plot(x, y, marker="o" if markers else None, ms=3, lw=1.2, label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
