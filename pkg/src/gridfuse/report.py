"""Figure rendering for evaluation reports.

Every figure lands next to the delimited output it visualizes: the
before/after skew chart next to the normalization sidecar, the interval
trace next to ``intervals.csv``, the accuracy curves next to
``accuracy.csv``.  The Agg backend plus pinned PNG metadata keep repeated
runs byte-identical.
"""

from __future__ import annotations

import os
import tempfile
from typing import Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

PNG_METADATA = {"Software": "gridfuse"}

_FIGSIZE = (6.4, 4.0)
_DPI = 110


def _save(figure, path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".png")
    os.close(fd)
    try:
        figure.savefig(tmp, format="png", dpi=_DPI, metadata=PNG_METADATA)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    finally:
        plt.close(figure)


def save_normalization_figure(columns: Sequence, path: str) -> None:
    """Per-column |skewness| before vs after standardization."""
    names = [c.name for c in columns]
    before = [abs(c.before.skewness) for c in columns]
    after = [abs(c.after.skewness) for c in columns]
    positions = range(len(names))

    figure, axis = plt.subplots(figsize=_FIGSIZE)
    width = 0.38
    axis.bar([p - width / 2 for p in positions], before, width, label="before", color="#b2182b")
    axis.bar([p + width / 2 for p in positions], after, width, label="after", color="#2166ac")
    axis.set_xticks(list(positions))
    axis.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    axis.set_ylabel("|skewness|")
    axis.set_title("Column shape before and after standardization")
    axis.legend()
    figure.tight_layout()
    _save(figure, path)


def save_interval_figure(
    points: Sequence[Tuple[int, float, float, float]], path: str, label: str = ""
) -> None:
    """Belief/plausibility band of the watched hypothesis per fusion step."""
    steps = [p[0] for p in points]
    bel = [p[1] for p in points]
    pl = [p[2] for p in points]

    figure, axis = plt.subplots(figsize=_FIGSIZE)
    axis.plot(steps, bel, marker="o", label="belief", color="#2166ac")
    axis.plot(steps, pl, marker="o", label="plausibility", color="#b2182b")
    axis.fill_between(steps, bel, pl, alpha=0.2, color="#92c5de", label="interval width")
    axis.set_xlabel("fusion step")
    axis.set_ylabel("support")
    axis.set_xticks(steps)
    title = "Belief interval across fusion steps"
    if label:
        title += f" ({label})"
    axis.set_title(title)
    axis.legend()
    figure.tight_layout()
    _save(figure, path)


def save_accuracy_figure(
    series: Sequence[Tuple[int, str, float]], path: str
) -> None:
    """Accuracy against record count, one line per fusion method."""
    methods = sorted({method for _, method, _ in series})
    figure, axis = plt.subplots(figsize=_FIGSIZE)
    palette = {"ds": "#b2182b", "pca_ds": "#2166ac"}
    for method in methods:
        rows = sorted((size, value) for size, m, value in series if m == method)
        axis.plot(
            [size for size, _ in rows],
            [value for _, value in rows],
            marker="o",
            label=method,
            color=palette.get(method),
        )
    axis.set_xlabel("records fused")
    axis.set_ylabel("accuracy")
    axis.set_ylim(0.0, 1.05)
    axis.set_title("Fusion accuracy by record count")
    axis.legend()
    figure.tight_layout()
    _save(figure, path)
