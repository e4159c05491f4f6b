"""PNG companions for the plot-ready CSV trajectories.

Figures are rendered with the Agg backend and saved without metadata so the
bytes depend only on the data.
"""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import atomic_writer  # noqa: E402

_METADATA = {"Software": None}


def _save(fig, path):
    with atomic_writer(path, "wb") as fh:
        fig.savefig(fh, format="png", dpi=100, metadata=_METADATA)
    plt.close(fig)
    return path


def png_path(csv_path) -> str:
    return os.path.splitext(os.fspath(csv_path))[0] + ".png"


def plot_trajectory(rows, path, xlabel, title):
    """Mean MRE with a shaded 95% band; ``rows`` are (x, mean, low, high)."""
    x = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.fill_between(x, [r[2] for r in rows], [r[3] for r in rows], alpha=0.25, linewidth=0)
    ax.plot(x, [r[1] for r in rows], marker="o")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("MRE (%)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def plot_forecast(rows, path, title):
    """Actual against forecast; ``rows`` are (date, actual, forecast)."""
    idx = range(len(rows))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(idx, [r[1] for r in rows], label="actual")
    ax.plot(idx, [r[2] for r in rows], label="forecast", linestyle="--")
    if rows:
        ax.set_xticks([0, len(rows) - 1], [rows[0][0], rows[-1][0]])
    ax.set_ylabel("target (%)")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)
