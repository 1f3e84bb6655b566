"""Minimal SVG figures written next to the CSV outputs.

Figures are built on a bare Agg canvas (no pyplot state) and saved with a
fixed hash salt and no date stamp, so reruns produce identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Optional, Sequence

import matplotlib
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

_RC = {
    "svg.hashsalt": "dtpt",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    FigureCanvasAgg(fig)
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def line_plot(
    path,
    x,
    series: Dict[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
    logy: bool = False,
    marker: Optional[str] = None,
) -> Path:
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(4.5, 3.2))
        ax = fig.add_subplot(111)
        x = np.asarray(x, dtype=float)
        for name, y in series.items():
            y = np.asarray(y, dtype=float)
            if logy:
                y = np.abs(y)
            ax.plot(x, y, marker=marker, lw=1.2, ms=3, label=name)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if len(series) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
    return _save(fig, path)


def scatter_plot(path, x, y, xlabel: str, ylabel: str) -> Path:
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(4.5, 3.2))
        ax = fig.add_subplot(111)
        ax.scatter(np.asarray(x, dtype=float), np.asarray(y, dtype=float), s=4, c="k")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        fig.tight_layout()
    return _save(fig, path)


def label_map(path, x, y, labels: np.ndarray, xlabel: str, ylabel: str) -> Path:
    """Categorical heat map; ``labels`` has shape (len(x), len(y))."""
    names = sorted(set(labels.ravel().tolist()))
    codes = np.vectorize(names.index)(labels).astype(float)
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(4.5, 3.6))
        ax = fig.add_subplot(111)
        ax.grid(False)
        mesh = ax.pcolormesh(
            np.asarray(y, dtype=float),
            np.asarray(x, dtype=float),
            codes,
            shading="nearest",
            cmap=matplotlib.colormaps["tab10"].resampled(max(len(names), 2)),
            vmin=-0.5,
            vmax=max(len(names), 2) - 0.5,
        )
        bar = fig.colorbar(mesh, ax=ax, ticks=range(len(names)))
        bar.ax.set_yticklabels(names)
        ax.set_xlabel(ylabel)
        ax.set_ylabel(xlabel)
        fig.tight_layout()
    return _save(fig, path)


def histogram(path, values, xlabel: str, bins: int = 30) -> Path:
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(4.5, 3.2))
        ax = fig.add_subplot(111)
        ax.hist(np.asarray(values, dtype=float), bins=bins, color="0.4")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("count")
        fig.tight_layout()
    return _save(fig, path)
