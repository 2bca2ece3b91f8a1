"""Figure rendering for the reporting paths.

Every report-producing command writes matplotlib figures next to its CSV
output; this module keeps the figure code in one place and forces the Agg
backend so rendering works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_series_plot",
    "save_vibration_plot",
    "save_latency_plot",
    "save_grid_heatmap",
]


def save_series_plot(x, series: dict[str, list[float]], xlabel: str, ylabel: str, path) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for name, ys in series.items():
        ax.plot(x, ys, marker="o", label=name)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_vibration_plot(trace, total: float, path) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.0))
    if trace:
        t = [p[0] for p in trace]
        m = [p[1] for p in trace]
        ax.step(t, m, where="post")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("vibration magnitude")
    ax.set_title(f"total {total:.3f}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_latency_plot(latency: dict[int, float], idle: dict[int, float], path) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.0))
    customers = sorted(latency)
    ax.bar(customers, [latency[c] for c in customers], label="latency")
    ax.bar(
        customers,
        [idle.get(c, 0.0) for c in customers],
        bottom=[latency[c] - idle.get(c, 0.0) for c in customers],
        color="none",
        edgecolor="tab:red",
        hatch="//",
        label="idle part",
    )
    ax.set_xlabel("customer")
    ax.set_ylabel("service start [s]")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_grid_heatmap(grid, path) -> Path:
    """Roughness grid as a colored cell map (green/blue/red by class)."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    if grid.cells:
        rows = [rc[0] for rc in grid.cells]
        cols = [rc[1] for rc in grid.cells]
        r0, r1 = min(rows), max(rows)
        c0, c1 = min(cols), max(cols)
        img = np.full((r1 - r0 + 1, c1 - c0 + 1, 3), 0.85)
        colors = {
            "smooth": (0.30, 0.75, 0.35),
            "moderate": (0.25, 0.45, 0.85),
            "rough": (0.85, 0.25, 0.25),
            "unknown": (0.85, 0.85, 0.85),
        }
        for (r, c), cell in grid.cells.items():
            img[r - r0, c - c0] = colors[cell.label]
        ax.imshow(
            img,
            origin="lower",
            extent=(c0 * grid.cell_size, (c1 + 1) * grid.cell_size,
                    r0 * grid.cell_size, (r1 + 1) * grid.cell_size),
            interpolation="nearest",
        )
    ax.set_xlabel("y [m]")
    ax.set_ylabel("x forward [m]")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
