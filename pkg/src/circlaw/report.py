"""Figure rendering for experiment reports.

Figures are rendered to files next to the delimited outputs; the CSV and
NDJSON data stay the canonical record, the images are the quick-look view.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def esd_scatter(points: np.ndarray, path: str | Path,
                outlier: complex | None = None,
                title: str = "normalized eigenvalues") -> Path:
    """Eigenvalue scatter with the unit circle overlaid."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.2, 5.2))
    pts = np.asarray(points, dtype=complex).ravel()
    ax.scatter(pts.real, pts.imag, s=4, alpha=0.6, linewidths=0)
    if outlier is not None:
        ax.scatter([outlier.real], [outlier.imag], s=40, marker="x",
                   color="tab:red", label="outlier")
        ax.legend(loc="upper right", fontsize=8)
    theta = np.linspace(0, 2 * np.pi, 400)
    ax.plot(np.cos(theta), np.sin(theta), lw=0.8, color="k")
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def tail_curves(ts, freq, bounds: dict[str, list[float]],
                path: str | Path, title: str) -> Path:
    """Empirical tail frequencies against analytic curves, log scale."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    floor = 10 ** -6
    ax.semilogy(ts, np.maximum(freq, floor), "o-", label="empirical")
    for name, vals in bounds.items():
        ax.semilogy(ts, np.maximum(vals, floor), "--", label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("tail frequency")
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def singular_tail_curve(a_ladder, freq, path: str | Path, n: int) -> Path:
    """Least-singular-value hit frequency across the exponent ladder."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    ax.semilogy(a_ladder, np.maximum(freq, 10 ** -6), "o-")
    ax.set_xlabel("exponent A (threshold n^-A)")
    ax.set_ylabel("frequency sigma_min < n^-A")
    ax.set_title(f"least singular value tail, n={n}", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def statistic_histogram(values, path: str | Path, title: str,
                        xlabel: str) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    ax.hist(values, bins=max(10, min(60, len(values) // 5 or 10)))
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
