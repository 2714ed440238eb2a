"""
Matplotlib report figures (PNG). Uses the object-oriented API with an Agg
canvas so nothing touches pyplot's global state.
"""

from __future__ import annotations

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

DPI = 120


def _figure(width=5.0, height=4.0):
    fig = Figure(figsize=(width, height), dpi=DPI)
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})


def plot_eigenvalues(named_spectra, k, path):
    """Smallest eigenvalues per estimator, one line each."""
    fig = _figure()
    ax = fig.add_subplot(111)
    for name, spec in named_spectra:
        vals = spec.eigenvalues[:k]
        ax.plot(np.arange(1, vals.size + 1), vals, marker="o", ms=3, label=name)
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_embedding(points, labels, path, title=None):
    fig = _figure(4.5, 4.5)
    ax = fig.add_subplot(111)
    c = None if labels is None else labels
    ax.scatter(points[:, 0], points[:, 1], c=c, s=4, cmap="tab10" if c is not None else None)
    ax.set_aspect("equal", adjustable="datalim")
    if title:
        ax.set_title(title)
    _save(fig, path)


def plot_error_table(rows, path):
    """Bars of mean unlabeled/test error per class pair with sd whiskers."""
    fig = _figure(max(4.0, 0.5 * len(rows) + 2), 3.5)
    ax = fig.add_subplot(111)
    x = np.arange(len(rows))
    stats = np.array([r.summary() for r in rows]).reshape(-1, 4)
    ax.bar(x - 0.2, stats[:, 0], 0.4, yerr=stats[:, 1], label="unlabeled")
    ax.bar(x + 0.2, np.nan_to_num(stats[:, 2]), 0.4, yerr=np.nan_to_num(stats[:, 3]), label="test")
    ax.set_xticks(x)
    ax.set_xticklabels([r.name for r in rows], rotation=90, fontsize=7)
    ax.set_ylabel("error (%)")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_visits(points, walk_results, path):
    """Random-walk visit counts per adjustment, drawn over the first two coordinates."""
    fig = _figure(4.0 * max(1, len(walk_results)), 4.0)
    pts = np.asarray(points, float)
    xy = pts[:, :2] if pts.shape[1] >= 2 else np.column_stack([pts[:, 0], np.zeros(len(pts))])
    for idx, (kind, res) in enumerate(walk_results.items(), start=1):
        ax = fig.add_subplot(1, len(walk_results), idx)
        sc = ax.scatter(xy[:, 0], xy[:, 1], c=res.visit_histogram, s=5, cmap="viridis")
        fig.colorbar(sc, ax=ax)
        ax.set_title(f"{kind.value}: persistence {res.mean_persistence:.2f}", fontsize=9)
    _save(fig, path)
