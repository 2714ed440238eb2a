"""Dependency-free SVG scatter plots with byte-stable output."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ValidationError

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939",
)
SIZE = 480
RADIUS = 2.5


def _axis(v: np.ndarray):
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo
    if span <= 0:
        span = 1.0
        lo -= 0.5
    margin = 0.05 * span
    return lo - margin, span + 2 * margin


def svg_scatter(points, labels: Optional[np.ndarray] = None) -> str:
    """SVG text with one <circle> per row of a 2-column table."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        pts = pts.reshape(0, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError(f"scatter needs exactly 2 columns, got shape {pts.shape}")
    x0, xs = _axis(pts[:, 0])
    y0, ys = _axis(pts[:, 1])
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white" stroke="black"/>',
    ]
    for idx, (x, y) in enumerate(pts):
        px = (x - x0) / xs * SIZE
        py = SIZE - (y - y0) / ys * SIZE
        color = PALETTE[int(labels[idx]) % len(PALETTE)] if labels is not None else PALETTE[0]
        out.append(f'<circle cx="{px:.3f}" cy="{py:.3f}" r="{RADIUS}" fill="{color}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_scatter(points, labels, path) -> None:
    Path(path).write_text(svg_scatter(points, labels), encoding="utf-8")
