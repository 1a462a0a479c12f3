"""Minimal SVG emission: labeled scatter plots and heatmaps.

These are plain string builders with no plotting dependency; richer figures
can be produced by external tools from the CSVs that accompany every SVG.
"""

from __future__ import annotations

import numpy as np

from werprobe.errors import ShapeError

_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
)


def _scale(values: np.ndarray, out_min: float, out_max: float) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return np.full_like(values, (out_min + out_max) / 2.0)
    return out_min + (values - lo) * (out_max - out_min) / (hi - lo)


def scatter_svg(coords: np.ndarray, labels, width: int = 640, height: int = 480) -> str:
    """2-D scatter colored by label, with a legend."""
    pts = np.asarray(coords, dtype=np.float64)
    labels = list(labels)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] != len(labels):
        raise ShapeError(f"scatter needs (N, 2) coords and N labels, got {pts.shape}")
    classes = sorted(set(labels))
    color = {c: _PALETTE[i % len(_PALETTE)] for i, c in enumerate(classes)}
    margin = 40
    xs = _scale(pts[:, 0], margin, width - margin)
    ys = _scale(pts[:, 1], height - margin, margin)  # flip: SVG y grows down
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for x, y, label in zip(xs, ys, labels):
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color[label]}" fill-opacity="0.7"/>')
    for i, c in enumerate(classes):
        ly = 20 + i * 18
        parts.append(f'<circle cx="{width - 130}" cy="{ly}" r="5" fill="{color[c]}"/>')
        parts.append(
            f'<text x="{width - 118}" y="{ly + 4}" font-family="sans-serif" font-size="12">{c}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def heatmap_svg(matrix: np.ndarray, row_labels, col_labels, width: int = 560,
                height: int = 480, value_format: str = "{:.2f}") -> str:
    """Row-major heatmap with per-cell values printed, for confusion matrices."""
    m = np.asarray(matrix, dtype=np.float64)
    rows, cols = list(row_labels), list(col_labels)
    if m.shape != (len(rows), len(cols)):
        raise ShapeError(f"heatmap matrix {m.shape} does not match labels {len(rows)}x{len(cols)}")
    left, top = 120, 60
    cw = (width - left - 20) / len(cols)
    ch = (height - top - 20) / len(rows)
    peak = float(m.max()) if m.size and m.max() > 0 else 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for j, c in enumerate(cols):
        parts.append(
            f'<text x="{left + (j + 0.5) * cw:.1f}" y="{top - 8}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{c}</text>'
        )
    for i, r in enumerate(rows):
        parts.append(
            f'<text x="{left - 6}" y="{top + (i + 0.6) * ch:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{r}</text>'
        )
        for j in range(len(cols)):
            frac = m[i, j] / peak
            # dark blue for hot cells, near-white for cold ones
            shade = int(round(235 - 175 * frac))
            fill = f"rgb({shade},{shade},255)"
            x0, y0 = left + j * cw, top + i * ch
            parts.append(
                f'<rect x="{x0:.1f}" y="{y0:.1f}" width="{cw:.1f}" height="{ch:.1f}" '
                f'fill="{fill}" stroke="#888"/>'
            )
            parts.append(
                f'<text x="{x0 + cw / 2:.1f}" y="{y0 + ch / 2 + 4:.1f}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="11">{value_format.format(m[i, j])}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
