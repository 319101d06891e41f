"""CSV / JSON / SVG emission helpers shared by the CLI and the scripts."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    """Numbers rendered with 15 significant digits."""
    if isinstance(x, complex):
        return f"{x.real:.15g}{x.imag:+.15g}i"
    if isinstance(x, float):
        return f"{x:.15g}"
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (int, float, complex)) else v
                             for v in row])


def write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def rle_mask(mask: np.ndarray) -> list[list[int]]:
    """Run-length encoding of a boolean grid, row by row: [row, start, length]."""
    runs = []
    for r in range(mask.shape[0]):
        row = mask[r]
        diffs = np.flatnonzero(np.diff(np.concatenate([[0], row.view(np.int8), [0]])))
        for s, e in zip(diffs[::2], diffs[1::2]):
            runs.append([int(r), int(s), int(e - s)])
    return runs


# ----------------------------------------------------------------------
# minimal SVG output
# ----------------------------------------------------------------------

_SVG_COLORS = ("#1b6ca8", "#c23b22", "#2e8540", "#8034a8", "#c77d00", "#444444")


def _svg_head(width: int, height: int) -> list[str]:
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="white"/>']


def write_svg_curves(path: Path, curves: list[np.ndarray],
                     labels: list[str] | None = None, size: int = 640) -> None:
    """Plot complex polylines with equal axis scaling."""
    path.parent.mkdir(parents=True, exist_ok=True)
    allpts = np.concatenate([np.asarray(c) for c in curves])
    x0, x1 = allpts.real.min(), allpts.real.max()
    y0, y1 = allpts.imag.min(), allpts.imag.max()
    span = max(x1 - x0, y1 - y0, 1e-12) * 1.1
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    margin = 30

    def to_px(z):
        px = margin + (z.real - (cx - span / 2)) / span * (size - 2 * margin)
        py = size - margin - (z.imag - (cy - span / 2)) / span * (size - 2 * margin)
        return px, py

    lines = _svg_head(size, size)
    for k, curve in enumerate(curves):
        pts = " ".join(f"{to_px(z)[0]:.2f},{to_px(z)[1]:.2f}" for z in np.asarray(curve))
        color = _SVG_COLORS[k % len(_SVG_COLORS)]
        lines.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.2"/>')
        if labels and k < len(labels):
            z0 = np.asarray(curve)[0]
            px, py = to_px(z0)
            lines.append(f'<text x="{px + 4:.1f}" y="{py - 4:.1f}" font-size="11" '
                         f'fill="{color}">{labels[k]}</text>')
    lines.append("</svg>")
    path.write_text("\n".join(lines), encoding="utf-8")


def write_svg_series(path: Path, xs, ys, title: str = "", logy: bool = False,
                     size: tuple[int, int] = (640, 420)) -> None:
    """Line-with-markers plot of one series (optionally log-scaled y)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    w, h = size
    margin = 52
    xs = [float(x) for x in xs]
    ys_raw = [float(y) for y in ys]
    if logy:
        pts = [(x, math.log10(y)) for x, y in zip(xs, ys_raw) if y > 0]
    else:
        pts = list(zip(xs, ys_raw))
    if not pts:
        pts = [(0.0, 0.0)]
    px0, px1 = min(p[0] for p in pts), max(p[0] for p in pts)
    py0, py1 = min(p[1] for p in pts), max(p[1] for p in pts)
    if px1 - px0 < 1e-12:
        px1 = px0 + 1
    if py1 - py0 < 1e-12:
        py1 = py0 + 1

    def to_px(x, y):
        fx = margin + (x - px0) / (px1 - px0) * (w - 2 * margin)
        fy = h - margin - (y - py0) / (py1 - py0) * (h - 2 * margin)
        return fx, fy

    lines = _svg_head(w, h)
    lines.append(f'<rect x="{margin}" y="{margin}" width="{w - 2 * margin}" '
                 f'height="{h - 2 * margin}" fill="none" stroke="#999"/>')
    poly = " ".join(f"{to_px(x, y)[0]:.2f},{to_px(x, y)[1]:.2f}" for x, y in pts)
    lines.append(f'<polyline points="{poly}" fill="none" stroke="{_SVG_COLORS[0]}" '
                 f'stroke-width="1.5"/>')
    for x, y in pts:
        fx, fy = to_px(x, y)
        lines.append(f'<circle cx="{fx:.2f}" cy="{fy:.2f}" r="3" fill="{_SVG_COLORS[1]}"/>')
    for x, y in pts:
        fx, fy = to_px(x, y)
        val = 10 ** y if logy else y
        lines.append(f'<text x="{fx + 5:.1f}" y="{fy - 5:.1f}" font-size="9" '
                     f'fill="#555">{val:.3g}</text>')
    if title:
        lines.append(f'<text x="{w / 2:.0f}" y="24" font-size="14" text-anchor="middle">'
                     f'{title}{" (log y)" if logy else ""}</text>')
    lines.append("</svg>")
    path.write_text("\n".join(lines), encoding="utf-8")
