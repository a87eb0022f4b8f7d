"""Minimal static SVG line charts; no plotting dependency.

Good enough for the figure-data exports: axes, a frame, and a handful of
polylines with a small legend.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

_COLORS = ["#1f77b4", "#d62728", "#ff7f0e", "#9467bd", "#2ca02c", "#8c564b"]

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 56, 16, 20, 40


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def write_line_chart(path, series: List[Tuple[str, Sequence[float], Sequence[float]]],
                     title: str = "", x_label: str = "", y_label: str = "") -> None:
    """series: list of (label, xs, ys); NaNs split a polyline."""
    xs_all = [x for _, xs, _ in series for x in xs if math.isfinite(x)]
    ys_all = [y for _, _, ys in series for y in ys if math.isfinite(y)]
    if not xs_all or not ys_all:
        raise ValueError("nothing to plot")
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def to_px(x, y):
        px = _ML + (x - x0) / (x1 - x0) * (_W - _ML - _MR)
        py = _H - _MB - (y - y0) / (y1 - y0) * (_H - _MT - _MB)
        return px, py

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
             f'viewBox="0 0 {_W} {_H}">',
             f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
             f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
             f'height="{_H - _MT - _MB}" fill="none" stroke="#888"/>']
    if title:
        parts.append(f'<text x="{_W / 2}" y="14" font-size="13" text-anchor="middle" '
                     f'font-family="sans-serif">{title}</text>')
    # zero axes when inside range
    if y0 < 0 < y1:
        _, py = to_px(x0, 0.0)
        parts.append(f'<line x1="{_ML}" y1="{py:.1f}" x2="{_W - _MR}" y2="{py:.1f}" '
                     f'stroke="#ccc" stroke-dasharray="4 3"/>')
    if x0 < 0 < x1:
        px, _ = to_px(0.0, y0)
        parts.append(f'<line x1="{px:.1f}" y1="{_MT}" x2="{px:.1f}" y2="{_H - _MB}" '
                     f'stroke="#ccc" stroke-dasharray="4 3"/>')
    # ticks
    for i in range(5):
        xv = x0 + i * (x1 - x0) / 4
        px, _ = to_px(xv, y0)
        parts.append(f'<text x="{px:.1f}" y="{_H - _MB + 16}" font-size="10" '
                     f'text-anchor="middle" font-family="sans-serif">{_fmt(xv)}</text>')
        yv = y0 + i * (y1 - y0) / 4
        _, py = to_px(x0, yv)
        parts.append(f'<text x="{_ML - 6}" y="{py + 3:.1f}" font-size="10" '
                     f'text-anchor="end" font-family="sans-serif">{_fmt(yv)}</text>')
    if x_label:
        parts.append(f'<text x="{_W / 2}" y="{_H - 6}" font-size="11" '
                     f'text-anchor="middle" font-family="sans-serif">{x_label}</text>')
    if y_label:
        parts.append(f'<text x="14" y="{_H / 2}" font-size="11" text-anchor="middle" '
                     f'font-family="sans-serif" transform="rotate(-90 14 {_H / 2})">'
                     f'{y_label}</text>')
    for idx, (label, xs, ys) in enumerate(series):
        color = _COLORS[idx % len(_COLORS)]
        pts, chunks = [], []
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y):
                pts.append(to_px(x, y))
            elif pts:
                chunks.append(pts)
                pts = []
        if pts:
            chunks.append(pts)
        for chunk in chunks:
            d = " ".join(f"{px:.2f},{py:.2f}" for px, py in chunk)
            parts.append(f'<polyline points="{d}" fill="none" stroke="{color}" '
                         f'stroke-width="1.4"/>')
        ly = _MT + 14 + 14 * idx
        parts.append(f'<line x1="{_W - _MR - 110}" y1="{ly - 4}" x2="{_W - _MR - 90}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{_W - _MR - 85}" y="{ly}" font-size="11" '
                     f'font-family="sans-serif">{label}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))
