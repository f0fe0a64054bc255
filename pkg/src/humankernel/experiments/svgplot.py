"""Minimal self-contained SVG output: line plots and heat maps.

No external renderer; deterministic output for byte-identical re-runs.
"""

from __future__ import annotations

import numpy as np

_SIZE = (640, 420)
_MARGIN = 56
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"]


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = np.linspace(lo, hi, n)
    return [float(f"{t:.4g}") for t in raw]


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def line_plot(path, x, series, title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    """series: list of (label, y-array)."""
    x = np.asarray(x, dtype=float).ravel()
    w, h = _SIZE
    m = _MARGIN
    ys = np.concatenate([np.asarray(s[1], dtype=float).ravel() for s in series])
    ys = ys[np.isfinite(ys)]
    y_lo, y_hi = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_lo, x_hi = float(x.min()), float(x.max())
    if x_hi - x_lo < 1e-12:
        x_hi = x_lo + 1.0

    def px(v):
        return m + (v - x_lo) / (x_hi - x_lo) * (w - 2 * m)

    def py(v):
        return h - m - (v - y_lo) / (y_hi - y_lo) * (h - 2 * m)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w/2:.1f}" y="18" text-anchor="middle" font-size="13">{_esc(title)}</text>',
        f'<line x1="{m}" y1="{h-m}" x2="{w-m}" y2="{h-m}" stroke="black"/>',
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{h-m}" stroke="black"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        xp = px(t)
        parts.append(f'<line x1="{xp:.1f}" y1="{h-m}" x2="{xp:.1f}" y2="{h-m+4}" stroke="black"/>')
        parts.append(f'<text x="{xp:.1f}" y="{h-m+16}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y_lo, y_hi):
        yp = py(t)
        parts.append(f'<line x1="{m-4}" y1="{yp:.1f}" x2="{m}" y2="{yp:.1f}" stroke="black"/>')
        parts.append(f'<text x="{m-6}" y="{yp+3:.1f}" text-anchor="end">{t:g}</text>')
    if xlabel:
        parts.append(f'<text x="{w/2:.1f}" y="{h-8}" text-anchor="middle">{_esc(xlabel)}</text>')
    if ylabel:
        parts.append(f'<text x="14" y="{h/2:.1f}" text-anchor="middle" '
                     f'transform="rotate(-90 14 {h/2:.1f})">{_esc(ylabel)}</text>')
    for i, (label, y) in enumerate(series):
        y = np.asarray(y, dtype=float).ravel()
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y) if np.isfinite(b))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{w-m+4}" y="{m + 14*i}" fill="{color}">{_esc(label)}</text>')
    parts.append("</svg>\n")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))


def heatmap(path, matrix, title: str = "") -> None:
    """Blue-white-red heat map, symmetric about zero."""
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    n, mcols = A.shape
    w, h = _SIZE
    m = _MARGIN
    vmax = float(np.max(np.abs(A))) or 1.0
    cw = (w - 2 * m) / mcols
    ch = (h - 2 * m) / n
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w/2:.1f}" y="18" text-anchor="middle" font-size="13">{_esc(title)}</text>',
    ]
    for i in range(n):
        for j in range(mcols):
            t = A[i, j] / vmax  # -1..1
            if t >= 0:
                r, g, b = 255, int(255 * (1 - t)), int(255 * (1 - t))
            else:
                r, g, b = int(255 * (1 + t)), int(255 * (1 + t)), 255
            parts.append(
                f'<rect x="{m + j*cw:.2f}" y="{m + i*ch:.2f}" width="{cw:.2f}" '
                f'height="{ch:.2f}" fill="rgb({r},{g},{b})"/>'
            )
    parts.append("</svg>\n")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
