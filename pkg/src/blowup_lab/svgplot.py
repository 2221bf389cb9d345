"""Minimal deterministic SVG line plots: axes, ticks, polylines, labels.

No plotting dependency; byte-identical output for identical data.
"""

from __future__ import annotations

import math
from pathlib import Path

WIDTH, HEIGHT = 640, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 36, 48
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def write_line_plot(path: str | Path, curves, title: str = "",
                    xlabel: str = "", ylabel: str = "") -> None:
    """Write a line plot; curves is a sequence of (x, y, label) triples."""
    xs = [float(v) for x, _, _ in curves for v in x]
    ys = [float(v) for _, y, _ in curves for v in y]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def px(x: float) -> float:
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y: float) -> float:
        return MARGIN_T + ph - (y - y_lo) / (y_hi - y_lo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]
    axis = (f'M {px(x_lo):.2f} {py(y_lo):.2f} H {px(x_hi):.2f} '
            f'M {px(x_lo):.2f} {py(y_lo):.2f} V {py(y_hi):.2f}')
    parts.append(f'<path d="{axis}" stroke="black" fill="none"/>')
    for tx in _ticks(x_lo, x_hi):
        parts.append(f'<line x1="{px(tx):.2f}" y1="{py(y_lo):.2f}" '
                     f'x2="{px(tx):.2f}" y2="{py(y_lo) + 5:.2f}" stroke="black"/>')
        parts.append(f'<text x="{px(tx):.2f}" y="{py(y_lo) + 18:.2f}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="10">{_fmt(tx)}</text>')
    for ty in _ticks(y_lo, y_hi):
        parts.append(f'<line x1="{px(x_lo) - 5:.2f}" y1="{py(ty):.2f}" '
                     f'x2="{px(x_lo):.2f}" y2="{py(ty):.2f}" stroke="black"/>')
        parts.append(f'<text x="{px(x_lo) - 8:.2f}" y="{py(ty) + 3:.2f}" '
                     f'text-anchor="end" font-family="sans-serif" '
                     f'font-size="10">{_fmt(ty)}</text>')
    parts.append(f'<text x="{MARGIN_L + pw // 2}" y="{HEIGHT - 10}" '
                 f'text-anchor="middle" font-family="sans-serif" '
                 f'font-size="12">{xlabel}</text>')
    parts.append(f'<text x="16" y="{MARGIN_T + ph // 2}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12" '
                 f'transform="rotate(-90 16 {MARGIN_T + ph // 2})">{ylabel}</text>')
    for k, (x, y, label) in enumerate(curves):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{px(float(a)):.2f},{py(float(b)):.2f}"
                       for a, b in zip(x, y))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        if label:
            ly = MARGIN_T + 14 + 14 * k
            parts.append(f'<line x1="{WIDTH - 150}" y1="{ly - 4}" '
                         f'x2="{WIDTH - 130}" y2="{ly - 4}" stroke="{color}" '
                         f'stroke-width="1.5"/>')
            parts.append(f'<text x="{WIDTH - 125}" y="{ly}" '
                         f'font-family="sans-serif" font-size="11">{label}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8",
                          newline="\n")
