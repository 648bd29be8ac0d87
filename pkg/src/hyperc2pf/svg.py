"""Minimal SVG line chart for sweep results. No plotting library involved."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=64, right=150, top=24, bottom=52)
COLORS = ("#c0392b", "#1f4e9c", "#7f8c8d", "#27ae60")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def line_chart(
    x: Sequence[float],
    series: dict,
    xlabel: str = "x",
    ylabel: str = "",
    ylim: tuple = (0.0, 1.0),
    dashed: Sequence[str] = (),
) -> str:
    """Return SVG text plotting each ``series[name]`` against ``x``.

    Series listed in ``dashed`` are drawn with a dashed stroke.
    """
    if not x:
        raise ValueError("nothing to plot")
    x0, x1 = min(x), max(x)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    y0, y1 = ylim
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return MARGIN["top"] + (1 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        px = sx(t)
        out.append(f'<line x1="{px:.2f}" y1="{MARGIN["top"] + ph}" x2="{px:.2f}" y2="{MARGIN["top"] + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{MARGIN["top"] + ph + 19}" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        py = sy(t)
        out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{py:.2f}" x2="{MARGIN["left"]}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{py + 4:.2f}" text-anchor="end">{t:.3g}</text>')
    out.append(
        f'<text x="{MARGIN["left"] + pw / 2:.2f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>'
    )
    if ylabel:
        cy = MARGIN["top"] + ph / 2
        out.append(f'<text x="16" y="{cy:.2f}" text-anchor="middle" transform="rotate(-90 16 {cy:.2f})">{escape(ylabel)}</text>')

    for k, (name, ys) in enumerate(series.items()):
        if len(ys) != len(x):
            raise ValueError(f"series {name!r} has {len(ys)} points, x has {len(x)}")
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(min(max(b, y0), y1)):.2f}" for a, b in zip(x, ys))
        dash = ' stroke-dasharray="6 4"' if name in dashed else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"{dash}/>')
        ly = MARGIN["top"] + 14 + 18 * k
        lx = MARGIN["left"] + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 28}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
