"""Hand-written SVG log-log convergence plot."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 560, 420
MARGIN = dict(left=80, right=150, top=30, bottom=60)
COLORS = ("#1f77b4", "#d62728")


def _decades(lo: float, hi: float) -> list[int]:
    return list(range(math.floor(lo), math.ceil(hi) + 1))


def convergence_svg(h: list[float], series: dict[str, list[float]], title: str = "") -> str:
    """SVG 1.1 document: one polyline per series plus a slope-1 reference triangle."""
    lh = [math.log10(v) for v in h]
    le = [math.log10(v) for ys in series.values() for v in ys if v > 0]
    x_lo, x_hi = math.floor(min(lh)), math.ceil(max(lh))
    y_lo, y_hi = math.floor(min(le)), math.ceil(max(le))
    if x_hi == x_lo:
        x_hi += 1
    if y_hi == y_lo:
        y_hi += 1
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def X(v: float) -> float:
        return MARGIN["left"] + pw * (v - x_lo) / (x_hi - x_lo)

    def Y(v: float) -> float:
        return MARGIN["top"] + ph * (1.0 - (v - y_lo) / (y_hi - y_lo))

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{MARGIN["top"] - 10}" '
                   f'text-anchor="middle">{escape(title)}</text>')
    for d in _decades(x_lo, x_hi):
        x = X(d)
        out.append(f'<line x1="{x:.2f}" y1="{MARGIN["top"] + ph}" x2="{x:.2f}" y2="{MARGIN["top"] + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{MARGIN["top"] + ph + 20}" text-anchor="middle">1e{d}</text>')
    for d in _decades(y_lo, y_hi):
        y = Y(d)
        out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{y:.2f}" x2="{MARGIN["left"]}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{y + 4:.2f}" text-anchor="end">1e{d}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">h</text>')
    out.append(f'<text x="20" y="{MARGIN["top"] + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 20 {MARGIN["top"] + ph / 2:.1f})">error</text>')

    for k, (name, ys) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{X(a):.2f},{Y(math.log10(b)):.2f}" for a, b in zip(lh, ys) if b > 0)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = MARGIN["top"] + 20 + 20 * k
        lx = MARGIN["left"] + pw + 10
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 25}" y="{ly + 4}">{escape(name)}</text>')

    # slope-1 triangle under the first series, spanning one third of the h range
    first = next(iter(series.values()))
    x1, x0 = lh[0], lh[0] - (lh[0] - lh[-1]) / 3.0
    y1 = math.log10(first[0]) - 0.3 * (y_hi - y_lo) / 4
    y0 = y1 - (x1 - x0)
    if y0 < y_lo:
        y0, y1 = y_lo, y_lo + (x1 - x0)
    tri = f"{X(x0):.2f},{Y(y0):.2f} {X(x1):.2f},{Y(y0):.2f} {X(x1):.2f},{Y(y1):.2f}"
    out.append(f'<polygon points="{tri}" fill="none" stroke="gray" stroke-dasharray="4 3"/>')
    out.append(f'<text x="{X(x1) + 4:.2f}" y="{Y(0.5 * (y0 + y1)) + 4:.2f}" fill="gray">1</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
