"""Minimal self-contained SVG charts (box plots and bar charts)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 50


def box_stats(values) -> dict | None:
    """Quartiles (linear interpolation), whiskers at 1.5 IQR, and outliers."""
    v = np.sort(np.asarray([x for x in values if not math.isnan(x)], dtype=float))
    if v.size == 0:
        return None
    q1, med, q3 = np.percentile(v, [25, 50, 75], method="linear")
    iqr = q3 - q1
    inside = v[(v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)]
    return {
        "q1": float(q1),
        "median": float(med),
        "q3": float(q3),
        "lo": float(inside.min()),
        "hi": float(inside.max()),
        "outliers": [float(x) for x in v if x < inside.min() or x > inside.max()],
    }


def _ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _frame(title: str, ylabel: str, ticks, y_of) -> list[str]:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text transform="translate(18,{(TOP + HEIGHT - BOTTOM) / 2}) rotate(-90)" text-anchor="middle">{escape(ylabel)}</text>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{HEIGHT - BOTTOM}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{HEIGHT - BOTTOM}" x2="{WIDTH - RIGHT}" y2="{HEIGHT - BOTTOM}" stroke="black"/>',
    ]
    for t in ticks:
        y = y_of(t)
        parts.append(f'<line x1="{LEFT - 4}" y1="{y:.2f}" x2="{WIDTH - RIGHT}" y2="{y:.2f}" stroke="#ddd"/>')
        parts.append(f'<text x="{LEFT - 7}" y="{y + 4:.2f}" text-anchor="end">{t:g}</text>')
    return parts


def boxplot_svg(groups, labels, ylabel: str, title: str = "") -> str:
    """One box per group; whiskers reach the furthest point within 1.5 IQR."""
    stats = [box_stats(g) for g in groups]
    present = [s for s in stats if s is not None]
    lo = min([0.0] + [min([s["lo"]] + s["outliers"]) for s in present])
    hi = max([1.0] + [max([s["hi"]] + s["outliers"]) for s in present])
    ticks = _ticks(lo, hi)
    lo, hi = min(lo, ticks[0]), max(hi, ticks[-1])
    span = HEIGHT - TOP - BOTTOM

    def y_of(v):
        return HEIGHT - BOTTOM - (v - lo) / (hi - lo) * span

    parts = _frame(title, ylabel, ticks, y_of)
    slot = (WIDTH - LEFT - RIGHT) / max(1, len(groups))
    half = min(30.0, slot * 0.3)
    for k, (label, s) in enumerate(zip(labels, stats)):
        cx = LEFT + slot * (k + 0.5)
        parts.append(f'<text x="{cx:.2f}" y="{HEIGHT - BOTTOM + 18}" text-anchor="middle">{escape(label)}</text>')
        if s is None:
            continue
        parts.append(f'<g class="strategy" data-label="{escape(label)}">')
        parts.append(f'<line class="whisker" x1="{cx:.2f}" y1="{y_of(s["lo"]):.2f}" x2="{cx:.2f}" y2="{y_of(s["q1"]):.2f}" stroke="black"/>')
        parts.append(f'<line class="whisker" x1="{cx:.2f}" y1="{y_of(s["q3"]):.2f}" x2="{cx:.2f}" y2="{y_of(s["hi"]):.2f}" stroke="black"/>')
        for v in (s["lo"], s["hi"]):
            parts.append(f'<line x1="{cx - half / 2:.2f}" y1="{y_of(v):.2f}" x2="{cx + half / 2:.2f}" y2="{y_of(v):.2f}" stroke="black"/>')
        top, bot = y_of(s["q3"]), y_of(s["q1"])
        parts.append(
            f'<rect class="box" x="{cx - half:.2f}" y="{top:.2f}" width="{2 * half:.2f}" height="{max(bot - top, 0.5):.2f}" fill="#9ecae1" stroke="black"/>'
        )
        parts.append(f'<line class="median" x1="{cx - half:.2f}" y1="{y_of(s["median"]):.2f}" x2="{cx + half:.2f}" y2="{y_of(s["median"]):.2f}" stroke="#d62728" stroke-width="2"/>')
        for v in s["outliers"]:
            parts.append(f'<circle class="outlier" cx="{cx:.2f}" cy="{y_of(v):.2f}" r="3" fill="none" stroke="black"/>')
        parts.append("</g>")
    parts.append(f'<text x="{WIDTH - RIGHT}" y="{HEIGHT - 8}" text-anchor="end" font-size="10">whiskers: 1.5 IQR</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def bar_chart_svg(labels, values, ylabel: str, title: str = "", highlight: dict | None = None) -> str:
    """Vertical bars; ``highlight`` maps a label to a note drawn above its bar."""
    highlight = highlight or {}
    finite = [v for v in values if not math.isnan(v)]
    lo = min([0.0] + finite)
    hi = max([1e-9] + finite)
    ticks = _ticks(lo, hi)
    lo, hi = min(lo, ticks[0]), max(hi, ticks[-1])
    span = HEIGHT - TOP - BOTTOM

    def y_of(v):
        return HEIGHT - BOTTOM - (v - lo) / (hi - lo) * span

    parts = _frame(title, ylabel, ticks, y_of)
    slot = (WIDTH - LEFT - RIGHT) / max(1, len(values))
    for k, (label, v) in enumerate(zip(labels, values)):
        cx = LEFT + slot * (k + 0.5)
        parts.append(f'<text x="{cx:.2f}" y="{HEIGHT - BOTTOM + 18}" text-anchor="middle">{escape(str(label))}</text>')
        if math.isnan(v):
            continue
        top, base = y_of(max(v, 0.0)), y_of(min(v, 0.0))
        colour = "#fd8d3c" if label in highlight else "#6baed6"
        parts.append(
            f'<rect class="bar" x="{cx - slot * 0.35:.2f}" y="{top:.2f}" width="{slot * 0.7:.2f}" height="{max(base - top, 0.5):.2f}" fill="{colour}"/>'
        )
        if label in highlight:
            parts.append(f'<text x="{cx:.2f}" y="{top - 4:.2f}" text-anchor="middle" font-size="10">{escape(highlight[label])}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
