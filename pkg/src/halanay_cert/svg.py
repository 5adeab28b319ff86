"""Minimal static SVG line plots: a single polyline in a fixed viewport."""

from __future__ import annotations

import numpy as np

WIDTH = 800
HEIGHT = 500
MARGIN = 50


def polyline_svg(times, values, title=""):
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    t0, t1 = float(times.min()), float(times.max())
    v0, v1 = float(values.min()), float(values.max())
    if t1 == t0:
        t1 = t0 + 1.0
    if v1 == v0:
        v1 = v0 + 1.0
    w = WIDTH - 2 * MARGIN
    h = HEIGHT - 2 * MARGIN
    xs = MARGIN + (times - t0) / (t1 - t0) * w
    ys = HEIGHT - MARGIN - (values - v0) / (v1 - v0) * h
    # thin the polyline to at most ~2000 points
    step = max(1, len(xs) // 2000)
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs[::step], ys[::step]))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">\n'
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n'
        f'<text x="{WIDTH // 2}" y="25" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>\n'
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>\n'
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>\n'
        f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 20}" font-family="sans-serif" '
        f'font-size="12">{t0:g}</text>\n'
        f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 20}" text-anchor="end" '
        f'font-family="sans-serif" font-size="12">{t1:g}</text>\n'
        f'<text x="{MARGIN - 5}" y="{HEIGHT - MARGIN}" text-anchor="end" '
        f'font-family="sans-serif" font-size="12">{v0:g}</text>\n'
        f'<text x="{MARGIN - 5}" y="{MARGIN + 5}" text-anchor="end" '
        f'font-family="sans-serif" font-size="12">{v1:g}</text>\n'
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" '
        f'points="{pts}"/>\n</svg>\n'
    )
