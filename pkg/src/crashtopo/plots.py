"""Minimal dependency-free SVG line plots of WD series."""
from __future__ import annotations

from datetime import date
from html import escape
from typing import Sequence

WIDTH, HEIGHT = 720, 320
MARGIN = dict(left=60, right=20, top=30, bottom=40)


def _fmt_month(d: date) -> str:
    return f"{d.month:02d}-{d.year}"


def line_svg(
    dates: Sequence[date],
    values: Sequence[float],
    title: str = "",
    band: tuple[date, date] | None = None,
    comments: Sequence[str] = (),
) -> str:
    """Render one series; ``band`` shades a date interval (e.g. a crash)."""
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    out += [f"<!-- {escape(c)} -->" for c in comments]
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">')
    out.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(title)}</text>')
    if dates:
        t0, t1 = dates[0].toordinal(), dates[-1].toordinal()
        span = max(1, t1 - t0)
        vmax = max(values) if values else 1.0
        vmax = vmax if vmax > 0 else 1.0

        def sx(d: date) -> float:
            return x0 + (x1 - x0) * (d.toordinal() - t0) / span

        def sy(v: float) -> float:
            return y0 - (y0 - y1) * v / vmax

        if band is not None:
            a, b = max(band[0], dates[0]), min(band[1], dates[-1])
            if a <= b:
                out.append(f'<rect x="{sx(a):.2f}" y="{y1}" width="{max(1.0, sx(b) - sx(a)):.2f}" '
                           f'height="{y0 - y1}" fill="none" stroke="red" stroke-width="1.5"/>')
        pts = " ".join(f"{sx(d):.2f},{sy(v):.2f}" for d, v in zip(dates, values))
        out.append(f'<polyline fill="none" stroke="#1f4e9c" stroke-width="1.2" points="{pts}"/>')
        n_ticks = min(6, len(dates))
        for k in range(n_ticks):
            d = dates[round(k * (len(dates) - 1) / max(1, n_ticks - 1))]
            out.append(f'<text x="{sx(d):.2f}" y="{y0 + 16}" text-anchor="middle" font-family="sans-serif" font-size="10">{_fmt_month(d)}</text>')
        out.append(f'<text x="{x0 - 6}" y="{y1 + 4}" text-anchor="end" font-family="sans-serif" font-size="10">{vmax:.3g}</text>')
        out.append(f'<text x="{x0 - 6}" y="{y0}" text-anchor="end" font-family="sans-serif" font-size="10">0</text>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
