"""Minimal static SVG 1.1 line/scatter plots.

Conventions follow the figures being reproduced: solid lines for isolated
eigenvalues, dashed lines for bulk edges, dots for empirical values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 560, 420
MARGIN = dict(left=70, right=20, top=40, bottom=55)
DASH = {"solid": None, "dashed": "7,5", "dotted": "2,4"}


class MissingColumn(KeyError):
    pass


@dataclass
class Layer:
    """One drawn series: ``x``/``y`` column names plus a style.

    ``style`` is solid, dashed, dotted or dots. For dots, ``color_by`` names a
    column mapped onto a blue-to-orange ramp over [vmin, vmax].
    """

    x: str
    y: str
    style: str = "solid"
    color: str = "#1f77b4"
    label: str = ""
    color_by: str | None = None
    vmin: float = 0.5
    vmax: float = 1.0
    where: dict = field(default_factory=dict)


@dataclass
class FigureSpec:
    title: str
    xlabel: str
    ylabel: str
    layers: list
    xlim: tuple | None = None
    ylim: tuple | None = None


def _ramp(v, vmin, vmax):
    """Blue (low) to orange (high)."""
    t = 0.0 if vmax == vmin else min(1.0, max(0.0, (v - vmin) / (vmax - vmin)))
    lo, hi = (31, 119, 180), (255, 127, 14)
    r, g, b = (int(round(a + t * (b_ - a))) for a, b_ in zip(lo, hi))
    return f"#{r:02x}{g:02x}{b:02x}"


def _nice_ticks(lo, hi, n=6):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=raw)
    start = math.ceil(lo / step - 1e-9) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def _num(v):
    try:
        f = float(v)
    except (TypeError, ValueError):
        return math.nan
    return f


def _rows_for(layer: Layer, table):
    return [r for r in table if all(r.get(k) == v for k, v in layer.where.items())]


def render(table, spec: FigureSpec) -> str:
    """SVG text for ``spec`` drawn from ``table`` (a list of dict rows)."""
    table = list(table)
    if table:
        for layer in spec.layers:
            for col in (layer.x, layer.y, layer.color_by):
                if col is not None and not any(col in r for r in table):
                    raise MissingColumn(col)
    xs, ys = [], []
    for layer in spec.layers:
        for r in _rows_for(layer, table):
            x, y = _num(r.get(layer.x)), _num(r.get(layer.y))
            if math.isfinite(x) and math.isfinite(y):
                xs.append(x)
                ys.append(y)
    xlim = spec.xlim or ((min(xs), max(xs)) if xs else (0.0, 1.0))
    ylim = spec.ylim or ((min(ys), max(ys)) if ys else (0.0, 1.0))
    if xlim[1] <= xlim[0]:
        xlim = (xlim[0] - 0.5, xlim[0] + 0.5)
    if ylim[1] <= ylim[0]:
        ylim = (ylim[0] - 0.5, ylim[0] + 0.5)
    if spec.ylim is None:
        pad = 0.05 * (ylim[1] - ylim[0])
        ylim = (ylim[0] - pad, ylim[1] + pad)
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    px = lambda x: x0 + (x - xlim[0]) / (xlim[1] - xlim[0]) * (x1 - x0)
    py = lambda y: y0 + (y - ylim[0]) / (ylim[1] - ylim[0]) * (y1 - y0)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(spec.title)}</text>',
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>',
    ]
    for t in _nice_ticks(*xlim):
        out.append(f'<line x1="{px(t):.2f}" y1="{y0}" x2="{px(t):.2f}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{y0 + 19}" text-anchor="middle" font-family="sans-serif" font-size="11">{t:g}</text>')
    for t in _nice_ticks(*ylim):
        out.append(f'<line x1="{x0 - 5}" y1="{py(t):.2f}" x2="{x0}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{py(t) + 4:.2f}" text-anchor="end" font-family="sans-serif" font-size="11">{t:g}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="13">{escape(spec.xlabel)}</text>')
    out.append(
        f'<text x="16" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2:.1f})">{escape(spec.ylabel)}</text>'
    )
    out.append(f'<clipPath id="plot"><rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}"/></clipPath>')
    out.append('<g clip-path="url(#plot)">')
    for layer in spec.layers:
        pts = []
        for r in _rows_for(layer, table):
            x, y = _num(r.get(layer.x)), _num(r.get(layer.y))
            c = _num(r.get(layer.color_by)) if layer.color_by else math.nan
            pts.append((x, y, c))
        if layer.style == "dots":
            for x, y, c in pts:
                if math.isfinite(x) and math.isfinite(y):
                    fill = _ramp(c, layer.vmin, layer.vmax) if math.isfinite(c) else layer.color
                    out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.6" fill="{fill}"/>')
            continue
        dash = DASH.get(layer.style)
        # break the polyline at missing values
        segment = []
        for x, y, _ in sorted(pts, key=lambda p: (not math.isfinite(p[0]), p[0] if math.isfinite(p[0]) else 0.0)) + [(math.nan, math.nan, math.nan)]:
            if math.isfinite(x) and math.isfinite(y):
                segment.append(f"{px(x):.2f},{py(y):.2f}")
                continue
            if len(segment) > 1:
                extra = f' stroke-dasharray="{dash}"' if dash else ""
                out.append(f'<polyline points="{" ".join(segment)}" fill="none" stroke="{layer.color}" stroke-width="1.8"{extra}/>')
            segment = []
    out.append("</g>")
    labelled = [l for l in spec.layers if l.label]
    for i, layer in enumerate(labelled):
        ly = y1 + 16 + 16 * i
        if layer.style == "dots":
            out.append(f'<circle cx="{x1 - 150}" cy="{ly - 4}" r="3" fill="{layer.color}"/>')
        else:
            dash = DASH.get(layer.style)
            extra = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(f'<line x1="{x1 - 160}" y1="{ly - 4}" x2="{x1 - 136}" y2="{ly - 4}" stroke="{layer.color}" stroke-width="1.8"{extra}/>')
        out.append(f'<text x="{x1 - 130}" y="{ly}" font-family="sans-serif" font-size="11">{escape(layer.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(table, spec: FigureSpec, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render(table, spec), encoding="utf-8")
    return path


def bars_table(left, right, counts) -> list[dict]:
    """Histogram as a step outline usable by a solid layer."""
    rows = []
    for a, b, c in zip(np.asarray(left), np.asarray(right), np.asarray(counts)):
        rows.append({"x": float(a), "y": float(c)})
        rows.append({"x": float(b), "y": float(c)})
    return rows
