"""Minimal SVG and tabular emission for the command-line front end.

Charts here exist to eyeball results, not to publish: a polyline for
likelihood curves and per-cell arrows for directional grids. Everything is
plain generated SVG text with no plotting dependency.
"""

from __future__ import annotations

import math

import numpy as np

from .evaluate import CurveResult
from .grids import OccupancyGrid
from .model import BinningSpec, DirectionalGrid


def quiver_entries(grid: DirectionalGrid, min_prob: float = 0.0,
                   spec: BinningSpec | None = None) -> list[tuple]:
    """(x, y, direction_index, angle, probability) rows, one per direction
    entry at or above min_prob, in row-major cell order."""
    if spec is None:
        spec = BinningSpec(k=grid.k)
    centers = spec.bin_centers()
    geo = grid.geometry
    rows = []
    mask = grid.probs >= min_prob
    for r, c, b in np.argwhere(mask):
        x = geo.origin_x + (c + 0.5) * geo.resolution
        y = geo.origin_y + (r + 0.5) * geo.resolution
        rows.append((x, y, int(b) + 1, float(centers[b]),
                     float(grid.probs[r, c, b])))
    return rows


def _fmt(value: float) -> str:
    return f"{value:.3f}".rstrip("0").rstrip(".")


def quiver_svg(grid: DirectionalGrid, occupancy: OccupancyGrid | None = None,
               min_prob: float = 0.0, cell_px: float = 24.0,
               spec: BinningSpec | None = None) -> str:
    """Render per-cell direction arrows, optionally over the occupancy map.

    Arrow length scales with probability. The canvas covers the model
    grid's bounding box; the map may use a different resolution and is
    drawn through world coordinates. SVG y runs downward, world y upward,
    so all y coordinates are flipped.
    """
    if spec is None:
        spec = BinningSpec(k=grid.k)
    geo = grid.geometry
    ppm = cell_px / geo.resolution
    width = geo.width * cell_px
    height = geo.height * cell_px
    max_y = geo.origin_y + geo.height * geo.resolution

    def to_px(x: float, y: float) -> tuple[float, float]:
        return (x - geo.origin_x) * ppm, (max_y - y) * ppm

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="#ffffff"/>',
    ]
    if occupancy is not None:
        side = occupancy.resolution * ppm
        for r, c in np.argwhere(occupancy.values > 0.0):
            occ = occupancy.values[r, c]
            shade = int(round(255 * (1.0 - occ)))
            cx = occupancy.origin_x + c * occupancy.resolution
            cy = occupancy.origin_y + (r + 1) * occupancy.resolution
            px, py = to_px(cx, cy)
            parts.append(
                f'<rect x="{_fmt(px)}" y="{_fmt(py)}" width="{_fmt(side)}" '
                f'height="{_fmt(side)}" fill="rgb({shade},{shade},{shade})"/>'
            )
    scale = cell_px * 1.6
    head = cell_px * 0.12
    for x, y, _, angle, prob in quiver_entries(grid, min_prob, spec):
        x0, y0 = to_px(x, y)
        length = prob * scale
        x1 = x0 + length * math.cos(angle)
        y1 = y0 - length * math.sin(angle)
        # arrowhead: two short strokes swept back from the tip
        for sweep in (angle + 2.6, angle - 2.6):
            hx = x1 + head * math.cos(sweep)
            hy = y1 - head * math.sin(sweep)
            parts.append(
                f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(hx)}" '
                f'y2="{_fmt(hy)}" stroke="#b22222" stroke-width="1"/>'
            )
        parts.append(
            f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" '
            f'y2="{_fmt(y1)}" stroke="#b22222" stroke-width="1.2"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


def curve_svg(result: CurveResult, width: float = 640.0,
              height: float = 400.0) -> str:
    """Likelihood-vs-observations polyline with a dashed upper-bound line."""
    margin_l, margin_r, margin_t, margin_b = 60.0, 20.0, 20.0, 45.0
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    ns = [n for n, _ in result.points]
    values = [v for _, v in result.points]
    x_max = max(ns) if max(ns) > 0 else 1
    y_candidates = list(values)
    if result.upper_bound is not None:
        y_candidates.append(result.upper_bound)
    y_max = min(1.0, max(y_candidates) * 1.1 + 1e-9)

    def to_px(n: float, v: float) -> tuple[float, float]:
        return (margin_l + plot_w * n / x_max,
                margin_t + plot_h * (1.0 - v / y_max))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="#ffffff"/>',
    ]
    axis = '<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000" stroke-width="1"/>'
    parts.append(axis.format(_fmt(margin_l), _fmt(margin_t),
                             _fmt(margin_l), _fmt(margin_t + plot_h)))
    parts.append(axis.format(_fmt(margin_l), _fmt(margin_t + plot_h),
                             _fmt(margin_l + plot_w), _fmt(margin_t + plot_h)))
    for i in range(5):
        v = y_max * i / 4
        _, py = to_px(0, v)
        parts.append(axis.format(_fmt(margin_l - 4), _fmt(py),
                                 _fmt(margin_l), _fmt(py)))
        parts.append(f'<text x="{_fmt(margin_l - 8)}" y="{_fmt(py + 4)}" '
                     f'font-size="11" text-anchor="end">{v:.3g}</text>')
        n = x_max * i / 4
        px, _ = to_px(n, 0)
        parts.append(axis.format(_fmt(px), _fmt(margin_t + plot_h),
                                 _fmt(px), _fmt(margin_t + plot_h + 4)))
        parts.append(f'<text x="{_fmt(px)}" y="{_fmt(margin_t + plot_h + 18)}" '
                     f'font-size="11" text-anchor="middle">{n:.4g}</text>')
    parts.append(f'<text x="{_fmt(margin_l + plot_w / 2)}" '
                 f'y="{_fmt(height - 8)}" font-size="12" '
                 f'text-anchor="middle">observations</text>')
    parts.append(f'<text x="14" y="{_fmt(margin_t + plot_h / 2)}" '
                 f'font-size="12" text-anchor="middle" '
                 f'transform="rotate(-90 14 {_fmt(margin_t + plot_h / 2)})">'
                 f'likelihood</text>')

    if result.upper_bound is not None:
        _, py = to_px(0, result.upper_bound)
        parts.append(f'<line x1="{_fmt(margin_l)}" y1="{_fmt(py)}" '
                     f'x2="{_fmt(margin_l + plot_w)}" y2="{_fmt(py)}" '
                     f'stroke="#555" stroke-width="1" stroke-dasharray="6 4"/>')
    coords = " ".join(f"{_fmt(to_px(n, v)[0])},{_fmt(to_px(n, v)[1])}"
                      for n, v in result.points)
    parts.append(f'<polyline points="{coords}" fill="none" stroke="#1f5fa8" '
                 f'stroke-width="1.5"/>')
    for n, v in result.points:
        px, py = to_px(n, v)
        parts.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="2.5" '
                     f'fill="#1f5fa8"/>')
    parts.append("</svg>")
    return "\n".join(parts)
