"""Standalone SVG rendering of lattice walks."""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import quoteattr

from .saw_tree import FiniteWalk


@dataclass(frozen=True)
class SvgStyle:
    scale: float = 12.0  # pixels per lattice unit
    pad: float = 1.5  # lattice units around the walk
    stroke: str = "#1f4e9c"
    stroke_width: float = 0.25
    grid: bool = True
    grid_color: str = "#e4e4e4"
    axis_color: str = "#999999"
    origin_color: str = "#c0392b"
    max_grid_lines: int = 400


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def render_svg(w, style: SvgStyle | None = None, title: str | None = None) -> str:
    """SVG 1.1 document of the walk: unit grid, axis, polyline, origin dot.

    ``w`` is a FiniteWalk or any sequence of (x, y) points.  Lattice y
    points up in the picture.
    """
    style = style or SvgStyle()
    pts = list(w.points) if isinstance(w, FiniteWalk) else [tuple(p) for p in w]
    if not pts:
        pts = [(0, 0)]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1 = min(xs) - style.pad, max(xs) + style.pad
    y0, y1 = min(ys) - style.pad, max(ys) + style.pad
    s = style.scale
    width, height = (x1 - x0) * s, (y1 - y0) * s

    def X(x):
        return (x - x0) * s

    def Y(y):
        return (y1 - y) * s

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
    ]
    if title:
        out.append(f"<title>{_escape(title)}</title>")
    out.append('<rect width="100%" height="100%" fill="white"/>')
    gx = range(int(x0) + 1, int(x1) + 1)
    gy = range(int(y0) + 1, int(y1) + 1)
    if style.grid and len(gx) + len(gy) <= style.max_grid_lines:
        lines = [f"M{_fmt(X(x))} 0V{_fmt(height)}" for x in gx]
        lines += [f"M0 {_fmt(Y(y))}H{_fmt(width)}" for y in gy]
        out.append(
            f'<path d="{" ".join(lines)}" stroke={quoteattr(style.grid_color)} '
            f'stroke-width="{_fmt(0.05 * s)}" fill="none"/>'
        )
    out.append(
        f'<line x1="0" y1="{_fmt(Y(0))}" x2="{_fmt(width)}" y2="{_fmt(Y(0))}" '
        f'stroke={quoteattr(style.axis_color)} stroke-width="{_fmt(0.08 * s)}"/>'
    )
    if len(pts) > 1:
        coords = " ".join(f"{_fmt(X(x))},{_fmt(Y(y))}" for x, y in pts)
        out.append(
            f'<polyline points="{coords}" fill="none" stroke={quoteattr(style.stroke)} '
            f'stroke-width="{_fmt(style.stroke_width * s)}" stroke-linejoin="round" '
            f'stroke-linecap="round"/>'
        )
    out.append(
        f'<circle cx="{_fmt(X(0))}" cy="{_fmt(Y(0))}" r="{_fmt(0.3 * s)}" '
        f'fill={quoteattr(style.origin_color)}/>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def polyline_points(svg: str) -> list[tuple[float, float]]:
    """Pixel coordinates of the first polyline in a rendered document."""
    import xml.etree.ElementTree as ET

    root = ET.fromstring(svg)
    for el in root.iter():
        if el.tag.endswith("polyline"):
            return [tuple(map(float, p.split(","))) for p in el.get("points").split()]
    return []
