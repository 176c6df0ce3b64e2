"""Newton polygon at z = 0 and the regular-singular criterion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .numctx import format_fraction
from .operator import DifferenceOperator

__all__ = [
    "Segment",
    "NewtonPolygon",
    "RegularityReport",
    "newton_polygon",
    "is_regular_singular",
    "render_ascii",
    "render_svg",
    "polygon_json",
]


@dataclass(frozen=True)
class Segment:
    slope: Fraction
    x_start: int
    x_end: int
    supporting_indices: tuple  # operator indices i with (n - i, val a_i) on the segment
    y_start: Fraction = Fraction(0)

    @property
    def length(self) -> int:
        return self.x_end - self.x_start

    @property
    def is_horizontal(self) -> bool:
        return self.slope == 0

    @property
    def height(self) -> Fraction:
        """Valuation level of a horizontal segment."""
        return self.y_start

    def y_at(self, x) -> Fraction:
        return self.y_start + self.slope * (x - self.x_start)


@dataclass(frozen=True)
class NewtonPolygon:
    order: int
    points: tuple  # (x, y) with x = n - i, y = val(a_i)
    vertices: tuple
    segments: tuple = field(default_factory=tuple)

    @property
    def slopes(self):
        return [s.slope for s in self.segments]

    @property
    def lengths(self):
        return [s.length for s in self.segments]

    @property
    def lowest_slope(self):
        return self.segments[0].slope


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def newton_polygon(op: DifferenceOperator) -> NewtonPolygon:
    """Lower convex hull of ``(n - i, val a_i)`` by Andrew's monotone chain."""
    n = op.order
    points = []
    for i, v in enumerate(op.valuations()):
        if v != math.inf:
            points.append((n - i, Fraction(v)))
    points.sort()
    hull: list = []
    for p in points:
        # pop on <= 0 so collinear interior points are not vertices
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)
    segments = []
    for a, b in zip(hull, hull[1:]):
        slope = Fraction(b[1] - a[1]) / (b[0] - a[0])
        support = tuple(sorted(
            (n - x for x, y in points
             if a[0] <= x <= b[0] and y == a[1] + slope * (x - a[0])),
            reverse=True))
        segments.append(Segment(slope, a[0], b[0], support, a[1]))
    return NewtonPolygon(n, tuple(points), tuple(hull), tuple(segments))


@dataclass(frozen=True)
class RegularityReport:
    regular: bool
    valuations: tuple
    offending: tuple  # (index, valuation, reason)

    def __bool__(self):
        return self.regular

    def describe(self) -> str:
        if self.regular:
            return "regular singular"
        lines = ["irregular singular"]
        for i, v, reason in self.offending:
            lines.append(f"  val(a_{i}) = {_fmt(v)}: {reason}")
        return "\n".join(lines)


def _fmt(v):
    return "inf" if v == math.inf else format_fraction(v)


def is_regular_singular(op: DifferenceOperator) -> RegularityReport:
    """``val a_0 == val a_n`` and no coefficient has smaller valuation."""
    vals = tuple(op.valuations())
    n = op.order
    vn = vals[n]
    bad = []
    if vals[0] != vn:
        bad.append((0, vals[0], f"differs from val(a_{n}) = {_fmt(vn)}"))
    for k, v in enumerate(vals):
        if v < vn and not (k == 0 and bad):
            bad.append((k, v, f"below val(a_{n}) = {_fmt(vn)}"))
    return RegularityReport(not bad, vals, tuple(bad))


# -- rendering ----------------------------------------------------------

def polygon_json(poly: NewtonPolygon) -> dict:
    return {
        "points": [[x, _fmt(y)] for x, y in poly.points],
        "vertices": [[x, _fmt(y)] for x, y in poly.vertices],
        "segments": [
            {
                "slope": format_fraction(s.slope),
                "length": s.length,
                "x_start": s.x_start,
                "x_end": s.x_end,
                "supporting_indices": list(s.supporting_indices),
            }
            for s in poly.segments
        ],
    }


def render_ascii(poly: NewtonPolygon) -> str:
    """Character plot: ``*`` vertices, ``o`` other points, ``.`` the hull."""
    ys = [y for _, y in poly.points]
    scale = 1
    for y in ys:
        scale = scale * y.denominator // math.gcd(scale, y.denominator)
    lo = min(ys)
    hi = max(ys)
    rows = int((hi - lo) * scale) + 1
    cols = poly.order + 1
    grid = [[" "] * cols for _ in range(rows)]

    def row_of(y):
        return rows - 1 - int((y - lo) * scale)

    for seg in poly.segments:
        for x in range(seg.x_start, seg.x_end + 1):
            r = (seg.y_at(x) - lo) * scale
            if r.denominator == 1:
                grid[rows - 1 - int(r)][x] = "."
    vert = set(poly.vertices)
    for p in poly.points:
        grid[row_of(p[1])][p[0]] = "*" if p in vert else "o"
    width = max(len(_fmt(lo + Fraction(r, scale))) for r in range(rows))
    lines = []
    for r, row in enumerate(grid):
        label = _fmt(lo + Fraction(rows - 1 - r, scale)).rjust(width)
        lines.append(f"{label} |" + "".join(row).rstrip())
    lines.append(" " * width + " +" + "-" * cols)
    lines.append(" " * width + f"  x = n - i, 0..{poly.order}")
    for s in poly.segments:
        lines.append(f"segment x={s.x_start}..{s.x_end}: slope {format_fraction(s.slope)}, length {s.length}")
    return "\n".join(lines)


def render_svg(poly: NewtonPolygon, cell: int = 40) -> str:
    ys = [float(y) for _, y in poly.points]
    lo, hi = min(ys), max(ys)
    span = max(hi - lo, 1.0)
    w = cell * (poly.order + 2)
    h = cell * 6
    pad = cell

    def pt(x, y):
        return pad + x * cell, h - pad - (float(y) - lo) / span * (h - 2 * pad)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
             f'<line x1="{pad}" y1="{h - pad}" x2="{w - pad // 2}" y2="{h - pad}" stroke="#888"/>']
    hull = " ".join("%.1f,%.1f" % pt(x, y) for x, y in poly.vertices)
    parts.append(f'<polyline points="{hull}" fill="none" stroke="#1f77b4" stroke-width="2"/>')
    vert = set(poly.vertices)
    for x, y in poly.points:
        cx, cy = pt(x, y)
        colour = "#d62728" if (x, y) in vert else "#555"
        parts.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="4" fill="{colour}"/>')
    for s in poly.segments:
        mx, my = pt((s.x_start + s.x_end) / 2, (s.y_at(s.x_start) + s.y_at(s.x_end)) / 2)
        parts.append(f'<text x="{mx:.1f}" y="{my - 8:.1f}" font-size="12" text-anchor="middle">'
                     f'{format_fraction(s.slope)}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
