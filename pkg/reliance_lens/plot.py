"""SVG rendering of the attainable-accuracy region with conditions overlaid.

Coordinates are (A, Acc_final) in the unit square, mapped affinely onto the
canvas with 10% margins on every side and the y axis pointing up:

    x_px = m_x + A * (width - 2 * m_x)
    y_px = height - m_y - Acc_final * (height - 2 * m_y)

with m_x = 0.1 * width and m_y = 0.1 * height. Numbers are written with two
decimals and elements always come out in the same order, so identical specs
render to identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence
from xml.sax.saxutils import escape, quoteattr

from loguru import logger

from reliance_lens.config import TOLERANCE, Palette
from reliance_lens.core import check_ai_accuracy, envelope, expected_accuracy_nondiscerning
from reliance_lens.errors import DomainError, PointOutsideEnvelope

MARGIN = 0.1
POINT_RADIUS = 6.0
TICKS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)

Point = tuple[float, float]
Polygon = tuple[Point, ...]


class Segment(NamedTuple):
    start: Point
    end: Point


class RegionGeometry(NamedTuple):
    full: Polygon
    below: Polygon
    above: Polygon


class GuideLines(NamedTuple):
    nondiscern: Segment
    matched: Segment


class PointStyle(str, Enum):
    baseline = "baseline"
    treatment = "treatment"

    def __str__(self) -> str:
        return self.value


class PlotPoint(NamedTuple):
    label: str
    adherence: float
    final_accuracy: float
    style: PointStyle = PointStyle.treatment


class Canvas(NamedTuple):
    width: float = 600.0
    height: float = 600.0

    def to_px(self, adherence: float, final_accuracy: float) -> tuple[float, float]:
        mx, my = MARGIN * self.width, MARGIN * self.height
        x = mx + adherence * (self.width - 2 * mx)
        y = self.height - my - final_accuracy * (self.height - 2 * my)
        return x, y


@dataclass(frozen=True)
class PlotSpec:
    acc: float
    points: Sequence[PlotPoint] = ()
    arrows: Sequence[tuple[int, int]] = ()
    canvas: Canvas = Canvas()
    palette: Palette = field(default_factory=Palette)
    tol: float = TOLERANCE

    def validate(self) -> None:
        check_ai_accuracy(self.acc, self.tol)
        labels = [p.label for p in self.points]
        if len(set(labels)) != len(labels):
            raise DomainError(f"point labels must be unique, got {labels}")
        for point in self.points:
            if not envelope(self.acc, point.adherence, self.tol).contains(point.final_accuracy, self.tol):
                raise PointOutsideEnvelope(point.label, point.adherence, point.final_accuracy)
        for i, (start, end) in enumerate(self.arrows):
            if not (0 <= start < len(self.points) and 0 <= end < len(self.points)):
                raise DomainError(f"arrow {i} references a missing point ({start} -> {end})")


def region_geometry(acc: float) -> RegionGeometry:
    """The attainable region split at Acc_final = acc into impairing and complementing parts."""
    acc = check_ai_accuracy(acc)
    threshold = 2 * acc - 1
    full = ((0.0, 1 - acc), (acc, 1.0), (1.0, acc), (1 - acc, 0.0))
    above = ((threshold, acc), (acc, 1.0), (1.0, acc))
    below = ((0.0, 1 - acc), (threshold, acc), (1.0, acc), (1 - acc, 0.0))
    return RegionGeometry(full=full, below=below, above=above)


def guide_lines(acc: float) -> GuideLines:
    acc = check_ai_accuracy(acc)
    nondiscern = Segment(
        (0.0, expected_accuracy_nondiscerning(acc, 0.0)),
        (1.0, expected_accuracy_nondiscerning(acc, 1.0)),
    )
    env = envelope(acc, acc)
    matched = Segment((acc, env.lo), (acc, env.hi))
    return GuideLines(nondiscern=nondiscern, matched=matched)


def _num(value: float) -> str:
    return f"{value:.2f}"


def _points_attr(canvas: Canvas, polygon: Polygon) -> str:
    return " ".join(f"{_num(x)},{_num(y)}" for x, y in (canvas.to_px(a, f) for a, f in polygon))


def _line(canvas: Canvas, element_id: str, segment: Segment, stroke: str, extra: str = "") -> str:
    x1, y1 = canvas.to_px(*segment.start)
    x2, y2 = canvas.to_px(*segment.end)
    return (
        f'<line id={quoteattr(element_id)} x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}" '
        f"stroke={quoteattr(stroke)} stroke-width=\"2\"{extra}/>"
    )


def _axes(canvas: Canvas) -> list[str]:
    x0, y0 = canvas.to_px(0.0, 0.0)
    x1, y1 = canvas.to_px(1.0, 1.0)
    out = [
        '<g id="axes" stroke="#000000" stroke-width="1" font-family="sans-serif" font-size="12">',
        f'<line x1="{_num(x0)}" y1="{_num(y0)}" x2="{_num(x1)}" y2="{_num(y0)}"/>',
        f'<line x1="{_num(x0)}" y1="{_num(y0)}" x2="{_num(x0)}" y2="{_num(y1)}"/>',
    ]
    for tick in TICKS:
        tx, _ = canvas.to_px(tick, 0.0)
        _, ty = canvas.to_px(0.0, tick)
        label = f"{tick * 100:.0f}%"
        out.append(f'<text x="{_num(tx)}" y="{_num(y0 + 18)}" text-anchor="middle" stroke="none">{label}</text>')
        out.append(f'<text x="{_num(x0 - 8)}" y="{_num(ty + 4)}" text-anchor="end" stroke="none">{label}</text>')
    mid_x, _ = canvas.to_px(0.5, 0.0)
    _, mid_y = canvas.to_px(0.0, 0.5)
    out.append(
        f'<text x="{_num(mid_x)}" y="{_num(y0 + 40)}" text-anchor="middle" stroke="none">'
        f"Adherence to AI recommendations (A)</text>"
    )
    out.append(
        f'<text x="{_num(x0 - 44)}" y="{_num(mid_y)}" text-anchor="middle" stroke="none" '
        f'transform="rotate(-90 {_num(x0 - 44)} {_num(mid_y)})">Decision-making accuracy (Acc_final)</text>'
    )
    out.append("</g>")
    return out


def _arrow(canvas: Canvas, i: int, start: PlotPoint, end: PlotPoint, stroke: str) -> str:
    x1, y1 = canvas.to_px(start.adherence, start.final_accuracy)
    x2, y2 = canvas.to_px(end.adherence, end.final_accuracy)
    length = math.hypot(x2 - x1, y2 - y1)
    # Stop at the target marker's rim.
    if length > 2 * POINT_RADIUS:
        shrink = (POINT_RADIUS + 2) / length
        x2, y2 = x2 - (x2 - x1) * shrink, y2 - (y2 - y1) * shrink
    return (
        f'<line id="arrow-{i}" x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}" '
        f'stroke={quoteattr(stroke)} stroke-width="2" marker-end="url(#arrowhead)"/>'
    )


def render(spec: PlotSpec) -> bytes:
    """Render the framework as an SVG 1.1 document."""
    spec.validate()
    acc, canvas, palette = spec.acc, spec.canvas, spec.palette
    region = region_geometry(acc)
    guides = guide_lines(acc)
    logger.debug(f"Rendering framework at Acc_AI={acc} with {len(spec.points)} point(s), {len(spec.arrows)} arrow(s)")

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_num(canvas.width)}" '
        f'height="{_num(canvas.height)}" viewBox="0 0 {_num(canvas.width)} {_num(canvas.height)}">',
        f"<title>Attainable decision-making accuracy at Acc_AI = {acc * 100:.4g}%</title>",
        "<defs>",
        '<marker id="arrowhead" markerWidth="10" markerHeight="7" refX="9" refY="3.5" orient="auto">',
        f'<polygon points="0 0, 10 3.5, 0 7" fill={quoteattr(palette.arrow)}/>',
        "</marker>",
        "</defs>",
        f'<rect x="0" y="0" width="{_num(canvas.width)}" height="{_num(canvas.height)}" fill="#ffffff"/>',
        f'<polygon id="region-below" points="{_points_attr(canvas, region.below)}" fill={quoteattr(palette.region_below)}/>',
        f'<polygon id="region-above" points="{_points_attr(canvas, region.above)}" fill={quoteattr(palette.region_above)}/>',
    ]
    out.extend(_axes(canvas))
    out.append(_line(canvas, "line-nondiscern", guides.nondiscern, palette.line))
    out.append(_line(canvas, "line-matched", guides.matched, palette.matched, ' stroke-dasharray="6 4"'))

    for point in spec.points:
        x, y = canvas.to_px(point.adherence, point.final_accuracy)
        # Neither complementing nor impairing the AI.
        if abs(point.final_accuracy - acc) <= spec.tol:
            fill, css = palette.neutral, "pt-neutral"
        elif point.style == PointStyle.baseline:
            fill, css = palette.baseline, "pt-baseline"
        else:
            fill, css = palette.marker, "pt-treatment"
        out.append(
            f'<circle id={quoteattr("pt-" + point.label)} class="{css}" cx="{_num(x)}" cy="{_num(y)}" '
            f'r="{_num(POINT_RADIUS)}" fill={quoteattr(fill)}/>'
        )
    for point in spec.points:
        x, y = canvas.to_px(point.adherence, point.final_accuracy)
        out.append(
            f'<text x="{_num(x + POINT_RADIUS + 3)}" y="{_num(y - POINT_RADIUS - 3)}" '
            f'font-family="sans-serif" font-size="12">{escape(point.label)}</text>'
        )

    for i, (start, end) in enumerate(spec.arrows):
        out.append(_arrow(canvas, i, spec.points[start], spec.points[end], palette.arrow))

    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")
