"""Log-scale SVG plot of empirical distances against a bound curve.

Written by hand so result directories need no plotting library.
"""

import math
from typing import Optional, Sequence

from ..models.reports import BoundReport

WIDTH, HEIGHT = 640, 400
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 20, 40, 50

BOUND_COLOR = "#c0392b"
EMPIRICAL_COLOR = "#2c3e50"


def _positive(values: Sequence[float]) -> list[float]:
    return [v for v in values if v > 0 and math.isfinite(v)]


class LogPlot:
    """Linear x axis, log10 y axis, fixed canvas."""

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        self.x_lo = min(xs) if xs else 0.0
        self.x_hi = max(xs) if xs else 1.0
        if self.x_hi <= self.x_lo:
            self.x_hi = self.x_lo + 1.0
        positive = _positive(ys) or [1.0]
        self.y_lo = math.floor(math.log10(min(positive)))
        self.y_hi = math.ceil(math.log10(max(positive)))
        if self.y_hi <= self.y_lo:
            self.y_hi = self.y_lo + 1

    def px(self, x: float) -> float:
        span = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
        return MARGIN_LEFT + span * (x - self.x_lo) / (self.x_hi - self.x_lo)

    def py(self, y: float) -> float:
        span = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
        frac = (math.log10(y) - self.y_lo) / (self.y_hi - self.y_lo)
        return HEIGHT - MARGIN_BOTTOM - span * frac

    def axes(self) -> list[str]:
        x0, x1 = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
        y0, y1 = HEIGHT - MARGIN_BOTTOM, MARGIN_TOP
        parts = [
            f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
            f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        ]
        for e in range(self.y_lo, self.y_hi + 1):
            y = self.py(10.0**e)
            parts.append(
                f'<line x1="{x0}" y1="{y:.2f}" x2="{x1}" y2="{y:.2f}" '
                f'stroke="#dddddd"/>'
            )
            parts.append(
                f'<text x="{x0 - 8}" y="{y + 4:.2f}" font-size="11" '
                f'text-anchor="end">1e{e}</text>'
            )
        for i in range(5):
            x = self.x_lo + (self.x_hi - self.x_lo) * i / 4
            parts.append(
                f'<text x="{self.px(x):.2f}" y="{y0 + 18}" font-size="11" '
                f'text-anchor="middle">{x:g}</text>'
            )
        parts.append(
            f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT - 10}" font-size="12" '
            f'text-anchor="middle">t</text>'
        )
        return parts


def bound_plot(report: BoundReport, title: Optional[str] = None) -> str:
    """Empirical estimates with CI bars, bound curve as a polyline."""
    ts = [row.t for row in report.rows]
    ys = [row.bound for row in report.rows]
    ys += [row.ci_hi for row in report.rows] + [row.empirical for row in report.rows]
    ys += [row.ci_lo for row in report.rows]
    plot = LogPlot(ts, ys)
    title = title or f"{report.model_id}: {report.status.value}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" font-size="14" text-anchor="middle">{title}</text>',
    ]
    parts += plot.axes()

    bound_points = [
        f"{plot.px(row.t):.2f},{plot.py(row.bound):.2f}"
        for row in report.rows
        if row.bound > 0 and math.isfinite(row.bound)
    ]
    if len(bound_points) > 1:
        parts.append(
            f'<polyline points="{" ".join(bound_points)}" fill="none" '
            f'stroke="{BOUND_COLOR}" stroke-width="2"/>'
        )
    for point in bound_points:
        x, y = point.split(",")
        parts.append(f'<circle cx="{x}" cy="{y}" r="3" fill="{BOUND_COLOR}"/>')

    floor = 10.0**plot.y_lo
    for row in report.rows:
        if row.ci_hi <= 0:
            continue
        x = plot.px(row.t)
        lo = plot.py(max(row.ci_lo, floor))
        hi = plot.py(row.ci_hi)
        parts.append(
            f'<line x1="{x:.2f}" y1="{lo:.2f}" x2="{x:.2f}" y2="{hi:.2f}" '
            f'stroke="{EMPIRICAL_COLOR}"/>'
        )
        if row.empirical > 0:
            color = EMPIRICAL_COLOR if row.passed else BOUND_COLOR
            parts.append(
                f'<rect x="{x - 3:.2f}" y="{plot.py(row.empirical) - 3:.2f}" '
                f'width="6" height="6" fill="{color}"/>'
            )

    legend_x = WIDTH - MARGIN_RIGHT - 190
    parts += [
        f'<line x1="{legend_x}" y1="{MARGIN_TOP + 10}" x2="{legend_x + 20}" '
        f'y2="{MARGIN_TOP + 10}" stroke="{BOUND_COLOR}" stroke-width="2"/>',
        f'<text x="{legend_x + 26}" y="{MARGIN_TOP + 14}" font-size="11">'
        f"bound 2V/h(t)</text>",
        f'<rect x="{legend_x + 7}" y="{MARGIN_TOP + 23}" width="6" height="6" '
        f'fill="{EMPIRICAL_COLOR}"/>',
        f'<text x="{legend_x + 26}" y="{MARGIN_TOP + 30}" font-size="11">'
        f"coupling estimate, 95% CI</text>",
        "</svg>",
    ]
    return "\n".join(parts) + "\n"
