"""Standalone SVG line chart of NetD and NetG accuracy per outer step."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

from ..errors import MetricsFormatError
from ..training.metrics import RunMetrics

WIDTH = 640
HEIGHT = 400
MARGIN_LEFT = 64
MARGIN_RIGHT = 24
MARGIN_TOP = 24
MARGIN_BOTTOM = 56
Y_TICKS = 5

SERIES = (
    ("acc_netd", "NetD", "#1f77b4"),
    ("acc_netg", "NetG", "#ff7f0e"),
)


def _scale(value: float, lo: float, hi: float, out_lo: float, out_hi: float) -> float:
    if hi == lo:
        return (out_lo + out_hi) / 2.0
    return out_lo + (value - lo) * (out_hi - out_lo) / (hi - lo)


def accuracy_chart(metrics: RunMetrics, title: str = "kNN accuracy per outer step") -> ET.Element:
    """SVG element with one polyline per accuracy series."""
    rows = metrics.eval_rows
    if not rows:
        raise MetricsFormatError("no E rows to plot")

    steps = [r.step for r in rows]
    x_lo, x_hi = min(steps), max(steps)
    values = [getattr(r, key) for r in rows for key, _, _ in SERIES]
    y_lo = min(0.0, min(values))
    y_hi = max(1.0, max(values))
    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    top, bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM

    svg = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=str(WIDTH),
        height=str(HEIGHT),
        viewBox=f"0 0 {WIDTH} {HEIGHT}",
    )
    ET.SubElement(svg, "title").text = title
    ET.SubElement(svg, "rect", x="0", y="0", width=str(WIDTH), height=str(HEIGHT), fill="white")

    # axes
    axes = ET.SubElement(svg, "g", stroke="black", fill="none")
    ET.SubElement(axes, "line", x1=str(left), y1=str(bottom), x2=str(right), y2=str(bottom))
    ET.SubElement(axes, "line", x1=str(left), y1=str(top), x2=str(left), y2=str(bottom))

    labels = ET.SubElement(svg, "g", attrib={"font-family": "sans-serif", "font-size": "12"})
    for i in range(Y_TICKS + 1):
        value = y_lo + (y_hi - y_lo) * i / Y_TICKS
        y = _scale(value, y_lo, y_hi, bottom, top)
        ET.SubElement(axes, "line", x1=str(left - 4), y1=f"{y:.2f}", x2=str(left), y2=f"{y:.2f}")
        tick = ET.SubElement(
            labels, "text", x=str(left - 8), y=f"{y + 4:.2f}", attrib={"text-anchor": "end"}
        )
        tick.text = f"{value:.1f}"
    for step in sorted({x_lo, x_hi}):
        x = _scale(step, x_lo, x_hi, left, right)
        tick = ET.SubElement(
            labels, "text", x=f"{x:.2f}", y=str(bottom + 16), attrib={"text-anchor": "middle"}
        )
        tick.text = str(step)

    x_label = ET.SubElement(
        labels,
        "text",
        x=str((left + right) // 2),
        y=str(HEIGHT - 12),
        attrib={"text-anchor": "middle"},
    )
    x_label.text = "outer step"
    y_label = ET.SubElement(
        labels,
        "text",
        x="16",
        y=str((top + bottom) // 2),
        transform=f"rotate(-90 16 {(top + bottom) // 2})",
        attrib={"text-anchor": "middle"},
    )
    y_label.text = "kNN accuracy"

    for key, name, color in SERIES:
        points = " ".join(
            f"{_scale(r.step, x_lo, x_hi, left, right):.2f},"
            f"{_scale(getattr(r, key), y_lo, y_hi, bottom, top):.2f}"
            for r in rows
        )
        ET.SubElement(
            svg,
            "polyline",
            points=points,
            fill="none",
            stroke=color,
            attrib={"stroke-width": "2", "data-series": key},
        )

    legend = ET.SubElement(svg, "g", attrib={"font-family": "sans-serif", "font-size": "12"})
    for i, (key, name, color) in enumerate(SERIES):
        y = top + 8 + 18 * i
        ET.SubElement(
            legend,
            "line",
            x1=str(right - 90),
            y1=str(y),
            x2=str(right - 70),
            y2=str(y),
            stroke=color,
            attrib={"stroke-width": "2"},
        )
        entry = ET.SubElement(legend, "text", x=str(right - 64), y=str(y + 4))
        entry.text = f"{name} ({key})"
    return svg


def write_accuracy_plot(metrics: RunMetrics, out_path: Path) -> Path:
    svg = accuracy_chart(metrics)
    ET.indent(svg)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    ET.ElementTree(svg).write(out_path, encoding="utf-8", xml_declaration=True)
    return out_path
