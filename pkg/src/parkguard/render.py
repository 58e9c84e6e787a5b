"""Static SVG figure of an extraction outcome.

Layers, bottom to top: non-pristine part of the region (light gray), the
pristine region (white), the high-profit region (dark gray), sample exit
paths, the region boundary and a metrics legend.
"""

from __future__ import annotations

import json
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

from .grid import DomainMask, ScalarField, marching_squares, read_polylines_csv
from .terrain import load_esri_ascii

DEFAULT_STYLE = {
    "width": 600,
    "max_paths": 40,
    "outside": "#d9d9d9",
    "pristine": "#ffffff",
    "high_profit": "#595959",
    "path": "#1f4e79",
    "boundary": "#000000",
}


def _mask_contours(mask):
    if mask.empty:
        return []
    return marching_squares(ScalarField(mask.grid, mask.inside.astype(np.float64)), 0.5)


class _Frame:
    def __init__(self, grid, width, margin=10):
        x0, x1, y0, y1 = grid.extent
        self.x0, self.y1 = x0, y1
        self.scale = (width - 2 * margin) / max(x1 - x0, 1e-300)
        self.margin = margin
        self.width = width
        self.height = int(round((y1 - y0) * self.scale)) + 2 * margin

    def xy(self, x, y):
        return (self.margin + (x - self.x0) * self.scale, self.margin + (self.y1 - y) * self.scale)

    def path_d(self, polylines):
        parts = []
        for pl in polylines:
            pts = [self.xy(x, y) for x, y in pl.vertices]
            s = "M" + " L".join(f"{px:.2f},{py:.2f}" for px, py in pts)
            parts.append(s + (" Z" if pl.closed else ""))
        return " ".join(parts)


def render_svg(outcome, style=None):
    """Layered SVG document (as a string) for ``outcome``."""
    st = dict(DEFAULT_STYLE, **(style or {}))
    omega = outcome.omega
    frame = _Frame(omega.grid, int(st["width"]))
    legend_h = 50
    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "width": str(frame.width),
        "height": str(frame.height + legend_h),
        "viewBox": f"0 0 {frame.width} {frame.height + legend_h}",
    })

    def fill_layer(name, polylines, color):
        if polylines:
            ET.SubElement(svg, "path", {"id": name, "d": frame.path_d(polylines), "fill": color,
                                        "fill-rule": "evenodd", "stroke": "none"})

    outline = omega.outline()
    fill_layer("non-pristine", outline, st["outside"])
    fill_layer("pristine", _mask_contours(outcome.pristine_mask), st["pristine"])
    fill_layer("high-profit", _mask_contours(outcome.high_profit_mask), st["high_profit"])

    g = ET.SubElement(svg, "g", {"id": "paths", "fill": "none", "stroke": st["path"], "stroke-width": "0.8"})
    for pl in list(outcome.paths)[: int(st["max_paths"])]:
        pts = " ".join(f"{px:.2f},{py:.2f}" for px, py in (frame.xy(x, y) for x, y in pl.vertices))
        ET.SubElement(g, "polyline", {"points": pts})

    ET.SubElement(svg, "path", {"id": "boundary", "d": frame.path_d(outline), "fill": "none",
                                "stroke": st["boundary"], "stroke-width": "1.2"})

    m = outcome.metrics()
    lines = [
        f"P_max = {m['p_max']:.4g}   paths = {m['n_paths']}",
        f"pristine proportion = {m['pristine_proportion']:.3f}   value protected = {m['value_protected']:.3f}",
    ]
    for k, text in enumerate(lines):
        t = ET.SubElement(svg, "text", {"x": str(frame.margin), "y": str(frame.height + 18 + 18 * k),
                                        "font-family": "sans-serif", "font-size": "13"})
        t.text = text
    return ET.tostring(svg, encoding="unicode", xml_declaration=True) + "\n"


@dataclass
class OutcomeFiles:
    """Outcome reloaded from an output directory, enough to re-render it."""

    omega: DomainMask
    pristine_mask: DomainMask
    high_profit_mask: DomainMask
    paths: list
    metrics_dict: dict

    def metrics(self):
        return dict(self.metrics_dict)


def load_outcome(out_dir):
    def mask(name):
        with open(os.path.join(out_dir, name)) as fh:
            f = load_esri_ascii(fh.read())
        return DomainMask(f.grid, np.where(f.nodata_mask, False, f.values != 0))

    with open(os.path.join(out_dir, "paths.csv")) as fh:
        paths = read_polylines_csv(fh.read())
    with open(os.path.join(out_dir, "metrics.json")) as fh:
        metrics = json.load(fh)
    return OutcomeFiles(mask("omega.asc"), mask("pristine.asc"), mask("high_profit.asc"), paths, metrics)
