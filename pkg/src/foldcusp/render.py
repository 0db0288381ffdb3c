"""Deterministic, self-contained SVG output for phase portraits and diagrams."""
from __future__ import annotations

from typing import Iterable, List, Optional

import numpy as np

from .retmaps import Stability, detect_canard_cycles
from .switching import PseudoKind, TangencyKind, find_pseudo_equilibria, find_tangencies, region_layout
from .trajectory import TrajectoryError, simulate

REGION_COLORS = {
    "Crossing": "#8c8c8c",
    "Sliding": "#1f4fd1",
    "Escaping": "#d12f2f",
    "TangentialSingularity": "#000000",
}

PALETTE = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
    "#8dd3c7", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#bc80bd",
    "#ccebc5", "#ffed6f", "#1f78b4", "#33a02c", "#e31a1c",
]


def _f(v: float) -> str:
    return f"{v:.3f}"


class _Canvas:
    def __init__(self, r: float, size: int = 640, margin: int = 20):
        self.r = r
        self.size = size
        self.margin = margin
        self.items: List[str] = []

    def px(self, x: float, y: float):
        s = (self.size - 2 * self.margin) / (2 * self.r)
        return self.margin + (x + self.r) * s, self.margin + (self.r - y) * s

    def polyline(self, pts, color, width=1.0, dash: Optional[str] = None):
        pts = [self.px(x, y) for x, y in pts if abs(x) <= self.r * 1.0001 and abs(y) <= self.r * 1.0001]
        if len(pts) < 2:
            return
        d = " ".join(f"{_f(a)},{_f(b)}" for a, b in pts)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>')

    def line(self, p, q, color, width=1.0, dash=None):
        self.polyline([p, q], color, width, dash)

    def circle(self, x, y, rad, stroke, fill):
        cx, cy = self.px(x, y)
        self.items.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{rad}" stroke="{stroke}" fill="{fill}" stroke-width="1.2"/>')

    def rect_px(self, x, y, w, h, fill, stroke="none"):
        self.items.append(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" fill="{fill}" stroke="{stroke}"/>')

    def text_px(self, x, y, s, size=11):
        self.items.append(f'<text x="{_f(x)}" y="{_f(y)}" font-family="monospace" font-size="{size}">{s}</text>')

    def svg(self, width=None, height=None) -> str:
        w = width or self.size
        h = height or self.size
        head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">'
        body = "\n".join(self.items)
        return f'{head}\n<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>\n{body}\n</svg>\n'


def _seed_points(r: float, n: int = 6):
    xs = np.linspace(-0.8 * r, 0.8 * r, n)
    pts = [(float(x), 0.35 * r) for x in xs] + [(float(x), -0.35 * r) for x in xs]
    return pts


def portrait_svg(Z, window: Optional[float] = None, seeds: Optional[Iterable] = None, t_max: float = 20.0, title: str = "") -> str:
    """Phase portrait: coloured switching line, tangency lines and markers, orbits and cycles."""
    r = Z.window if window is None else window
    cv = _Canvas(r)
    tang = find_tangencies(Z, r)
    for t in tang:
        cv.line((t.location, -r), (t.location, r), "#999999", 0.8, "2,3")
    for p in seeds if seeds is not None else _seed_points(r):
        try:
            tr = simulate(Z, p, t_max=t_max, window=r)
        except (TrajectoryError, ValueError):
            continue
        for arc in tr.arcs:
            if arc.field_tag != "Sliding":
                cv.polyline(arc.points[:: max(1, len(arc.points) // 200)].tolist() + [arc.points[-1].tolist()], "#222222", 0.7)
    for lo, hi, cls in region_layout(Z, r, tang):
        cv.line((lo, 0.0), (hi, 0.0), REGION_COLORS.get(cls, "#000000"), 3.0)
    for cyc in detect_canard_cycles(Z, r):
        dash = None if cyc.stability is Stability.Attracting else "6,4"
        for arc in cyc.arcs:
            cv.polyline(arc.points.tolist(), "#7b1fa2", 2.0, dash)
    for t in tang:
        if t.base_kind in (TangencyKind.FoldVisible, TangencyKind.FoldInvisible):
            cv.circle(t.location, 0.0, 4, "#000000", "#000000" if t.visible else "#ffffff")
        else:
            x, y = cv.px(t.location, 0.0)
            cv.items.append(f'<path d="M {_f(x - 5)} {_f(y + 5)} L {_f(x)} {_f(y - 5)} L {_f(x + 5)} {_f(y + 5)} Z" fill="#ffcc00" stroke="#000000"/>')
    styles = {
        PseudoKind.SigmaAttractor: ("#000000", "#000000"),
        PseudoKind.SigmaRepeller: ("#000000", "#ffffff"),
        PseudoKind.SigmaSaddle: ("#000000", "#bbbbbb"),
        PseudoKind.Virtual: ("#888888", "none"),
        PseudoKind.BoundaryPoint: ("#000000", "#ffcc00"),
        PseudoKind.Degenerate: ("#000000", "#ff00ff"),
    }
    for pe in find_pseudo_equilibria(Z, r):
        x, y = cv.px(pe.location, 0.0)
        stroke, fill = styles[pe.kind]
        cv.items.append(f'<rect x="{_f(x - 4)}" y="{_f(y - 4)}" width="8" height="8" stroke="{stroke}" fill="{fill}"/>')
    if title:
        cv.text_px(cv.margin, cv.margin - 6, title)
    return cv.svg()


def diagram_svg(diagram, cell: int = 3) -> str:
    """Bifurcation diagram: one coloured cell per grid node, legend on the right."""
    labels = diagram.labels
    n_b, n_l = labels.shape
    names = sorted({str(v) for v in labels.ravel() if v}, key=lambda s: (s.split("_")[1], int(s.split("_")[0])))
    colors = {n: PALETTE[i % len(PALETTE)] for i, n in enumerate(names)}
    w = n_l * cell + 160
    h = max(n_b * cell, 16 * len(names) + 20) + 20
    cv = _Canvas(1.0, size=w)
    for i in range(n_b):
        y = 10 + (n_b - 1 - i) * cell
        for j in range(n_l):
            v = labels[i, j]
            fill = colors.get(str(v), "#ffffff") if v else "#000000"
            cv.rect_px(10 + j * cell, y, cell, cell, fill)
    for k, n in enumerate(names):
        y = 14 + 16 * k
        cv.rect_px(n_l * cell + 24, y, 10, 10, colors[n], "#000000")
        cv.text_px(n_l * cell + 40, y + 9, n)
    return cv.svg(w, h)
