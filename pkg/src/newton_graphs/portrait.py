"""SVG rendering of an extracted phase portrait on the period parallelogram."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flow import ExtractedPortrait, FlowField


@dataclass(frozen=True)
class PortraitStyle:
    size: int = 600
    margin: int = 30
    raster: int = 0  # flow-line raster points per axis (0 = off)
    unstable_color: str = "#c0392b"
    stable_color: str = "#2c3e7a"
    rotated_color: str = "#7f8c8d"
    raster_color: str = "#b0b0b0"
    cell_color: str = "#000000"
    separatrix_width: float = 2.5
    raster_width: float = 0.8
    glyph_radius: float = 5.0


def _fmt(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


class _Frame:
    """Maps the period parallelogram into the SVG viewport (y axis flipped)."""

    def __init__(self, lattice, style):
        corners = np.array([0, lattice.omega1, lattice.omega2, lattice.omega1 + lattice.omega2])
        self.x0, self.x1 = corners.real.min(), corners.real.max()
        self.y0, self.y1 = corners.imag.min(), corners.imag.max()
        span = max(self.x1 - self.x0, self.y1 - self.y0)
        self.k = (style.size - 2 * style.margin) / span
        self.m = style.margin
        self.h = style.size

    def __call__(self, z):
        z = complex(z)
        return (self.m + (z.real - self.x0) * self.k,
                self.h - self.m - (z.imag - self.y0) * self.k)


def _polylines(points, lattice, frame, jump=0.25):
    """Split a reduced sample sequence wherever it wraps around the cell."""
    runs, cur = [], []
    for z in points:
        if cur and abs(z - cur[-1]) > jump * min(abs(lattice.omega1), abs(lattice.omega2)):
            runs.append(cur)
            cur = []
        cur.append(z)
    if cur:
        runs.append(cur)
    out = []
    for run in runs:
        if len(run) < 2:
            continue
        out.append(" ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in map(frame, run)))
    return out


def render_svg(portrait: ExtractedPortrait, style: PortraitStyle = PortraitStyle()) -> str:
    """Deterministic SVG text for ``portrait``.

    Zeros are drawn as discs, poles as rings and saddles as crosses.
    Separatrices are drawn from the recorded trajectory samples, so the
    portrait should come from ``trace_separatrices(..., record=True)``.
    """
    f = portrait.function
    lat = f.lattice
    fr = _Frame(lat, style)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.size}" height="{style.size}" '
        f'viewBox="0 0 {style.size} {style.size}">',
        f'<rect width="{style.size}" height="{style.size}" fill="#ffffff"/>',
    ]
    cell = [0, lat.omega1, lat.omega1 + lat.omega2, lat.omega2]
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in map(fr, cell))
    out.append(f'<polygon points="{pts}" fill="none" stroke="{style.cell_color}" stroke-width="1"/>')
    if style.raster > 0:
        n = style.raster
        s, t = np.meshgrid((np.arange(n) + 0.5) / n, (np.arange(n) + 0.5) / n)
        z = (s * lat.omega1 + t * lat.omega2).ravel()
        v = np.asarray(FlowField(f)(z))
        seg = 0.35 * min(abs(lat.omega1), abs(lat.omega2)) / n
        out.append(f'<g stroke="{style.raster_color}" stroke-width="{style.raster_width}">')
        for zi, vi in zip(z, v):
            if abs(vi) == 0:
                continue
            a, b = fr(zi - seg * vi / abs(vi)), fr(zi + seg * vi / abs(vi))
            out.append(f'<line x1="{_fmt(a[0])}" y1="{_fmt(a[1])}" x2="{_fmt(b[0])}" y2="{_fmt(b[1])}"/>')
        out.append("</g>")
    for legs, color, width in ((portrait.rotated, style.rotated_color, style.separatrix_width / 2),
                               (portrait.stable, style.stable_color, style.separatrix_width),
                               (portrait.unstable, style.unstable_color, style.separatrix_width)):
        for leg in legs:
            for line in _polylines(leg.trajectory.samples, lat, fr):
                out.append(f'<polyline points="{line}" fill="none" stroke="{color}" '
                           f'stroke-width="{width}"/>')
    r = style.glyph_radius
    eq = portrait.equilibria
    for e in eq.attractors:
        x, y = fr(e.point)
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{r}" fill="#000000"><title>{e.id}</title></circle>')
    for e in eq.repellors:
        x, y = fr(e.point)
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{r}" fill="#ffffff" stroke="#000000" '
                   f'stroke-width="1.5"><title>{e.id}</title></circle>')
    for e in eq.saddles:
        x, y = fr(e.point)
        out.append(f'<path d="M{_fmt(x - r)},{_fmt(y - r)}L{_fmt(x + r)},{_fmt(y + r)}'
                   f'M{_fmt(x - r)},{_fmt(y + r)}L{_fmt(x + r)},{_fmt(y - r)}" '
                   f'stroke="#000000" stroke-width="1.5"><title>{e.id}</title></path>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
