"""Deterministic SVG drawings of planar maps, optionally colored by gradient norm."""

from __future__ import annotations

import numpy as np

from .maps import SimplicialMap, gradient_norms
from .polygon import Polygon

BLUE = np.array([40.0, 70.0, 220.0])
RED = np.array([220.0, 40.0, 40.0])
PLAIN_FILL = "#e3e9f2"


def ramp(values, vmin: float | None = None, vmax: float | None = None) -> list[str]:
    """Blue (small) to red (large) hex colors, linear over [vmin, vmax].

    A constant input maps to the middle of the ramp.
    """
    v = np.asarray(values, dtype=float)
    lo = float(v.min()) if vmin is None else float(vmin)
    hi = float(v.max()) if vmax is None else float(vmax)
    span = hi - lo
    if span <= 1e-12 * max(abs(hi), abs(lo), 1.0):
        t = np.full(v.shape, 0.5)
    else:
        t = np.clip((v - lo) / span, 0.0, 1.0)
    rgb = np.rint(BLUE[None] + t[:, None] * (RED - BLUE)[None]).astype(int)
    return ["#%02x%02x%02x" % tuple(c) for c in rgb]


def _fmt(x: float) -> str:
    s = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(phi: SimplicialMap, polygon: Polygon | None = None, coloring: str = "none",
               *, size: int = 600, vmin: float | None = None,
               vmax: float | None = None) -> str:
    """SVG document of the mapped mesh.

    ``coloring`` is "none" or "gradient_norm".  The polygon outline is drawn
    underneath, the mesh boundary on top in a heavier stroke.  With gradient
    coloring a legend shows the ramp and its end values.
    """
    if phi.dim != 2:
        raise ValueError("render_svg draws planar (d = 2) maps only")
    if coloring not in ("none", "gradient_norm"):
        raise ValueError(f"unknown coloring {coloring!r}")
    pts = phi.images
    allpts = pts if polygon is None else np.vstack([pts, polygon.vertices])
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    extent = float(max(hi - lo)) or 1.0
    margin = 0.05 * extent
    scale = size / (extent + 2 * margin)
    legend_h = 60 if coloring == "gradient_norm" else 0
    width = int(round((hi[0] - lo[0] + 2 * margin) * scale))
    height = int(round((hi[1] - lo[1] + 2 * margin) * scale))

    def xy(p):
        return (_fmt((p[0] - lo[0] + margin) * scale),
                _fmt((hi[1] - p[1] + margin) * scale))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height + legend_h}" viewBox="0 0 {width} {height + legend_h}">',
           '<rect width="100%" height="100%" fill="white"/>']
    if polygon is not None:
        d = " ".join(f"{x},{y}" for x, y in map(xy, polygon.vertices))
        out.append(f'<polygon points="{d}" fill="none" stroke="#888888" '
                   f'stroke-width="3" stroke-dasharray="6,4"/>')
    if coloring == "gradient_norm":
        norms = gradient_norms(phi)
        fills = ramp(norms, vmin, vmax)
    else:
        norms, fills = None, [PLAIN_FILL] * phi.mesh.n_faces
    out.append('<g stroke="#333333" stroke-width="0.6" stroke-linejoin="round">')
    for face, fill in zip(phi.mesh.top_faces, fills):
        d = " ".join(f"{x},{y}" for x, y in (xy(pts[i]) for i in face))
        out.append(f'<polygon class="face" points="{d}" fill="{fill}"/>')
    out.append("</g>")
    segs = []
    for a, b in phi.mesh.boundary.oriented_edges():
        (x1, y1), (x2, y2) = xy(pts[a]), xy(pts[b])
        segs.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>')
    out.append('<g stroke="black" stroke-width="2.5" stroke-linecap="round">')
    out += segs
    out.append("</g>")
    if norms is not None:
        lo_v = float(norms.min()) if vmin is None else vmin
        hi_v = float(norms.max()) if vmax is None else vmax
        y0 = height + 15
        steps = 20
        w = max(width - 40, 40) / steps
        cols = ramp(np.linspace(0.0, 1.0, steps), 0.0, 1.0)
        out.append('<g stroke="none">')
        for i, c in enumerate(cols):
            out.append(f'<rect x="{_fmt(20 + i * w)}" y="{y0}" width="{_fmt(w + 0.5)}" '
                       f'height="14" fill="{c}"/>')
        out.append("</g>")
        out.append(f'<text x="20" y="{y0 + 32}" font-size="12" font-family="sans-serif">'
                   f"|grad| {lo_v:.4g}</text>")
        out.append(f'<text x="{width - 20}" y="{y0 + 32}" font-size="12" '
                   f'font-family="sans-serif" text-anchor="end">{hi_v:.4g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
