"""Static SVG and CSV output for chains, winding maps and density rasters."""

from __future__ import annotations

import csv
import io
import math

import numpy as np

from .chains import Chain, Chain1, Chain2
from .winding import ComponentMap, ComponentStats

Rect = tuple[float, float, float, float]

_SUPPORT_FILL = "#404040"


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _diverging(v: float, vmax: float) -> str:
    """Blue for negative, white for zero, red for positive."""
    if not math.isfinite(v):
        return _SUPPORT_FILL
    t = 0.0 if vmax == 0 else max(-1.0, min(1.0, v / vmax))
    if t >= 0:
        r, g, b = 255, round(255 * (1 - t)), round(255 * (1 - t))
    else:
        r, g, b = round(255 * (1 + t)), round(255 * (1 + t)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


class _Canvas:
    """Maps a world rectangle onto an SVG viewport with y pointing up."""

    def __init__(self, window: Rect, width: int):
        x0, y0, x1, y1 = window
        self.window = window
        self.scale = width / max(x1 - x0, 1e-300)
        self.width = width
        self.height = max(1, round((y1 - y0) * self.scale))

    def x(self, x: float) -> float:
        return (x - self.window[0]) * self.scale

    def y(self, y: float) -> float:
        return (self.window[3] - y) * self.scale

    def open(self) -> list[str]:
        return [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">',
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
        ]


def _padded_bbox(chain: Chain) -> Rect:
    if len(chain) == 0:
        return (-1.0, -1.0, 1.0, 1.0)
    x0, y0, x1, y1 = chain.bbox
    pad = 0.05 * max(x1 - x0, y1 - y0, 1e-12)
    return (x0 - pad, y0 - pad, x1 + pad, y1 + pad)


def chain_svg(chain: Chain, width: int = 600, window: Rect | None = None) -> str:
    """Segments coloured by weight sign (arrowless); triangles filled by weight."""
    cv = _Canvas(window or _padded_bbox(chain), width)
    out = cv.open()
    if isinstance(chain, Chain2) and len(chain):
        vmax = float(np.max(np.abs(chain.w)))
        for tri, w in zip(chain.p, chain.w):
            pts = " ".join(f"{_fmt(cv.x(x))},{_fmt(cv.y(y))}" for x, y in tri)
            out.append(
                f'<polygon points="{pts}" fill="{_diverging(w, vmax)}" fill-opacity="0.5" '
                'stroke="black" stroke-width="0.5"/>'
            )
    elif isinstance(chain, Chain1) and len(chain):
        wmax = float(np.max(np.abs(chain.w)))
        for a, b, w in zip(chain.a, chain.b, chain.w):
            colour = "#b2182b" if w > 0 else "#2166ac"
            sw = 0.5 + 1.5 * abs(w) / wmax
            out.append(
                f'<line x1="{_fmt(cv.x(a[0]))}" y1="{_fmt(cv.y(a[1]))}" '
                f'x2="{_fmt(cv.x(b[0]))}" y2="{_fmt(cv.y(b[1]))}" '
                f'stroke="{colour}" stroke-width="{_fmt(sw)}"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def raster_svg(values: np.ndarray, window: Rect, width: int = 600) -> str:
    """Heatmap of ``values[iy, ix]`` (row 0 at the bottom); NaN cells drawn dark.

    Runs of equal colour along a row are merged into one rectangle.
    """
    ny, nx = values.shape
    cv = _Canvas(window, width)
    finite = values[np.isfinite(values)]
    vmax = float(np.max(np.abs(finite))) if finite.size else 0.0
    cw, ch = cv.width / nx, cv.height / ny
    out = cv.open()
    for iy in range(ny):
        top = cv.height - (iy + 1) * ch
        colours = [_diverging(float(v), vmax) for v in values[iy]]
        start = 0
        for ix in range(1, nx + 1):
            if ix == nx or colours[ix] != colours[start]:
                if colours[start] != "#ffffff":
                    out.append(
                        f'<rect x="{_fmt(start * cw)}" y="{_fmt(top)}" '
                        f'width="{_fmt((ix - start) * cw)}" height="{_fmt(ch)}" '
                        f'fill="{colours[start]}"/>'
                    )
                start = ix
    out.append("</svg>")
    return "\n".join(out) + "\n"


def winding_raster(cmap: ComponentMap, stats: list[ComponentStats]) -> np.ndarray:
    """Per-cell winding from component means; support cells are NaN."""
    lut = np.full(cmap.n_components + 1, np.nan)
    for s in stats:
        lut[s.component] = s.mean
    return lut[cmap.labels]


def winding_svg(cmap: ComponentMap, stats: list[ComponentStats], width: int = 600) -> str:
    return raster_svg(winding_raster(cmap, stats), cmap.bbox, width)


def raster_csv(values: np.ndarray, window: Rect) -> str:
    """Long-format CSV ``x, y, value`` over cell centres, rows bottom to top."""
    ny, nx = values.shape
    x0, y0, x1, y1 = window
    xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
    ys = y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "y", "value"])
    for iy in range(ny):
        for ix in range(nx):
            v = values[iy, ix]
            writer.writerow([repr(float(xs[ix])), repr(float(ys[iy])), repr(float(v)) if np.isfinite(v) else "nan"])
    return buf.getvalue()
