"""Deterministic generators of test chains.

Random chains draw from PCG64 (the permuted congruential generator with
128-bit state and XSL-RR output, as implemented by ``numpy.random.PCG64``).
Uniform doubles are formed from the top 53 bits of each raw 64-bit output, so
a given seed yields the same chain in any implementation of that generator.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .chains import Chain1, Chain2, as_point, boundary2
from .errors import ChainError

Rect = tuple[float, float, float, float]

PRNG_NAME = "pcg64-xslrr-top53/v1"


def circle_chain(c=(0.0, 0.0), r: float = 1.0, n: int = 64, w: float = 1.0) -> Chain1:
    """Counterclockwise regular ``n``-gon inscribed in the circle about ``c``.

    The first vertex sits at angle zero.
    """
    if n < 3:
        raise ChainError(f"need at least 3 sides, got {n}")
    if r <= 0:
        raise ChainError(f"radius must be positive, got {r}")
    c = as_point(c)
    th = 2 * np.pi * np.arange(n) / n
    pts = c + r * np.stack([np.cos(th), np.sin(th)], axis=1)
    return Chain1.polyline(pts, w=w, closed=True)


def koch_chain(level: int) -> Chain1:
    """Koch snowflake prefix on the unit equilateral triangle, ``3 * 4**level`` cells.

    Base vertices are (0, 0), (1, 0), (1/2, sqrt(3)/2), traversed
    counterclockwise; bumps point outward.
    """
    if not 0 <= level <= 8:
        raise ChainError(f"level must lie in [0, 8], got {level}")
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
    for _ in range(level):
        p = pts
        q = np.roll(pts, -1, axis=0)
        d = q - p
        # right-hand normal is outward for a counterclockwise loop
        normal = np.stack([d[:, 1], -d[:, 0]], axis=1)
        peak = p + d / 2 + (math.sqrt(3) / 6) * normal
        pts = np.stack([p, p + d / 3, peak, p + 2 * d / 3], axis=1).reshape(-1, 2)
    return Chain1.polyline(pts, closed=True)


def staircase_chain(steps: int) -> Chain1:
    """Closed stepped pyramid in the unit square with ``4 * steps`` corners.

    Level ``k`` spans ``[k/(2 steps), 1 - k/(2 steps)] x [k/steps, (k+1)/steps]``;
    ``steps=1`` is the unit square.
    """
    if steps < 1:
        raise ChainError(f"steps must be >= 1, got {steps}")
    n = steps
    right = []
    for k in range(n):
        x = 1 - k / (2 * n)
        right.append((x, (k + 1) / n))
        if k < n - 1:
            right.append((1 - (k + 1) / (2 * n), (k + 1) / n))
    left = [(1 - x, y) for x, y in reversed(right)]
    pts = [(0.0, 0.0), (1.0, 0.0)] + right + left
    return Chain1.polyline(pts, closed=True)


class _Uniform:
    def __init__(self, seed: int):
        self._bits = np.random.PCG64(seed)

    def __call__(self, n: int) -> np.ndarray:
        raw = self._bits.random_raw(n)
        return (np.asarray(raw, dtype=np.uint64) >> np.uint64(11)).astype(float) * 2.0**-53


def random_closed_chain(
    seed: int, n: int, window: Rect = (-1.0, -1.0, 1.0, 1.0)
) -> tuple[Chain1, Chain2]:
    """``n`` random weighted triangles ``K0`` and their boundary ``J``.

    Each triangle takes six uniforms for its vertices and two for its weight
    (sign from the first, magnitude in [0.5, 1.5) from the second).  Triangles
    thinner than 1e-3 of the window area are redrawn.
    """
    if n < 1:
        raise ChainError(f"n must be >= 1, got {n}")
    x0, y0, x1, y1 = window
    uni = _Uniform(seed)
    min_area = 1e-3 * (x1 - x0) * (y1 - y0)
    tris, wts = [], []
    while len(tris) < n:
        u = uni(8)
        p = np.array([[x0 + (x1 - x0) * u[2 * k], y0 + (y1 - y0) * u[2 * k + 1]] for k in range(3)])
        area = 0.5 * abs((p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[1, 1] - p[0, 1]) * (p[2, 0] - p[0, 0]))
        if area < min_area:
            continue
        tris.append(p)
        wts.append((1.0 if u[6] < 0.5 else -1.0) * (0.5 + u[7]))
    K0 = Chain2(np.array(tris), np.array(wts))
    return boundary2(K0), K0


def vector_field_chain(
    field: Callable[[np.ndarray], np.ndarray], window: Rect, h: float
) -> Chain1:
    """Smear a planar vector field into a 1-chain on the ``h``-grid of ``window``.

    The cell centred at ``p`` becomes the segment ``p -/+ (h/2) V(p)/|V(p)|``
    with weight ``|V(p)| h``, so it integrates forms like ``V(p) h^2``.
    ``field`` maps an (m, 2) array of points to an (m, 2) array of vectors.
    """
    if h <= 0:
        raise ChainError(f"h must be positive, got {h}")
    x0, y0, x1, y1 = window
    nx = max(1, int(round((x1 - x0) / h)))
    ny = max(1, int(round((y1 - y0) / h)))
    xs = x0 + (np.arange(nx) + 0.5) * h
    ys = y0 + (np.arange(ny) + 0.5) * h
    X, Y = np.meshgrid(xs, ys)
    p = np.stack([X.ravel(), Y.ravel()], axis=1)
    v = np.asarray(field(p), dtype=float).reshape(p.shape)
    speed = np.hypot(v[:, 0], v[:, 1])
    live = speed >= 1e-14
    p, v, speed = p[live], v[live], speed[live]
    u = v / speed[:, None]
    return Chain1(p - (h / 2) * u, p + (h / 2) * u, speed * h)


def rotation_field(inner: float = 1.0, outer: float = 2.0) -> Callable[[np.ndarray], np.ndarray]:
    """Rigid rotation ``(-y, x)`` restricted to the closed annulus ``inner <= |p| <= outer``."""

    def field(p):
        r = np.hypot(p[:, 0], p[:, 1])
        on = ((r >= inner) & (r <= outer)).astype(float)
        return np.stack([-p[:, 1] * on, p[:, 0] * on], axis=1)

    return field


def constant_field(vx: float, vy: float) -> Callable[[np.ndarray], np.ndarray]:
    def field(p):
        return np.tile([float(vx), float(vy)], (len(p), 1))

    return field
