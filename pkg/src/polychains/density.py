"""Signed density of 2-chains and its agreement with winding numbers.

The density of ``K`` at ``z`` is the limit of ``area_in_disk(K, z, e) / (pi e^2)``
as ``e -> 0``.  It is evaluated at three radii and Richardson-extrapolated;
away from ``supp(boundary K)`` a polyhedral chain is locally flat, the three
values coincide and the extrapolation returns them unchanged.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .chains import (
    Chain1,
    Chain2,
    area_in_disk,
    as_point,
    boundary1,
    boundary2,
    closed_tolerance,
    cone,
    mass,
    pick_cone_apex,
    support,
)
from .errors import NotClosedError, PreconditionError
from .winding import winding_number

log = logging.getLogger(__name__)

Rect = tuple[float, float, float, float]

#: a disk boundary closer than this to a vertex triggers a perturbed radius
VERTEX_GRAZE = 1e-12
RADIUS_NUDGE = 1e-6


@dataclass(frozen=True)
class DensityResult:
    value: float
    radii: tuple[float, float, float]
    raw: tuple[float, float, float]
    perturbed: bool = False


def _nudge(K: Chain2, z: np.ndarray, eps: float) -> tuple[float, bool]:
    if len(K) == 0:
        return eps, False
    r = np.hypot(*(K.vertices - z).T)
    if np.any(np.abs(r - eps) <= VERTEX_GRAZE * max(1.0, eps)):
        new = eps * (1 + RADIUS_NUDGE)
        log.info("radius %.17g grazes a vertex; using %.17g", eps, new)
        return new, True
    return eps, False


def signed_density(K: Chain2, z, eps0: float | None = None) -> DensityResult:
    z = as_point(z)
    d_bdry = support(boundary2(K)).distance(z)
    if eps0 is None:
        if math.isfinite(d_bdry):
            eps0 = d_bdry / 2
        else:
            eps0 = max(K.diameter, 1.0) if len(K) else 1.0
    if not d_bdry > eps0:
        raise PreconditionError(
            f"z lies {d_bdry:.6g} from supp(boundary K), not beyond eps0 = {eps0:.6g}",
            name="dist_z_boundary",
            measured=d_bdry,
        )
    radii, raw, perturbed = [], [], False
    for k in range(3):
        eps, nudged = _nudge(K, z, eps0 / 2**k)
        perturbed |= nudged
        radii.append(eps)
        raw.append(area_in_disk(K, z, eps) / (math.pi * eps * eps) if len(K) else 0.0)
    d1, d2, d3 = raw
    value = (8 * d3 - 6 * d2 + d1) / 3
    return DensityResult(value, tuple(radii), tuple(raw), perturbed)


@dataclass
class DensityWindingReport:
    density: float
    winding: complex
    gap: float
    apex: tuple[float, float]
    eps0: float
    diagnostics: DensityResult = field(repr=False, default=None)


def density_winding_check(
    J: Chain1, z, eps0: float | None = None, K: Chain2 | None = None
) -> DensityWindingReport:
    """Compare the winding number of closed ``J`` at ``z`` with the density of a chain it bounds.

    Without an explicit ``K`` the cone of ``J`` over an apex outside
    ``B(z, 4 eps0)`` is used.
    """
    z = as_point(z)
    bm = mass(boundary1(J))
    if bm > closed_tolerance(J):
        raise NotClosedError(f"chain is not closed: boundary mass {bm:.3g}", name="closed", measured=bm)
    dist = support(J).distance(z)
    if eps0 is None:
        eps0 = dist / 5 if math.isfinite(dist) else 1.0
    if not dist > 4 * eps0:
        raise PreconditionError(
            f"z lies {dist:.6g} from supp(J), within 4*eps0 = {4 * eps0:.6g}",
            name="dist_z_support",
            measured=dist,
        )
    apex = (math.nan, math.nan)
    if K is None:
        if len(J) == 0:
            K = Chain2()
        else:
            c = pick_cone_apex(J, avoid=z, min_dist=4 * eps0)
            apex = (float(c[0]), float(c[1]))
            K = cone(c, J)
    dens = signed_density(K, z, eps0)
    wind = winding_number(J, z) if len(J) else 0j
    return DensityWindingReport(
        density=dens.value,
        winding=wind,
        gap=abs(dens.value - wind.real),
        apex=apex,
        eps0=eps0,
        diagnostics=dens,
    )


def _rect_distance(points: np.ndarray, rects: list[Rect]) -> np.ndarray:
    """Distance to the union of closed rectangles (0 inside)."""
    out = np.full(len(points), np.inf)
    for x0, y0, x1, y1 in rects:
        dx = np.maximum(np.maximum(x0 - points[:, 0], points[:, 0] - x1), 0.0)
        dy = np.maximum(np.maximum(y0 - points[:, 1], points[:, 1] - y1), 0.0)
        out = np.minimum(out, np.hypot(dx, dy))
    return out


@dataclass(frozen=True)
class SupportVerdict:
    supported: bool
    witness: tuple[float, float] | None
    max_density: float
    max_area: float
    samples: int


def support_from_density(
    K: Chain2,
    cover: list[Rect],
    grid: tuple[int, int] = (40, 40),
    window: Rect | None = None,
    density_tol: float = 1e-8,
    area_tol: float = 1e-10,
) -> SupportVerdict:
    """Decide whether ``K`` lives inside the union of ``cover`` rectangles.

    Grid points outside the cover are probed twice: the density at the point
    and the weighted area in the largest disk about it that misses the cover.
    """
    if window is None:
        boxes = list(cover) + ([K.bbox] if len(K) else [])
        x0 = min(b[0] for b in boxes)
        y0 = min(b[1] for b in boxes)
        x1 = max(b[2] for b in boxes)
        y1 = max(b[3] for b in boxes)
        px, py = 0.1 * (x1 - x0) or 1.0, 0.1 * (y1 - y0) or 1.0
        window = (x0 - px, y0 - py, x1 + px, y1 + py)
    nx, ny = grid
    x0, y0, x1, y1 = window
    X, Y = np.meshgrid(x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx,
                       y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    rho = _rect_distance(pts, list(cover))
    outside = rho > 0
    pts, rho = pts[outside], rho[outside]
    bdry = support(boundary2(K))
    d_bdry = bdry.distances(pts) if len(pts) else np.zeros(0)
    max_d, max_a, witness = 0.0, 0.0, None
    for p, r, db in zip(pts, rho, d_bdry):
        area = abs(area_in_disk(K, p, 0.999 * r)) if len(K) else 0.0
        dens = 0.0
        if db > 0 and len(K):
            dens = abs(signed_density(K, p, min(db / 2, r)).value)
        max_a = max(max_a, area)
        max_d = max(max_d, dens)
        if witness is None and (area > area_tol or dens > density_tol):
            witness = (float(p[0]), float(p[1]))
    return SupportVerdict(witness is None, witness, max_d, max_a, len(pts))


def density_raster(K: Chain2, window: Rect, resolution: tuple[int, int]) -> np.ndarray:
    """Signed density on cell centres of a grid; NaN where the boundary is too close."""
    nx, ny = resolution
    x0, y0, x1, y1 = window
    xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
    ys = y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny
    bdry = support(boundary2(K))
    out = np.full((ny, nx), np.nan)
    for iy, y in enumerate(ys):
        pts = np.stack([xs, np.full(nx, y)], axis=1)
        dist = bdry.distances(pts)
        for ix in range(nx):
            if dist[ix] > 0:
                eps0 = dist[ix] / 2 if math.isfinite(dist[ix]) else None
                out[iy, ix] = signed_density(K, pts[ix], eps0).value
    return out
