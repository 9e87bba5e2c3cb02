"""Winding numbers of 1-chains and the components of their support complement.

A straight segment ``a -> b`` seen from ``z`` contributes

    (log|b - z| - log|a - z| + i * dtheta) / (2 pi i)

where ``dtheta = atan2(cross(a-z, b-z), dot(a-z, b-z))`` is the signed angle
it subtends.  No quadrature and no global branch cut is involved.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .chains import Chain1, as_point, as_points, boundary1, closed_tolerance, mass, support
from .errors import ChainError, NotClosedError, PreconditionError
from .forms import EXCLUSION_RTOL

DEFAULT_RESOLUTION = (512, 512)
DEFAULT_SAMPLES = 50

_CHUNK = 1 << 22


def _exclusion(J: Chain1, exclusion: float | None) -> float:
    if exclusion is not None:
        return exclusion
    return EXCLUSION_RTOL * max(J.diameter, 1.0)


def winding_numbers(J: Chain1, points, exclusion: float | None = None, check: bool = True) -> np.ndarray:
    """Complex winding values of ``J`` about each of ``points``."""
    q = as_points(points)
    out = np.zeros(len(q), dtype=complex)
    if len(J) == 0 or len(q) == 0:
        return out
    if check:
        dist = support(J).distances(q)
        i = int(np.argmin(dist))
        excl = _exclusion(J, exclusion)
        if dist[i] <= excl:
            raise PreconditionError(
                f"point {tuple(q[i])} lies {dist[i]:.3g} from the support "
                f"(exclusion {excl:.3g})",
                name="point_off_support",
                measured=float(dist[i]),
            )
    step = max(1, _CHUNK // len(J))
    for s in range(0, len(q), step):
        z = q[s:s + step, None, :]
        u = J.a[None] - z
        v = J.b[None] - z
        cr = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
        dt = u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1]
        dtheta = np.arctan2(cr, dt)
        dlog = 0.5 * (np.log(v[..., 0] ** 2 + v[..., 1] ** 2) - np.log(u[..., 0] ** 2 + u[..., 1] ** 2))
        out[s:s + step] = ((dtheta - 1j * dlog) @ J.w) / (2 * math.pi)
    return out


def winding_number(J: Chain1, z, exclusion: float | None = None) -> complex:
    """Winding number of ``J`` about ``z`` as a complex value.

    For closed real-weighted chains the imaginary part is rounding noise and
    the real part is the index; it need not be an integer.
    """
    return complex(winding_numbers(J, as_point(z)[None, :], exclusion)[0])


def winding_index(J: Chain1, z, exclusion: float | None = None) -> float:
    return winding_number(J, z, exclusion).real


def point_in_polygon(vertices, z) -> bool:
    """Even-odd ray casting test (the classical oracle for simple polygons)."""
    pts = as_points(vertices)
    x, y = as_point(z)
    inside = False
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if xc > x:
                inside = not inside
    return inside


# ---------------------------------------------------------------------------
# complement components


@dataclass(frozen=True)
class ComponentMap:
    """Grid labelling of the complement of a chain's support.

    Label 0 marks cells within ``delta`` of the support; other labels are
    4-connected components of the remaining cells.  ``labels[iy, ix]`` is the
    cell centred at ``(x0 + (ix + 0.5) dx, y0 + (iy + 0.5) dy)``.
    """

    labels: np.ndarray
    distance: np.ndarray
    bbox: tuple[float, float, float, float]
    resolution: tuple[int, int]
    delta: float
    unbounded_label: int
    n_components: int

    @property
    def spacing(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.bbox
        nx, ny = self.resolution
        return (x1 - x0) / nx, (y1 - y0) / ny

    def centers(self, flat_index: np.ndarray) -> np.ndarray:
        x0, y0, _, _ = self.bbox
        dx, dy = self.spacing
        nx, _ = self.resolution
        iy, ix = np.divmod(np.asarray(flat_index), nx)
        return np.stack([x0 + (ix + 0.5) * dx, y0 + (iy + 0.5) * dy], axis=1)


def _distance_field(J: Chain1, bbox, resolution, reach: float) -> np.ndarray:
    """Distance from each grid centre to supp(J), exact within ``reach``, ``inf`` beyond."""
    x0, y0, x1, y1 = bbox
    nx, ny = resolution
    dx, dy = (x1 - x0) / nx, (y1 - y0) / ny
    dist = np.full((ny, nx), np.inf)
    xs = x0 + (np.arange(nx) + 0.5) * dx
    ys = y0 + (np.arange(ny) + 0.5) * dy
    for a, b in zip(J.a, J.b):
        lo = np.minimum(a, b) - reach
        hi = np.maximum(a, b) + reach
        i0 = max(0, int(math.floor((lo[0] - x0) / dx - 0.5)))
        i1 = min(nx, int(math.ceil((hi[0] - x0) / dx + 0.5)) + 1)
        j0 = max(0, int(math.floor((lo[1] - y0) / dy - 0.5)))
        j1 = min(ny, int(math.ceil((hi[1] - y0) / dy + 0.5)) + 1)
        if i0 >= i1 or j0 >= j1:
            continue
        X, Y = np.meshgrid(xs[i0:i1], ys[j0:j1])
        d = b - a
        t = np.clip(((X - a[0]) * d[0] + (Y - a[1]) * d[1]) / (d @ d), 0.0, 1.0)
        dd = np.hypot(X - a[0] - t * d[0], Y - a[1] - t * d[1])
        np.minimum(dist[j0:j1, i0:i1], dd, out=dist[j0:j1, i0:i1])
    return dist


def component_map(
    J: Chain1, resolution: tuple[int, int] = DEFAULT_RESOLUTION, delta: float | None = None
) -> ComponentMap:
    """Label the connected components of the complement of ``supp(J)`` on a grid.

    The grid covers the bounding box padded by twice its diameter on every
    side.  Cells within ``delta`` (default two cell diagonals) of the support
    get label 0; the rest are flood-filled with 4-connectivity.
    """
    if len(J) == 0:
        raise ChainError("component map of the zero chain is undefined")
    nx, ny = int(resolution[0]), int(resolution[1])
    x0, y0, x1, y1 = J.bbox
    diam = max(J.diameter, 1e-300)
    pad = 2.0 * diam
    bbox = (x0 - pad, y0 - pad, x1 + pad, y1 + pad)
    dx, dy = (bbox[2] - bbox[0]) / nx, (bbox[3] - bbox[1]) / ny
    if delta is None:
        delta = 2.0 * math.hypot(dx, dy)
    dist = _distance_field(J, bbox, (nx, ny), 2.0 * delta)
    free = dist > delta
    frame = np.concatenate([free[0], free[-1], free[:, 0], free[:, -1]])
    if not np.all(frame) or not np.any(free):
        raise PreconditionError(
            f"resolution {nx}x{ny} is too coarse: the {delta:.3g}-neighbourhood of the "
            "support reaches the grid frame; use a finer grid or a smaller delta",
            name="resolution",
            measured=delta,
        )
    labels, n = ndimage.label(free)
    edge = np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]))
    edge = edge[edge > 0]
    return ComponentMap(
        labels=labels,
        distance=dist,
        bbox=bbox,
        resolution=(nx, ny),
        delta=float(delta),
        unbounded_label=int(edge[0]),
        n_components=int(n),
    )


@dataclass(frozen=True)
class ComponentStats:
    component: int
    mean: float
    spread: float
    samples: int
    max_abs_imag: float
    unbounded: bool


def sample_component(cmap: ComponentMap, label: int, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    """Deterministic stratified sample of cell centres in one component.

    Prefers cells at distance at least ``2 delta`` from the support; evenly
    spaced picks through the raster order of the eligible cells.
    """
    flat_labels = cmap.labels.ravel()
    flat_dist = cmap.distance.ravel()
    idx = np.flatnonzero((flat_labels == label) & (flat_dist >= 2 * cmap.delta))
    if len(idx) == 0:
        idx = np.flatnonzero(flat_labels == label)
    if len(idx) > samples:
        idx = idx[np.unique(np.round(np.linspace(0, len(idx) - 1, samples)).astype(int))]
    return cmap.centers(idx)


def winding_field(
    J: Chain1, cmap: ComponentMap, samples: int = DEFAULT_SAMPLES
) -> list[ComponentStats]:
    """Winding statistics (mean, max-min spread) on every complement component."""
    bm = mass(boundary1(J))
    tol = closed_tolerance(J)
    if bm > tol:
        raise NotClosedError(
            f"chain is not closed: boundary mass {bm:.3g} exceeds {tol:.3g}",
            name="closed",
            measured=bm,
        )
    stats = []
    for label in range(1, cmap.n_components + 1):
        pts = sample_component(cmap, label, samples)
        vals = winding_numbers(J, pts)
        stats.append(
            ComponentStats(
                component=label,
                mean=float(np.mean(vals.real)),
                spread=float(np.ptp(vals.real)),
                samples=len(pts),
                max_abs_imag=float(np.max(np.abs(vals.imag))),
                unbounded=label == cmap.unbounded_label,
            )
        )
    return stats


def field_csv(stats: list[ComponentStats]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["component", "mean", "spread", "samples", "unbounded"])
    for s in stats:
        writer.writerow([s.component, repr(s.mean), repr(s.spread), s.samples, int(s.unbounded)])
    return buf.getvalue()
