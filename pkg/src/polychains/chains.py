"""Polyhedral 0-, 1- and 2-chains in the plane.

A chain is a formal sum of weighted cells: points (dimension 0), oriented
segments (dimension 1) or oriented triangles (dimension 2).  Chains are stored
as read-only numpy arrays so that every operation here is a pure function of
its inputs.  Adding two chains concatenates their cell lists; nothing is
merged geometrically unless :func:`coalesce` is asked for explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import ChainError

Point2 = tuple[float, float]

#: Points closer than this fraction of the bounding-box diameter are merged.
MERGE_RTOL = 1e-12
#: Coalesced weights below this fraction of the largest input weight are dropped.
DROP_RTOL = 1e-14

_CHUNK = 1 << 22


def as_point(z) -> np.ndarray:
    """Coerce a complex number or an ``(x, y)`` pair to a float array of shape (2,)."""
    if isinstance(z, (complex, float, int, np.number)):
        p = np.array([z.real, z.imag], dtype=float)
    else:
        p = np.asarray(z, dtype=float).reshape(2)
    if not np.all(np.isfinite(p)):
        raise ChainError(f"point {tuple(p)} is not finite")
    return p


def as_points(zs) -> np.ndarray:
    arr = np.asarray(zs)
    if np.iscomplexobj(arr):
        arr = np.stack([arr.real, arr.imag], axis=-1)
    return np.asarray(arr, dtype=float).reshape(-1, 2)


def to_complex(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return p[..., 0] + 1j * p[..., 1]


def _cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _bbox(points: np.ndarray) -> tuple[float, float, float, float]:
    if len(points) == 0:
        return (math.nan, math.nan, math.nan, math.nan)
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


def _diameter(points: np.ndarray) -> float:
    if len(points) == 0:
        return 0.0
    x0, y0, x1, y1 = _bbox(points)
    return math.hypot(x1 - x0, y1 - y0)


def _cluster(points: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Label points by single-linkage clusters at distance ``tol``.

    Returns ``(labels, reps)`` with clusters numbered in order of first
    occurrence and ``reps[k]`` the index of the first point of cluster ``k``.
    """
    n = len(points)
    if n == 0:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    if tol > 0:
        pairs = cKDTree(points).query_pairs(tol, output_type="ndarray")
    else:
        pairs = np.zeros((0, 2), dtype=int)
    if len(pairs) == 0 and tol > 0:
        raw = np.arange(n)
    elif tol <= 0:
        # zero diameter: every point is the same point
        raw = np.zeros(n, dtype=int)
    else:
        graph = coo_matrix(
            (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)
        )
        _, raw = connected_components(graph, directed=False)
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return rank[inverse], first[order]


def merge_tolerance(points: np.ndarray) -> float:
    return MERGE_RTOL * _diameter(points)


# ---------------------------------------------------------------------------
# cells


@dataclass(frozen=True)
class Cell1:
    a: Point2
    b: Point2
    w: float = 1.0

    def __post_init__(self):
        a, b = as_point(self.a), as_point(self.b)
        object.__setattr__(self, "a", (float(a[0]), float(a[1])))
        object.__setattr__(self, "b", (float(b[0]), float(b[1])))
        object.__setattr__(self, "w", float(self.w))
        if self.a == self.b:
            raise ChainError(f"degenerate segment at {self.a}")
        if self.w == 0 or not math.isfinite(self.w):
            raise ChainError(f"invalid weight {self.w}")


@dataclass(frozen=True)
class Cell2:
    """Weighted triangle; clockwise input is reordered and its weight negated."""

    p0: Point2
    p1: Point2
    p2: Point2
    w: float = 1.0

    def __post_init__(self):
        p = [as_point(v) for v in (self.p0, self.p1, self.p2)]
        w = float(self.w)
        area2 = float(_cross(p[1] - p[0], p[2] - p[0]))
        if area2 == 0:
            raise ChainError(f"degenerate triangle {[tuple(v) for v in p]}")
        if w == 0 or not math.isfinite(w):
            raise ChainError(f"invalid weight {w}")
        if area2 < 0:
            p[1], p[2] = p[2], p[1]
            w = -w
        for name, v in zip(("p0", "p1", "p2"), p):
            object.__setattr__(self, name, (float(v[0]), float(v[1])))
        object.__setattr__(self, "w", w)


# ---------------------------------------------------------------------------
# chains


class Chain0:
    """Formal sum of weighted points, kept coalesced."""

    dim = 0

    def __init__(self, points=(), weights=()):
        pts = as_points(points) if len(points) else np.zeros((0, 2))
        w = np.asarray(weights, dtype=float).reshape(-1)
        if len(pts) != len(w):
            raise ChainError("points and weights differ in length")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise ChainError("non-finite atom")
        bad = np.flatnonzero(w == 0)
        if len(bad):
            raise ChainError(f"atom {bad[0]} has zero weight", index=int(bad[0]))
        self.points = _readonly(pts)
        self.weights = _readonly(w)

    @classmethod
    def coalesced(cls, points, weights) -> "Chain0":
        """Sum atoms that lie within the merge tolerance and drop negligible weights."""
        pts = as_points(points) if len(points) else np.zeros((0, 2))
        w = np.asarray(weights, dtype=float).reshape(-1)
        if len(pts) == 0:
            return cls()
        labels, reps = _cluster(pts, merge_tolerance(pts))
        summed = np.bincount(labels, weights=w, minlength=len(reps))
        keep = np.abs(summed) >= DROP_RTOL * np.max(np.abs(w))
        keep &= summed != 0
        return cls(pts[reps][keep], summed[keep])

    def __len__(self):
        return len(self.weights)

    def __repr__(self):
        return f"Chain0({len(self)} atoms)"

    def __add__(self, other: "Chain0") -> "Chain0":
        _check_same_dim(self, other)
        return Chain0.coalesced(
            np.concatenate([self.points, other.points]),
            np.concatenate([self.weights, other.weights]),
        )

    def scaled(self, c: float) -> "Chain0":
        if c == 0 or len(self) == 0:
            return Chain0()
        return Chain0(self.points, self.weights * c)

    @property
    def is_zero(self) -> bool:
        return len(self) == 0


class Chain1:
    """Formal sum of weighted oriented segments ``a -> b``."""

    dim = 1

    def __init__(self, a=(), b=(), w=()):
        a = as_points(a) if len(a) else np.zeros((0, 2))
        b = as_points(b) if len(b) else np.zeros((0, 2))
        w = np.asarray(w, dtype=float).reshape(-1)
        if not (len(a) == len(b) == len(w)):
            raise ChainError("endpoint and weight arrays differ in length")
        for name, arr in (("a", a), ("b", b)):
            bad = np.flatnonzero(~np.all(np.isfinite(arr), axis=1))
            if len(bad):
                raise ChainError(f"cell {bad[0]}: non-finite {name}", index=int(bad[0]))
        bad = np.flatnonzero(~np.isfinite(w) | (w == 0))
        if len(bad):
            raise ChainError(f"cell {bad[0]}: invalid weight {w[bad[0]]}", index=int(bad[0]))
        bad = np.flatnonzero(np.all(a == b, axis=1))
        if len(bad):
            raise ChainError(
                f"cell {bad[0]}: degenerate segment at {tuple(a[bad[0]])}", index=int(bad[0])
            )
        self.a = _readonly(a)
        self.b = _readonly(b)
        self.w = _readonly(w)

    @classmethod
    def from_cells(cls, cells: Iterable[Cell1]) -> "Chain1":
        cells = list(cells)
        if not cells:
            return cls()
        return cls([c.a for c in cells], [c.b for c in cells], [c.w for c in cells])

    @classmethod
    def polyline(cls, points, w: float = 1.0, closed: bool = False) -> "Chain1":
        """Chain through consecutive vertices; ``closed`` appends the edge back to the start."""
        pts = as_points(points)
        if closed:
            pts = np.concatenate([pts, pts[:1]])
        return cls(pts[:-1], pts[1:], np.full(len(pts) - 1, float(w)))

    @property
    def cells(self) -> list[Cell1]:
        return [Cell1(tuple(a), tuple(b), w) for a, b, w in zip(self.a, self.b, self.w)]

    @property
    def vertices(self) -> np.ndarray:
        return np.concatenate([self.a, self.b])

    @property
    def lengths(self) -> np.ndarray:
        return np.hypot(*(self.b - self.a).T) if len(self) else np.zeros(0)

    @property
    def bbox(self):
        return _bbox(self.vertices)

    @property
    def diameter(self) -> float:
        return _diameter(self.vertices)

    @property
    def is_zero(self) -> bool:
        return len(self) == 0

    def __len__(self):
        return len(self.w)

    def __repr__(self):
        return f"Chain1({len(self)} cells)"

    def __add__(self, other: "Chain1") -> "Chain1":
        _check_same_dim(self, other)
        return Chain1(
            np.concatenate([self.a, other.a]),
            np.concatenate([self.b, other.b]),
            np.concatenate([self.w, other.w]),
        )

    def __neg__(self) -> "Chain1":
        return self.scaled(-1.0)

    def __sub__(self, other: "Chain1") -> "Chain1":
        return self + (-other)

    def __mul__(self, c: float) -> "Chain1":
        return self.scaled(c)

    __rmul__ = __mul__

    def scaled(self, c: float) -> "Chain1":
        if c == 0 or len(self) == 0:
            return Chain1()
        return Chain1(self.a, self.b, self.w * c)

    def reversed(self) -> "Chain1":
        return Chain1(self.b, self.a, self.w)


class Chain2:
    """Formal sum of weighted triangles, stored counterclockwise."""

    dim = 2

    def __init__(self, p=(), w=()):
        p = np.asarray(p, dtype=float).reshape(-1, 3, 2) if len(p) else np.zeros((0, 3, 2))
        w = np.asarray(w, dtype=float).reshape(-1)
        if len(p) != len(w):
            raise ChainError("vertex and weight arrays differ in length")
        bad = np.flatnonzero(~np.all(np.isfinite(p), axis=(1, 2)))
        if len(bad):
            raise ChainError(f"cell {bad[0]}: non-finite vertex", index=int(bad[0]))
        bad = np.flatnonzero(~np.isfinite(w) | (w == 0))
        if len(bad):
            raise ChainError(f"cell {bad[0]}: invalid weight {w[bad[0]]}", index=int(bad[0]))
        area2 = _cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        bad = np.flatnonzero(area2 == 0)
        if len(bad):
            raise ChainError(f"cell {bad[0]}: degenerate triangle", index=int(bad[0]))
        flip = area2 < 0
        if np.any(flip):
            p = p.copy()
            p[flip, 1], p[flip, 2] = p[flip, 2].copy(), p[flip, 1].copy()
            w = np.where(flip, -w, w)
        self.p = _readonly(p)
        self.w = _readonly(w)

    @classmethod
    def from_cells(cls, cells: Iterable[Cell2]) -> "Chain2":
        cells = list(cells)
        if not cells:
            return cls()
        return cls([[c.p0, c.p1, c.p2] for c in cells], [c.w for c in cells])

    @classmethod
    def fan(cls, polygon, w: float = 1.0) -> "Chain2":
        """Triangulate a convex polygon as a fan from its first vertex."""
        pts = as_points(polygon)
        tris = [[pts[0], pts[k], pts[k + 1]] for k in range(1, len(pts) - 1)]
        return cls(tris, np.full(len(tris), float(w)))

    @property
    def cells(self) -> list[Cell2]:
        return [Cell2(tuple(t[0]), tuple(t[1]), tuple(t[2]), w) for t, w in zip(self.p, self.w)]

    @property
    def areas(self) -> np.ndarray:
        if len(self) == 0:
            return np.zeros(0)
        return 0.5 * _cross(self.p[:, 1] - self.p[:, 0], self.p[:, 2] - self.p[:, 0])

    @property
    def vertices(self) -> np.ndarray:
        return self.p.reshape(-1, 2)

    @property
    def bbox(self):
        return _bbox(self.vertices)

    @property
    def diameter(self) -> float:
        return _diameter(self.vertices)

    @property
    def is_zero(self) -> bool:
        return len(self) == 0

    def __len__(self):
        return len(self.w)

    def __repr__(self):
        return f"Chain2({len(self)} cells)"

    def __add__(self, other: "Chain2") -> "Chain2":
        _check_same_dim(self, other)
        return Chain2(np.concatenate([self.p, other.p]), np.concatenate([self.w, other.w]))

    def __neg__(self) -> "Chain2":
        return self.scaled(-1.0)

    def __sub__(self, other: "Chain2") -> "Chain2":
        return self + (-other)

    def __mul__(self, c: float) -> "Chain2":
        return self.scaled(c)

    __rmul__ = __mul__

    def scaled(self, c: float) -> "Chain2":
        if c == 0 or len(self) == 0:
            return Chain2()
        return Chain2(self.p, self.w * c)

    def signed_area(self) -> float:
        return float(np.sum(self.w * self.areas))


Chain = Union[Chain0, Chain1, Chain2]


def _check_same_dim(A, B):
    if A.dim != B.dim:
        raise ChainError(f"cannot combine chains of dimension {A.dim} and {B.dim}")


# ---------------------------------------------------------------------------
# algebra


def add(A: Chain, B: Chain) -> Chain:
    return A + B


def scale(c: float, A: Chain) -> Chain:
    return A.scaled(c)


def reverse(J: Chain1) -> Chain1:
    return J.reversed()


def coalesce(J: Chain1) -> Chain1:
    """Merge coincident segments, summing weights of equal and opposite copies.

    Endpoints are identified at the merge tolerance; segments whose endpoints
    collapse to one point, and summed weights that cancel, are dropped.
    """
    if len(J) == 0:
        return J
    verts = J.vertices
    labels, reps = _cluster(verts, merge_tolerance(verts))
    n = len(J)
    ia, ib = labels[:n], labels[n:]
    live = ia != ib
    ia, ib, w = ia[live], ib[live], J.w[live]
    if len(w) == 0:
        return Chain1()
    lo, hi = np.minimum(ia, ib), np.maximum(ia, ib)
    sign = np.where(ia < ib, 1.0, -1.0)
    keys, first, inverse = np.unique(
        np.stack([lo, hi], axis=1), axis=0, return_index=True, return_inverse=True
    )
    inverse = inverse.reshape(-1)
    summed = np.bincount(inverse, weights=w * sign, minlength=len(keys))
    order = np.argsort(first, kind="stable")
    keep = (np.abs(summed[order]) >= DROP_RTOL * np.max(np.abs(J.w))) & (summed[order] != 0)
    order = order[keep]
    # orient each merged segment like its first occurrence
    s0 = sign[first[order]]
    start = np.where(s0 > 0, keys[order, 0], keys[order, 1])
    end = np.where(s0 > 0, keys[order, 1], keys[order, 0])
    pts = verts[reps]
    return Chain1(pts[start], pts[end], summed[order] * s0)


def boundary1(J: Chain1) -> Chain0:
    """Boundary of a 1-chain: sum of ``w * (b - a)``, coalesced."""
    if len(J) == 0:
        return Chain0()
    return Chain0.coalesced(np.concatenate([J.b, J.a]), np.concatenate([J.w, -J.w]))


def boundary2(K: Chain2) -> Chain1:
    """Boundary of a 2-chain: the directed triangle edges, with shared edges cancelled."""
    if len(K) == 0:
        return Chain1()
    p = K.p
    a = np.stack([p[:, 0], p[:, 1], p[:, 2]], axis=1).reshape(-1, 2)
    b = np.stack([p[:, 1], p[:, 2], p[:, 0]], axis=1).reshape(-1, 2)
    w = np.repeat(K.w, 3)
    return coalesce(Chain1(a, b, w))


def mass(A: Chain) -> float:
    if A.dim == 0:
        return float(np.sum(np.abs(A.weights)))
    if A.dim == 1:
        return float(np.sum(np.abs(A.w) * A.lengths))
    return float(np.sum(np.abs(A.w) * A.areas))


def is_closed(J: Chain1, tol: float | None = None) -> bool:
    if tol is None:
        tol = closed_tolerance(J)
    return mass(boundary1(J)) <= tol


def closed_tolerance(J: Chain1) -> float:
    return 1e-10 * (1.0 + mass(J))


# ---------------------------------------------------------------------------
# support


def _segment_distances(q: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from points ``q`` (k,2) to segments ``a->b`` (n,2); shape (k, n)."""
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    dd = np.where(dd == 0, 1.0, dd)
    rel = q[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("kij,ij->ki", rel, d) / dd, 0.0, 1.0)
    diff = rel - t[..., None] * d[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


@dataclass(frozen=True)
class SupportRegion:
    """Union of cell geometries; triangles are filled."""

    segments: np.ndarray
    triangles: np.ndarray
    bbox: tuple[float, float, float, float]

    @property
    def is_empty(self) -> bool:
        return len(self.segments) == 0 and len(self.triangles) == 0

    def distance(self, z) -> float:
        return float(self.distances(as_point(z)[None, :])[0])

    def distances(self, points) -> np.ndarray:
        q = as_points(points)
        out = np.full(len(q), np.inf)
        if self.is_empty:
            return out
        segs = self.segments
        if len(self.triangles):
            t = self.triangles
            edges = np.concatenate(
                [np.stack([t[:, 0], t[:, 1]], 1), np.stack([t[:, 1], t[:, 2]], 1),
                 np.stack([t[:, 2], t[:, 0]], 1)]
            )
            segs = np.concatenate([segs, edges]) if len(segs) else edges
        step = max(1, _CHUNK // max(1, len(segs)))
        for i in range(0, len(q), step):
            out[i:i + step] = _segment_distances(q[i:i + step], segs[:, 0], segs[:, 1]).min(axis=1)
        if len(self.triangles):
            inside = _inside_any_triangle(q, self.triangles)
            out[inside] = 0.0
        return out

    def nearest_cell(self, z) -> int:
        """Index of the segment nearest to ``z`` (segments only)."""
        if len(self.segments) == 0:
            return -1
        d = _segment_distances(as_point(z)[None, :], self.segments[:, 0], self.segments[:, 1])
        return int(np.argmin(d[0]))


def _inside_any_triangle(q: np.ndarray, tris: np.ndarray) -> np.ndarray:
    out = np.zeros(len(q), dtype=bool)
    step = max(1, _CHUNK // max(1, len(tris)))
    for i in range(0, len(q), step):
        qq = q[i:i + step, None, :]
        c0 = _cross(tris[None, :, 1] - tris[None, :, 0], qq - tris[None, :, 0])
        c1 = _cross(tris[None, :, 2] - tris[None, :, 1], qq - tris[None, :, 1])
        c2 = _cross(tris[None, :, 0] - tris[None, :, 2], qq - tris[None, :, 2])
        out[i:i + step] = np.any((c0 >= 0) & (c1 >= 0) & (c2 >= 0), axis=1)
    return out


def support(A: Chain) -> SupportRegion:
    empty_segs = np.zeros((0, 2, 2))
    empty_tris = np.zeros((0, 3, 2))
    if A.dim == 0:
        segs = np.stack([A.points, A.points], axis=1) if len(A) else empty_segs
        return SupportRegion(segs, empty_tris, _bbox(A.points))
    if A.dim == 1:
        segs = np.stack([A.a, A.b], axis=1) if len(A) else empty_segs
        return SupportRegion(segs, empty_tris, A.bbox)
    return SupportRegion(empty_segs, np.array(A.p) if len(A) else empty_tris, A.bbox)


# ---------------------------------------------------------------------------
# maps


def split_cells(J: Chain1, h: float) -> Chain1:
    """Subdivide every cell into equal pieces of length at most ``h``.

    Subdivision points are shared between consecutive pieces and cell
    endpoints are reproduced bit for bit, so closedness survives exactly.
    """
    if h <= 0:
        raise ChainError(f"subdivision length must be positive, got {h}")
    if len(J) == 0:
        return J
    m = np.maximum(1, np.ceil(J.lengths / h).astype(int))
    cell = np.repeat(np.arange(len(J)), m)
    k = np.arange(len(cell)) - np.repeat(np.cumsum(m) - m, m)
    mm = m[cell]
    d = J.b[cell] - J.a[cell]
    t0 = (k / mm)[:, None]
    t1 = ((k + 1) / mm)[:, None]
    p0 = np.where(k[:, None] == 0, J.a[cell], J.a[cell] + t0 * d)
    p1 = np.where((k + 1)[:, None] == mm[:, None], J.b[cell], J.a[cell] + t1 * d)
    return Chain1(p0, p1, J.w[cell])


def _apply_map(F: Callable[[np.ndarray], np.ndarray], pts: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(F(pts), dtype=float).reshape(pts.shape)
    except Exception as exc:
        for p in pts:
            try:
                np.asarray(F(p[None, :]), dtype=float)
            except Exception:
                raise ChainError(f"map failed at point {tuple(p)}: {exc}") from exc
        raise ChainError(f"map failed: {exc}") from exc
    bad = np.flatnonzero(~np.all(np.isfinite(out), axis=1))
    if len(bad):
        raise ChainError(f"map is not finite at point {tuple(pts[bad[0]])}", index=int(bad[0]))
    return out


def pushforward(F: Callable[[np.ndarray], np.ndarray], J: Chain1, h: float) -> Chain1:
    """Image of ``J`` under a smooth map, by secants over an ``h``-subdivision.

    ``F`` takes an array of points of shape (m, 2) and returns their images.
    Pieces whose endpoints map to the same point carry no 1-dimensional
    measure and are omitted.
    """
    fine = split_cells(J, h)
    if len(fine) == 0:
        return fine
    fa = _apply_map(F, np.array(fine.a))
    fb = _apply_map(F, np.array(fine.b))
    live = ~np.all(fa == fb, axis=1)
    return Chain1(fa[live], fb[live], fine.w[live])


def cone(z, J: Chain1) -> Chain2:
    """Join every cell ``a -> b`` of ``J`` to the apex ``z``: triangle ``(z, a, b)``."""
    z = as_point(z)
    if len(J) == 0:
        return Chain2()
    u = J.a - z
    v = J.b - z
    scale_ = np.hypot(*u.T) * np.hypot(*v.T)
    cr = _cross(u, v)
    bad = np.flatnonzero(np.abs(cr) <= 1e-12 * scale_)
    if len(bad):
        i = int(bad[0])
        raise ChainError(
            f"cell {i} ({tuple(J.a[i])} -> {tuple(J.b[i])}) is collinear with apex {tuple(z)}",
            index=i,
        )
    tris = np.stack([np.broadcast_to(z, J.a.shape), J.a, J.b], axis=1)
    return Chain2(tris, J.w)


def pick_cone_apex(J: Chain1, avoid=None, min_dist: float = 0.0) -> np.ndarray:
    """Deterministically choose an apex for :func:`cone`.

    The apex stays at least ``min_dist`` from ``avoid`` and is not collinear
    with any cell of ``J``.
    """
    if len(J) == 0:
        return np.zeros(2)
    x0, y0, x1, y1 = J.bbox
    span = max(x1 - x0, y1 - y0, 1e-300)
    avoid = None if avoid is None else as_point(avoid)
    # R2 low-discrepancy sequence over the bbox padded by half its span
    g = 1.32471795724474602596
    for k in range(1, 4096):
        s, t = (0.5 + k / g) % 1.0, (0.5 + k / g**2) % 1.0
        c = np.array([x0 - span / 2 + 2 * span * s, y0 - span / 2 + 2 * span * t])
        if avoid is not None and np.hypot(*(c - avoid)) <= min_dist:
            continue
        u, v = J.a - c, J.b - c
        if np.all(np.abs(_cross(u, v)) > 1e-9 * np.hypot(*u.T) * np.hypot(*v.T)):
            return c
    raise ChainError("could not find a cone apex off every cell line")


# ---------------------------------------------------------------------------
# restriction to a disk


def _edge_disk_area(P: np.ndarray, Q: np.ndarray, r: float) -> np.ndarray:
    """Signed area of triangle ``(0, P, Q)`` intersected with the disk of radius ``r``."""
    d = Q - P
    A = np.einsum("ij,ij->i", d, d)
    B = np.einsum("ij,ij->i", P, d)
    C = np.einsum("ij,ij->i", P, P) - r * r
    disc = B * B - A * C
    hit = disc > 0
    sq = np.sqrt(np.where(hit, disc, 0.0))
    t1 = np.where(hit, np.clip((-B - sq) / A, 0.0, 1.0), 0.0)
    t2 = np.where(hit, np.clip((-B + sq) / A, 0.0, 1.0), 0.0)
    # clipped parameters snap to the exact endpoints; P + 1*d can miss Q by an
    # ulp, which skews the sector angle when Q is near the centre
    def at(t):
        return np.where((t == 0)[:, None], P, np.where((t == 1)[:, None], Q, P + t[:, None] * d))

    X1, X2 = at(t1), at(t2)

    def sector(U, V):
        return 0.5 * r * r * np.arctan2(_cross(U, V), np.einsum("ij,ij->i", U, V))

    return sector(P, X1) + 0.5 * _cross(X1, X2) + sector(X2, Q)


def area_in_disk(K: Chain2, c, r: float) -> float:
    """Weighted area of ``K`` inside the disk of radius ``r`` about ``c``, exactly."""
    if r <= 0:
        raise ChainError(f"radius must be positive, got {r}")
    if len(K) == 0:
        return 0.0
    p = K.p - as_point(c)
    # triangles whose bounding box misses the disk's contribute exactly zero
    near = np.all(p.min(axis=1) <= r, axis=1) & np.all(p.max(axis=1) >= -r, axis=1)
    if not np.any(near):
        return 0.0
    p = p[near]
    total = np.zeros(len(p))
    for i, j in ((0, 1), (1, 2), (2, 0)):
        total += _edge_disk_area(p[:, i], p[:, j], r)
    return float(np.sum(K.w[near] * total))

