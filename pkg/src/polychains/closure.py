"""Close a polyhedral 1-chain while keeping it away from a ball.

Given a chain ``K`` far from a point ``z``, every (subdivided) cell
``k = a -> b`` is replaced by the loop

    r = k - pi_*(k) + q + p

where ``pi`` projects radially onto the circle of radius ``2 eps`` about
``z``, ``q`` runs from ``pi(a)`` out to ``a`` and ``p`` from ``b`` in to
``pi(b)``.  Arcs of the circle are replaced by chords.  The sum of the
loops is closed; adding ``a_z`` times a regular polygon of radius ``2 eps``
restores the part of ``K`` that winds about ``z``, where ``a_z`` is the
winding number of the projected chain.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .chains import Chain1, as_point, boundary1, coalesce, mass, split_cells, support
from .errors import ChainError, PreconditionError
from .forms import HoloFn, QuadratureSpec, integrate_form, one_over_z_minus
from .generators import circle_chain
from .winding import winding_number


@dataclass(frozen=True)
class ClosureParams:
    z: tuple[float, float]
    eps: float
    j: int = 1
    theta_max: float = math.pi / 4
    ngon_n: int = 64

    def __post_init__(self):
        p = as_point(self.z)
        object.__setattr__(self, "z", (float(p[0]), float(p[1])))
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.j < 1:
            raise ValueError(f"j must be >= 1, got {self.j}")
        if not 0 < self.theta_max <= math.pi / 3:
            raise ValueError(f"theta_max must lie in (0, pi/3], got {self.theta_max}")
        if self.ngon_n < 8:
            raise ValueError(f"ngon_n must be >= 8, got {self.ngon_n}")


@dataclass(frozen=True)
class ClosureReport:
    a: float
    boundary_mass_before: float
    boundary_mass_after: float
    cone_mass: float
    bound_2R_times_boundary: float
    min_dist_to_z: float
    radius: float
    added_mass: float

    def to_dict(self) -> dict:
        return asdict(self)


def project_to_circle(z, eps: float, w) -> np.ndarray:
    """Radial projection of ``w`` onto the circle of radius ``2 eps`` about ``z``."""
    z = as_point(z)
    w = as_point(w)
    d = w - z
    n = math.hypot(d[0], d[1])
    if n == 0:
        raise PreconditionError(f"cannot project the centre {tuple(z)}", name="w_ne_z", measured=0.0)
    return 2 * eps * d / n + z


def _project(z: np.ndarray, eps: float, pts: np.ndarray) -> np.ndarray:
    d = pts - z
    return 2 * eps * d / np.hypot(d[:, 0], d[:, 1])[:, None] + z


def _chords(z: np.ndarray, eps: float, fine: Chain1, theta_max: float) -> Chain1:
    """Chord chain replacing the projected arc of every cell; weights kept."""
    pa = _project(z, eps, np.array(fine.a))
    pb = _project(z, eps, np.array(fine.b))
    u, v = fine.a - z, fine.b - z
    dtheta = np.arctan2(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0], np.einsum("ij,ij->i", u, v))
    theta_a = np.arctan2(u[:, 1], u[:, 0])
    starts, ends, wts = [], [], []
    for i in range(len(fine)):
        if np.all(pa[i] == pb[i]):
            continue  # radial cell: its image is a point
        m = max(1, math.ceil(abs(dtheta[i]) / theta_max))
        ang = theta_a[i] + dtheta[i] * np.arange(1, m) / m
        mid = z + 2 * eps * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        pts = np.concatenate([pa[i][None], mid, pb[i][None]])
        starts.append(pts[:-1])
        ends.append(pts[1:])
        wts.append(np.full(m, fine.w[i]))
    if not starts:
        return Chain1()
    return Chain1(np.concatenate(starts), np.concatenate(ends), np.concatenate(wts))


def _radials(z: np.ndarray, eps: float, fine: Chain1) -> Chain1:
    pa = _project(z, eps, np.array(fine.a))
    pb = _project(z, eps, np.array(fine.b))
    # q: pi(a) -> a ; p: b -> pi(b)
    starts = np.concatenate([pa, fine.b])
    ends = np.concatenate([fine.a, pb])
    w = np.concatenate([fine.w, fine.w])
    live = ~np.all(starts == ends, axis=1)
    if not np.any(live):
        return Chain1()
    return Chain1(starts[live], ends[live], w[live])


def close_chain(K: Chain1, params: ClosureParams) -> tuple[Chain1, ClosureReport]:
    """Closed polyhedral chain avoiding ``B_eps(z)`` built from ``K``; see module docs."""
    z = np.array(params.z)
    eps = params.eps
    if len(K) == 0:
        return Chain1(), ClosureReport(0.0, 0.0, 0.0, 0.0, 0.0, math.inf, 0.0, 0.0)
    dist = support(K).distance(z)
    if dist < 4 * eps:
        raise PreconditionError(
            f"support lies {dist:.6g} from z, closer than 4*eps = {4 * eps:.6g}",
            name="dist_z_support",
            measured=dist,
        )
    fine = split_cells(K, 1.0 / params.j)
    chords = _chords(z, eps, fine, params.theta_max)
    radials = _radials(z, eps, fine)
    cone_part = coalesce(radials)
    a = winding_number(chords, z).real if len(chords) else 0.0
    # one merge tolerance for the whole output: radials of a sub-tolerance cell
    # cancel in coalescing, so the cell itself must be dropped too
    P = coalesce(fine - chords + radials)
    extra = -chords + cone_part
    if a != 0.0 and abs(a) >= 1e-14 * float(np.max(np.abs(K.w))):
        ring = circle_chain(z, 2 * eps, params.ngon_n, a)
        P = P + ring
        extra = extra + ring
    verts = fine.vertices
    R = float(np.max(np.hypot(*(verts - z).T)))
    bm_before = mass(boundary1(fine))
    report = ClosureReport(
        a=float(a),
        boundary_mass_before=bm_before,
        boundary_mass_after=mass(boundary1(P)),
        cone_mass=mass(cone_part),
        bound_2R_times_boundary=2 * R * bm_before,
        min_dist_to_z=support(P).distance(z),
        radius=R,
        added_mass=mass(extra),
    )
    return P, report


@dataclass
class ClosureSequence:
    chains: list[Chain1]
    reports: list[ClosureReport]
    integrals: list[complex] = field(default_factory=list)
    cauchy_differences: list[float] = field(default_factory=list)


def closure_sequence(
    K_seq: list[Chain1],
    params: ClosureParams,
    test_form: HoloFn | None = None,
    q: QuadratureSpec = QuadratureSpec(),
) -> ClosureSequence:
    """Close each ``K_seq[i]`` with subdivision index ``j = i + 1``.

    The default test form is ``dw / (w - z)``; consecutive differences of its
    integrals over the outputs are reported.
    """
    if test_form is None:
        test_form = one_over_z_minus(complex(*params.z))
    out = ClosureSequence([], [])
    for i, K in enumerate(K_seq):
        p = ClosureParams(params.z, params.eps, i + 1, params.theta_max, params.ngon_n)
        try:
            P, rep = close_chain(K, p)
        except PreconditionError as exc:
            raise PreconditionError(
                f"sequence element {i}: {exc}", name=exc.name, measured=exc.measured
            ) from exc
        except ChainError as exc:
            raise ChainError(f"sequence element {i}: {exc}", index=i) from exc
        out.chains.append(P)
        out.reports.append(rep)
        out.integrals.append(integrate_form(P, test_form, q))
    out.cauchy_differences = [
        abs(out.integrals[i + 1] - out.integrals[i]) for i in range(len(out.integrals) - 1)
    ]
    return out
