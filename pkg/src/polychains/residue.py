"""Verification harnesses for the Cauchy theorems over polyhedral chains.

Each ``verify_*`` call returns a :class:`Report` listing the identity's two
sides, their gap, the pass threshold and every hypothesis it checked.  A
hypothesis that makes the computation meaningless (an open chain, a
singularity on the support, overlapping residue disks) raises
:class:`PreconditionError`; one that only decides whether the theorem
applies is recorded with ``ok=False`` and the numbers are still reported.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .chains import (
    Chain1,
    Chain2,
    as_point,
    boundary1,
    boundary2,
    closed_tolerance,
    coalesce,
    mass,
    support,
)
from .errors import NotClosedError, PreconditionError, SingularityError
from .forms import HoloFn, QuadratureSpec, check_singularities, integrate_form, one_over_z_minus
from .generators import circle_chain
from .winding import winding_number

#: |Ind| below this counts as zero winding about a singularity
WINDING_ZERO_TOL = 1e-9


@dataclass
class Precondition:
    name: str
    ok: bool
    measured: Any


@dataclass
class Report:
    theorem: str
    lhs: complex
    rhs: complex
    gap: float
    threshold: float
    passed: bool
    terms: list[dict] = field(default_factory=list)
    preconditions: list[Precondition] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": [self.rhs.real, self.rhs.imag],
            "gap": self.gap,
            "threshold": self.threshold,
            "pass": self.passed,
            "terms": [_jsonable(t) for t in self.terms],
            "preconditions": [_jsonable(asdict(p)) for p in self.preconditions],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def precondition(self, name: str) -> Precondition:
        for p in self.preconditions:
            if p.name == name:
                return p
        raise KeyError(name)


def _as_complex(z) -> complex:
    p = as_point(z)
    return complex(p[0], p[1])


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def _require_closed(J: Chain1) -> Precondition:
    bm = mass(boundary1(J))
    tol = closed_tolerance(J)
    if bm > tol:
        raise NotClosedError(
            f"chain is not closed: boundary mass {bm:.3g} exceeds tol_closed {tol:.3g}",
            name="closed",
            measured=bm,
        )
    return Precondition("closed", True, bm)


def _inside_hull(J: Chain1, points: np.ndarray, margin: float) -> np.ndarray:
    verts = np.unique(J.vertices, axis=0)
    try:
        hull = ConvexHull(verts)
    except (QhullError, ValueError):
        return support(J).distances(points) <= margin
    eq = hull.equations
    signed = points @ eq[:, :2].T + eq[:, 2]
    return np.max(signed, axis=1) <= margin


def _hypotheses(J: Chain1, f: HoloFn, margin: float, K: Chain2 | None) -> list[Precondition]:
    """Local (no singularity near the hull) and global (zero winding) hypotheses."""
    sings = np.array([[s.real, s.imag] for s in f.singularities]).reshape(-1, 2)
    inside = _inside_hull(J, sings, margin) if len(sings) and len(J) else np.zeros(0, bool)
    winds = [winding_number(J, s).real if len(J) else 0.0 for s in sings]
    max_wind = max((abs(w) for w in winds), default=0.0)
    out = [
        Precondition("no_singularity_in_hull", not bool(np.any(inside)), int(np.sum(inside))),
        Precondition("zero_winding_at_singularities", max_wind <= WINDING_ZERO_TOL, max_wind),
    ]
    if K is not None:
        diff = coalesce(boundary2(K) - J)
        out.append(Precondition("bounding_chain", mass(diff) <= closed_tolerance(J), mass(K)))
    else:
        out.append(Precondition("bounding_chain", True, "cone construction"))
    return out


def verify_cit(
    J: Chain1,
    f: HoloFn,
    q: QuadratureSpec = QuadratureSpec(),
    K: Chain2 | None = None,
    hull_margin: float = 0.0,
) -> Report:
    """Check that ``f(z) dz`` integrates to zero over the closed chain ``J``.

    The theorem applies when no singularity lies in the convex hull of the
    support (padded by ``hull_margin``) or, globally, when ``J`` winds zero
    times about every singularity.
    """
    pre = [_require_closed(J)]
    dist = check_singularities(J, f)
    pre.append(Precondition("singularities_off_support", True, dist))
    pre += _hypotheses(J, f, hull_margin, K)
    value = integrate_form(J, f, q)
    threshold = 1e-8 * (1 + mass(J))
    local = pre[2].ok
    theorem = "CIT" if local or len(J) == 0 else "global-CIT"
    return Report(theorem, value, 0j, abs(value), threshold, abs(value) <= threshold, [], pre)


def _divided(f: HoloFn, z: complex) -> HoloFn:
    return HoloFn(lambda w: f.func(w) / (w - z), f.singularities + (z,), f"({f.label})/(w-{z})")


def verify_cif(
    J: Chain1,
    f: HoloFn,
    z,
    q: QuadratureSpec = QuadratureSpec(),
    K: Chain2 | None = None,
    hull_margin: float = 0.0,
) -> Report:
    """Compare ``Ind_J(z) f(z)`` with ``(1/2 pi i) int_J f(w)/(w - z) dw``."""
    zc = _as_complex(z)
    pre = [_require_closed(J)]
    dist = check_singularities(J, f)
    pre.append(Precondition("singularities_off_support", True, dist))
    try:
        ind = winding_number(J, zc) if len(J) else 0j
    except PreconditionError as exc:
        raise PreconditionError(str(exc), name="z_off_support", measured=exc.measured) from exc
    pre.append(Precondition("z_off_support", True, support(J).distance(zc)))
    pre += _hypotheses(J, f, hull_margin, K)
    fz = f.eval(zc)
    lhs = ind.real * fz
    rhs = integrate_form(J, _divided(f, zc), q) / (2j * math.pi)
    gap = abs(lhs - rhs)
    threshold = 1e-8 * (1 + abs(fz))
    theorem = "CIF" if pre[3].ok or len(J) == 0 else "global-CIF"
    terms = [{"winding": ind.real, "f(z)": fz}]
    return Report(theorem, lhs, rhs, gap, threshold, gap <= threshold, terms, pre)


def _richardson(vals: list[complex]) -> complex:
    """Two rounds of Richardson extrapolation for an O(n^-2) sequence at n, 2n, 4n."""
    i1, i2, i4 = vals
    r1 = (4 * i2 - i1) / 3
    r2 = (4 * i4 - i2) / 3
    return (16 * r2 - r1) / 15


def _loop_integral(f: HoloFn, a: complex, r: float, ngon_n: int, q: QuadratureSpec) -> complex:
    vals = [
        integrate_form(circle_chain((a.real, a.imag), r, ngon_n * 2**k), f, q) for k in range(3)
    ]
    return _richardson(vals)


def numeric_residue(
    f: HoloFn, a, r: float, q: QuadratureSpec = QuadratureSpec(), ngon_n: int = 64
) -> complex:
    """``(1 / 2 pi i)`` times the integral of ``f dz`` round a small polygon about ``a``."""
    ac = _as_complex(a)
    for s in f.singularities:
        if s != ac and abs(s - ac) < 2 * r:
            raise PreconditionError(
                f"singularity {s} lies within 2r = {2 * r:.6g} of {ac}",
                name="isolated_singularity",
                measured=abs(s - ac),
            )
    return _loop_integral(f, ac, r, ngon_n, q) / (2j * math.pi)


def default_radii(J: Chain1, singularities: list[complex]) -> list[float]:
    """One third of each singularity's distance to its nearest neighbour or to ``supp(J)``.

    A lone singularity with nothing to measure against gets radius 1.
    """
    sup = support(J)
    out = []
    for i, s in enumerate(singularities):
        near = [abs(s - t) for j, t in enumerate(singularities) if j != i]
        near.append(sup.distance(s) if len(J) else math.inf)
        d = min(near)
        out.append(d / 3 if math.isfinite(d) else 1.0)
    return out


def verify_residue(
    J: Chain1,
    f: HoloFn,
    radii: list[float] | None = None,
    q: QuadratureSpec = QuadratureSpec(),
    ngon_n: int = 64,
    K: Chain2 | None = None,
) -> Report:
    """Compare ``int_J f dz`` with ``sum_k Ind_J(a_k) int_{B_k} f dz``."""
    pre = [_require_closed(J)]
    dist = check_singularities(J, f)
    pre.append(Precondition("singularities_off_support", True, dist))
    sings = list(f.singularities)
    if radii is None:
        radii = default_radii(J, sings)
    if len(radii) != len(sings):
        raise PreconditionError(
            f"{len(radii)} radii for {len(sings)} singularities", name="radii", measured=len(radii)
        )
    sup = support(J)
    for i, (s, r) in enumerate(zip(sings, radii)):
        if not (r > 0 and math.isfinite(r)):
            raise PreconditionError(f"radius {r} for singularity {s} is not positive", name="radii", measured=r)
        d = sup.distance(s) if len(J) else math.inf
        if d <= r:
            raise SingularityError(
                f"disk of radius {r:.6g} about singularity {i} ({s}) meets the support "
                f"(distance {d:.6g})",
                singularity=s,
                measured=d,
            )
        for k in range(i):
            gap = abs(s - sings[k])
            if gap <= r + radii[k]:
                raise PreconditionError(
                    f"disks about singularities {k} ({sings[k]}) and {i} ({s}) overlap",
                    name="disjoint_disks",
                    measured=gap - r - radii[k],
                )
    pre.append(Precondition("disjoint_disks", True, len(sings)))
    pre += _hypotheses(J, f, 0.0, K)[2:]
    lhs = integrate_form(J, f, q)
    terms, rhs = [], 0j
    for s, r in zip(sings, radii):
        ind = winding_number(J, s).real if len(J) else 0.0
        loop = _loop_integral(f, s, r, ngon_n, q)
        contrib = ind * loop
        rhs += contrib
        terms.append({"singularity": s, "radius": r, "winding": ind, "loop_integral": loop,
                      "contribution": contrib})
    gap = abs(lhs - rhs)
    threshold = 1e-8 * (1 + abs(lhs))
    return Report("residue", lhs, rhs, gap, threshold, gap <= threshold, terms, pre)


def verify_density_winding(J: Chain1, z, eps0: float | None = None, K: Chain2 | None = None) -> Report:
    from .density import density_winding_check

    res = density_winding_check(J, z, eps0, K)
    pre = [
        Precondition("closed", True, mass(boundary1(J))),
        Precondition("dist_z_support", True, support(J).distance(_as_complex(z)) if len(J) else math.inf),
    ]
    terms = [{"apex": list(res.apex), "eps0": res.eps0, "raw": list(res.diagnostics.raw),
              "radii": list(res.diagnostics.radii), "perturbed": res.diagnostics.perturbed}]
    threshold = 1e-6
    return Report("density-winding", complex(res.density), complex(res.winding.real), res.gap,
                  threshold, res.gap <= threshold, terms, pre)


__all__ = [
    "Precondition",
    "Report",
    "default_radii",
    "numeric_residue",
    "one_over_z_minus",
    "verify_cif",
    "verify_cit",
    "verify_density_winding",
    "verify_residue",
]
