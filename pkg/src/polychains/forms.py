"""Complex 1-forms ``f(z) dz`` over 1-chains and area integrals over 2-chains.

Integrals over segments use Gauss-Legendre panels with adaptive bisection;
integrals over triangles use a symmetric 7-point rule with adaptive 4-way
subdivision.  Both share the same acceptance test: a panel is accepted once
its refined estimate differs from the coarse one by at most
``atol + rtol * |running total|``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .chains import Chain1, Chain2, as_point, support, to_complex
from .errors import PreconditionError, QuadratureError, SingularityError

ComplexFn = Callable[[np.ndarray], np.ndarray]

#: Default exclusion radius around singularities, relative to the chain diameter.
EXCLUSION_RTOL = 1e-9


@dataclass(frozen=True)
class HoloFn:
    """A vectorised complex function with its declared singular points.

    ``func`` maps a complex ndarray to a complex ndarray of the same shape.
    """

    func: ComplexFn
    singularities: tuple[complex, ...] = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "singularities", tuple(complex(s) + 0.0 for s in self.singularities)
        )

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=complex))

    def eval(self, p) -> complex:
        q = as_point(p)
        return complex(self.func(np.array([q[0] + 1j * q[1]]))[0])

    def __mul__(self, other: "HoloFn") -> "HoloFn":
        return HoloFn(
            lambda z: self.func(z) * other.func(z),
            self.singularities + other.singularities,
            f"({self.label})*({other.label})",
        )


@dataclass(frozen=True)
class QuadratureSpec:
    order: int = 16
    atol: float = 1e-12
    rtol: float = 1e-10
    max_depth: int = 30

    def __post_init__(self):
        if self.order < 2:
            raise ValueError(f"order must be >= 2, got {self.order}")
        if not (self.atol > 0 and self.rtol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")


@lru_cache(maxsize=None)
def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0


# degree-5 symmetric rule (Radon), barycentric coordinates and weights
_S15 = math.sqrt(15.0)
_A1, _A2 = (6 - _S15) / 21, (6 + _S15) / 21
_TRI_BARY = np.array(
    [
        [1 / 3, 1 / 3, 1 / 3],
        [_A1, _A1, 1 - 2 * _A1], [_A1, 1 - 2 * _A1, _A1], [1 - 2 * _A1, _A1, _A1],
        [_A2, _A2, 1 - 2 * _A2], [_A2, 1 - 2 * _A2, _A2], [1 - 2 * _A2, _A2, _A2],
    ]
)
_W1, _W2 = (155 - _S15) / 1200, (155 + _S15) / 1200
_TRI_W = np.array([9 / 40, _W1, _W1, _W1, _W2, _W2, _W2])


def _exclusion(diameter: float, exclusion: float | None) -> float:
    if exclusion is not None:
        return exclusion
    return EXCLUSION_RTOL * max(diameter, 1.0)


def check_singularities(J: Chain1, f: HoloFn, exclusion: float | None = None) -> float:
    """Raise :class:`SingularityError` if a singularity of ``f`` touches ``supp(J)``.

    Returns the smallest singularity-to-support distance (``inf`` if none).
    """
    if len(J) == 0 or not f.singularities:
        return math.inf
    excl = _exclusion(J.diameter, exclusion)
    sup = support(J)
    pts = np.array([[s.real, s.imag] for s in f.singularities])
    dist = sup.distances(pts)
    i = int(np.argmin(dist))
    if dist[i] <= excl:
        s = f.singularities[i]
        cell = sup.nearest_cell(s)
        raise SingularityError(
            f"singularity {s} of {f.label or 'f'} lies {dist[i]:.3g} from cell {cell} "
            f"(exclusion radius {excl:.3g})",
            singularity=s,
            cell=cell,
            measured=float(dist[i]),
        )
    return float(dist[i])


def _fsum_complex(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real), math.fsum(values.imag))


def integrate_form(
    J: Chain1, f: HoloFn, q: QuadratureSpec = QuadratureSpec(), exclusion: float | None = None
) -> complex:
    """Integral of ``f(z) dz`` over the 1-chain ``J``.

    Each cell ``a -> b`` contributes ``w * int_0^1 f(a + t(b-a)) (b-a) dt``.
    """
    if len(J) == 0:
        return 0j
    check_singularities(J, f, exclusion)
    x, wq = _gauss_legendre(q.order)
    a = to_complex(J.a)
    d = to_complex(J.b) - a
    cw = J.w * d

    def panel(cell, t0, t1):
        t = t0[:, None] + (t1 - t0)[:, None] * x[None, :]
        vals = f.func(a[cell][:, None] + t * d[cell][:, None])
        return cw[cell] * (t1 - t0) * (vals @ wq)

    cell = np.arange(len(J))
    t0 = np.zeros(len(J))
    t1 = np.ones(len(J))
    est = panel(cell, t0, t1)
    done_val, done_key = [], []
    for _ in range(q.max_depth):
        tm = 0.5 * (t0 + t1)
        left, right = panel(cell, t0, tm), panel(cell, tm, t1)
        fine = left + right
        if not np.all(np.isfinite(fine)):
            i = int(np.flatnonzero(~np.isfinite(fine))[0])
            raise QuadratureError(
                f"non-finite integrand on cell {cell[i]} for t in [{t0[i]}, {t1[i]}]",
                worst_panel=(int(cell[i]), float(t0[i]), float(t1[i])),
            )
        err = np.abs(fine - est)
        total = sum(_fsum_complex(v) for v in done_val) + _fsum_complex(fine)
        ok = err <= q.atol + q.rtol * abs(total)
        done_val.append(fine[ok])
        done_key.append(np.stack([cell[ok], t0[ok]], axis=1))
        if np.all(ok):
            break
        keep = ~ok
        cell = np.concatenate([cell[keep], cell[keep]])
        t0, t1 = np.concatenate([t0[keep], tm[keep]]), np.concatenate([tm[keep], t1[keep]])
        est = np.concatenate([left[keep], right[keep]])
    else:
        partial = sum(_fsum_complex(v) for v in done_val) + _fsum_complex(est)
        i = int(np.argmax(err[~ok]))
        raise QuadratureError(
            f"max_depth {q.max_depth} exceeded; partial estimate {partial}",
            partial=partial,
            worst_panel=(int(cell[i]), float(t0[i]), float(t1[i])),
        )
    vals = np.concatenate(done_val)
    keys = np.concatenate(done_key)
    order = np.lexsort((keys[:, 1], keys[:, 0]))
    return _fsum_complex(vals[order])


def integrate_area(
    K: Chain2, g: ComplexFn, q: QuadratureSpec = QuadratureSpec()
) -> complex:
    """Integral of ``g dx^dy`` over the 2-chain ``K`` (counterclockwise positive)."""
    if len(K) == 0:
        return 0j

    def rule(tris, wts):
        pts = np.einsum("qk,nkd->nqd", _TRI_BARY, tris)
        vals = g(to_complex(pts))
        area = 0.5 * (
            (tris[:, 1, 0] - tris[:, 0, 0]) * (tris[:, 2, 1] - tris[:, 0, 1])
            - (tris[:, 1, 1] - tris[:, 0, 1]) * (tris[:, 2, 0] - tris[:, 0, 0])
        )
        return wts * area * (vals @ _TRI_W)

    def children(tris):
        p0, p1, p2 = tris[:, 0], tris[:, 1], tris[:, 2]
        m01, m12, m20 = (p0 + p1) / 2, (p1 + p2) / 2, (p2 + p0) / 2
        kids = [
            np.stack([p0, m01, m20], 1), np.stack([m01, p1, m12], 1),
            np.stack([m20, m12, p2], 1), np.stack([m12, m20, m01], 1),
        ]
        return np.stack(kids, axis=1)  # (n, 4, 3, 2)

    tris = np.array(K.p)
    wts = np.array(K.w)
    ids = np.arange(len(K))
    est = rule(tris, wts)
    done_val, done_key = [], []
    path = np.zeros(len(K))
    for depth in range(q.max_depth):
        kids = children(tris)
        n = len(tris)
        kid_vals = rule(kids.reshape(-1, 3, 2), np.repeat(wts, 4)).reshape(n, 4)
        fine = kid_vals.sum(axis=1)
        if not np.all(np.isfinite(fine)):
            i = int(np.flatnonzero(~np.isfinite(fine))[0])
            raise QuadratureError(f"non-finite integrand on cell {ids[i]}", worst_panel=int(ids[i]))
        err = np.abs(fine - est)
        total = sum(_fsum_complex(v) for v in done_val) + _fsum_complex(fine)
        ok = err <= q.atol + q.rtol * abs(total)
        done_val.append(fine[ok])
        done_key.append(np.stack([ids[ok], path[ok]], axis=1))
        if np.all(ok):
            break
        keep = ~ok
        tris = kids[keep].reshape(-1, 3, 2)
        wts = np.repeat(wts[keep], 4)
        ids = np.repeat(ids[keep], 4)
        path = (np.repeat(path[keep], 4) * 4 + np.tile(np.arange(4), int(keep.sum())))
        est = kid_vals[keep].reshape(-1)
    else:
        partial = sum(_fsum_complex(v) for v in done_val) + _fsum_complex(est)
        i = int(np.argmax(err[~ok]))
        raise QuadratureError(
            f"max_depth {q.max_depth} exceeded; partial estimate {partial}",
            partial=partial,
            worst_panel=int(ids[i]),
        )
    vals = np.concatenate(done_val)
    keys = np.concatenate(done_key)
    order = np.lexsort((keys[:, 1], keys[:, 0]))
    return _fsum_complex(vals[order])


def _stencil(f: HoloFn, z: complex, h: float, exclusion: float | None):
    if h <= 0:
        raise PreconditionError(f"step must be positive, got {h}", name="step", measured=h)
    excl = _exclusion(abs(h), exclusion)
    for s in f.singularities:
        if abs(s - z) <= h + excl:
            raise SingularityError(
                f"stencil of radius {h} about {z} touches singularity {s}",
                singularity=s,
                measured=abs(s - z),
            )
    pts = np.array([z + h, z - h, z + 1j * h, z - 1j * h])
    fp = f(pts)
    fx = (fp[0] - fp[1]) / (2 * h)
    fy = (fp[2] - fp[3]) / (2 * h)
    return fx, fy


def cauchy_riemann_residual(f: HoloFn, z, h: float = 1e-5, exclusion: float | None = None) -> float:
    """``max(|u_x - v_y|, |u_y + v_x|)`` by central differences of step ``h``."""
    zc = complex(*as_point(z))
    fx, fy = _stencil(f, zc, h, exclusion)
    return max(abs(fx.real - fy.imag), abs(fy.real + fx.imag))


def stokes_density(f: HoloFn, h: float = 1e-4) -> ComplexFn:
    """The area density paired with ``f dz`` by Green's theorem.

    Returns ``g = i (f_x + i f_y)`` (that is ``2i * df/dzbar``), estimated by
    central differences, so ``integrate_form(boundary2(K), f)`` equals
    ``integrate_area(K, g)``.  ``g`` vanishes where ``f`` is holomorphic.
    """

    def g(z):
        z = np.asarray(z, dtype=complex)
        fx = (f(z + h) - f(z - h)) / (2 * h)
        fy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
        return 1j * (fx + 1j * fy)

    return g


# ---------------------------------------------------------------------------
# registry


def one_over_z_minus(a: complex = 0j) -> HoloFn:
    a = complex(a)
    return HoloFn(lambda z: 1.0 / (z - a), (a,), f"1/(z-{a})")


def poly(coeffs: Sequence[complex]) -> HoloFn:
    """Polynomial ``c0 + c1 z + c2 z^2 + ...``."""
    c = np.array([complex(x) for x in coeffs])[::-1]
    return HoloFn(lambda z: np.polyval(c, z), (), "poly(" + ",".join(map(str, coeffs)) + ")")


def exp() -> HoloFn:
    return HoloFn(np.exp, (), "exp")


def sin() -> HoloFn:
    return HoloFn(np.sin, (), "sin")


def rational(
    num: Sequence[complex], roots: Sequence[complex], multiplicities: Sequence[int] | None = None,
    lead: complex = 1.0, label: str | None = None,
) -> HoloFn:
    """``num(z) / (lead * prod (z - r)^m)`` with ``num`` given by ascending coefficients.

    The denominator is supplied by its roots; nothing here finds roots.
    """
    roots = [complex(r) for r in roots]
    mult = [1] * len(roots) if multiplicities is None else [int(m) for m in multiplicities]
    c = np.array([complex(x) for x in num])[::-1]
    lead = complex(lead)

    def func(z):
        den = np.full(np.shape(z), lead, dtype=complex)
        for r, m in zip(roots, mult):
            den = den * (z - r) ** m
        return np.polyval(c, z) / den

    if label is None:
        label = "rational"
    # a root repeated in the list is one singular point
    uniq = list(dict.fromkeys(roots))
    return HoloFn(func, tuple(uniq), label)


REGISTRY: dict[str, Callable[..., HoloFn]] = {
    "one_over_z_minus": one_over_z_minus,
    "poly": poly,
    "exp": exp,
    "sin": sin,
    "rational": rational,
}


def _parse_complex(text: str) -> complex:
    return complex(text.strip().replace(" ", "").replace("i", "j"))


def _parse_list(text: str) -> list[complex]:
    return [_parse_complex(t) for t in text.split(",") if t.strip()]


def _sympy_rational(expr: str) -> HoloFn:
    """Parse a rational expression in ``z`` whose denominator is a product of linear factors."""
    import sympy
    from sympy.parsing.sympy_parser import (
        convert_xor,
        implicit_multiplication,
        parse_expr,
        standard_transformations,
    )

    z = sympy.Symbol("z")
    trans = standard_transformations + (implicit_multiplication, convert_xor)
    local = {"z": z, "I": sympy.I, "i": sympy.I, "j": sympy.I}
    try:
        parsed = parse_expr(expr, local_dict=local, transformations=trans)
    except (SyntaxError, TypeError, sympy.SympifyError) as exc:
        raise ValueError(f"cannot parse rational spec {expr!r}") from exc
    if parsed.free_symbols - {z}:
        raise ValueError(f"rational spec {expr!r} may only use the variable z")
    num, den = sympy.fraction(sympy.together(parsed))
    num_s = str(num)
    try:
        num_c = [complex(c) for c in sympy.Poly(num, z).all_coeffs()[::-1]]
    except sympy.PolynomialError as exc:
        raise ValueError(f"numerator {num_s!r} is not a polynomial in z") from exc
    lead = 1 + 0j
    roots, mult = [], []
    for factor in sympy.Mul.make_args(den):
        base, power = factor, 1
        if isinstance(factor, sympy.Pow):
            base, power = factor.args
            if not (power.is_integer and power > 0):
                raise ValueError(f"denominator factor {factor} needs a positive integer power")
            power = int(power)
        if not base.has(z):
            lead *= complex(sympy.N(base)) ** power
            continue
        p = sympy.Poly(base, z)
        if p.degree() != 1:
            raise ValueError(
                f"denominator factor {base} is not linear in z; give the denominator "
                "as a product of linear factors"
            )
        c1, c0 = (complex(c) for c in p.all_coeffs())
        lead *= c1**power
        roots.append(-c0 / c1)
        mult.append(power)
    return rational(num_c, roots, mult, lead, label=f"rational:{expr}")


def parse_function(spec: str) -> HoloFn:
    """Build a registry function from a CLI spec string.

    Accepted forms::

        exp | sin
        poly:c0,c1,...                      ascending coefficients
        one_over_z_minus:a
        rational:NUM/DEN                    e.g. rational:1/(z(z-1))
        rational:num=c0,c1;roots=r1,r2[;mult=m1,m2][;lead=c]
    """
    name, _, arg = spec.partition(":")
    name = name.strip()
    if name not in REGISTRY:
        raise ValueError(f"unknown function {name!r}; choose from {sorted(REGISTRY)}")
    if name in ("exp", "sin"):
        if arg.strip():
            raise ValueError(f"{name} takes no parameters")
        return REGISTRY[name]()
    if name == "poly":
        return poly(_parse_list(arg))
    if name == "one_over_z_minus":
        return one_over_z_minus(_parse_complex(arg) if arg.strip() else 0j)
    if "=" in arg:
        kw = dict(part.split("=", 1) for part in arg.split(";") if part.strip())
        unknown = set(kw) - {"num", "roots", "mult", "lead"}
        if unknown:
            raise ValueError(f"unknown rational parameters {sorted(unknown)}")
        return rational(
            _parse_list(kw.get("num", "1")),
            _parse_list(kw.get("roots", "")),
            [int(m) for m in kw["mult"].split(",")] if "mult" in kw else None,
            _parse_complex(kw.get("lead", "1")),
            label=spec,
        )
    return _sympy_rational(re.sub(r"\s+", "", arg))
