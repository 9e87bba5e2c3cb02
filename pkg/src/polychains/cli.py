"""Command-line front end.

Exit status: 0 when a verification passes (or a command succeeds), 1 when a
verification fails or a quadrature does not converge, 2 for malformed input
or a violated precondition.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import tomli

from . import closure, density, generators, render, residue, winding
from .chains import Chain1, Chain2, mass
from .errors import ChainError, PreconditionError, QuadratureError
from .forms import QuadratureSpec, integrate_form, parse_function
from .io import read_chain, write_chain

log = logging.getLogger("polychains")

EXIT_PASS, EXIT_FAIL, EXIT_PRECONDITION = 0, 1, 2


class UsageError(Exception):
    pass


def _floats(text: str, n: int, what: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in str(text).split(","))
    except ValueError:
        vals = ()
    if len(vals) != n or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"{what} must be {n} comma-separated finite numbers, got {text!r}")
    return vals


def _point(text: str) -> tuple[float, float]:
    return _floats(text, 2, "point")


def _window(text: str) -> tuple[float, float, float, float]:
    w = _floats(text, 4, "window")
    if not (w[2] > w[0] and w[3] > w[1]):
        raise argparse.ArgumentTypeError(f"window {text!r} must satisfy x0 < x1 and y0 < y1")
    return w


def _radii(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"radii must be comma-separated numbers, got {text!r}")


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(residue._jsonable(obj), sort_keys=True, allow_nan=False) + "\n")


def _chain1(path) -> Chain1:
    c = read_chain(path)
    if not isinstance(c, Chain1):
        raise UsageError(f"{path}: field 'dim' must be 1 for this command")
    return c


def _chain2(path) -> Chain2:
    c = read_chain(path)
    if not isinstance(c, Chain2):
        raise UsageError(f"{path}: field 'dim' must be 2 for this command")
    return c


def _quad(args) -> QuadratureSpec:
    tol = getattr(args, "quad_tol", None)
    if tol is None:
        return QuadratureSpec()
    return QuadratureSpec(atol=tol, rtol=min(tol, QuadratureSpec().rtol))


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    kind = args.generator
    if kind == "circle":
        chain = generators.circle_chain(args.center, args.r, args.n, args.w)
    elif kind == "koch":
        chain = generators.koch_chain(args.level)
    elif kind == "staircase":
        chain = generators.staircase_chain(args.steps)
    elif kind == "random":
        chain, K0 = generators.random_closed_chain(args.seed, args.n, args.window)
        if args.k0:
            write_chain(K0, args.k0)
    elif kind == "vector-field":
        if args.field == "rotation":
            fld = generators.rotation_field(args.inner, args.outer)
        else:
            fld = generators.constant_field(*args.v)
        chain = generators.vector_field_chain(fld, args.window, args.h)
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(f"unknown generator {kind}")
    write_chain(chain, args.output)
    return EXIT_PASS


def cmd_integrate(args) -> int:
    J = _chain1(args.chain)
    f = parse_function(args.function)
    value = integrate_form(J, f, _quad(args))
    _emit({"function": args.function, "value": value, "mass": mass(J)})
    return EXIT_PASS


def cmd_winding(args) -> int:
    J = _chain1(args.chain)
    val = winding.winding_number(J, args.z) if len(J) else 0j
    if args.json:
        _emit({"z": list(args.z), "winding": val})
    else:
        sys.stdout.write(repr(val.real + 0.0) + "\n")
    return EXIT_PASS


def cmd_winding_map(args) -> int:
    J = _chain1(args.chain)
    cmap = winding.component_map(J, (args.resolution, args.resolution), args.delta)
    stats = winding.winding_field(J, cmap, args.samples)
    Path(args.output).write_text(render.winding_svg(cmap, stats))
    if args.csv:
        Path(args.csv).write_text(winding.field_csv(stats))
    worst = max((s.spread for s in stats), default=0.0)
    far = next((abs(s.mean) for s in stats if s.unbounded), 0.0)
    _emit({"components": cmap.n_components, "max_spread": worst, "unbounded_mean_abs": far})
    return EXIT_PASS


def cmd_close(args) -> int:
    K = _chain1(args.chain)
    params = closure.ClosureParams(args.z, args.eps, args.j, args.theta_max, args.ngon)
    P, rep = closure.close_chain(K, params)
    if args.output:
        write_chain(P, args.output)
    _emit(rep.to_dict())
    return EXIT_PASS


def cmd_density(args) -> int:
    K = _chain2(args.chain)
    if args.window:
        grid = density.density_raster(K, args.window, (args.resolution, args.resolution))
        if args.csv:
            Path(args.csv).write_text(render.raster_csv(grid, args.window))
        if args.svg:
            Path(args.svg).write_text(render.raster_svg(grid, args.window))
    if args.z is not None:
        res = density.signed_density(K, args.z, args.eps0)
        _emit({"z": list(args.z), "density": res.value, "radii": res.radii, "raw": res.raw,
               "perturbed": res.perturbed})
    return EXIT_PASS


def cmd_verify(args) -> int:
    J = _chain1(args.chain)
    K = _chain2(args.bounding) if args.bounding else None
    q = _quad(args)
    thm = args.theorem
    if thm != "density-winding" and not args.function:
        raise UsageError(f"verify {thm} needs -f/--function")
    if thm in ("cif", "density-winding") and args.z is None:
        raise UsageError(f"verify {thm} needs -z")
    if thm == "cit":
        rep = residue.verify_cit(J, parse_function(args.function), q, K, args.hull_margin)
    elif thm == "cif":
        rep = residue.verify_cif(J, parse_function(args.function), args.z, q, K, args.hull_margin)
    elif thm == "residue":
        rep = residue.verify_residue(J, parse_function(args.function), args.radii, q, args.ngon, K)
    else:
        rep = residue.verify_density_winding(J, args.z, args.eps0, K)
    _emit(rep.to_dict())
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_render(args) -> int:
    chain = read_chain(args.chain)
    Path(args.output).write_text(render.chain_svg(chain, args.width))
    return EXIT_PASS


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_PRECONDITION)


def build_parser() -> tuple[argparse.ArgumentParser, list[argparse.ArgumentParser]]:
    # suppressed defaults let these flags appear before or after the subcommand
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="parallelism cap (accepted; work is single-threaded)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed forwarded to random generators")
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="TOML file whose keys mirror the long flag names")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    top = _Parser(prog="polychains", description="Polyhedral chains and Cauchy theorems in the plane.",
                  parents=[common])
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)
    parsers = [top]

    gen = sub.add_parser("gen", help="write a generated chain", parents=[common])
    gsub = gen.add_subparsers(dest="generator", required=True, parser_class=_Parser)
    parsers.append(gen)

    def gen_parser(name, help_):
        p = gsub.add_parser(name, help=help_, parents=[common])
        p.add_argument("-o", "--output", required=True)
        p.set_defaults(func=cmd_gen)
        parsers.append(p)
        return p

    p = gen_parser("circle", "regular polygon")
    p.add_argument("--center", type=_point, default=(0.0, 0.0))
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--w", type=float, default=1.0)
    p = gen_parser("koch", "Koch snowflake prefix")
    p.add_argument("--level", type=int, default=3)
    p = gen_parser("staircase", "stepped pyramid loop")
    p.add_argument("--steps", type=int, default=8)
    p = gen_parser("random", "boundary of random weighted triangles")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--window", type=_window, default=(-1.0, -1.0, 1.0, 1.0))
    p.add_argument("--k0", default=None, help="also write the bounding 2-chain here")
    p = gen_parser("vector-field", "smeared vector field")
    p.add_argument("--field", choices=["rotation", "constant"], default="rotation")
    p.add_argument("--h", type=float, default=0.02)
    p.add_argument("--window", type=_window, default=(-2.0, -2.0, 2.0, 2.0))
    p.add_argument("--inner", type=float, default=1.0)
    p.add_argument("--outer", type=float, default=2.0)
    p.add_argument("--v", type=_point, default=(1.0, 0.0), help="vector of the constant field")

    def with_chain(name, func, help_):
        p = sub.add_parser(name, help=help_, parents=[common])
        p.add_argument("-c", "--chain", required=True)
        p.set_defaults(func=func)
        parsers.append(p)
        return p

    p = with_chain("integrate", cmd_integrate, "integrate f(z) dz over a 1-chain")
    p.add_argument("-f", "--function", required=True)
    p.add_argument("-q", "--quad-tol", type=float, default=None)

    p = with_chain("winding", cmd_winding, "winding number at a point")
    p.add_argument("-z", type=_point, required=True)
    p.add_argument("--json", action="store_true")

    p = with_chain("winding-map", cmd_winding_map, "component winding map")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--csv", default=None)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--samples", type=int, default=50)

    p = with_chain("close", cmd_close, "close a chain away from a ball")
    p.add_argument("-z", type=_point, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("-j", type=int, default=1)
    p.add_argument("--theta-max", type=float, default=math.pi / 4)
    p.add_argument("--ngon", type=int, default=64)
    p.add_argument("-o", "--output", default=None)

    p = with_chain("density", cmd_density, "signed density of a 2-chain")
    p.add_argument("-z", type=_point, default=None)
    p.add_argument("--eps0", type=float, default=None)
    p.add_argument("--window", type=_window, default=None)
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--csv", default=None)
    p.add_argument("--svg", default=None)

    p = with_chain("verify", cmd_verify, "check CIT, CIF, residue theorem or density-winding")
    p.add_argument("theorem", choices=["cit", "cif", "residue", "density-winding"])
    p.add_argument("-f", "--function", default=None)
    p.add_argument("-z", type=_point, default=None)
    p.add_argument("-q", "--quad-tol", type=float, default=None)
    p.add_argument("--radii", type=_radii, default=None)
    p.add_argument("--ngon", type=int, default=64)
    p.add_argument("--eps0", type=float, default=None)
    p.add_argument("--hull-margin", type=float, default=0.0)
    p.add_argument("-K", "--bounding", default=None, help="explicit 2-chain with boundary J")

    p = with_chain("render", cmd_render, "SVG drawing of a chain")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--width", type=int, default=600)

    return top, parsers


def _load_config(path: str, command: str | None) -> dict:
    with open(path, "rb") as fh:
        data = tomli.load(fh)
    flat = {k: v for k, v in data.items() if not isinstance(v, dict)}
    if command and isinstance(data.get(command), dict):
        flat.update(data[command])
    return {k.replace("-", "_"): v for k, v in flat.items()}


_POINT_KEYS = {"z": _point, "center": _point, "v": _point, "window": _window}


_COMMON_DEFAULTS = {"threads": None, "seed": 0, "config": None, "verbose": False}


def _fill(args: argparse.Namespace) -> argparse.Namespace:
    for k, v in _COMMON_DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    return args


def parse_args(argv) -> argparse.Namespace:
    top, parsers = build_parser()
    args = _fill(top.parse_args(argv))
    if not args.config:
        return args
    cfg = _load_config(args.config, args.command)
    for k, conv in _POINT_KEYS.items():
        if isinstance(cfg.get(k), (list, str)):
            val = cfg[k]
            cfg[k] = conv(",".join(map(str, val)) if isinstance(val, list) else val)
    for p in parsers:
        dests = {a.dest for a in p._actions}
        p.set_defaults(**{k: v for k, v in cfg.items() if k in dests})
    return _fill(top.parse_args(argv))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (OSError, tomli.TOMLDecodeError, argparse.ArgumentTypeError) as exc:
        sys.stderr.write(f"error: config: {exc}\n")
        return EXIT_PRECONDITION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (PreconditionError, ChainError, UsageError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PRECONDITION
    except QuadratureError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
