"""Command-line front end.

Subcommands: ``check``, ``scan``, ``solve`` and ``repro``. Exit codes:

* 0  success (condition holds on samples / solver converged / claims match)
* 2  usage error
* 3  ``check`` found a counterexample
* 4  ``solve`` did not converge
* 5  ``repro`` found a claim whose verdict differs from the expected one
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from pathlib import Path

from .conditions import FORMS, ConditionSpec, curve_to_csv, default_radius_max, gap_curve, ratio_curve, verify_condition
from .errors import FixpointError
from .mappings import CATALOG, get_mapping
from .repro import EXAMPLES, run_repro
from .solver import find_fixed_point, invariant_ball, verify_invariance
from .spaces import parse_number, parse_point

EXIT_OK, EXIT_USAGE, EXIT_REFUTED, EXIT_NO_CONVERGENCE, EXIT_MISMATCH = 0, 2, 3, 4, 5

_EXP = re.compile(r"^\s*(?:e\^|exp\()\s*([-+0-9.eE]+)\s*\)?\s*$")


class UsageError(Exception):
    pass


def number(text: str):
    """Numeric flag value; also accepts ``e^k`` and ``exp(k)``."""
    m = _EXP.match(text)
    if m:
        return math.exp(float(m.group(1)))
    try:
        return parse_number(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def default_seed() -> int:
    env = os.environ.get("FIXPOINT_SEED")
    return int(env) if env else 42


def _emit(text: str, path):
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _mapping(name):
    try:
        return get_mapping(name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _point(m, text, flag):
    try:
        p = parse_point(m.domain, text)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{flag}: {exc}") from None
    if not m.domain.contains(p):
        raise UsageError(f"{flag}: {text} is outside the domain of {m.name}")
    return p


def _base(m, args, prefer):
    order = ("x0", "x1") if prefer == "x0" else ("x1", "x0")
    for flag in order:
        text = getattr(args, flag, None)
        if text is not None:
            return _point(m, text, f"--{flag}")
    if m.special_points:
        return m.special_points[0]
    raise UsageError(f"--{prefer} is required")


def cmd_check(args) -> int:
    m = _mapping(args.map)
    cid = args.cond.upper()
    if cid not in FORMS:
        raise UsageError(f"unknown condition {args.cond!r}; choose from C1..C6")
    base = _base(m, args, "x1" if cid in ("C1", "C3", "C5") else "x0")
    try:
        spec = ConditionSpec(cid, args.eta, r=args.r, lam=args.lam, base=base)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rmax = args.rmax if args.rmax is not None else default_radius_max(args.eta)
    report = verify_condition(m, spec, args.samples, args.seed, annulus=(args.eta, rmax))
    _emit(_dump(report.to_dict()), args.out)
    return EXIT_OK if report.holds else EXIT_REFUTED


def _radii(args):
    if args.radii:
        return [number(r) for r in args.radii.split(",")]
    if not args.rmin > 0 or args.rmax < args.rmin:
        raise UsageError("need 0 < rmin <= rmax")
    out, k = [], 0
    while True:
        r = args.rmin * 10.0 ** (k / args.per_decade)
        if r > args.rmax * (1 + 1e-12):
            return out
        out.append(r)
        k += 1


def cmd_scan(args) -> int:
    m = _mapping(args.map)
    x = _base(m, args, "x1" if args.kind == "ratio" else "x0")
    fn = ratio_curve if args.kind == "ratio" else gap_curve
    try:
        curve = fn(m, x, _radii(args), args.band, args.samples, args.seed)
    except (ValueError, FixpointError) as exc:
        raise UsageError(str(exc)) from None
    _emit(curve_to_csv(curve), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    m = _mapping(args.map)
    start = _point(m, args.start, "--start")
    payload = {"mapping": m.name}
    if args.x0 is not None or args.eta is not None:
        if args.x0 is None or args.eta is None:
            raise UsageError("--x0 and --eta go together")
        ball = invariant_ball(m, _point(m, args.x0, "--x0"), args.eta)
        rep = verify_invariance(m, ball, args.samples, args.seed)
        payload["ball"] = {"radius": ball.radius, "start_inside": ball.contains(start), "invariance": rep.to_dict()}
    try:
        result = find_fixed_point(
            m, start, method=args.method, tol=args.tol, max_iter=args.max_iter, alpha=args.alpha
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    payload.update(result.to_dict())
    _emit(_dump(payload), args.out)
    if args.trace:
        _emit(result.trace.to_csv(), args.trace)
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def cmd_repro(args) -> int:
    examples = EXAMPLES if args.example == "all" else (args.example,)
    manifest, files = run_repro(examples, samples=args.samples, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(_dump(manifest))
    for name, text in sorted(files.items()):
        (out / name).write_text(text)
    for c in manifest["claims"]:
        status = "ok" if c["match"] else "MISMATCH"
        print(f"example {c['example']}: {c['claim']:<10} expected {c['expected']:<16} observed {c['observed']:<16} {status}")
    if not manifest["all_match"]:
        bad = [f"{c['example']} {c['claim']}" for c in manifest["claims"] if not c["match"]]
        print("failing claims: " + "; ".join(bad), file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fixpoint", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    maps = sorted(CATALOG)

    def common(sp, samples):
        sp.add_argument("--map", required=True, help=f"one of {', '.join(maps)}")
        sp.add_argument("--samples", type=int, default=samples)
        sp.add_argument("--seed", type=int, default=None, help="default 42 or $FIXPOINT_SEED")
        sp.add_argument("--out", default=None, help="output file (default stdout)")

    c = sub.add_parser("check", help="sampled check of one condition")
    common(c, 10_000)
    c.add_argument("--cond", required=True, help="C1..C6")
    c.add_argument("--x0", default=None, help="base point (C2, C4, C6)")
    c.add_argument("--x1", default=None, help="base point (C1, C3, C5)")
    c.add_argument("--eta", type=number, required=True)
    c.add_argument("--r", type=number, default=None)
    c.add_argument("--lambda", dest="lam", type=number, default=None)
    c.add_argument("--rmax", type=number, default=None)
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("scan", help="ratio or gap curve as CSV")
    common(s, 10_000)
    s.add_argument("--kind", choices=("ratio", "gap"), required=True)
    s.add_argument("--x0", default=None)
    s.add_argument("--x1", default=None)
    s.add_argument("--rmin", type=number, default=10.0)
    s.add_argument("--rmax", type=number, default=1e6)
    s.add_argument("--per-decade", type=int, default=1)
    s.add_argument("--radii", default=None, help="comma-separated radii, overrides rmin/rmax")
    s.add_argument("--band", type=number, default=10.0)
    s.set_defaults(func=cmd_scan)

    v = sub.add_parser("solve", help="fixed-point search")
    common(v, 10_000)
    v.add_argument("--start", required=True)
    v.add_argument("--method", choices=("picard", "averaged", "resolvent"), default="picard")
    v.add_argument("--alpha", type=number, default=0.5)
    v.add_argument("--tol", type=number, default=1e-9)
    v.add_argument("--max-iter", type=int, default=10_000)
    v.add_argument("--x0", default=None, help="invariant ball center")
    v.add_argument("--eta", type=number, default=None, help="invariant ball threshold")
    v.add_argument("--trace", default=None, help="trace CSV path")
    v.set_defaults(func=cmd_solve)

    r = sub.add_parser("repro", help="reproduce the counterexample suite")
    r.add_argument("--example", choices=EXAMPLES + ("all",), default="all")
    r.add_argument("--out", default="repro_bundle")
    r.add_argument("--samples", type=int, default=2000)
    r.add_argument("--seed", type=int, default=None)
    r.set_defaults(func=cmd_repro)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = default_seed()
    try:
        return args.func(args)
    except (UsageError, FixpointError) as exc:
        print(f"fixpoint: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
