"""``qgevrey`` command line.

Exit codes: 0 pass, 1 verdict fail, 2 input error, 3 numerical failure.
Every JSON report carries the configuration it ran with.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from .config import ENV_VAR, Config
from .continuation import SurfacePoint, make_continuation
from .exceptions import GrowthError
from .fps import FormalSeries, mborel, qborel
from .growth import PositiveSequence, parse_generator
from .qlaplace import RayDomain, asymptotic_check, q_laplace, q_sum
from .theta import ThetaParams, spiral_clearance, theta_eval
from .xnum import LogComplex

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULT_GRID = "0.01:0.1:6:0.9:7"
CSV_FIELDS = ("abs", "arg", "re", "im", "quad_nodes")


class InputError(Exception):
    """Bad command-line input (exit code 2)."""


def _lc_json(v: LogComplex) -> dict:
    out = v.to_json()
    try:
        c = v.to_complex()
        out.update(re=c.real, im=c.imag)
    except (OverflowError, ArithmeticError):
        out.update(re=None, im=None)
    return out


def _emit(report: dict, cfg: Config, path=None):
    report = {**report, "config": cfg.to_json(), "version": __version__}
    text = json.dumps(report, indent=2, default=_json_default)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, LogComplex):
        return o.to_json()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _point(args) -> SurfacePoint:
    if args.z_logmag is not None:
        return SurfacePoint(args.z_logmag, args.z_arg or 0.0)
    if args.z_re is None and args.z_im is None:
        raise InputError("give --z-re/--z-im or --z-logmag/--z-arg")
    return SurfacePoint.from_complex(complex(args.z_re or 0.0, args.z_im or 0.0))


def _add_point_args(p, logmag=True):
    p.add_argument("--z-re", type=float)
    p.add_argument("--z-im", type=float)
    if logmag:
        p.add_argument("--z-logmag", type=float, help="log|z| (point on the log surface)")
        p.add_argument("--z-arg", type=float, help="arg z, not reduced mod 2 pi")


def _load_sequence(args):
    if args.sequence:
        return PositiveSequence.load(args.sequence)
    if args.generator:
        g, params = parse_generator(args.generator)
        return PositiveSequence.generate(g, args.n_terms, q=args.q, **params)
    raise InputError("give --sequence FILE or --generator NAME")


def parse_grid(text: str, gamma: float):
    """``RMIN:RMAX:NR:SPAN:NA``: geometric radii, ``NA`` arguments in ``gamma +- SPAN``."""
    try:
        rmin, rmax, nr, span, na = text.split(":")
        radii = np.geomspace(float(rmin), float(rmax), int(nr))
        args = gamma + np.linspace(-float(span), float(span), int(na))
    except ValueError as e:
        raise InputError(f"bad grid {text!r}: expected RMIN:RMAX:NR:SPAN:NA") from e
    if not (0 < float(rmin) <= float(rmax)):
        raise InputError("grid radii must satisfy 0 < RMIN <= RMAX")
    return radii, args


# commands -------------------------------------------------------------

def cmd_theta(args, cfg):
    par = ThetaParams(args.q, args.s, cfg.theta_tol)
    z = _point(args).to_logcomplex()
    val, info = theta_eval(z, par, args.method or cfg.theta_method, full_output=True)
    _emit({"command": "theta", "q": args.q, "s": args.s, "z": _lc_json(z), "value": _lc_json(val),
           "clearance": spiral_clearance(z, par), "info": info}, cfg, args.out)
    return EXIT_PASS


def cmd_borel(args, cfg):
    u = FormalSeries.load(args.series)
    if args.op == "qborel":
        if args.q is None or args.s is None:
            raise InputError("qborel needs --q and --s")
        v = qborel(u, args.q, args.s)
    else:
        v = mborel(u, _load_sequence(args))
    if args.out:
        v.dump(args.out)
    else:
        print(json.dumps(v.to_json()))
    return EXIT_PASS


def _continuation(args):
    series = FormalSeries.load(args.series) if getattr(args, "series", None) else None
    return make_continuation(args.kind, args.q, series, args.num_deg, args.den_deg, args.scale)


def cmd_continue(args, cfg):
    f = _continuation(args)
    pt = _point(args)
    val = f(pt)
    _emit({"command": "continue", "kind": f.kind, "z": [pt.log_mag, pt.arg], "value": _lc_json(val),
           "certificate": f.certificate.to_json(), "function": f.describe()}, cfg, args.out)
    return EXIT_PASS


def cmd_laplace(args, cfg):
    pt = _point(args)
    delta = args.delta or cfg.delta
    if args.series and args.strategy:
        sf = q_sum(FormalSeries.load(args.series), args.q, args.s, args.gamma, args.strategy,
                   delta, cfg.half_opening, cfg.tol)
        f = sf.continuation
    else:
        f = _continuation(args)
    val, info = q_laplace(f, RayDomain(args.gamma, delta, args.q, args.s), pt, cfg.tol,
                          full_output=True)
    _emit({"command": "laplace", "kind": f.kind, "q": args.q, "s": args.s, "gamma": args.gamma,
           "z": [pt.log_mag, pt.arg], "value": _lc_json(val), "quadrature": info}, cfg, args.out)
    return EXIT_PASS


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for r in rows:
            c = r["value"].to_complex()
            w.writerow([repr(r["abs"]), repr(r["arg"]), repr(c.real), repr(c.imag), r["nodes"]])


def read_samples_csv(path):
    """Rows of a ``qsum`` CSV as ``(SurfacePoint, complex)`` pairs."""
    pts, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                pts.append(SurfacePoint(math.log(float(row["abs"])), float(row["arg"])))
                vals.append(complex(float(row["re"]), float(row["im"])))
            except (KeyError, TypeError, ValueError) as e:
                raise InputError(f"{path}: bad row {row}: expected columns {CSV_FIELDS[:4]}") from e
    if not pts:
        raise InputError(f"{path}: no samples")
    return pts, vals


def cmd_qsum(args, cfg):
    u = FormalSeries.load(args.series)
    sweep = tuple(args.sweep or ())
    sf = q_sum(u, args.q, args.s, args.gamma, args.strategy, args.delta or cfg.delta,
               cfg.half_opening, cfg.tol, sweep)
    radii, angles = parse_grid(args.grid, args.gamma)
    rows = sf.sample(radii, angles)
    if not rows:
        raise InputError("no admissible grid point (check radius and clearance)")
    _write_csv(args.out_csv, rows)
    n_max = cfg.n_max if args.n_max is None else args.n_max
    verdict = asymptotic_check(rows, u, args.q, args.s, n_max, log_A_cap=cfg.log_A_cap)
    _emit({"command": "qsum", "continuation": sf.continuation.kind, "radius": sf.radius,
           "prefix_error": sf.prefix_error, "samples": len(rows), "csv": args.out_csv,
           "verdict": verdict.to_json()}, cfg, args.out)
    return EXIT_PASS if verdict.passed else EXIT_FAIL


def cmd_asympt(args, cfg):
    pts, vals = read_samples_csv(args.samples)
    u = FormalSeries.load(args.coeffs)
    n_max = cfg.n_max if args.n_max is None else args.n_max
    verdict = asymptotic_check(pts, u, args.q, args.s, n_max, values=vals, log_A_cap=cfg.log_A_cap)
    _emit({"command": "asympt", "samples": len(pts), "verdict": verdict.to_json()}, cfg, args.out)
    return EXIT_PASS if verdict.passed else EXIT_FAIL


def cmd_classify(args, cfg):
    from .classify import classify
    seq = _load_sequence(args)
    q = args.q if args.q is not None else seq.q
    if q is None:
        raise InputError("give --q (the sequence file has none)")
    report = classify(seq, q, cfg.tol_s, cfg.residual_cap)
    _emit({"command": "classify", **report}, cfg, args.out)
    return EXIT_PASS if report["preserves_q_gevrey_asymptotics"] else EXIT_FAIL


def cmd_verify(args, cfg):
    from .verify import SUITES, run_suite
    if args.suite != "all" and args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)} or 'all'")
    report = run_suite(args.suite, cfg)
    _emit({"command": "verify", **report}, cfg, args.out)
    return EXIT_PASS if report["passed"] else EXIT_FAIL


# parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qgevrey", description="q-Gevrey calculus toolkit")
    ap.add_argument("--config", help=f"JSON config file (default: ${ENV_VAR})")
    ap.add_argument("--tol", type=float, help="quadrature tolerance")
    ap.add_argument("--residual-cap", type=float)
    ap.add_argument("--tol-s", type=float)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theta", help="evaluate the Jacobi theta function")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--method", choices=("series", "product"))
    _add_point_args(p)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("borel", help="apply a formal Borel operator to a series file")
    p.add_argument("--series", required=True)
    p.add_argument("--op", choices=("qborel", "mborel"), default="qborel")
    p.add_argument("--q", type=float)
    p.add_argument("--s", type=float)
    p.add_argument("--sequence", help="sequence JSON for mborel")
    p.add_argument("--generator", help="named sequence for mborel, e.g. GEOMETRIC(A=3)")
    p.add_argument("--n-terms", type=int, default=301)
    p.set_defaults(func=cmd_borel)

    for name, func, helptext in (("continue", cmd_continue, "evaluate a continuation"),
                                 ("laplace", cmd_laplace, "q-Laplace transform at one point")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--kind", default="geometric",
                       help="geometric|qexp|qfact|cbinom|cbinom_inv|polynomial|pade")
        p.add_argument("--q", type=float, default=2.0)
        p.add_argument("--series", help="series JSON (pade, polynomial, or laplace --strategy)")
        p.add_argument("--num-deg", type=int, default=6)
        p.add_argument("--den-deg", type=int, default=6)
        p.add_argument("--scale", type=float, default=1.0)
        _add_point_args(p)
        if name == "laplace":
            p.add_argument("--s", type=float, required=True)
            p.add_argument("--gamma", type=float, default=math.pi)
            p.add_argument("--delta", type=float)
            p.add_argument("--strategy", help="with --series: q-Borel transform first")
        p.set_defaults(func=func)

    p = sub.add_parser("qsum", help="q-sum a series on a grid and check its expansion")
    p.add_argument("--series", required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--gamma", type=float, default=math.pi)
    p.add_argument("--strategy", default="CLOSED_FORM(geometric)")
    p.add_argument("--grid", default=DEFAULT_GRID, help="RMIN:RMAX:NR:SPAN:NA")
    p.add_argument("--delta", type=float)
    p.add_argument("--sweep", type=float, nargs="*", help="extra directions")
    p.add_argument("--n-max", type=int)
    p.add_argument("--out-csv", default="qsum_samples.csv")
    p.set_defaults(func=cmd_qsum)

    p = sub.add_parser("classify", help="preservation verdicts for a sequence")
    p.add_argument("--sequence")
    p.add_argument("--generator")
    p.add_argument("--q", type=float)
    p.add_argument("--n-terms", type=int, default=301)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("asympt", help="check a sampled function against a series")
    p.add_argument("--samples", required=True, help="CSV with abs,arg,re,im columns")
    p.add_argument("--coeffs", required=True, help="series JSON")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--n-max", type=int)
    p.set_defaults(func=cmd_asympt)

    p = sub.add_parser("verify", help="run a self-check suite")
    p.add_argument("suite", help="qcore|theta|laplace|fps|growth|continuation|classify|all")
    p.set_defaults(func=cmd_verify)

    for sp in sub.choices.values():
        if not any(a.dest == "out" for a in sp._actions):
            sp.add_argument("--out", help="write the JSON report here instead of stdout")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = Config.load(args.config).replace(tol=args.tol, residual_cap=args.residual_cap,
                                               tol_s=args.tol_s)
        return args.func(args, cfg)
    except (ArithmeticError, GrowthError) as e:
        print(f"qgevrey: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, OSError, ValueError, KeyError, TypeError) as e:
        print(f"qgevrey: input error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
