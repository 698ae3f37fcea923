"""Command-line front end: ``gm2 <command> [options] --out DIR``.

Every command writes ``<command>.json`` (plus CSV plot data where it makes
sense) into the output directory.  Library errors exit with the code attached
to their class in :mod:`gm2.errors`.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import gauss_geom as gg
from . import minkowski_solve as ms
from . import phase_plane as pp
from . import plotdata
from . import scalar_core as sc
from . import theta as th
from .errors import GM2Error, InvalidPair, IoError, ParseError

log = logging.getLogger("gm2")


def _load_json(path) -> dict:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {p}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _qcfg(args) -> th.QuadratureConfig:
    return th.QuadratureConfig(scheme=args.scheme, rel_tol=args.rel_tol)


def cmd_constant_solutions(args, out: Path):
    res = sc.constant_solutions(args.C if args.C is not None else args.c,
                                normalized=args.C is None)
    d = res.to_dict()
    if args.C is not None:
        d["C"] = args.C
    plotdata.write_json(out / "constant-solutions.json", d)
    return d


def cmd_measure(args, out: Path):
    P = gg.polygon_from_json(_load_json(args.polygon))
    m = gg.boundary_measure_polygon(P)
    plotdata.write_json(out / "measure.json", m.to_dict())
    plotdata.write_csv(out / "measure.csv",
                       {"angle": [a for a, _ in m.atoms], "weight": [w for _, w in m.atoms]})
    return m.to_dict()


def cmd_density(args, out: Path):
    h = gg.support_from_json(_load_json(args.support))
    dens = gg.density_smooth(h)
    d = {"n": h.n, "density": dens, "total": gg.total_measure_smooth(h)}
    plotdata.write_json(out / "density.json", d)
    plotdata.write_csv(out / "density.csv", {"theta": h.angles, "h": h.values, "density": dens})
    return d


def cmd_theta(args, out: Path):
    if args.r is None:
        pair = sc.good_pair_from_h0(args.c, args.h0)
        if pair is None:
            raise InvalidPair(f"h0={args.h0!r} admits no good pair w.r.t. c={args.c!r}")
    else:
        pair = sc.GoodPair(args.c, args.h0, args.r, sc.phi(args.c, args.h0))
    res = th.theta_eval(pair, _qcfg(args))
    d = {"pair": pair.to_dict(), "theta": res.value, "est_error": res.est_error,
         "endpoint_flags": list(res.endpoint_flags),
         "small_r_limit": th.theta_small_r_limit(args.c)}
    if args.shoot and not res.divergent:
        d["theta_shoot"] = pp.half_period_shoot(pair)
    plotdata.write_json(out / "theta.json", d)
    return d


def cmd_scan_theta(args, out: Path):
    reports = [th.pi_over_k_emptiness(c, args.n, args.k_max, _qcfg(args)) for c in args.c]
    d = {"scans": [r.to_dict() for r in reports]}
    plotdata.write_json(out / "scan-theta.json", d)
    plotdata.emit_plot_data([r.scan for r in reports], out, "theta_surface")
    return d


def cmd_phase_portrait(args, out: Path):
    pair = sc.good_pair_from_h0(args.c, args.h0)
    if args.span is not None:
        span = args.span
    elif pair is not None:
        span = 2.0 * pp.half_period_shoot(pair, args.tol)
    else:
        span = 2.0 * math.pi
    traj = pp.integrate(args.c, pp.OdeState(0.0, args.h0, 0.0), span, args.tol)
    d = {"c": args.c, "h0": args.h0, "span": span, "E0": traj.E0,
         "max_drift": traj.max_drift, "final": vars(traj.final),
         "pair": pair.to_dict() if pair else None,
         "critical_points": pp.critical_points(traj)}
    plotdata.write_json(out / "phase-portrait.json", d)
    plotdata.emit_plot_data(traj, out, "trajectory")
    return d


def cmd_search_periodic(args, out: Path):
    rep = pp.search_periodic(args.c, args.n, args.k_max, _qcfg(args))
    d = rep.to_dict()
    plotdata.write_json(out / "search-periodic.json", d)
    return d


def cmd_solve(args, out: Path):
    raw = ms.f_from_json(_load_json(args.f), args.n)
    f = ms.validate_f(raw, mollify=args.mollify)
    cfg = ms.SolverConfig(newton_tol=args.newton_tol)
    res = ms.solve_branch(f, args.branch, cfg)
    d = res.to_dict()
    plotdata.write_json(out / "solution.json", d)
    plotdata.emit_plot_data(res, out, "solution", f=f)
    return d


def cmd_iso_check(args, out: Path):
    bodies = []
    if args.body:
        obj = _load_json(args.body)
        bodies.append(gg.polygon_from_json(obj) if "vertices" in obj else gg.support_from_json(obj))
    if args.random:
        rng = np.random.default_rng(args.seed)
        bodies.extend(gg.random_symmetric_polygon(rng) for _ in range(args.random))
    if not bodies:
        raise ParseError("iso-check needs --body or --random")
    reps = [gg.isoperimetric_check(b) for b in bodies]
    d = {"reports": [r.to_dict() for r in reps], "all_hold": all(r.holds for r in reps)}
    plotdata.write_json(out / "iso-check.json", d)
    plotdata.write_csv(out / "iso-check.csv", {
        "gamma2": [r.gamma for r in reps], "perimeter": [r.perimeter for r in reps],
        "bound": [r.bound for r in reps]})
    return d


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gm2", description=__doc__.splitlines()[0])
    p.add_argument("--out", default=".", help="output directory (created if missing)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def quad(sp):
        sp.add_argument("--scheme", choices=["trig", "de"], default="trig")
        sp.add_argument("--rel-tol", type=float, default=1e-12)

    s = sub.add_parser("constant-solutions", help="classify the disk solutions for constant data")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--C", type=float, help="density constant C (multiplied by 2 pi)")
    g.add_argument("--c", type=float, help="normalised constant c = 2 pi C")
    s.set_defaults(func=cmd_constant_solutions)

    s = sub.add_parser("measure", help="Gaussian surface-area measure of a polygon")
    s.add_argument("--polygon", required=True)
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("density", help="Gaussian surface-area density of support samples")
    s.add_argument("--support", required=True)
    s.set_defaults(func=cmd_density)

    s = sub.add_parser("theta", help="half-period integral for one good pair")
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--h0", type=float, required=True)
    s.add_argument("--r", type=float)
    s.add_argument("--shoot", action="store_true", help="also run the ODE shooting oracle")
    quad(s)
    s.set_defaults(func=cmd_theta)

    s = sub.add_parser("scan-theta", help="Theta over the admissible minima, per c")
    s.add_argument("--c", type=float, nargs="+", required=True)
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--k-max", type=int, default=8)
    quad(s)
    s.set_defaults(func=cmd_scan_theta)

    s = sub.add_parser("phase-portrait", help="integrate one orbit from (h0, 0)")
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--h0", type=float, required=True)
    s.add_argument("--span", type=float)
    s.add_argument("--tol", type=float, default=1e-12)
    s.set_defaults(func=cmd_phase_portrait)

    s = sub.add_parser("search-periodic", help="look for nonconstant periodic solutions")
    s.add_argument("--c", type=float, nargs="+", required=True)
    s.add_argument("--n", type=int, default=32)
    s.add_argument("--k-max", type=int, default=8)
    quad(s)
    s.set_defaults(func=cmd_search_periodic)

    s = sub.add_parser("solve", help="solve for an even body with prescribed density")
    s.add_argument("--f", required=True, help="JSON with 'values' or 'fourier_cos'")
    s.add_argument("--branch", choices=[ms.SMALL, ms.LARGE], default=ms.SMALL)
    s.add_argument("--n", type=int, help="grid size for fourier_cos input")
    s.add_argument("--mollify", type=float, help="Gaussian smoothing bandwidth (radians)")
    s.add_argument("--newton-tol", type=float, default=1e-11)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("iso-check", help="Gaussian isoperimetric inequality")
    s.add_argument("--body", help="polygon or support-samples JSON")
    s.add_argument("--random", type=int, default=0, help="number of random symmetric polygons")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_iso_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        result = args.func(args, out)
    except GM2Error as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"IoError: {exc}", file=sys.stderr)
        return IoError.exit_code
    log.info("wrote results to %s", out)
    if args.verbose:
        print(json.dumps(plotdata.clean(result), indent=2)[:2000])
    return 0


if __name__ == "__main__":
    sys.exit(main())
