"""Command-line interface.

Subcommands: project, orbit, basins, scan, stability, diverge, serve.
Structured results are JSON (floats at 17 significant digits), images are
binary PPM.  Exit codes: 0 success, 1 domain error, 2 usage error.  A JSON
--config file can predefine any flag; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import jsonout
from .basins import (
    build_attractor_table,
    default_palette,
    encode_ppm,
    grid_to_json,
    render_basins,
)
from .divergence import estimate_minimal_displacement, verify_linear_divergence
from .dynamics import DRConfig, dr_iterate
from .exceptions import DrplaneError
from .geometry import Ellipse, Line, PSphere, Region, feasible_points, set_distance
from .stability import local_convergence_certificate, periodic_scan

SCHEMA = 1


# ---------------------------------------------------------------------------
# spec parsing

def parse_set(text: str):
    """ellipse:b=2 | psphere:p=0.5 | circle"""
    if text == "circle":
        return PSphere(2.0)
    kind, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, _, val = item.partition("=")
        params[key.strip()] = float(val)
    if kind == "ellipse":
        if set(params) != {"b"}:
            raise ValueError(f"ellipse spec needs b=..., got {text!r}")
        return Ellipse(params["b"])
    if kind == "psphere":
        if set(params) != {"p"}:
            raise ValueError(f"psphere spec needs p=..., got {text!r}")
        return PSphere(params["p"])
    raise ValueError(f"unknown set spec {text!r}")


def parse_line(text: str) -> Line:
    """slope=2 | slope=2,intercept=1 | normal=a,b,c"""
    if text.startswith("normal="):
        vals = [float(v) for v in text[len("normal="):].split(",")]
        if len(vals) != 3:
            raise ValueError(f"normal form needs three numbers, got {text!r}")
        return Line.from_normal(*vals)
    params = {}
    for item in filter(None, text.split(",")):
        key, _, val = item.partition("=")
        params[key.strip()] = float(val)
    unknown = set(params) - {"slope", "intercept"}
    if unknown or "slope" not in params:
        raise ValueError(f"line spec needs slope=... [,intercept=...], got {text!r}")
    return Line.from_slope_intercept(params["slope"], params.get("intercept", 0.0))


def parse_region(text: str) -> Region:
    vals = [float(v) for v in text.split(":")]
    if len(vals) != 4:
        raise ValueError(f"region must be xmin:xmax:ymin:ymax, got {text!r}")
    return Region(*vals)


def parse_resolution(text: str):
    w, _, h = text.partition("x")
    return int(w), int(h)


def parse_point(text: str):
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 2:
        raise ValueError(f"point must be x,y, got {text!r}")
    return np.array(vals)


def set_to_json(s):
    if isinstance(s, Ellipse):
        return {"kind": "ellipse", "b": s.b}
    if isinstance(s, PSphere):
        return {"kind": "psphere", "p": s.p}
    return {"kind": "line", "alpha": s.alpha, "beta": s.beta, "gamma": s.gamma}


# spec strings round-trip: parse(format(x)) == x

def format_set(s) -> str:
    if isinstance(s, Ellipse):
        return f"ellipse:b={s.b!r}"
    if isinstance(s, PSphere):
        return "circle" if s.p == 2.0 else f"psphere:p={s.p!r}"
    raise ValueError(f"not a conic: {s!r}")


def format_line(L: Line) -> str:
    return f"normal={L.alpha!r},{L.beta!r},{L.gamma!r}"


def format_region(r: Region) -> str:
    return f"{r.xmin!r}:{r.xmax!r}:{r.ymin!r}:{r.ymax!r}"


def _emit(doc, path):
    text = jsonout.dumps(doc, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_project(args):
    if args.set is None and args.line is None:
        raise ValueError("project needs --set or --line")
    q = parse_point(args.point)
    if args.set is not None:
        target = parse_set(args.set)
        res = target.project_info(q)
        doc = {
            "schema": SCHEMA,
            "set": set_to_json(target),
            "query": q,
            "point": res.point,
            "candidates": [c for c in res.candidates],
            "multivalued": res.multivalued,
        }
    else:
        line = parse_line(args.line)
        p = line.project(q)
        doc = {
            "schema": SCHEMA,
            "set": set_to_json(line),
            "query": q,
            "point": p,
            "candidates": [p],
            "multivalued": False,
        }
    _emit(doc, args.out)
    return 0


def orbit_to_json(sets, line, start, orbit):
    return {
        "schema": SCHEMA,
        "set": set_to_json(sets),
        "line": set_to_json(line),
        "start": start,
        "terminated": orbit.terminated.value,
        "points": orbit.points,
        "step_norms": orbit.step_norms,
    }


def cmd_orbit(args):
    conic = parse_set(args.set)
    line = parse_line(args.line)
    start = parse_point(args.start)
    cfg = DRConfig(max_iter=args.iters, convergence_tol=args.tol, divergence_bailout=args.bailout)
    orbit = dr_iterate(conic, line, start, cfg)
    _emit(orbit_to_json(conic, line, start, orbit), args.out)
    return 0


def cmd_basins(args):
    conic = parse_set(args.set)
    line = parse_line(args.line)
    region = parse_region(args.region)
    width, height = parse_resolution(args.res)
    if args.out is None and args.labels is None:
        raise ValueError("basins needs --out (PPM) and/or --labels (JSON)")
    table = build_attractor_table(conic, line, region, args.max_period, grid=args.grid)
    grid = render_basins(
        conic, line, table, region, width, height,
        iters=args.iters, match_tol=args.match_tol, threads=args.threads,
    )
    if args.out:
        palette = default_palette(len(table))
        with open(args.out, "wb") as fh:
            fh.write(encode_ppm(grid, palette))
    if args.labels:
        _emit(grid_to_json(grid, table), args.labels)
    return 0


def cmd_scan(args):
    conic = parse_set(args.set)
    line = parse_line(args.line)
    region = parse_region(args.region)
    pts = periodic_scan(conic, line, region, args.max_period, grid=args.grid)
    doc = {
        "schema": SCHEMA,
        "set": set_to_json(conic),
        "line": set_to_json(line),
        "periodic_points": [
            {
                "point": p.point,
                "period": p.period,
                "classification": p.classification,
                "multipliers": [
                    {"re": m.real, "im": m.imag} for m in p.multipliers
                ],
                "residual": p.residual,
            }
            for p in pts
        ],
    }
    _emit(doc, args.out)
    return 0


def cmd_stability(args):
    conic = parse_set(args.set)
    line = parse_line(args.line)
    feas = feasible_points(conic, line)
    certs = []
    for f in feas:
        cert = local_convergence_certificate(conic, line, f)
        certs.append(
            {
                "feasible_point": cert.feasible_point,
                "tangent_line": set_to_json(cert.tangent_line),
                "eigen_modulus_sq": cert.eigen_modulus_sq,
                "locally_convergent": cert.locally_convergent,
            }
        )
    doc = {
        "schema": SCHEMA,
        "set": set_to_json(conic),
        "line": set_to_json(line),
        "feasible_points": feas,
        "certificates": certs,
    }
    _emit(doc, args.out)
    return 0


def cmd_diverge(args):
    conic = parse_set(args.set)
    line = parse_line(args.line)
    start = parse_point(args.start)
    rep = verify_linear_divergence(conic, line, start, args.steps)
    doc = {
        "schema": SCHEMA,
        "set": set_to_json(conic),
        "line": set_to_json(line),
        "start": start,
        "steps": rep.steps,
        "gap": rep.gap,
        "min_functional_increment": rep.min_functional_increment,
        "monotone": rep.monotone,
        "displacement_estimate": rep.displacement_estimate,
    }
    _emit(doc, args.out)
    return 0


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    app = create_app(render_workers=args.workers, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drplane",
        description="Douglas-Rachford dynamics for a line with an ellipse or p-sphere",
    )
    parser.add_argument("--config", help="JSON file with default values for any flag")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="nearest-point projection onto a set")
    p.add_argument("--set", help="ellipse:b=... | psphere:p=... | circle")
    p.add_argument("--line", help="slope=... [,intercept=...] | normal=a,b,c")
    p.add_argument("--point", required=True, help="query point x,y")
    p.add_argument("--out")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("orbit", help="iterate and record a trajectory")
    p.add_argument("--set", required=True)
    p.add_argument("--line", required=True)
    p.add_argument("--start", required=True)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--bailout", type=float, default=1e6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("basins", help="render domains of attraction")
    p.add_argument("--set", required=True)
    p.add_argument("--line", required=True)
    p.add_argument("--region", required=True, help="xmin:xmax:ymin:ymax")
    p.add_argument("--res", required=True, help="WIDTHxHEIGHT")
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--match-tol", type=float, default=1e-3)
    p.add_argument("--max-period", type=int, default=5)
    p.add_argument("--grid", type=int, default=32, help="scan seed grid")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="PPM image path")
    p.add_argument("--labels", help="label-grid JSON path")
    p.set_defaults(func=cmd_basins)

    p = sub.add_parser("scan", help="find periodic points")
    p.add_argument("--set", required=True)
    p.add_argument("--line", required=True)
    p.add_argument("--region", required=True)
    p.add_argument("--max-period", type=int, default=5)
    p.add_argument("--grid", type=int, default=32)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("stability", help="local convergence certificates")
    p.add_argument("--set", required=True)
    p.add_argument("--line", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("diverge", help="verify linear divergence (infeasible pair)")
    p.add_argument("--set", required=True)
    p.add_argument("--line", required=True)
    p.add_argument("--start", required=True)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_diverge)

    p = sub.add_parser("serve", help="run the explorer HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8172)
    p.add_argument("--workers", type=int, default=4, help="render worker threads")
    p.add_argument("--ui", help="directory with the built explorer UI to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


# flags whose values may begin with '-' (regions, points); fold the value in
# with '=' so argparse does not mistake it for an option
_LEADING_DASH_FLAGS = {"--region", "--start", "--point"}


def _normalize_argv(argv):
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in _LEADING_DASH_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv=None) -> int:
    argv = _normalize_argv(list(sys.argv[1:] if argv is None else argv))
    # pre-scan --config so file values become parser defaults (flags override)
    cfg_path = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            cfg_path = argv[i + 1]
        elif a.startswith("--config="):
            cfg_path = a.split("=", 1)[1]
    parser = build_parser()
    if cfg_path:
        try:
            with open(cfg_path) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {cfg_path}: {exc}", file=sys.stderr)
            return 2
        if not isinstance(file_cfg, dict):
            print(f"error: config {cfg_path} must be a JSON object", file=sys.stderr)
            return 2
        defaults = {k.replace("-", "_"): v for k, v in file_cfg.items()}
        for group_action in parser._subparsers._group_actions:
            for sp in getattr(group_action, "choices", {}).values():
                sp.set_defaults(**defaults)
                for action in sp._actions:
                    if action.dest in defaults and action.required:
                        action.required = False
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DrplaneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
