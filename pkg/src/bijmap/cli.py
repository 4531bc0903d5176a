"""Command line entry point: ``bijmap {solve,certify,degree,render}``.

Every subcommand exits 0 only when the requested certificate (or, for
``degree``, a well-defined degree) is obtained.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .certify import certify_T1, certify_T2, certify_T3, check_necessary
from .degree import cycle_degree, preimage_count
from .errors import BijmapError
from .io import MODES, build_problem, load_images, parse_problem
from .maps import SimplicialMap
from .mesh import boundary_cycle
from .pipeline import run
from .render import render_svg

log = logging.getLogger("bijmap")


def _problem(args):
    path = Path(args.problem)
    pf = parse_problem(path.read_text(), path)
    if getattr(args, "mode", None):
        pf.mode = args.mode
    if getattr(args, "K", None) is not None:
        pf.K = args.K
    if getattr(args, "seed", None) is not None:
        pf.seed = args.seed
    if getattr(args, "tolerance", None) is not None:
        pf.tolerance = args.tolerance
    return build_problem(pf)


def _map(problem, path) -> SimplicialMap:
    return SimplicialMap(problem.mesh, load_images(path, problem.mesh))


def cmd_solve(args) -> int:
    problem = _problem(args)
    report = run(problem, args.out_dir)
    verdicts = {k: v["verdict"] for k, v in report.certificates.items()}
    print(json.dumps({"status": report.status, "failure_stage": report.failure_stage,
                      "message": report.message, "energy": report.energy,
                      "certificates": verdicts, "out_dir": str(args.out_dir)}, indent=2))
    return 0 if report.granted else 1


def cmd_certify(args) -> int:
    problem = _problem(args)
    phi = _map(problem, args.mapped)
    eps = problem.eps_con
    wanted = ["T1", "T2", "T3"] if args.theorem == "all" else [args.theorem]
    makers = {
        "necessary": lambda: check_necessary(phi),
        "T1": lambda: certify_T1(phi, problem.polygon, eps_con=eps),
        "T2": lambda: certify_T2(phi, problem.polygon, problem.assignment, eps_con=eps),
        "T3": lambda: certify_T3(phi, problem.polygon, problem.assignment, eps_con=eps),
    }
    certs = {name: makers[name]() for name in wanted}
    print(json.dumps({k: c.to_dict() for k, c in certs.items()}, indent=2))
    return 0 if all(c.certified for c in certs.values()) else 1


def cmd_degree(args) -> int:
    problem = _problem(args)
    phi = _map(problem, args.mapped)
    q = np.array(args.point, dtype=float)
    deg = cycle_degree(phi, boundary_cycle(problem.mesh), q, seed=problem.seed)
    count = preimage_count(phi, q)
    print(json.dumps({"point": q.tolist(), "degree": deg, "preimages": count.count}))
    return 0


def cmd_render(args) -> int:
    problem = _problem(args)
    phi = _map(problem, args.mapped)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = out / f"{Path(args.mapped).stem}_{args.coloring}.svg"
    target.write_text(render_svg(phi, problem.polygon, args.coloring))
    print(target)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bijmap", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, mapped: bool):
        sp.add_argument("problem", help="problem file")
        if mapped:
            sp.add_argument("mapped", help="OBJ/OFF with the vertex images")
        sp.add_argument("--K", type=float, default=None, help="condition number bound")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--tolerance", type=float, default=None,
                        help="certificate tolerance relative to the polygon diameter")

    s = sub.add_parser("solve", help="optimize a map and certify it")
    common(s, mapped=False)
    s.add_argument("--mode", choices=MODES, default=None)
    s.add_argument("--out-dir", default="out")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("certify", help="certify a stored map")
    common(c, mapped=True)
    c.add_argument("--theorem", choices=["necessary", "T1", "T2", "T3", "all"], default="T2")
    c.set_defaults(func=cmd_certify)

    d = sub.add_parser("degree", help="boundary degree and pre-image count at a point")
    common(d, mapped=True)
    d.add_argument("--point", type=float, nargs=2, required=True, metavar=("X", "Y"))
    d.set_defaults(func=cmd_degree)

    r = sub.add_parser("render", help="draw a stored map as SVG")
    common(r, mapped=True)
    r.add_argument("--coloring", choices=["none", "gradient_norm"], default="gradient_norm")
    r.add_argument("--out-dir", default="out")
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (BijmapError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
