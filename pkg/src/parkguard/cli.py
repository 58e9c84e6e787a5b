"""Command-line entry point.

Exit codes: 0 success, 2 validation failure, 1 any other error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys


def _cmd_run(args):
    from .scenario import load_config, run_scenario

    cfg = load_config(args.config)
    out = args.out or cfg.resolve(cfg.output)
    outcome = run_scenario(cfg, out)
    print(json.dumps(outcome.metrics(), sort_keys=True))
    print(f"outputs written to {out}")
    return 0


def _cmd_validate(args):
    from .scenario import validate_circle

    rep = validate_circle(h=args.h, alpha=args.alpha, E=args.budget, N=args.levels,
                          tol_profit=args.tol_profit, piecewise=not args.no_piecewise)
    print(json.dumps(rep.to_dict(), indent=2, sort_keys=True))
    print("PASS" if rep.passed else "FAIL")
    return 0 if rep.passed else 2


def _cmd_synthetic(args):
    from .scenario import make_synthetic

    with open(args.spec) as fh:
        spec = json.load(fh)
    out = args.out or os.path.join(os.path.dirname(os.path.abspath(args.spec)), spec.pop("output", "synthetic"))
    spec.pop("output", None)
    for name in make_synthetic(spec, out):
        print(os.path.join(out, name))
    return 0


def _cmd_render(args):
    from .render import load_outcome, render_svg

    svg = render_svg(load_outcome(args.outcome_dir), {"max_paths": args.max_paths})
    path = args.out or os.path.join(args.outcome_dir, "outcome.svg")
    with open(path, "w") as fh:
        fh.write(svg)
    print(path)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="parkguard", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario config")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (default: the config's 'output')")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("validate-circle", help="compare the unit-disc run with its closed forms")
    v.add_argument("--h", type=float, default=0.01)
    v.add_argument("--alpha", type=float, default=1.0)
    v.add_argument("--budget", type=float, default=1.0)
    v.add_argument("--levels", type=int, default=17)
    v.add_argument("--tol-profit", type=float, default=0.015)
    v.add_argument("--no-piecewise", action="store_true", help="skip the piecewise-constant patrol check")
    v.set_defaults(func=_cmd_validate)

    s = sub.add_parser("make-synthetic", help="write synthetic terrain rasters from a JSON spec")
    s.add_argument("spec")
    s.add_argument("--out")
    s.set_defaults(func=_cmd_synthetic)

    d = sub.add_parser("render", help="re-render outcome.svg from an output directory")
    d.add_argument("outcome_dir")
    d.add_argument("--out")
    d.add_argument("--max-paths", type=int, default=40)
    d.set_defaults(func=_cmd_render)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:  # reported, not raised, so the exit code is meaningful
        if args.verbose:
            raise
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
