"""Command line entry point: ``popproto {color,elect,sweep}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import harness
from .graph import GraphError


def _graph_args(ap):
    ap.add_argument("--graph", default="ring",
                    help="complete | ring | star | gnp | file:<path>")
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--p", type=float, default=None, help="edge probability for gnp")
    ap.add_argument("--cap-N", dest="cap_N", type=int, default=None,
                    help="upper bound N known to agents (default: exact n)")
    ap.add_argument("--cap-Delta", dest="cap_Delta", type=int, default=None,
                    help="degree bound Delta known to agents (default: exact max degree)")


def _common_args(ap):
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-steps", type=int, default=None)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default=None, help="directory for trials.csv and summary.json")
    ap.add_argument("--check-every", type=int, default=None,
                    help="evaluate predicates every k steps (default 1 for n<=16, else m)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="popproto", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("color", help="two-hop coloring convergence")
    _graph_args(c)
    _common_args(c)
    c.add_argument("--protocol", choices=("plru", "dlru"), default="plru")
    c.add_argument("--start", choices=harness.STARTS, default="uniform")
    c.add_argument("--closure-steps", type=int, default=0)

    e = sub.add_parser("elect", help="leader election convergence and holding")
    _graph_args(e)
    _common_args(e)
    e.add_argument("--protocol", choices=("plru", "dlru"), default="plru",
                   help="two-hop coloring layer")
    e.add_argument("--holding-budget", type=int, default=100_000)

    s = sub.add_parser("sweep", help="convergence scaling over graph sizes")
    _graph_args(s)
    _common_args(s)
    s.add_argument("--protocol", choices=harness.PROTOCOLS, default="plru")
    s.add_argument("--coloring", choices=("plru", "dlru"), default="plru",
                   help="coloring layer when --protocol pbc")
    s.add_argument("--sizes", default="6,12,24", help="comma separated agent counts")
    s.add_argument("--start", choices=harness.STARTS, default=None)
    return ap


def _summary(results):
    done = [r.target_steps for r in results if not r.timeout]
    out = {
        "trials": len(results),
        "timeouts": sum(r.timeout for r in results),
        "median_steps": sorted(done)[len(done) // 2] if done else None,
    }
    held = [r.closure_held for r in results if r.closure_held is not None]
    if held:
        out["closure_held"] = sum(held)
    windows = [r.holding_window for r in results if r.holding_window is not None]
    if windows:
        out["full_holding"] = sum(w == results[0].holding_budget for w in windows)
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    seed = int(os.environ.get("POPPROTO_SEED", args.seed))
    try:
        if args.command == "sweep":
            sizes = [int(x) for x in args.sizes.split(",") if x.strip()]
            summary, _ = harness.sweep(args.protocol, args.graph, sizes, args.trials, seed,
                                       args.out, p=args.p, coloring=args.coloring,
                                       start=args.start, check_every=args.check_every,
                                       jobs=args.jobs)
            report = summary.to_dict()
        else:
            g = harness.resolve_graph(args.graph, args.n, args.p, seed)
            if args.command == "color":
                results = harness.measure_convergence(
                    args.protocol, g, args.trials, seed, args.max_steps,
                    N=args.cap_N, Delta=args.cap_Delta, closure_steps=args.closure_steps,
                    check_every=args.check_every, start=args.start, jobs=args.jobs)
            else:
                results = harness.measure_holding(
                    g, args.trials, seed, args.holding_budget, args.max_steps,
                    N=args.cap_N, Delta=args.cap_Delta, coloring=args.protocol,
                    check_every=args.check_every, jobs=args.jobs)
            report = _summary(results)
            report["params"] = {k: v for k, v in vars(args).items() if k != "verbose"}
            report["params"]["seed"] = seed
            if args.out:
                harness.write_results(args.out, results, report)
    except harness.HarnessIOError as exc:
        print(f"popproto: I/O error: {exc}", file=sys.stderr)
        return 3
    except (GraphError, ValueError) as exc:
        print(f"popproto: {exc}", file=sys.stderr)
        return 2
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
