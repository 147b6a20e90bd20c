"""Command-line driver: benchmark sweeps, bound checks, hardness demos.

Results of learner runs are appended to a CSV with the fixed schema
algo,n,seed,alpha_or_params,queries,rounds,success,wall_ms so that
downstream scripts can concatenate files from different machines.
Bound and hardness commands print JSON reports to stdout instead.

Exit codes: 0 success, 1 a verification reported violations, 2 bad
flags or invalid instance input, 3 a budget was refused (the demand is
printed).  The EDGEPROBE_SEED environment variable shifts the base
seed of every seed loop; the default base is 0.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import Optional

from .bounds import ProgramParams, f_bullet, failure_bound, lp_bullet, verify_inequality_chain
from .core import BudgetRefusedError, EdgeOracle, Hypergraph
from .generators import LowDegreeSpec, MatchingSpec, gen_low_degree, gen_matching
from .hardness import THREE_PART, TOWER, indistinguishability_experiment
from .lowdeg import LowDegreeParams, find_low_degree_edges
from .matching import SubroutineKind, default_alpha, find_matching

CSV_FIELDS = ["algo", "n", "seed", "alpha_or_params", "queries", "rounds", "success", "wall_ms"]


def base_seed() -> int:
    raw = os.environ.get("EDGEPROBE_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        print(f"EDGEPROBE_SEED must be an integer, got {raw!r}", file=sys.stderr)
        raise SystemExit(2)


def append_rows(path: str, rows: list[dict]) -> None:
    """Append result rows, writing the header only on a fresh file."""
    target = Path(path)
    fresh = not target.exists() or target.stat().st_size == 0
    with target.open("a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        if fresh:
            writer.writeheader()
        writer.writerows(rows)


def bench_matching_profile(n: int) -> MatchingSpec:
    """Default hidden-matching shape for generated benchmark instances.

    A fixed mixed-size profile once n is large enough to hold it, so
    that scaling sweeps vary only the number of isolated vertices;
    smaller n fall back to a handful of pairs.
    """
    if n >= 76:
        dist = ((2, 8), (3, 4), (8, 2), (32, 1))
    else:
        dist = ((2, max(1, n // 6)),)
    return MatchingSpec(n=n, size_distribution=dist)


def load_instance(path: str) -> Hypergraph:
    try:
        return Hypergraph.load(path)
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot load instance {path}: {exc}", file=sys.stderr)
        raise SystemExit(2)


def run_learn_matching(args) -> int:
    kind = SubroutineKind[args.subroutine.upper()]
    fixed = load_instance(args.instance) if args.instance else None
    if fixed is not None and not fixed.is_matching():
        print("instance is not a hypermatching", file=sys.stderr)
        return 2
    rows = []
    start = base_seed()
    for i in range(args.seeds):
        seed = start + i
        if fixed is not None:
            hidden = fixed
        else:
            spec = bench_matching_profile(args.n)
            hidden = gen_matching(MatchingSpec(spec.n, spec.size_distribution, seed=seed))
        oracle = EdgeOracle(hidden)
        alpha = args.alpha if args.alpha is not None else default_alpha(kind, hidden.n)
        outcome = find_matching(oracle, kind, alpha, seed=seed, engine=args.engine)
        rows.append(
            {
                "algo": f"find-matching-{args.subroutine}",
                "n": hidden.n,
                "seed": seed,
                "alpha_or_params": f"alpha={alpha:.6g}",
                "queries": outcome.ledger.total_queries,
                "rounds": outcome.ledger.rounds,
                "success": outcome.edges == hidden.edges,
                "wall_ms": round(outcome.ledger.wall_time * 1000),
            }
        )
    append_rows(args.out, rows)
    hits = sum(r["success"] for r in rows)
    print(f"{hits}/{len(rows)} exact recoveries; rows appended to {args.out}")
    return 0


def run_learn_lowdeg(args) -> int:
    fixed = load_instance(args.instance) if args.instance else None
    rows = []
    start = base_seed()
    for i in range(args.seeds):
        seed = start + i
        if fixed is not None:
            hidden = fixed
        else:
            hidden = gen_low_degree(
                LowDegreeSpec(
                    n=args.n,
                    delta=args.delta,
                    d=args.d,
                    rho=args.rho,
                    m=args.m if args.m is not None else max(1, args.n // (2 * args.d)),
                    seed=seed,
                )
            )
        params = LowDegreeParams(
            rho=args.rho, d=args.d, delta=args.delta, lazy_mode=args.lazy, seed=seed
        )
        oracle = EdgeOracle(hidden)
        outcome = find_low_degree_edges(oracle, params)
        rows.append(
            {
                "algo": "find-lowdeg",
                "n": hidden.n,
                "seed": seed,
                "alpha_or_params": (
                    f"rho={args.rho:g};d={args.d};delta={args.delta};lazy={int(args.lazy)}"
                ),
                "queries": outcome.ledger.total_queries,
                "rounds": outcome.ledger.rounds,
                "success": outcome.edges == hidden.edges,
                "wall_ms": round(outcome.ledger.wall_time * 1000),
            }
        )
    append_rows(args.out, rows)
    hits = sum(r["success"] for r in rows)
    print(f"{hits}/{len(rows)} exact recoveries; rows appended to {args.out}")
    return 0


def run_bounds_verify(args) -> int:
    grid = None
    if args.grid:
        with open(args.grid) as fh:
            points = json.load(fh)
        grid = [
            ProgramParams(
                delta=pt["delta"], p=pt["p"], d=pt["d"], rho=pt["rho"], n=pt["n"]
            )
            for pt in points
        ]
    report = verify_inequality_chain(grid)
    print(report.to_json())
    return 0 if report.passed else 1


def run_bounds_eval(args) -> int:
    params = ProgramParams(delta=args.delta, p=args.p, d=args.d, rho=args.rho, n=args.n)
    f_val, _ = f_bullet(params)
    lp_val, _ = lp_bullet(params)
    fb = failure_bound(params)
    print(f"f_bullet = {f_val!r}")
    print(f"lp_bullet = {lp_val!r}")
    print(f"failure_bound = {float(fb)!r}")
    return 0


def run_hardness(args) -> int:
    family = THREE_PART if args.family == "three-part" else TOWER
    start = base_seed()
    for i in range(args.seeds):
        report = indistinguishability_experiment(
            family,
            args.n,
            args.queries,
            seed=start + i,
            c_override=args.c,
        )
        payload = json.loads(report.to_json())
        payload["seed"] = start + i
        print(json.dumps(payload))
    return 0


def run_bench_sweep(args) -> int:
    n_list = [int(tok) for tok in args.n_list.split(",") if tok]
    if not n_list:
        print("empty --n-list", file=sys.stderr)
        return 2
    code = 0
    for n in n_list:
        sub = argparse.Namespace(**vars(args))
        sub.n = n
        sub.instance = None
        sub.out = args.out
        if args.algo.startswith("find-matching-"):
            sub.subroutine = args.algo.removeprefix("find-matching-")
            sub.alpha = None
            sub.engine = "auto"
            code = run_learn_matching(sub) or code
        elif args.algo == "find-lowdeg":
            sub.rho, sub.d, sub.delta, sub.lazy, sub.m = 1.0, 2, 2, True, None
            code = run_learn_lowdeg(sub) or code
        else:
            print(f"unknown algo {args.algo!r}", file=sys.stderr)
            return 2
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgeprobe",
        description="Learn hidden hypergraphs through an edge-detecting oracle.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    lm = commands.add_parser("learn-matching", help="run the matching learner over seeds")
    lm.add_argument("--n", type=int, default=100)
    lm.add_argument("--seeds", type=int, default=1)
    lm.add_argument("--alpha", type=float, default=None, help="sampling exponent (default: per-subroutine)")
    lm.add_argument("--subroutine", choices=["parallel", "adaptive"], default="adaptive")
    lm.add_argument("--engine", choices=["auto", "literal", "aggregate"], default="auto")
    lm.add_argument("--instance", default=None, help="instance JSON instead of generated matchings")
    lm.add_argument("--out", default="results.csv")
    lm.set_defaults(run=run_learn_matching)

    ld = commands.add_parser("learn-lowdeg", help="run the bounded-degree learner over seeds")
    ld.add_argument("--n", type=int, default=100)
    ld.add_argument("--seeds", type=int, default=1)
    ld.add_argument("--rho", type=float, default=1.0)
    ld.add_argument("--d", type=int, default=2)
    ld.add_argument("--delta", type=int, default=2)
    ld.add_argument("--m", type=int, default=None, help="edges per generated instance")
    ld.add_argument("--lazy", action="store_true")
    ld.add_argument("--instance", default=None)
    ld.add_argument("--out", default="results.csv")
    ld.set_defaults(run=run_learn_lowdeg)

    bounds = commands.add_parser("bounds", help="closed-form bound programs")
    bsub = bounds.add_subparsers(dest="bounds_command", required=True)
    bv = bsub.add_parser("verify", help="check the inequality chain on a grid")
    bv.add_argument("--grid", default=None, help="JSON list of {delta,p,d,rho,n} points")
    bv.set_defaults(run=run_bounds_verify)
    be = bsub.add_parser("eval", help="evaluate both programs at one point")
    be.add_argument("--delta", type=int, required=True)
    be.add_argument("--p", type=float, required=True)
    be.add_argument("--d", type=int, required=True)
    be.add_argument("--rho", type=float, required=True)
    be.add_argument("--n", type=int, required=True)
    be.set_defaults(run=run_bounds_eval)

    hard = commands.add_parser("hardness", help="indistinguishability experiments")
    hard.add_argument("family", choices=["three-part", "tower"])
    hard.add_argument("--n", type=int, required=True)
    hard.add_argument("--c", type=int, default=None, help="tower growth factor override")
    hard.add_argument("--queries", type=int, default=10_000)
    hard.add_argument("--seeds", type=int, default=1)
    hard.set_defaults(run=run_hardness)

    bench = commands.add_parser("bench", help="benchmark sweeps")
    bsweep = bench.add_subparsers(dest="bench_command", required=True)
    sweep = bsweep.add_parser("sweep", help="one algo across an n list")
    sweep.add_argument("--algo", required=True,
                       help="find-matching-adaptive, find-matching-parallel, or find-lowdeg")
    sweep.add_argument("--n-list", required=True)
    sweep.add_argument("--seeds", type=int, default=1)
    sweep.add_argument("--out", default="results.csv")
    sweep.set_defaults(run=run_bench_sweep)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except BudgetRefusedError as exc:
        print(f"budget refused: {exc} (demand {exc.demand:.0f})", file=sys.stderr)
        return 3
    except SystemExit:
        raise
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
