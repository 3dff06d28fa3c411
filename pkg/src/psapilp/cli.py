"""Command line front end: ``psapilp {generate,solve,verify,bench,dump-projections}``.

Exit codes: 0 ok, 1 infeasible (or verification mismatch), 2 input error,
3 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time

from . import bench, oracle, projection, search
from .errors import (
    Aborted,
    DomainTooLarge,
    InstanceError,
    IterationLimit,
    PilpError,
    RelaxationInfeasible,
)
from .model import parse_instance, serialize_instance

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INPUT = 2
EXIT_LIMIT = 3

log = logging.getLogger("psapilp")


def _read_problem(path):
    if path == "-":
        return parse_instance(sys.stdin.read())
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="")


def _fmt_point(x):
    return " ".join(str(v) for v in x)


def cmd_generate(args):
    spec = bench.GenSpec(args.n, args.m, args.alpha, args.corr, args.seed, args.exact_b)
    text = serialize_instance(bench.generate(spec))
    out = _open_out(args.out)
    try:
        out.write(text)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _search_config(args):
    return search.SearchConfig(
        split=args.split,
        list_policy=args.list,
        stream_check=args.stream_check,
        range_tol=args.range_tol,
        iter_cap=args.iter_cap,
        max_list_size=args.max_list_size,
        time_limit=args.time_limit,
        projection_mode=args.projections,
        trace=args.trace,
    )


def cmd_solve(args):
    p = _read_problem(args.file)
    start = time.perf_counter()
    if args.solver == "psa":
        cfg = _search_config(args)
        try:
            out = search.solve(p, cfg)
        except Aborted as exc:
            print(f"status aborted:{exc.reason}")
            if exc.incumbent is not None:
                print(f"incumbent_value {exc.value}")
                print(f"incumbent {_fmt_point(exc.incumbent)}")
            return EXIT_LIMIT
        if cfg.trace:
            for event in out.trace:
                print("trace " + " ".join(str(v) for v in event))
        print(f"status {out.status.value}")
        if out.optimal:
            print(f"value {out.value}")
            print(f"x {_fmt_point(out.point)}")
        st = out.stats
        print(f"levels {st.levels_scanned}")
        if st.final_av_pct is not None:
            print(f"av_pct {st.final_av_pct:.2f}")
        print(f"peak_list {st.peak_list_size}")
        print(f"lp_solves {st.lp_solves}")
        print(f"candidates {st.candidates_checked}")
        print(f"time_s {time.perf_counter() - start:.4f}")
        return EXIT_OK if out.optimal else EXIT_INFEASIBLE
    try:
        if args.solver == "bb":
            res = oracle.branch_and_bound(p, args.node_select, node_cap=args.node_cap,
                                          time_limit=args.time_limit)
        else:
            res = oracle.brute_force(p)
    except oracle.CapExceeded as exc:
        print(f"status aborted:{exc.reason}")
        if exc.incumbent is not None:
            print(f"incumbent_value {exc.value}")
            print(f"incumbent {_fmt_point(exc.incumbent)}")
        return EXIT_LIMIT
    print(f"status {res.status.value}")
    if res.optimal:
        print(f"value {res.value}")
        print(f"x {_fmt_point(res.point)}")
    print(f"{'nodes' if args.solver == 'bb' else 'points'} {res.count}")
    print(f"time_s {time.perf_counter() - start:.4f}")
    return EXIT_OK if res.optimal else EXIT_INFEASIBLE


def cmd_verify(args):
    mismatches = 0
    for k in range(args.count):
        spec = bench.GenSpec(args.n, args.m, args.alpha, args.corr, args.seed + k)
        p = bench.generate(spec)
        got = search.solve(p)
        ref = oracle.brute_force(p)
        bb = oracle.branch_and_bound(p)
        verdicts = {"psa": (got.status.value, got.value), "brute": (ref.status.value, ref.value),
                    "bb": (bb.status.value, bb.value)}
        ok = len(set(verdicts.values())) == 1
        if not ok:
            mismatches += 1
        print(f"seed {spec.seed} " + " ".join(f"{k}={s}/{v}" for k, (s, v) in verdicts.items())
              + ("" if ok else " MISMATCH"))
    print(f"mismatches {mismatches} of {args.count}")
    return EXIT_OK if mismatches == 0 else EXIT_INFEASIBLE


def cmd_bench(args):
    with open(args.spec, encoding="utf-8") as fh:
        specs = bench.read_spec_csv(fh.read())
    solvers = tuple(s.strip() for s in args.solvers.split(",") if s.strip())
    limits = bench.Limits(time_limit=args.time_limit, max_list_size=args.max_list_size)
    report = bench.run_batch(specs, solvers, limits, workers=args.workers)
    out = _open_out(args.out)
    try:
        out.write(bench.emit_report(report, args.format))
    finally:
        if out is not sys.stdout:
            out.close()
    if args.summary:
        sys.stderr.write(bench.emit_report(report, "summary"))
    return EXIT_OK


def cmd_dump_projections(args):
    p = _read_problem(args.file)
    try:
        projs = projection.build_projections(p, args.projections)
    except RelaxationInfeasible:
        print("LP relaxation is infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE
    cols = ["var", "e", "low", "up", "low_exact", "up_exact"]
    if args.level is not None:
        cols.append("in_range")
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(cols)
    for pr in projs:
        members = set(projection.range_at(pr, args.level).values) if args.level is not None else ()
        for pt in pr.points:
            row = [pr.var, pt.e, repr(float(pt.low)), repr(float(pt.up)),
                   int(pt.low_exact), int(pt.up_exact)]
            if args.level is not None:
                row.append(int(pt.e in members))
            writer.writerow(row)
    return EXIT_OK


def _add_search_flags(sp):
    sp.add_argument("--split", choices=search.SPLIT_POLICIES, default="max-coeff")
    sp.add_argument("--list", choices=search.LIST_POLICIES, default="lifo")
    sp.add_argument("--stream-check", action="store_true",
                    help="apply the stopping test as candidates are generated")
    sp.add_argument("--range-tol", type=float, default=projection.RANGE_TOL)
    sp.add_argument("--iter-cap", type=int, default=None,
                    help="dual simplex pivots per projection re-solve")
    sp.add_argument("--max-list-size", type=int, default=None)
    sp.add_argument("--time-limit", type=float, default=None, help="seconds")
    sp.add_argument("--projections", choices=("auto", "exact", "two-phase"), default="auto")
    sp.add_argument("--trace", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="psapilp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("generate", help="write a random 0-1 knapsack instance")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--corr", default="uncorrelated", help="uncorrelated or weak")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--exact-b", action="store_true", help="keep b_i = alpha * sum_j a_ij unrounded")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("solve", help="solve an instance file")
    sp.add_argument("file")
    sp.add_argument("--solver", choices=("psa", "bb", "brute"), default="psa")
    sp.add_argument("--node-select", choices=(oracle.BEST_BOUND, oracle.DEPTH_FIRST),
                    default=oracle.BEST_BOUND)
    sp.add_argument("--node-cap", type=int, default=200_000)
    _add_search_flags(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify", help="cross-check the sweep against both oracles")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--corr", default="uncorrelated")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bench", help="run a batch described by a CSV of n,m,alpha,corr,seed")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--out", default="-")
    sp.add_argument("--solvers", default="psa", help="comma separated subset of psa,bb,brute")
    sp.add_argument("--format", choices=("csv", "table", "summary"), default="csv")
    sp.add_argument("--summary", action="store_true", help="also print per-group averages to stderr")
    sp.add_argument("--time-limit", type=float, default=None)
    sp.add_argument("--max-list-size", type=int, default=None)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("dump-projections", help="print root projections as CSV")
    sp.add_argument("file")
    sp.add_argument("--level", type=int, default=None)
    sp.add_argument("--projections", choices=("auto", "exact", "two-phase"), default="auto")
    sp.set_defaults(func=cmd_dump_projections)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainTooLarge, IterationLimit) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except PilpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
