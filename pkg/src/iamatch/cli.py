"""Command-line entry point: ``iamatch generate|solve|check|census|bench``."""

from __future__ import annotations

import argparse
import json
import logging
import secrets
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import bench, oracle
from .criteria import EXPONENTIAL_KEYS, PROPERTY_KEYS, SocialRule, coalition_guard, evaluate
from .dist import solve_distributed
from .engine import Mechanism, hill_climb, solve
from .errors import CapacityExceededError, IAError
from .io import (
    describe_matching, dump_json, parse_matching, parse_problem, serialize_matching,
    serialize_problem,
)
from .model import generate_random, require_sound, utilities

REFERENCES = {"fig2": oracle.TOY_REFERENCE_COUNTS}


def _int_list(text: str) -> list[int]:
    """``"4"``, ``"4,6,8"`` or an inclusive range ``"4:12"`` (optionally ``"4:12:2"``)."""
    out: list[int] = []
    for part in text.split(","):
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            step = bits[2] if len(bits) > 2 else 1
            out.extend(range(bits[0], bits[1] + 1, step))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty range")
    return out


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _read_problem(path: str):
    return parse_problem(Path(path).read_text(encoding="utf-8"))


def cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else secrets.randbits(32)
    problem = generate_random(args.m, args.n, seed=seed, capacity=args.capacity)
    _write(args.out, serialize_problem(problem))
    print(f"seed {seed}", file=sys.stderr)
    return 0


def cmd_solve(args) -> int:
    problem = _read_problem(args.problem)
    rule = SocialRule(args.rule)
    trace: list[dict] = []
    t0 = time.perf_counter()
    if args.mechanism == "hill-climb":
        res = hill_climb(problem, rule, seed=args.seed, max_steps=args.max_steps)
        matching = res.matching
        trace = [{"step": k, "objective": v} for k, v in enumerate(res.history)]
    else:
        if args.mechanism == "inclusive":
            mech = Mechanism.INCLUSIVE
        else:
            mech = Mechanism.SELECTIVE_APPROX if args.approx else Mechanism.SELECTIVE
        if args.distributed:
            dres = solve_distributed(problem, mech, rule, scheduler_seed=args.seed,
                                     scheduler=args.scheduler)
            matching = dres.matching
            trace = dres.to_records(problem)
        else:
            sres = solve(problem, mech, rule)
            matching = sres.matching
            trace = [r.to_dict(problem) for r in sres.trace]
    runtime = (time.perf_counter() - t0) * 1000.0
    if args.out:
        _write(args.out, serialize_matching(problem, matching))
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for rec in trace:
                fh.write(json.dumps(rec) + "\n")
    u = utilities(problem, matching)
    print(describe_matching(problem, matching))
    print(f"U = {u.mean():.6f}  E = {u.min():.6f}  runtime = {runtime:.3f} ms")
    return 0


def cmd_check(args) -> int:
    problem = _read_problem(args.problem)
    matching = parse_matching(Path(args.matching).read_text(encoding="utf-8"), problem)
    require_sound(problem, matching)
    props = [p.strip().lower() for p in args.properties.split(",") if p.strip()]
    unknown = set(props) - set(PROPERTY_KEYS)
    if unknown:
        raise IAError(f"unknown properties {sorted(unknown)}; choose from {','.join(PROPERTY_KEYS)}")
    limit = None
    if args.force:
        limit = problem.m
    else:
        guards = {"cs": coalition_guard(), "scs": coalition_guard(), "po": oracle.enum_guard()}
        for p in props:
            if p in EXPONENTIAL_KEYS and problem.m > guards[p]:
                raise CapacityExceededError(
                    f"{p} needs m <= {guards[p]} (got {problem.m}); use --force to run anyway"
                )
    report = evaluate(problem, matching, props, max_individuals=limit)
    doc = report.to_dict(problem)
    doc = {k: v for k, v in doc.items() if k not in PROPERTY_KEYS or k in props}
    if args.json:
        sys.stdout.write(dump_json(doc))
    else:
        for p in props:
            print(f"{p.upper():4s} {'true' if report[p] else 'false'}")
        print(f"U = {report.utilitarian:.6f}  E = {report.egalitarian:.6f}")
    return 0


def cmd_census(args) -> int:
    problem = _read_problem(args.problem)
    limit = problem.m if args.force else None
    reference = REFERENCES[args.reference] if args.reference else None
    c = oracle.census(problem, max_individuals=limit, reference=reference)
    if args.json:
        sys.stdout.write(dump_json(c.to_dict(problem)))
    else:
        print(f"total {c.total}")
        for key in oracle.CENSUS_KEYS:
            print(f"{key:8s} {c.counts[key]}")
        print(f"max U = {c.max_utilitarian:.6f}")
        for mt in c.maxutil_matchings:
            print(f"  {describe_matching(problem, mt)}")
        print(f"max E = {c.max_egalitarian:.6f}")
        for mt in c.maxegal_matchings:
            print(f"  {describe_matching(problem, mt)}")
    if c.divergent:
        print(f"counts differ from {args.reference}: {', '.join(c.divergent)}", file=sys.stderr)
        return 1
    return 0


def cmd_bench(args) -> int:
    algorithms = [a.strip() for a in args.algorithms.split(",")]
    bad = set(algorithms) - set(bench.ALGORITHMS)
    if bad:
        raise IAError(f"unknown algorithms {sorted(bad)}; choose from {','.join(bench.ALGORITHMS)}")
    rules = [SocialRule(r.strip()) for r in args.rule.split(",")]
    records = bench.sweep(args.m, args.n, args.instances, algorithms, rules, seed=args.seed,
                          min_factor=args.min_factor, max_steps=args.max_steps,
                          check_po=not args.no_po)
    if args.csv and args.csv != "-":
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            kept = bench.write_csv(records, fh)
    else:
        kept = bench.write_csv(records, sys.stdout)
    out = sys.stderr if not args.csv or args.csv == "-" else sys.stdout
    for cell in bench.cell_means(kept):
        print(
            f"m={cell['m']:<4d} n={cell['n']:<3d} {cell['algorithm']:<22s} {cell['rule']:<12s} "
            f"U={cell['U']:+.4f} E={cell['E']:+.4f} t={cell['runtime_ms']:.2f}ms",
            file=out,
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iamatch", description="Individuals/activities matching")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random problem")
    g.add_argument("-m", type=int, required=True, help="individuals")
    g.add_argument("-n", type=int, required=True, help="activities")
    g.add_argument("--seed", type=int)
    g.add_argument("--capacity", type=int, help="capacity of every activity (default ceil(m/n))")
    g.add_argument("-o", "--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run a mechanism on a problem file")
    s.add_argument("problem")
    s.add_argument("--mechanism", choices=["selective", "inclusive", "hill-climb"], default="selective")
    s.add_argument("--rule", choices=[r.value for r in SocialRule], default="utilitarian")
    s.add_argument("--approx", action="store_true", help="one-exclusion approximation (selective)")
    s.add_argument("--distributed", action="store_true")
    s.add_argument("--scheduler", choices=["random", "sequential"], default="random")
    s.add_argument("--seed", type=int, default=0, help="scheduler or hill-climbing seed")
    s.add_argument("--max-steps", type=int, default=10_000)
    s.add_argument("--trace", help="write the trace / message log as JSON lines")
    s.add_argument("-o", "--out", help="matching file to write")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="evaluate properties of a matching")
    c.add_argument("problem")
    c.add_argument("matching")
    c.add_argument("--properties", default=",".join(PROPERTY_KEYS))
    c.add_argument("--force", action="store_true", help="ignore the size guards")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("census", help="evaluate every property on every sound matching")
    e.add_argument("problem")
    e.add_argument("--reference", choices=sorted(REFERENCES))
    e.add_argument("--force", action="store_true")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_census)

    b = sub.add_parser("bench", help="benchmark sweep to CSV")
    b.add_argument("--m", type=_int_list, required=True, help="e.g. 4:12 or 10,50,100")
    b.add_argument("--n", type=_int_list, required=True)
    b.add_argument("--instances", type=int, default=100)
    b.add_argument("--algorithms", default="selective-approx,inclusive,hill-climb")
    b.add_argument("--rule", default="utilitarian", help="comma-separated rules")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--min-factor", type=int, default=0, help="skip cells with m < factor*n")
    b.add_argument("--max-steps", type=int, default=10_000)
    b.add_argument("--no-po", action="store_true", help="leave the po column blank")
    b.add_argument("--csv", help="output file (default stdout)")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (IAError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
