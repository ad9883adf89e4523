"""Compare the compiled and pure-Python kernels on identical inputs.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from iamatch.kernels import OBJ_EGALITARIAN, OBJ_UTILITARIAN, backend
from iamatch.engine import random_full_matching
from iamatch.model import EPS, generate_random, utilities
from iamatch.oracle import sound_assignments, utility_matrix


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000.0, out


def cases():
    for m in (8, 10, 12):
        p = generate_random(m, 2, seed=m)
        caps = np.array(p.capacities)
        yield f"enumerate m={m}", lambda k, p=p, caps=caps: k.enumerate_assignments(caps, p.m)
        target = utilities(p, random_full_matching(p, 0))
        yield (f"dominating m={m}",
               lambda k, p=p, caps=caps, t=target: k.find_dominating(p.interest, p.affinity, caps, t, EPS))
    for m, n in ((8, 3), (9, 2)):
        p = generate_random(m, n, seed=m)
        U = utility_matrix(p, sound_assignments(p))
        yield f"pareto m={m} n={n} N={len(U)}", lambda k, U=U: k.pareto_flags(U, EPS)
    for m, n in ((50, 5), (100, 10), (100, 2)):
        p = generate_random(m, n, seed=m + n)
        caps = np.array(p.capacities)
        start = np.array(random_full_matching(p, 0).assignment)
        for name, obj in (("U", OBJ_UTILITARIAN), ("E", OBJ_EGALITARIAN)):
            yield (f"hill-climb[{name}] m={m} n={n}",
                   lambda k, p=p, caps=caps, s=start, o=obj:
                   k.hill_climb(p.interest, p.affinity, caps, s, o, 10_000, EPS)[0])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    py, cy = backend("python"), backend("cython")
    print(f"{'case':32s} {'python ms':>11s} {'cython ms':>11s} {'speedup':>8s}  same")
    for name, fn in cases():
        tp, rp = timed(lambda: fn(py), args.repeat)
        tc, rc = timed(lambda: fn(cy), args.repeat)
        same = (rp is None and rc is None) or (rp is not None and rc is not None and np.array_equal(rp, rc))
        print(f"{name:32s} {tp:11.2f} {tc:11.2f} {tp / tc:8.1f}  {same}")


if __name__ == "__main__":
    main()
