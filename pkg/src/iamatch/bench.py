"""Benchmark sweeps: one CSV record per (instance, algorithm, rule)."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import asdict, dataclass
from typing import IO, Iterable, Optional, Sequence

import numpy as np

from .criteria import SocialRule, is_individually_rational, is_socially_cohesive
from .dist import solve_distributed
from .engine import Mechanism, hill_climb, solve
from .errors import CapacityExceededError
from .model import IAProblem, Matching, generate_random, is_sound, utilities
from .oracle import enum_guard, exact_optimum, is_pareto_optimal

log = logging.getLogger(__name__)

COLUMNS = ("m", "n", "instance_seed", "algorithm", "rule", "U", "E", "runtime_ms",
           "sound", "ir", "sc", "po")

ALGORITHMS = (
    "selective", "selective-approx", "inclusive", "hill-climb", "oracle",
    "dist-selective", "dist-selective-approx", "dist-inclusive",
)

_MECHANISMS = {
    "selective": Mechanism.SELECTIVE,
    "selective-approx": Mechanism.SELECTIVE_APPROX,
    "inclusive": Mechanism.INCLUSIVE,
}


@dataclass
class BenchRecord:
    m: int
    n: int
    instance_seed: int
    algorithm: str
    rule: str
    U: float
    E: float
    runtime_ms: float
    sound: bool
    ir: bool
    sc: bool
    po: Optional[bool]

    def row(self) -> dict:
        d = asdict(self)
        d["po"] = "" if self.po is None else self.po
        return d


def instance_seed(base_seed: int, m: int, n: int, k: int) -> int:
    """Seed of the k-th instance of cell (m, n); independent of the other cells."""
    return int(np.random.SeedSequence([base_seed, m, n, k]).generate_state(1)[0])


def run_algorithm(
    problem: IAProblem,
    algorithm: str,
    rule: SocialRule,
    seed: int = 0,
    max_steps: int = 10_000,
) -> Matching:
    if algorithm in _MECHANISMS:
        return solve(problem, _MECHANISMS[algorithm], rule).matching
    if algorithm.startswith("dist-"):
        return solve_distributed(problem, _MECHANISMS[algorithm[5:]], rule, scheduler_seed=seed).matching
    if algorithm == "hill-climb":
        return hill_climb(problem, rule, seed=seed, max_steps=max_steps).matching
    if algorithm == "oracle":
        return exact_optimum(problem, rule).matchings[0]
    raise ValueError(f"unknown algorithm {algorithm!r}")


def measure(problem: IAProblem, algorithm: str, rule: SocialRule, seed: int,
            max_steps: int = 10_000, check_po: bool = True) -> BenchRecord:
    t0 = time.perf_counter()
    matching = run_algorithm(problem, algorithm, rule, seed, max_steps)
    runtime = (time.perf_counter() - t0) * 1000.0
    u = utilities(problem, matching)
    po = None
    if check_po and problem.m <= enum_guard():
        po = is_pareto_optimal(problem, matching).holds
    return BenchRecord(
        m=problem.m, n=problem.n, instance_seed=problem.seed if problem.seed is not None else -1,
        algorithm=algorithm, rule=rule.value, U=float(u.mean()), E=float(u.min()),
        runtime_ms=runtime, sound=is_sound(problem, matching),
        ir=is_individually_rational(problem, matching).holds,
        sc=is_socially_cohesive(problem, matching).holds, po=po,
    )


def sweep(
    ms: Sequence[int],
    ns: Sequence[int],
    instances: int,
    algorithms: Sequence[str],
    rules: Sequence[SocialRule],
    seed: int = 0,
    min_factor: int = 0,
    max_steps: int = 10_000,
    check_po: bool = True,
) -> Iterable[BenchRecord]:
    """Records in deterministic order: cell, instance, algorithm, rule."""
    for n in ns:
        for m in ms:
            if m < 2 or m < min_factor * n:
                continue
            algos = list(algorithms)
            if "oracle" in algos and m > enum_guard():
                log.warning("skipping oracle for m=%d (above the enumeration guard)", m)
                algos.remove("oracle")
            for k in range(instances):
                s = instance_seed(seed, m, n, k)
                problem = generate_random(m, n, seed=s)
                for algo in algos:
                    for rule in rules:
                        try:
                            yield measure(problem, algo, rule, s, max_steps, check_po)
                        except CapacityExceededError as exc:
                            log.warning("skipping %s on m=%d n=%d: %s", algo, m, n, exc)


def write_csv(records: Iterable[BenchRecord], stream: IO[str]) -> list[BenchRecord]:
    writer = csv.DictWriter(stream, fieldnames=COLUMNS)
    writer.writeheader()
    kept = []
    for r in records:
        writer.writerow(r.row())
        kept.append(r)
    return kept


def cell_means(records: Iterable[BenchRecord]) -> list[dict]:
    """Mean U, E and runtime per (m, n, algorithm, rule), in first-seen order."""
    groups: dict[tuple, list[BenchRecord]] = {}
    for r in records:
        groups.setdefault((r.m, r.n, r.algorithm, r.rule), []).append(r)
    out = []
    for (m, n, algo, rule), rs in groups.items():
        out.append({
            "m": m, "n": n, "algorithm": algo, "rule": rule, "instances": len(rs),
            "U": float(np.mean([r.U for r in rs])),
            "E": float(np.mean([r.E for r in rs])),
            "runtime_ms": float(np.mean([r.runtime_ms for r in rs])),
        })
    return out
