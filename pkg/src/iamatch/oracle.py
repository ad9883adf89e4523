"""Exhaustive ground truth for small instances.

Enumerates every sound matching and evaluates every property on all of them
at once (vectorized over matchings).  The per-matching checkers in
:mod:`iamatch.criteria` are the independent route the census is tested
against.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

import numpy as np

from . import kernels
from .criteria import SocialRule, Verdict, best_coalition, sound_coalitions
from .errors import CapacityExceededError
from .model import EPS, VOID, IAProblem, Matching, require_sound, utilities, utility

DEFAULT_ENUM_GUARD = 12
DEFAULT_MAX_MATCHINGS = 5_000_000

# Superscripts of the inclusion lattice for the four-jugglers instance.
TOY_REFERENCE_COUNTS = {
    "IR": 51, "CIS": 16, "PO": 15, "IS": 9, "NS": 7, "SC": 6,
    "MaxEgal": 2, "MaxUtil": 2, "P": 0, "CS": 0, "SCS": 0,
}
CENSUS_KEYS = tuple(TOY_REFERENCE_COUNTS)

# (premise, conclusion): every matching with the premise has the conclusion.
LATTICE = (
    ("P", "SCS"), ("P", "NS"), ("P", "MaxEgal"), ("P", "MaxUtil"),
    ("SCS", "CS"), ("SCS", "PO"), ("MaxUtil", "PO"),
    ("NS", "IS"), ("IS", "IR"), ("IS", "CIS"),
    ("CS", "IR"), ("PO", "CIS"), ("MaxEgal", "IR"),
)


def enum_guard() -> int:
    return int(os.environ.get("IAMATCH_ENUM_GUARD", DEFAULT_ENUM_GUARD))


def count_sound_matchings(problem: IAProblem) -> int:
    """Closed form: sum over feasible occupancies of multinomial coefficients."""
    m = problem.m
    total = 0
    for occ in itertools.product(*(range(min(c, m) + 1) for c in problem.capacities)):
        busy = sum(occ)
        if busy > m:
            continue
        ways = math.factorial(m) // math.factorial(m - busy)
        for k in occ:
            ways //= math.factorial(k)
        total += ways
    return total


def _check_guard(problem: IAProblem, max_individuals: Optional[int],
                 max_matchings: Optional[int] = None) -> None:
    limit = enum_guard() if max_individuals is None else max_individuals
    if problem.m > limit:
        raise CapacityExceededError(
            f"exhaustive enumeration needs m <= {limit}, got m = {problem.m} "
            "(raise it with IAMATCH_ENUM_GUARD)"
        )
    cap = DEFAULT_MAX_MATCHINGS if max_matchings is None else max_matchings
    if count_sound_matchings(problem) > cap:
        raise CapacityExceededError(f"more than {cap} sound matchings to enumerate")


def sound_assignments(problem: IAProblem, max_individuals: Optional[int] = None) -> np.ndarray:
    """All sound matchings as rows of an ``(N, m)`` array (``-1`` = void)."""
    _check_guard(problem, max_individuals)
    return kernels.enumerate_assignments(np.array(problem.capacities), problem.m)


def enumerate_sound_matchings(
    problem: IAProblem, max_individuals: Optional[int] = None
) -> Iterator[Matching]:
    """Every sound matching exactly once, in mixed-radix order.

    Individual order is the most significant digit; digits run void first,
    then activities in declared order.
    """
    for row in sound_assignments(problem, max_individuals):
        yield Matching(tuple(row))


def _affinity_sums(problem: IAProblem, assign: np.ndarray) -> np.ndarray:
    """``S[k, i, t]``: affinity of ``i`` toward the participants of ``t`` in row k."""
    onehot = np.zeros(assign.shape + (problem.n,))
    for t in range(problem.n):
        onehot[:, :, t] = assign == t
    return np.einsum("ij,kjt->kit", problem.affinity, onehot)


def utility_matrix(problem: IAProblem, assign: np.ndarray) -> np.ndarray:
    """Utilities of every individual (columns) in every matching (rows)."""
    return _utilities_from_sums(problem, assign, _affinity_sums(problem, assign))


def _utilities_from_sums(problem, assign, S) -> np.ndarray:
    m = problem.m
    rows = np.arange(assign.shape[0])
    out = np.zeros(assign.shape)
    for i in range(m):
        a = assign[:, i]
        active = a != VOID
        ai = np.where(active, a, 0)
        val = (S[rows, i, ai] / (m - 1) + problem.interest[i, ai]) / 2
        out[:, i] = np.where(active, val, 0.0)
    return out


@dataclass
class Optimum:
    value: float
    matchings: tuple[Matching, ...]


def _welfare_rows(U: np.ndarray, rule: SocialRule) -> np.ndarray:
    return U.mean(axis=1) if rule is SocialRule.UTILITARIAN else U.min(axis=1)


def exact_optimum(
    problem: IAProblem, rule: SocialRule, max_individuals: Optional[int] = None
) -> Optimum:
    """Maximal welfare over all sound matchings, with every optimal matching."""
    assign = sound_assignments(problem, max_individuals)
    W = _welfare_rows(utility_matrix(problem, assign), rule)
    best = W.max()
    rows = np.flatnonzero(W >= best - EPS)
    return Optimum(float(best), tuple(Matching(tuple(assign[r])) for r in rows))


def is_pareto_optimal(
    problem: IAProblem, matching: Matching, max_individuals: Optional[int] = None
) -> Verdict:
    """PO check by exhaustive search with pruning.

    On failure the witness is itself Pareto-optimal: the first dominating
    matching is improved until nothing dominates it any more.
    """
    require_sound(problem, matching)
    limit = enum_guard() if max_individuals is None else max_individuals
    if problem.m > limit:
        raise CapacityExceededError(
            f"Pareto-optimality check needs m <= {limit}, got m = {problem.m}"
        )
    caps = np.array(problem.capacities)
    target = utilities(problem, matching)
    witness = None
    while True:
        found = kernels.find_dominating(problem.interest, problem.affinity, caps, target, EPS)
        if found is None:
            break
        witness = Matching(tuple(found))
        target = utilities(problem, witness)
    if witness is None:
        return Verdict(True)
    return Verdict(False, witness)


@dataclass
class Census:
    """Property counts over all sound matchings of one instance."""

    total: int
    counts: dict[str, int]
    max_utilitarian: float
    max_egalitarian: float
    maxutil_matchings: tuple[Matching, ...]
    maxegal_matchings: tuple[Matching, ...]
    assignments: np.ndarray = field(repr=False)
    flags: dict[str, np.ndarray] = field(repr=False)
    utilities: np.ndarray = field(repr=False)
    divergent: Optional[list[str]] = None

    def matchings_with(self, key: str) -> list[Matching]:
        return [Matching(tuple(self.assignments[r])) for r in np.flatnonzero(self.flags[key])]

    def to_dict(self, problem: IAProblem) -> dict:
        def labels(ms):
            return [
                {problem.individual_ids[i]: problem.activity_label(a) for i, a in enumerate(mt.assignment)}
                for mt in ms
            ]

        doc = {
            "total": self.total,
            "counts": dict(self.counts),
            "max_utilitarian": self.max_utilitarian,
            "max_egalitarian": self.max_egalitarian,
            "maxutil_matchings": labels(self.maxutil_matchings),
            "maxegal_matchings": labels(self.maxegal_matchings),
        }
        if self.divergent is not None:
            doc["divergent"] = list(self.divergent)
        return doc

    def csv_row(self) -> tuple[list[str], list[int]]:
        header = ["total", *CENSUS_KEYS]
        return header, [self.total, *(self.counts[k] for k in CENSUS_KEYS)]


def _stability_flags(problem, assign, U, S):
    """NS / IS / CIS flags for every row, with the deviation semantics of criteria."""
    m, n = problem.m, problem.n
    N = assign.shape[0]
    counts = np.stack([(assign == t).sum(axis=1) for t in range(n)], axis=1)
    full = counts == np.array(problem.capacities)
    v = problem.interest
    w = problem.affinity
    ns = np.ones(N, dtype=bool)
    is_ = np.ones(N, dtype=bool)
    cis = np.ones(N, dtype=bool)
    rows = np.arange(N)
    for i in range(m):
        here = assign[:, i]
        active = here != VOID
        hi = np.where(active, here, 0)
        # veto by the group being left
        leave_veto = np.zeros(N, dtype=bool)
        for j in range(m):
            if j == i:
                continue
            mate = active & (assign[:, j] == here)
            u_rest = ((S[rows, j, hi] - w[j, i]) / (m - 1) + v[j, hi]) / 2
            leave_veto |= mate & (U[:, j] > u_rest + EPS)
        for t in [*range(n), VOID]:
            moving = here != t
            if t == VOID:
                gain = moving & (0.0 > U[:, i] + EPS)
                host_veto = np.zeros(N, dtype=bool)
            else:
                moving &= ~full[:, t]
                u_new = (S[:, i, t] / (m - 1) + v[i, t]) / 2
                gain = moving & (u_new > U[:, i] + EPS)
                host_veto = np.zeros(N, dtype=bool)
                for j in range(m):
                    if j == i:
                        continue
                    host = assign[:, j] == t
                    u_j = ((S[:, j, t] + w[j, i]) / (m - 1) + v[j, t]) / 2
                    host_veto |= host & (U[:, j] > u_j + EPS)
            ns &= ~gain
            is_ &= ~(gain & ~host_veto)
            cis &= ~(gain & ~host_veto & ~leave_veto)
    return ns, is_, cis, full


def census(
    problem: IAProblem,
    max_individuals: Optional[int] = None,
    reference: Optional[Mapping[str, int]] = None,
) -> Census:
    """Evaluate every property on every sound matching.

    With ``reference`` (expected counts per property), the properties whose
    count differs are listed in ``divergent``.
    """
    assign = sound_assignments(problem, max_individuals)
    S = _affinity_sums(problem, assign)
    U = _utilities_from_sums(problem, assign, S)
    m, n = problem.m, problem.n
    N = assign.shape[0]

    ns, is_, cis, full = _stability_flags(problem, assign, U, S)
    ir = np.all(U >= -EPS, axis=1)

    sc = np.ones(N, dtype=bool)
    for i in range(m):
        here = assign[:, i]
        mine = np.where(here == VOID, 0.0, problem.interest[i, np.where(here == VOID, 0, here)])
        for a in range(n):
            va = problem.interest[i, a]
            if va < 0:
                continue
            sc &= ~((here != a) & (va > mine) & ~full[:, a])

    cs = np.ones(N, dtype=bool)
    scs = np.ones(N, dtype=bool)
    for c in sound_coalitions(problem):
        members = sorted(c.group)
        cu = np.array([utility(problem, i, c.group, c.activity) for i in members])
        cur = U[:, members]
        strict = cu > cur + EPS
        weak = cu >= cur - EPS
        cs &= ~np.all(strict, axis=1)
        scs &= ~(np.all(weak, axis=1) & np.any(strict, axis=1))

    best = np.array([best_coalition(problem, i)[0] for i in range(m)])
    perfect = np.all(U >= best - EPS, axis=1)

    Wu = U.mean(axis=1)
    We = U.min(axis=1)
    maxutil = Wu >= Wu.max() - EPS
    maxegal = We >= We.max() - EPS
    po = kernels.pareto_flags(U, EPS)

    flags = {
        "IR": ir, "CIS": cis, "PO": po, "IS": is_, "NS": ns, "SC": sc,
        "MaxEgal": maxegal, "MaxUtil": maxutil, "P": perfect, "CS": cs, "SCS": scs,
    }
    counts = {k: int(flags[k].sum()) for k in CENSUS_KEYS}
    divergent = None
    if reference is not None:
        divergent = [k for k in CENSUS_KEYS if k in reference and counts[k] != reference[k]]
    return Census(
        total=N,
        counts=counts,
        max_utilitarian=float(Wu.max()),
        max_egalitarian=float(We.max()),
        maxutil_matchings=tuple(Matching(tuple(assign[r])) for r in np.flatnonzero(maxutil)),
        maxegal_matchings=tuple(Matching(tuple(assign[r])) for r in np.flatnonzero(maxegal)),
        assignments=assign,
        flags=flags,
        utilities=U,
        divergent=divergent,
    )


def lattice_violations(c: Census) -> list[tuple[str, str, int]]:
    """Every (premise, conclusion, row) where an inclusion arrow fails."""
    out = []
    for premise, conclusion in LATTICE:
        bad = c.flags[premise] & ~c.flags[conclusion]
        out.extend((premise, conclusion, int(r)) for r in np.flatnonzero(bad))
    return out


def appendix_objective(problem: IAProblem, x: np.ndarray) -> float:
    """Quadratic utilitarian objective on a 0/1 indicator matrix ``x[i, a]``.

    Pair terms are weighted by ``x[i, a] * x[j, a]`` (both on ``a``).
    """
    m = problem.m
    x = np.asarray(x, dtype=np.float64)
    total = 0.0
    for i in range(m):
        for a in range(problem.n):
            pair = sum(x[i, a] * x[j, a] * problem.affinity[i, j] for j in range(m) if j != i)
            total += 0.5 * (x[i, a] * problem.interest[i, a] + pair / (m - 1))
    return total / m


def indicator(problem: IAProblem, matching: Matching) -> np.ndarray:
    x = np.zeros((problem.m, problem.n))
    for i, a in enumerate(matching.assignment):
        if a != VOID:
            x[i, a] = 1.0
    return x
