"""Centralized clearing-house mechanisms and the hill-climbing baseline."""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .criteria import SocialRule, coalition_guard
from .errors import CapacityExceededError, DomainError
from .model import EPS, VOID, IAProblem, Matching, utility


class Mechanism(enum.Enum):
    SELECTIVE = "selective"
    SELECTIVE_APPROX = "selective-approx"
    INCLUSIVE = "inclusive"


class Event(enum.Enum):
    PROPOSE = "PROPOSE"
    ACCEPT = "ACCEPT"
    REJECT = "REJECT"
    EJECT = "EJECT"
    GIVEUP = "GIVEUP"


@dataclass(frozen=True)
class TraceRecord:
    step: int
    event: Event
    individual: int
    activity: int
    group: frozenset

    def to_dict(self, problem: Optional[IAProblem] = None) -> dict:
        if problem is None:
            return {
                "step": self.step, "event": self.event.value, "individual": self.individual,
                "activity": self.activity, "group": sorted(self.group),
            }
        ids = problem.individual_ids
        return {
            "step": self.step,
            "event": self.event.value,
            "individual": ids[self.individual],
            "activity": problem.activity_label(self.activity),
            "group": [ids[j] for j in sorted(self.group)],
        }


@dataclass(frozen=True)
class Decision:
    """One group decision: the candidate groups offered and the one kept."""

    step: int
    activity: int
    proposer: int
    candidates: tuple[frozenset, ...]
    chosen: frozenset


@dataclass
class SolveResult:
    matching: Matching
    trace: list[TraceRecord]
    # (Σ|concessions|, |free|) before the first iteration and after each one
    variants: list[tuple[int, int]]
    decisions: list[Decision] = field(default_factory=list)


def concession_list(problem: IAProblem, i: int) -> list[int]:
    """Attractive activities (interest >= 0) by decreasing interest, ties by declaration."""
    row = problem.interest[i]
    attractive = [a for a in range(problem.n) if row[a] >= 0]
    return sorted(attractive, key=lambda a: -row[a])


def _scores(problem: IAProblem, rule: SocialRule, activity: int, groups: Sequence[frozenset]) -> list[float]:
    out = []
    for g in groups:
        us = [utility(problem, j, g, activity) for j in sorted(g)]
        out.append(sum(us) if rule is SocialRule.UTILITARIAN else min(us))
    return out


def pick_group(groups: Sequence[frozenset], scores: Sequence[float], proposer: Optional[int]) -> frozenset:
    top = max(scores)
    near = [g for g, s in zip(groups, scores) if s >= top - EPS]
    return min(near, key=lambda g: (proposer not in g, -len(g), tuple(sorted(g))))


def decide_group(
    problem: IAProblem,
    rule: SocialRule,
    activity: int,
    candidates: Iterable[Iterable[int]],
    proposer: Optional[int] = None,
) -> frozenset:
    """The rule-maximal candidate group for ``activity``.

    Ties (within tolerance) go to groups containing ``proposer``, then to
    larger groups, then to the lexicographically smallest member sequence.
    """
    groups = [frozenset(g) for g in candidates]
    if not groups:
        raise DomainError("decide_group needs at least one candidate")
    cap = problem.capacity(activity)
    for g in groups:
        if not g or len(g) > cap:
            raise DomainError(f"candidate {sorted(g)} is not a sound group for activity {activity}")
    return pick_group(groups, _scores(problem, rule, activity, groups), proposer)


def _one_out_scores(problem: IAProblem, rule: SocialRule, activity: int, members: list[int]):
    """Scores of the whole group and of every group with one member removed."""
    idx = np.array(members)
    W = problem.affinity[np.ix_(idx, idx)]
    v = problem.interest[idx, activity]
    scale = problem.m - 1
    rowsum = W.sum(axis=1)
    full = (rowsum / scale + v) / 2
    # drop[x, j]: utility of j once members[x] has left
    drop = ((rowsum[None, :] - W.T) / scale + v[None, :]) / 2
    k = len(members)
    mask = ~np.eye(k, dtype=bool)
    if rule is SocialRule.UTILITARIAN:
        whole = float(full.sum())
        each = np.where(mask, drop, 0.0).sum(axis=1)
    else:
        whole = float(full.min())
        each = np.where(mask, drop, np.inf).min(axis=1)
    return whole, [float(s) for s in each]


def candidate_groups(
    mechanism: Mechanism, cap: int, g: Iterable[int], i: int
) -> Optional[list[frozenset]]:
    """Groups a host of capacity ``cap`` chooses from when ``i`` proposes to ``g``.

    ``None`` means the proposer is accepted without a decision.
    """
    g = frozenset(g)
    G = sorted(g | {i})
    if mechanism is Mechanism.INCLUSIVE:
        if len(g) < cap:
            return None
        return [frozenset(G) - {x} for x in G]
    if not g:
        return None
    if mechanism is Mechanism.SELECTIVE_APPROX:
        out = [frozenset(G)] if len(G) <= cap else []
        return out + [frozenset(G) - {x} for x in G]
    if len(G) > coalition_guard():
        raise CapacityExceededError(
            f"exact selective decision over {len(G)} individuals exceeds the guard "
            "(raise it with IAMATCH_COALITION_GUARD)"
        )
    top = min(len(g) + 1, cap)
    return [frozenset(s) for k in range(1, top + 1) for s in itertools.combinations(G, k)]


class _Clearing:
    def __init__(self, problem: IAProblem, rule: SocialRule, mechanism: Mechanism):
        self.p = problem
        self.rule = rule
        self.mechanism = mechanism
        self.conc = [deque(concession_list(problem, i)) for i in range(problem.m)]
        self.free = deque(range(problem.m))
        self.groups: list[set[int]] = [set() for _ in range(problem.n)]
        self.assign = [VOID] * problem.m
        self.trace: list[TraceRecord] = []
        self.decisions: list[Decision] = []
        self.step = 0

    def variant(self) -> tuple[int, int]:
        return sum(len(c) for c in self.conc), len(self.free)

    def log(self, event: Event, i: int, a: int) -> None:
        g = frozenset(self.groups[a]) if a != VOID else frozenset()
        self.trace.append(TraceRecord(self.step, event, i, a, g))

    def choose(self, a: int, i: int, cands: list[frozenset]) -> frozenset:
        if self.mechanism is Mechanism.SELECTIVE:
            return pick_group(cands, _scores(self.p, self.rule, a, cands), i)
        members = sorted(self.groups[a] | {i})
        whole, each = _one_out_scores(self.p, self.rule, a, members)
        G = frozenset(members)
        groups = [G - {x} for x in members]
        scores = list(each)
        if len(cands) > len(members):
            groups.insert(0, G)
            scores.insert(0, whole)
        return pick_group(groups, scores, i)

    def run(self) -> SolveResult:
        variants = [self.variant()]
        while self.free:
            self.step += 1
            i = self.free.popleft()
            if not self.conc[i]:
                self.log(Event.GIVEUP, i, VOID)
                variants.append(self.variant())
                continue
            a = self.conc[i].popleft()
            self.log(Event.PROPOSE, i, a)
            g = self.groups[a]
            cands = candidate_groups(self.mechanism, self.p.capacities[a], g, i)
            if cands is None:
                g.add(i)
                self.assign[i] = a
                self.log(Event.ACCEPT, i, a)
            else:
                best = self.choose(a, i, cands)
                self.decisions.append(Decision(self.step, a, i, tuple(cands), best))
                leavers = sorted(g - best)
                g.intersection_update(best)
                for j in leavers:
                    self.assign[j] = VOID
                    self.log(Event.EJECT, j, a)
                    self.free.append(j)
                if i in best:
                    g.add(i)
                    self.assign[i] = a
                    self.log(Event.ACCEPT, i, a)
                else:
                    self.log(Event.REJECT, i, a)
                    self.free.append(i)
            variants.append(self.variant())
        return SolveResult(Matching(tuple(self.assign)), self.trace, variants, self.decisions)


def solve_selective(problem: IAProblem, rule: SocialRule, approximation: bool = True) -> SolveResult:
    """Selective clearing house: the host re-decides its group on every proposal."""
    mech = Mechanism.SELECTIVE_APPROX if approximation else Mechanism.SELECTIVE
    return _Clearing(problem, rule, mech).run()


def solve_inclusive(problem: IAProblem, rule: SocialRule) -> SolveResult:
    """Inclusive clearing house: accept below capacity, otherwise exclude one."""
    return _Clearing(problem, rule, Mechanism.INCLUSIVE).run()


def solve(problem: IAProblem, mechanism: Mechanism, rule: SocialRule) -> SolveResult:
    if mechanism is Mechanism.INCLUSIVE:
        return solve_inclusive(problem, rule)
    return solve_selective(problem, rule, approximation=mechanism is Mechanism.SELECTIVE_APPROX)


@dataclass
class HillClimbResult:
    matching: Matching
    initial: Matching
    history: list[float]
    converged: bool

    @property
    def steps(self) -> int:
        return len(self.history) - 1


def random_full_matching(problem: IAProblem, seed: Optional[int]) -> Matching:
    """A uniformly drawn sound matching with everybody on a real activity."""
    slots = np.repeat(np.arange(problem.n), problem.capacities)
    if len(slots) < problem.m:
        raise DomainError(
            f"{problem.m} individuals do not fit in a total capacity of {len(slots)}"
        )
    rng = np.random.default_rng(seed)
    picked = slots[rng.permutation(len(slots))[: problem.m]]
    return Matching(tuple(int(a) for a in picked))


def hill_climb(
    problem: IAProblem,
    objective: SocialRule,
    seed: Optional[int] = None,
    max_steps: int = 10_000,
) -> HillClimbResult:
    """Steepest ascent over single moves and pairwise swaps between real activities."""
    if max_steps < 0:
        raise DomainError("max_steps must be non-negative")
    start = random_full_matching(problem, seed)
    obj = kernels.OBJ_UTILITARIAN if objective is SocialRule.UTILITARIAN else kernels.OBJ_EGALITARIAN
    assign, history, converged = kernels.hill_climb(
        problem.interest, problem.affinity, np.array(problem.capacities),
        np.array(start.assignment), obj, max_steps, EPS,
    )
    return HillClimbResult(Matching(tuple(int(a) for a in assign)), start, list(history), converged)
