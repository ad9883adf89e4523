"""Rationality, stability, efficiency, welfare and cohesion of a matching.

Every check returns a :class:`Verdict`; when it fails, ``witness`` holds an
independently checkable counter-example (an individual, a deviation, a
blocking coalition or a dominating matching).
"""

from __future__ import annotations

import enum
import itertools
import os
from dataclasses import dataclass, field
from typing import Any, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .errors import CapacityExceededError, DomainError
from .model import (
    VOID,
    Coalition,
    IAProblem,
    Matching,
    ge,
    gt,
    is_full,
    is_sound_coalition,
    newcomers,
    require_sound,
    utilities,
    utility,
)


class SocialRule(enum.Enum):
    UTILITARIAN = "utilitarian"
    EGALITARIAN = "egalitarian"


class BlockingMode(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"


class Verdict(NamedTuple):
    holds: bool
    witness: Any = None

    def __bool__(self) -> bool:
        return self.holds


class Deviation(NamedTuple):
    """Individual ``individual`` leaving for ``activity``."""

    individual: int
    activity: int


class BetterCoalition(NamedTuple):
    individual: int
    coalition: Coalition


DEFAULT_COALITION_GUARD = 20


def coalition_guard() -> int:
    return int(os.environ.get("IAMATCH_COALITION_GUARD", DEFAULT_COALITION_GUARD))


def utilitarian_welfare(problem: IAProblem, matching: Matching) -> float:
    """U(M): mean utility over all individuals."""
    require_sound(problem, matching)
    return float(utilities(problem, matching).mean())


def egalitarian_welfare(problem: IAProblem, matching: Matching) -> float:
    """E(M): utility of the worst-off individual."""
    require_sound(problem, matching)
    return float(utilities(problem, matching).min())


def welfare(problem: IAProblem, matching: Matching, rule: SocialRule) -> float:
    if rule is SocialRule.UTILITARIAN:
        return utilitarian_welfare(problem, matching)
    return egalitarian_welfare(problem, matching)


def is_individually_rational(problem: IAProblem, matching: Matching) -> Verdict:
    require_sound(problem, matching)
    u = utilities(problem, matching)
    for i in range(problem.m):
        if gt(0.0, u[i]):
            return Verdict(False, i)
    return Verdict(True)


def _coalition_utilities(problem: IAProblem, c: Coalition) -> dict[int, float]:
    return {i: utility(problem, i, c.group, c.activity) for i in sorted(c.group)}


def blocks(
    problem: IAProblem,
    matching: Matching,
    c: Coalition,
    mode: BlockingMode = BlockingMode.STRONG,
) -> bool:
    """Whether the non-empty sound coalition ``c`` blocks ``matching``.

    Only the coalition's members are consulted; current occupants of the
    activity who are not members play no role.
    """
    if not c.group:
        raise DomainError("a blocking coalition must be non-empty")
    if not is_sound_coalition(problem, c):
        raise DomainError("a blocking coalition must be sound")
    if c.activity != VOID and not 0 <= c.activity < problem.n:
        raise DomainError(f"unknown activity {c.activity}")
    require_sound(problem, matching)
    current = utilities(problem, matching)
    return _blocks_with(problem, current, c, mode)


def _blocks_with(problem, current, c: Coalition, mode: BlockingMode) -> bool:
    new = _coalition_utilities(problem, c)
    if mode is BlockingMode.STRONG:
        return all(gt(new[i], current[i]) for i in new)
    return all(ge(new[i], current[i]) for i in new) and any(gt(new[i], current[i]) for i in new)


def sound_coalitions(problem: IAProblem) -> Iterator[Coalition]:
    """Every non-empty sound coalition.

    Real activities in declared order (groups by size, then lexicographic),
    followed by the void singletons.
    """
    people = range(problem.m)
    for a in range(problem.n):
        for k in range(1, min(problem.capacities[a], problem.m) + 1):
            for g in itertools.combinations(people, k):
                yield Coalition(a, frozenset(g))
    for i in people:
        yield Coalition(VOID, frozenset((i,)))


def _guard(problem: IAProblem, max_individuals: Optional[int]) -> None:
    limit = coalition_guard() if max_individuals is None else max_individuals
    if problem.m > limit:
        raise CapacityExceededError(
            f"coalition enumeration needs m <= {limit}, got m = {problem.m}"
        )


def _core_check(problem, matching, mode, max_individuals) -> Verdict:
    require_sound(problem, matching)
    _guard(problem, max_individuals)
    current = utilities(problem, matching)
    for c in sound_coalitions(problem):
        if _blocks_with(problem, current, c, mode):
            return Verdict(False, c)
    return Verdict(True)


def is_core_stable(
    problem: IAProblem, matching: Matching, max_individuals: Optional[int] = None
) -> Verdict:
    """CS: no non-empty sound coalition strongly blocks ``matching``."""
    return _core_check(problem, matching, BlockingMode.STRONG, max_individuals)


def is_strict_core_stable(
    problem: IAProblem, matching: Matching, max_individuals: Optional[int] = None
) -> Verdict:
    """SCS: no non-empty sound coalition weakly blocks ``matching``."""
    return _core_check(problem, matching, BlockingMode.WEAK, max_individuals)


def _deviation_check(problem: IAProblem, matching: Matching, level: str) -> Verdict:
    require_sound(problem, matching)
    current = utilities(problem, matching)
    targets = list(range(problem.n)) + [VOID]
    for i in range(problem.m):
        here = matching.assignment[i]
        for a in targets:
            if a == here or is_full(problem, matching, a):
                continue
            hosts = newcomers(problem, matching, a)
            group = hosts | {i}
            if not gt(utility(problem, i, group, a), current[i]):
                continue
            if level == "ns":
                return Verdict(False, Deviation(i, a))
            if any(gt(current[j], utility(problem, j, group, a)) for j in hosts):
                continue
            if level == "cis" and here != VOID:
                rest = matching.group(i) - {i}
                if any(gt(current[j], utility(problem, j, rest, here)) for j in rest):
                    continue
            return Verdict(False, Deviation(i, a))
    return Verdict(True)


def is_nash_stable(problem: IAProblem, matching: Matching) -> Verdict:
    """NS: no individual gains by joining a non-full activity (or the void)."""
    return _deviation_check(problem, matching, "ns")


def is_individually_stable(problem: IAProblem, matching: Matching) -> Verdict:
    """IS: every profitable move is vetoed by one of the newcomers' hosts."""
    return _deviation_check(problem, matching, "is")


def is_contractually_individually_stable(problem: IAProblem, matching: Matching) -> Verdict:
    """CIS: like IS, but members of the group being left may also veto."""
    return _deviation_check(problem, matching, "cis")


def best_coalition(problem: IAProblem, i: int) -> tuple[float, Coalition]:
    """A utility-maximal sound coalition for ``i`` and its utility.

    Group affinity is additively separable, so on each activity the best group
    adds ``i``'s most liked peers (positive affinity only) up to capacity.
    """
    row = problem.affinity[i]
    liked = sorted((j for j in range(problem.m) if j != i and row[j] > 0), key=lambda j: (-row[j], j))
    options = []
    for a in range(problem.n):
        group = frozenset([i, *liked[: problem.capacities[a] - 1]])
        options.append((utility(problem, i, group, a), Coalition(a, group)))
    options.append((0.0, Coalition(VOID, frozenset((i,)))))
    best = options[0]
    for opt in options[1:]:
        if gt(opt[0], best[0]):
            best = opt
    return best


def is_perfect(problem: IAProblem, matching: Matching) -> Verdict:
    """P: everyone sits in one of their most preferred coalitions."""
    require_sound(problem, matching)
    current = utilities(problem, matching)
    for i in range(problem.m):
        u, c = best_coalition(problem, i)
        if gt(u, current[i]):
            return Verdict(False, BetterCoalition(i, c))
    return Verdict(True)


def pareto_dominates(problem: IAProblem, better: Matching, worse: Matching) -> bool:
    """Someone strictly gains from ``worse`` to ``better`` and nobody loses."""
    require_sound(problem, better)
    require_sound(problem, worse)
    return dominates_vector(utilities(problem, better), utilities(problem, worse))


def dominates_vector(better: Sequence[float], worse: Sequence[float]) -> bool:
    gain = False
    for x, y in zip(better, worse):
        if gt(y, x):
            return False
        if gt(x, y):
            gain = True
    return gain


def is_socially_cohesive(problem: IAProblem, matching: Matching) -> Verdict:
    """SC: every attractive activity someone prefers to their own is full."""
    require_sound(problem, matching)
    counts = matching.counts(problem.n)
    for i in range(problem.m):
        here = matching.assignment[i]
        mine = problem.interest_in(i, here)
        for a in range(problem.n):
            if a == here:
                continue
            va = problem.interest[i, a]
            if va >= 0 and va > mine and counts[a] < problem.capacities[a]:
                return Verdict(False, Deviation(i, a))
    return Verdict(True)


PROPERTY_KEYS = ("ir", "cs", "scs", "ns", "is", "cis", "p", "sc", "po")
EXPONENTIAL_KEYS = frozenset({"cs", "scs", "po"})


@dataclass
class PropertyReport:
    """Flags for every requested property; ``None`` means not evaluated."""

    utilitarian: float
    egalitarian: float
    flags: dict[str, Optional[bool]] = field(default_factory=dict)
    witnesses: dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Optional[bool]:
        return self.flags.get(key)

    def to_dict(self, problem: IAProblem) -> dict:
        doc: dict[str, Any] = {k: self.flags.get(k) for k in PROPERTY_KEYS}
        doc["utilitarian"] = self.utilitarian
        doc["egalitarian"] = self.egalitarian
        doc["witness"] = {k: witness_to_json(problem, w) for k, w in self.witnesses.items()}
        return doc


def witness_to_json(problem: IAProblem, w: Any) -> Any:
    ind = problem.individual_ids
    if w is None:
        return None
    if isinstance(w, Deviation):
        return {"individual": ind[w.individual], "activity": problem.activity_label(w.activity)}
    if isinstance(w, Coalition):
        return {
            "activity": problem.activity_label(w.activity),
            "group": [ind[i] for i in sorted(w.group)],
        }
    if isinstance(w, BetterCoalition):
        return {"individual": ind[w.individual], "coalition": witness_to_json(problem, w.coalition)}
    if isinstance(w, Matching):
        return {
            "assignments": {
                ind[i]: problem.activity_label(a) for i, a in enumerate(w.assignment)
            }
        }
    if isinstance(w, (int, np.integer)):
        return {"individual": ind[int(w)]}
    return repr(w)


def evaluate(
    problem: IAProblem,
    matching: Matching,
    properties: Sequence[str] = PROPERTY_KEYS,
    max_individuals: Optional[int] = None,
) -> PropertyReport:
    """Evaluate the requested ``properties`` (keys of ``PROPERTY_KEYS``)."""
    from .oracle import is_pareto_optimal

    require_sound(problem, matching)
    unknown = set(properties) - set(PROPERTY_KEYS)
    if unknown:
        raise DomainError(f"unknown properties {sorted(unknown)}")
    u = utilities(problem, matching)
    report = PropertyReport(utilitarian=float(u.mean()), egalitarian=float(u.min()))
    checks = {
        "ir": lambda: is_individually_rational(problem, matching),
        "cs": lambda: is_core_stable(problem, matching, max_individuals),
        "scs": lambda: is_strict_core_stable(problem, matching, max_individuals),
        "ns": lambda: is_nash_stable(problem, matching),
        "is": lambda: is_individually_stable(problem, matching),
        "cis": lambda: is_contractually_individually_stable(problem, matching),
        "p": lambda: is_perfect(problem, matching),
        "sc": lambda: is_socially_cohesive(problem, matching),
        "po": lambda: is_pareto_optimal(problem, matching, max_individuals=max_individuals),
    }
    for key in PROPERTY_KEYS:
        if key not in properties:
            continue
        verdict = checks[key]()
        report.flags[key] = verdict.holds
        if not verdict.holds:
            report.witnesses[key] = verdict.witness
    return report
