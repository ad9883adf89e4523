"""Problems, matchings and utilities for the individuals/activities problem.

Individuals and activities are addressed by their position (0-based) in the
problem's declared order; string ids are only labels used for I/O.  The void
activity ("do nothing", infinite capacity, neutral interest) is ``VOID``.

Utilities follow the mean instantiation::

    w_i(g)   = sum(w[i, j] for j in g - {i}) / (m - 1)
    u_i(g,a) = (w_i(g) + v_i(a)) / 2,   v_i(VOID) = 0
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DomainError, StructuralError, UnsoundMatchingError

VOID = -1

# Absolute tolerance for every utility/welfare comparison.
EPS = 1e-12


def gt(x: float, y: float) -> bool:
    """Strict preference ``x > y`` robust to rounding."""
    return x > y + EPS


def ge(x: float, y: float) -> bool:
    """Weak preference ``x >= y`` robust to rounding."""
    return x >= y - EPS


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class IAProblem:
    """An IA problem: ``m`` individuals, ``n`` capacitated activities.

    ``interest[i, a]`` is v_i(a) and ``affinity[i, j]`` is w_i(j).  The
    diagonal of ``affinity`` is meaningless and forced to zero.
    """

    activity_ids: tuple[str, ...]
    capacities: tuple[int, ...]
    individual_ids: tuple[str, ...]
    interest: np.ndarray
    affinity: np.ndarray
    seed: Optional[int] = None
    _ind_index: dict = field(init=False, repr=False, compare=False)
    _act_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        set_ = object.__setattr__
        set_(self, "activity_ids", tuple(str(a) for a in self.activity_ids))
        set_(self, "individual_ids", tuple(str(i) for i in self.individual_ids))
        set_(self, "capacities", tuple(int(c) for c in self.capacities))
        m, n = len(self.individual_ids), len(self.activity_ids)
        if m < 2:
            raise DomainError(f"an IA problem needs at least 2 individuals, got {m}")
        if n < 1:
            raise DomainError("an IA problem needs at least 1 activity")
        if len(set(self.individual_ids)) != m:
            raise DomainError("duplicate individual ids")
        if len(set(self.activity_ids)) != n:
            raise DomainError("duplicate activity ids")
        if len(self.capacities) != n:
            raise DomainError("one capacity per activity is required")
        if any(c < 1 for c in self.capacities):
            raise DomainError("capacities must be positive integers")
        interest = _readonly(self.interest)
        affinity = np.array(self.affinity, dtype=np.float64, copy=True)
        if interest.shape != (m, n):
            raise DomainError(f"interest must have shape {(m, n)}, got {interest.shape}")
        if affinity.shape != (m, m):
            raise DomainError(f"affinity must have shape {(m, m)}, got {affinity.shape}")
        np.fill_diagonal(affinity, 0.0)
        affinity = _readonly(affinity)
        for name, arr in (("interest", interest), ("affinity", affinity)):
            if not np.all(np.isfinite(arr)) or np.any(np.abs(arr) > 1.0):
                raise DomainError(f"{name} values must lie in [-1, 1]")
        set_(self, "interest", interest)
        set_(self, "affinity", affinity)
        set_(self, "_ind_index", {s: k for k, s in enumerate(self.individual_ids)})
        set_(self, "_act_index", {s: k for k, s in enumerate(self.activity_ids)})

    @property
    def m(self) -> int:
        return len(self.individual_ids)

    @property
    def n(self) -> int:
        return len(self.activity_ids)

    def capacity(self, a: int) -> int:
        """Capacity of the coalition on ``a`` (1 for the void activity)."""
        if a == VOID:
            return 1
        return self.capacities[a]

    def individual(self, ident: str) -> int:
        try:
            return self._ind_index[str(ident)]
        except KeyError:
            raise StructuralError(f"unknown individual id {ident!r}") from None

    def activity(self, ident: Optional[str]) -> int:
        if ident is None:
            return VOID
        try:
            return self._act_index[str(ident)]
        except KeyError:
            raise StructuralError(f"unknown activity id {ident!r}") from None

    def activity_label(self, a: int) -> Optional[str]:
        return None if a == VOID else self.activity_ids[a]

    def interest_in(self, i: int, a: int) -> float:
        return 0.0 if a == VOID else float(self.interest[i, a])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IAProblem):
            return NotImplemented
        return (
            self.activity_ids == other.activity_ids
            and self.capacities == other.capacities
            and self.individual_ids == other.individual_ids
            and self.seed == other.seed
            and np.array_equal(self.interest, other.interest)
            and np.array_equal(self.affinity, other.affinity)
        )

    __hash__ = None  # type: ignore[assignment]

    def matching(self, assignments: Mapping[str, Optional[str]]) -> "Matching":
        """Build a matching from an id-keyed mapping (``None`` = void)."""
        out = [VOID] * self.m
        seen = set()
        for ident, act in assignments.items():
            i = self.individual(ident)
            out[i] = self.activity(act)
            seen.add(i)
        if len(seen) != self.m:
            missing = [self.individual_ids[i] for i in range(self.m) if i not in seen]
            raise StructuralError(f"assignment misses individuals {missing}")
        return Matching(tuple(out))

    def matching_from_groups(self, groups: Mapping[str, Iterable[str]]) -> "Matching":
        """Build a matching from ``{activity-id: member ids}``; others are void."""
        out = [VOID] * self.m
        for act, members in groups.items():
            a = self.activity(act)
            for ident in members:
                out[self.individual(ident)] = a
        return Matching(tuple(out))


@dataclass(frozen=True)
class Matching:
    """A matching stored as its assignment ``individual -> activity | VOID``.

    Groups and participation are derived, so the partition equations hold by
    construction; soundness is the only extra condition to check.
    """

    assignment: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignment", tuple(int(a) for a in self.assignment))

    @classmethod
    def trivial(cls, m: int) -> "Matching":
        """The matching where every individual is inactive."""
        return cls((VOID,) * m)

    @property
    def m(self) -> int:
        return len(self.assignment)

    def activity_of(self, i: int) -> int:
        return self.assignment[i]

    def participants(self, a: int) -> frozenset[int]:
        return frozenset(i for i, b in enumerate(self.assignment) if b == a)

    def group(self, i: int) -> frozenset[int]:
        a = self.assignment[i]
        if a == VOID:
            return frozenset((i,))
        return self.participants(a)

    def counts(self, n: int) -> list[int]:
        out = [0] * n
        for a in self.assignment:
            if 0 <= a < n:
                out[a] += 1
        return out

    def groups(self, n: int) -> list[frozenset[int]]:
        """Participants of every real activity, in declared order."""
        out: list[set[int]] = [set() for _ in range(n)]
        for i, a in enumerate(self.assignment):
            if 0 <= a < n:
                out[a].add(i)
        return [frozenset(g) for g in out]


class Coalition(NamedTuple):
    """An activity (or ``VOID``) together with the group practising it."""

    activity: int
    group: frozenset[int]


def coalition(activity: int, group: Iterable[int]) -> Coalition:
    return Coalition(int(activity), frozenset(int(i) for i in group))


def coalition_of(matching: Matching, i: int) -> Coalition:
    """C_M(i): the coalition of ``matching`` containing ``i``."""
    return Coalition(matching.assignment[i], matching.group(i))


def is_sound_coalition(problem: IAProblem, c: Coalition) -> bool:
    return len(c.group) <= problem.capacity(c.activity)


class ActivityStatus(enum.Enum):
    OVERSUBSCRIBED = "oversubscribed"
    UNDERSUBSCRIBED = "undersubscribed"
    FULL = "full"


def group_affinity(problem: IAProblem, i: int, g: Iterable[int]) -> float:
    """Mean-normalized affinity of ``i`` for group ``g`` (which must contain i)."""
    g = set(g)
    if i not in g:
        raise DomainError(f"individual {i} is not in group {sorted(g)}")
    row = problem.affinity[i]
    s = 0.0
    for j in sorted(g):
        if j != i:
            s += row[j]
    return s / (problem.m - 1)


def utility(problem: IAProblem, i: int, g: Iterable[int], a: int) -> float:
    """u_i(g, a): mean of the group affinity and the interest in ``a``."""
    g = set(g)
    if a == VOID and g != {i}:
        raise DomainError("on the void activity an individual is alone")
    if a != VOID and not 0 <= a < problem.n:
        raise DomainError(f"unknown activity {a}")
    return (group_affinity(problem, i, g) + problem.interest_in(i, a)) / 2


def utilities(problem: IAProblem, matching: Matching) -> np.ndarray:
    """Vector of u_i(g_M(i), a_M(i)) for every individual."""
    _check_shape(problem, matching)
    m = problem.m
    out = np.zeros(m)
    for a, g in enumerate(matching.groups(problem.n)):
        if not g:
            continue
        idx = np.array(sorted(g))
        aff = problem.affinity[np.ix_(idx, idx)].sum(axis=1) / (m - 1)
        out[idx] = (aff + problem.interest[idx, a]) / 2
    return out


@dataclass
class ValidationReport:
    """Outcome of :func:`validate_matching`; ``ok`` when nothing was found."""

    oversubscribed: dict[int, int] = field(default_factory=dict)
    unknown_activity: dict[int, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.oversubscribed and not self.unknown_activity

    def messages(self, problem: Optional[IAProblem] = None) -> list[str]:
        out = []
        for a, excess in sorted(self.oversubscribed.items()):
            name = problem.activity_ids[a] if problem else str(a)
            out.append(f"activity {name} oversubscribed by {excess}")
        for i, a in sorted(self.unknown_activity.items()):
            name = problem.individual_ids[i] if problem else str(i)
            out.append(f"individual {name} assigned to unknown activity {a}")
        return out


def _check_shape(problem: IAProblem, matching: Matching) -> None:
    if matching.m != problem.m:
        raise StructuralError(
            f"matching covers {matching.m} individuals, problem has {problem.m}"
        )


def validate_matching(problem: IAProblem, matching: Matching) -> ValidationReport:
    _check_shape(problem, matching)
    report = ValidationReport()
    for i, a in enumerate(matching.assignment):
        if a != VOID and not 0 <= a < problem.n:
            report.unknown_activity[i] = a
    for a, k in enumerate(matching.counts(problem.n)):
        if k > problem.capacities[a]:
            report.oversubscribed[a] = k - problem.capacities[a]
    return report


def require_sound(problem: IAProblem, matching: Matching) -> None:
    """Raise :class:`UnsoundMatchingError` unless ``matching`` is sound."""
    report = validate_matching(problem, matching)
    if not report.ok:
        raise UnsoundMatchingError("; ".join(report.messages(problem)))


def is_sound(problem: IAProblem, matching: Matching) -> bool:
    return validate_matching(problem, matching).ok


def _check_activity(problem: IAProblem, a: int) -> None:
    if a != VOID and not 0 <= a < problem.n:
        raise DomainError(f"unknown activity {a}")


def participants(matching: Matching, a: int) -> frozenset[int]:
    return matching.participants(a)


def activity_status(problem: IAProblem, matching: Matching, a: int) -> ActivityStatus:
    _check_activity(problem, a)
    if a == VOID:
        return ActivityStatus.UNDERSUBSCRIBED
    k = len(matching.participants(a))
    c = problem.capacities[a]
    if k > c:
        return ActivityStatus.OVERSUBSCRIBED
    if k < c:
        return ActivityStatus.UNDERSUBSCRIBED
    return ActivityStatus.FULL


def is_full(problem: IAProblem, matching: Matching, a: int) -> bool:
    return activity_status(problem, matching, a) is ActivityStatus.FULL


def newcomers(problem: IAProblem, matching: Matching, a: int) -> frozenset[int]:
    """The partners met by a deviation toward ``a`` (nobody on the void activity)."""
    _check_activity(problem, a)
    if a == VOID:
        return frozenset()
    return matching.participants(a)


def default_capacity(m: int, n: int) -> int:
    return math.ceil(m / n)


def generate_random(
    m: int,
    n: int,
    seed: Optional[int] = None,
    capacity: int | Sequence[int] | None = None,
) -> IAProblem:
    """Random instance with interests and affinities uniform in [-1, 1].

    Every activity gets capacity ``ceil(m / n)`` unless ``capacity`` is an int
    (shared) or a sequence (one per activity).  With ``seed=None`` a fresh
    seed is drawn and recorded so the instance stays reproducible.
    """
    if m < 2 or n < 1:
        raise DomainError(f"need m >= 2 and n >= 1, got m={m}, n={n}")
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2**63))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    interest = rng.uniform(-1.0, 1.0, size=(m, n))
    affinity = rng.uniform(-1.0, 1.0, size=(m, m))
    np.fill_diagonal(affinity, 0.0)
    if capacity is None:
        caps = (default_capacity(m, n),) * n
    elif isinstance(capacity, int):
        caps = (capacity,) * n
    else:
        caps = tuple(capacity)
    width = len(str(m))
    return IAProblem(
        activity_ids=tuple(f"a{k + 1}" for k in range(n)),
        capacities=caps,
        individual_ids=tuple(str(k + 1).zfill(width) for k in range(m)),
        interest=interest,
        affinity=affinity,
        seed=seed,
    )


def toy_problem() -> IAProblem:
    """The four-jugglers walk-through instance (clubs ``a``, balls ``b``)."""
    return IAProblem(
        activity_ids=("a", "b"),
        capacities=(2, 2),
        individual_ids=("1", "2", "3", "4"),
        interest=[[0.5, 0.25]] * 4,
        affinity=[
            [0.0, 1.0, -0.5, -1.0],
            [1.0, 0.0, 0.5, -1.0],
            [1.0, 0.5, 0.0, -1.0],
            [1.0, 1.0, -1.0, 0.0],
        ],
    )
