import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import negative_problem, problems, toy_matching
from iamatch.criteria import SocialRule, is_socially_cohesive, utilitarian_welfare, welfare
from iamatch.engine import (
    Event, Mechanism, concession_list, decide_group, hill_climb, random_full_matching, solve,
    solve_inclusive, solve_selective,
)
from iamatch.errors import CapacityExceededError, DomainError
from iamatch.model import IAProblem, Matching, generate_random, is_sound


def test_concession_examples(toy):
    assert concession_list(toy, 0) == [0, 1]
    assert concession_list(negative_problem(), 0) == []
    p = IAProblem(("a", "b", "c"), (1, 1, 1), ("1", "2"),
                  np.array([[0.3, 0.3, -0.1], [0.0, 0.2, 0.9]]), np.zeros((2, 2)))
    assert concession_list(p, 0) == [0, 1]
    assert concession_list(p, 1) == [2, 1, 0]


def test_decide_group_examples(toy):
    subsets = [s for k in (1, 2) for s in itertools.combinations(range(3), k)]
    assert decide_group(toy, SocialRule.UTILITARIAN, 0, subsets) == {0, 1}
    assert decide_group(toy, SocialRule.UTILITARIAN, 0, [{2}]) == {2}
    assert decide_group(toy, SocialRule.UTILITARIAN, 1, [{2}, {3}, {2, 3}], proposer=3) == {3}
    # without a proposer the lexicographic tie-break applies
    assert decide_group(toy, SocialRule.UTILITARIAN, 1, [{3}, {2}]) == {2}
    with pytest.raises(DomainError):
        decide_group(toy, SocialRule.UTILITARIAN, 0, [])
    with pytest.raises(DomainError):
        decide_group(toy, SocialRule.UTILITARIAN, 0, [{0, 1, 2}])


@pytest.mark.parametrize("rule", list(SocialRule))
def test_toy_outcomes(toy, rule):
    m1 = toy_matching(toy, a="12", b="4")
    assert solve_selective(toy, rule, approximation=True).matching == m1
    assert solve_selective(toy, rule, approximation=False).matching == m1
    assert solve_inclusive(toy, rule).matching == toy_matching(toy, a="12", b="34")


@pytest.mark.parametrize("mech", list(Mechanism))
def test_negative_interests_give_trivial(mech):
    p = negative_problem()
    res = solve(p, mech, SocialRule.UTILITARIAN)
    assert res.matching == Matching.trivial(p.m)
    assert [r.event for r in res.trace] == [Event.GIVEUP] * p.m
    assert is_socially_cohesive(p, res.matching)


def _check_run(p, res, mech):
    # soundness after every event
    for rec in res.trace:
        if rec.activity >= 0:
            assert len(rec.group) <= p.capacities[rec.activity]
    assert is_sound(p, res.matching)
    # termination variant
    pairs = list(zip(res.variants, res.variants[1:]))
    if mech is Mechanism.SELECTIVE:
        assert all(after < before for before, after in pairs)
    else:
        assert all(sum(after) < sum(before) for before, after in pairs)
    assert res.variants[-1][1] == 0
    # every recorded decision is the rule's choice among its candidates
    for d in res.decisions:
        assert len(d.candidates) > 0
        assert d.chosen in d.candidates


@given(problems(max_m=9, max_n=3), st.sampled_from(list(Mechanism)), st.sampled_from(list(SocialRule)))
@settings(max_examples=80, deadline=None)
def test_runs_are_sound_and_terminate(p, mech, rule):
    res = solve(p, mech, rule)
    _check_run(p, res, mech)
    for d in res.decisions:
        assert decide_group(p, rule, d.activity, d.candidates, d.proposer) == d.chosen
    if mech is Mechanism.INCLUSIVE:
        assert is_socially_cohesive(p, res.matching)


@given(problems(max_m=40, max_n=6), st.sampled_from(list(SocialRule)))
@settings(max_examples=40, deadline=None)
def test_inclusive_is_cohesive(p, rule):
    assert is_socially_cohesive(p, solve_inclusive(p, rule).matching)


def test_determinism():
    p = generate_random(30, 4, seed=9)
    for mech in (Mechanism.SELECTIVE_APPROX, Mechanism.INCLUSIVE):
        a, b = solve(p, mech, SocialRule.EGALITARIAN), solve(p, mech, SocialRule.EGALITARIAN)
        assert a.matching == b.matching and a.trace == b.trace


def test_trace_format(toy):
    res = solve_selective(toy, SocialRule.UTILITARIAN)
    first = res.trace[0].to_dict(toy)
    assert first == {"step": 1, "event": "PROPOSE", "individual": "1", "activity": "a", "group": []}
    events = [r.event for r in res.trace]
    assert Event.EJECT not in events or Event.ACCEPT in events
    assert res.trace[-1].to_dict()["event"] in {e.value for e in Event}


def test_exact_guard(monkeypatch):
    monkeypatch.setenv("IAMATCH_COALITION_GUARD", "2")
    p = IAProblem(("a",), (4,), tuple("123456"), np.ones((6, 1)), np.ones((6, 6)))
    with pytest.raises(CapacityExceededError):
        solve_selective(p, SocialRule.UTILITARIAN, approximation=False)


def test_hill_climb_zero_steps(toy):
    res = hill_climb(toy, SocialRule.UTILITARIAN, seed=4, max_steps=0)
    assert res.matching == res.initial == random_full_matching(toy, 4)
    assert res.steps == 0
    assert all(a >= 0 for a in res.matching.assignment)


@pytest.mark.parametrize("seed", range(10))
def test_hill_climb_toy_bounded(toy, seed):
    res = hill_climb(toy, SocialRule.UTILITARIAN, seed=seed)
    assert res.converged
    assert utilitarian_welfare(toy, res.matching) <= 23 / 96 + 1e-12


def _neighbours(p, M):
    a = list(M.assignment)
    counts = M.counts(p.n)
    for i in range(p.m):
        for b in range(p.n):
            if b == a[i]:
                continue
            if counts[b] < p.capacities[b]:
                moved = a.copy()
                moved[i] = b
                yield Matching(tuple(moved))
            else:
                for j in range(p.m):
                    if a[j] == b:
                        swapped = a.copy()
                        swapped[i], swapped[j] = b, a[i]
                        yield Matching(tuple(swapped))


@given(problems(max_m=9, max_n=3), st.integers(0, 100), st.sampled_from(list(SocialRule)))
@settings(max_examples=60, deadline=None)
def test_hill_climb_reaches_local_optimum(p, seed, rule):
    if sum(p.capacities) < p.m:
        with pytest.raises(DomainError):
            hill_climb(p, rule, seed=seed)
        return
    res = hill_climb(p, rule, seed=seed)
    assert res.converged and is_sound(p, res.matching)
    assert all(a >= 0 for a in res.matching.assignment)
    here = welfare(p, res.matching, rule)
    for N in _neighbours(p, res.matching):
        assert welfare(p, N, rule) <= here + 1e-9
    assert all(b > a for a, b in zip(res.history, res.history[1:]))


def test_hill_climb_errors(toy):
    with pytest.raises(DomainError):
        hill_climb(toy, SocialRule.UTILITARIAN, max_steps=-1)
    p = generate_random(5, 2, seed=0, capacity=2)
    with pytest.raises(DomainError):
        hill_climb(p, SocialRule.UTILITARIAN)
