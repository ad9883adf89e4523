import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from iamatch.model import IAProblem, generate_random, toy_problem  # noqa: E402

TOY_FILE = Path(__file__).parent.parent / "data" / "toy.json"


@pytest.fixture
def toy():
    return toy_problem()


def toy_matching(problem, **groups):
    """``toy_matching(p, a="12", b="4")``: groups by individual id characters."""
    return problem.matching_from_groups({act: list(ids) for act, ids in groups.items()})


@st.composite
def problems(draw, max_m=6, max_n=3):
    m = draw(st.integers(2, max_m))
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    cap = draw(st.one_of(st.none(), st.integers(1, m)))
    return generate_random(m, n, seed=seed, capacity=cap)


@st.composite
def problems_with_matching(draw, max_m=6, max_n=3):
    p = draw(problems(max_m, max_n))
    counts = [0] * p.n
    assign = []
    for _ in range(p.m):
        options = [-1] + [a for a in range(p.n) if counts[a] < p.capacities[a]]
        a = draw(st.sampled_from(options))
        if a >= 0:
            counts[a] += 1
        assign.append(a)
    from iamatch.model import Matching

    return p, Matching(tuple(assign))


def negative_problem(m=4, n=2, hostile=False):
    """All interests negative; with ``hostile`` all affinities are non-positive too."""
    rng = np.random.default_rng(0)
    return IAProblem(
        activity_ids=tuple(f"a{k}" for k in range(n)),
        capacities=tuple([2] * n),
        individual_ids=tuple(str(i + 1) for i in range(m)),
        interest=-rng.uniform(0.1, 1.0, (m, n)),
        affinity=rng.uniform(-1, 0 if hostile else 1, (m, m)),
    )


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        ok, detail = RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
