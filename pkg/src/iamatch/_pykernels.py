"""Pure-Python kernels; the reference the compiled ``_ckernels`` must mirror.

Every floating-point expression here is evaluated in the same order as in
``_ckernels.pyx`` so both back ends return bit-identical results.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

VOID = -1
OBJ_UTILITARIAN = 0
OBJ_EGALITARIAN = 1


def enumerate_assignments(capacities, m: int) -> np.ndarray:
    """All capacity-respecting assignments, one row each, VOID first per digit.

    Individual 0 is the most significant digit, so rows come out in the same
    order as ``itertools.product((VOID, 0, ..., n-1), repeat=m)`` filtered.
    """
    caps = [int(c) for c in capacities]
    n = len(caps)
    counts = [0] * n
    cur = [0] * m
    rows: list[list[int]] = []

    def rec(k: int) -> None:
        if k == m:
            rows.append(cur.copy())
            return
        cur[k] = VOID
        rec(k + 1)
        for a in range(n):
            if counts[a] < caps[a]:
                counts[a] += 1
                cur[k] = a
                rec(k + 1)
                counts[a] -= 1

    rec(0)
    return np.array(rows, dtype=np.int64).reshape(len(rows), m)


def find_dominating(interest, affinity, capacities, target, eps: float) -> Optional[np.ndarray]:
    """First assignment (enumeration order) Pareto-dominating ``target``.

    Depth-first search with capacity pruning and an optimistic bound: an
    assigned individual can still gain at most the positive affinities of the
    individuals not yet placed.
    """
    v = np.asarray(interest, dtype=np.float64).tolist()
    w = np.asarray(affinity, dtype=np.float64).tolist()
    tgt = [float(t) for t in target]
    caps = [int(c) for c in capacities]
    m, n = len(v), len(caps)
    scale = 1.0 / (m - 1)

    posuf = [[0.0] * (m + 1) for _ in range(m)]
    for i in range(m):
        for k in range(m - 1, -1, -1):
            p = w[i][k] if (k != i and w[i][k] > 0.0) else 0.0
            posuf[i][k] = posuf[i][k + 1] + p

    assign = [VOID] * m
    S = [0.0] * m
    members: list[list[int]] = [[] for _ in range(n)]

    def feasible(depth: int) -> bool:
        for i in range(depth):
            a = assign[i]
            if a == VOID:
                ub = 0.0
            else:
                ub = ((S[i] + posuf[i][depth]) * scale + v[i][a]) * 0.5
            if ub < tgt[i] - eps:
                return False
        return True

    def leaf_strict() -> bool:
        for i in range(m):
            a = assign[i]
            u = 0.0 if a == VOID else (S[i] * scale + v[i][a]) * 0.5
            if u > tgt[i] + eps:
                return True
        return False

    def rec(k: int) -> bool:
        if k == m:
            return leaf_strict()
        assign[k] = VOID
        if feasible(k + 1) and rec(k + 1):
            return True
        for a in range(n):
            grp = members[a]
            if len(grp) >= caps[a]:
                continue
            assign[k] = a
            for j in grp:
                S[j] += w[j][k]
                S[k] += w[k][j]
            grp.append(k)
            if feasible(k + 1) and rec(k + 1):
                return True
            grp.pop()
            for j in grp:
                S[j] -= w[j][k]
            S[k] = 0.0
        assign[k] = VOID
        return False

    if rec(0):
        return np.array(assign, dtype=np.int64)
    return None


def hill_climb(interest, affinity, capacities, assignment, objective: int,
               max_steps: int, eps: float):
    """Steepest ascent over move/swap neighbours on real activities.

    Returns ``(assignment, history, converged)`` where ``history`` holds the
    objective before the first step and after each applied step.
    """
    v = np.asarray(interest, dtype=np.float64).tolist()
    w = np.asarray(affinity, dtype=np.float64).tolist()
    caps = [int(c) for c in capacities]
    assign = [int(a) for a in assignment]
    m, n = len(v), len(caps)
    scale = 1.0 / (m - 1)

    S = [[0.0] * n for _ in range(m)]
    for x in range(m):
        for j in range(m):
            if j != x:
                S[x][assign[j]] += w[x][j]
    u = [(S[x][assign[x]] * scale + v[x][assign[x]]) * 0.5 for x in range(m)]

    def value() -> float:
        if objective == OBJ_UTILITARIAN:
            s = 0.0
            for x in range(m):
                s += u[x]
            return s / m
        best = math.inf
        for x in range(m):
            if u[x] < best:
                best = u[x]
        return best

    history = [value()]
    steps = 0
    converged = False
    while steps < max_steps:
        members: list[list[int]] = [[] for _ in range(n)]
        for x in range(m):
            members[assign[x]].append(x)
        actmin = [math.inf] * n
        for c in range(n):
            for x in members[c]:
                if u[x] < actmin[c]:
                    actmin[c] = u[x]
        if objective == OBJ_UTILITARIAN:
            best = eps
        else:
            best = history[-1] + eps
        best_i = best_b = best_j = -1

        for i in range(m):
            a = assign[i]
            for b in range(n):
                if b == a:
                    continue
                other = math.inf
                if objective == OBJ_EGALITARIAN:
                    for c in range(n):
                        if c != a and c != b and actmin[c] < other:
                            other = actmin[c]
                if len(members[b]) < caps[b]:
                    nu = (S[i][b] * scale + v[i][b]) * 0.5
                    if objective == OBJ_UTILITARIAN:
                        d = nu - u[i]
                        for x in members[a]:
                            if x != i:
                                d += ((S[x][a] - w[x][i]) * scale + v[x][a]) * 0.5 - u[x]
                        for x in members[b]:
                            d += ((S[x][b] + w[x][i]) * scale + v[x][b]) * 0.5 - u[x]
                    else:
                        d = other if other < nu else nu
                        for x in members[a]:
                            if x != i:
                                t = ((S[x][a] - w[x][i]) * scale + v[x][a]) * 0.5
                                if t < d:
                                    d = t
                        for x in members[b]:
                            t = ((S[x][b] + w[x][i]) * scale + v[x][b]) * 0.5
                            if t < d:
                                d = t
                    if d > best:
                        best, best_i, best_b, best_j = d, i, b, -1
                    continue
                for j in members[b]:
                    nui = ((S[i][b] - w[i][j]) * scale + v[i][b]) * 0.5
                    nuj = ((S[j][a] - w[j][i]) * scale + v[j][a]) * 0.5
                    if objective == OBJ_UTILITARIAN:
                        d = nui - u[i]
                        d += nuj - u[j]
                        for x in members[a]:
                            if x != i:
                                d += ((S[x][a] - w[x][i] + w[x][j]) * scale + v[x][a]) * 0.5 - u[x]
                        for x in members[b]:
                            if x != j:
                                d += ((S[x][b] - w[x][j] + w[x][i]) * scale + v[x][b]) * 0.5 - u[x]
                    else:
                        d = other if other < nui else nui
                        if nuj < d:
                            d = nuj
                        for x in members[a]:
                            if x != i:
                                t = ((S[x][a] - w[x][i] + w[x][j]) * scale + v[x][a]) * 0.5
                                if t < d:
                                    d = t
                        for x in members[b]:
                            if x != j:
                                t = ((S[x][b] - w[x][j] + w[x][i]) * scale + v[x][b]) * 0.5
                                if t < d:
                                    d = t
                    if d > best:
                        best, best_i, best_b, best_j = d, i, b, j

        if best_i < 0:
            converged = True
            break
        i, b, j = best_i, best_b, best_j
        a = assign[i]
        for x in range(m):
            S[x][a] -= w[x][i]
            S[x][b] += w[x][i]
        assign[i] = b
        if j >= 0:
            for x in range(m):
                S[x][b] -= w[x][j]
                S[x][a] += w[x][j]
            assign[j] = a
        for x in range(m):
            u[x] = (S[x][assign[x]] * scale + v[x][assign[x]]) * 0.5
        steps += 1
        history.append(value())

    return np.array(assign, dtype=np.int64), history, converged


def _dominated_by(A: np.ndarray, B: np.ndarray, eps: float) -> np.ndarray:
    """``out[b]``: some row of ``A`` Pareto-dominates row ``b`` of ``B``."""
    if len(A) == 0:
        return np.zeros(len(B), dtype=bool)
    ge = np.all(A[:, None, :] >= B[None, :, :] - eps, axis=2)
    gt = np.any(A[:, None, :] > B[None, :, :] + eps, axis=2)
    return np.any(ge & gt, axis=0)


def pareto_flags(U, eps: float, batch: int = 256) -> np.ndarray:
    """Rows of ``U`` that no other row Pareto-dominates.

    Rows are filtered in batches by decreasing sum against the running front;
    survivors are then re-checked against every row.
    """
    U = np.ascontiguousarray(U, dtype=np.float64)
    order = np.argsort(-U.sum(axis=1), kind="stable")
    front = np.empty((0, U.shape[1]))
    survivors = []
    for k in range(0, len(order), batch):
        rows = order[k:k + batch]
        B = U[rows]
        keep = ~(_dominated_by(front, B, eps) | _dominated_by(B, B, eps))
        front = np.vstack([front, B[keep]])
        survivors.extend(rows[keep].tolist())
    flags = np.zeros(len(U), dtype=bool)
    for r in survivors:
        flags[r] = not np.any(np.all(U >= U[r] - eps, axis=1) & np.any(U > U[r] + eps, axis=1))
    return flags
