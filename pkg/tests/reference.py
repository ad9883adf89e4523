"""Brute-force reference written directly from the definitions, in exact arithmetic.

Shares nothing with the package beyond the problem arrays: enumeration is
``itertools.product``, utilities are Fractions, and every property is a
literal transcription of its quantified condition.
"""

import itertools
from fractions import Fraction

VOID = -1


class Ref:
    def __init__(self, problem):
        self.m = problem.m
        self.n = problem.n
        self.cap = list(problem.capacities)
        self.v = [[Fraction(float(x)) for x in row] for row in problem.interest]
        self.w = [[Fraction(float(x)) for x in row] for row in problem.affinity]

    def matchings(self):
        for t in itertools.product([VOID, *range(self.n)], repeat=self.m):
            if all(t.count(a) <= self.cap[a] for a in range(self.n)):
                yield t

    def u(self, i, g, a):
        if a == VOID:
            return Fraction(0)
        aff = sum((self.w[i][j] for j in g if j != i), Fraction(0)) / (self.m - 1)
        return (aff + self.v[i][a]) / 2

    def group(self, M, i):
        a = M[i]
        return frozenset([i]) if a == VOID else frozenset(j for j in range(self.m) if M[j] == a)

    def utils(self, M):
        return [self.u(i, self.group(M, i), M[i]) for i in range(self.m)]

    def coalitions(self):
        for a in range(self.n):
            for k in range(1, min(self.cap[a], self.m) + 1):
                for g in itertools.combinations(range(self.m), k):
                    yield a, frozenset(g)
        for i in range(self.m):
            yield VOID, frozenset([i])

    def full(self, M, a):
        return a != VOID and sum(1 for x in M if x == a) == self.cap[a]

    def members(self, M, a):
        return frozenset() if a == VOID else frozenset(j for j in range(self.m) if M[j] == a)

    def props(self, M):
        U = self.utils(M)
        out = {"IR": all(x >= 0 for x in U)}
        strong = weak = False
        for a, g in self.coalitions():
            new = {i: self.u(i, g, a) for i in g}
            if all(new[i] > U[i] for i in g):
                strong = True
            if all(new[i] >= U[i] for i in g) and any(new[i] > U[i] for i in g):
                weak = True
        out["CS"], out["SCS"] = not strong, not weak
        ns = is_ = cis = True
        for i in range(self.m):
            here = M[i]
            for a in [*range(self.n), VOID]:
                if a == here or self.full(M, a):
                    continue
                hosts = self.members(M, a)
                g = hosts | {i}
                if not self.u(i, g, a) > U[i]:
                    continue
                ns = False
                if all(self.u(j, g, a) >= U[j] for j in hosts):
                    is_ = False
                    rest = self.group(M, i) - {i}
                    if here == VOID or all(self.u(j, rest, here) >= U[j] for j in rest):
                        cis = False
        out["NS"], out["IS"], out["CIS"] = ns, is_, cis
        best = [max(self.u(i, g, a) for a, g in self.coalitions() if i in g) for i in range(self.m)]
        out["P"] = all(U[i] == best[i] for i in range(self.m))
        sc = True
        for i in range(self.m):
            mine = Fraction(0) if M[i] == VOID else self.v[i][M[i]]
            for a in range(self.n):
                if a != M[i] and self.v[i][a] >= 0 and self.v[i][a] > mine and not self.full(M, a):
                    sc = False
        out["SC"] = sc
        return out

    def census(self):
        Ms = list(self.matchings())
        Us = [self.utils(M) for M in Ms]
        util = [sum(U) / self.m for U in Us]
        egal = [min(U) for U in Us]
        flags = [self.props(M) for M in Ms]
        for k, U in enumerate(Us):
            flags[k]["PO"] = not any(
                all(x >= y for x, y in zip(V, U)) and any(x > y for x, y in zip(V, U)) for V in Us
            )
            flags[k]["MaxUtil"] = util[k] == max(util)
            flags[k]["MaxEgal"] = egal[k] == max(egal)
        return Ms, flags, max(util), max(egal)
