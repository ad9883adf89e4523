# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.  Mirrors ``_pykernels`` operation for operation."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

cdef enum:
    VOID = -1
    OBJ_UTILITARIAN = 0


cdef class _Enumerator:
    cdef Py_ssize_t m, n, count, filled
    cdef long[:] caps
    cdef long[:] counts
    cdef long[:] cur
    cdef long[:, :] out

    cdef void count_rec(self, Py_ssize_t k):
        cdef Py_ssize_t a
        if k == self.m:
            self.count += 1
            return
        self.count_rec(k + 1)
        for a in range(self.n):
            if self.counts[a] < self.caps[a]:
                self.counts[a] += 1
                self.count_rec(k + 1)
                self.counts[a] -= 1

    cdef void fill_rec(self, Py_ssize_t k):
        cdef Py_ssize_t a, t
        if k == self.m:
            for t in range(self.m):
                self.out[self.filled, t] = self.cur[t]
            self.filled += 1
            return
        self.cur[k] = VOID
        self.fill_rec(k + 1)
        for a in range(self.n):
            if self.counts[a] < self.caps[a]:
                self.counts[a] += 1
                self.cur[k] = a
                self.fill_rec(k + 1)
                self.counts[a] -= 1


def enumerate_assignments(capacities, Py_ssize_t m):
    cdef _Enumerator e = _Enumerator()
    e.m = m
    e.caps = np.ascontiguousarray(capacities, dtype=np.int64).astype(np.int_)
    e.n = e.caps.shape[0]
    e.counts = np.zeros(e.n, dtype=np.int_)
    e.cur = np.zeros(m, dtype=np.int_)
    e.count = 0
    e.count_rec(0)
    result = np.empty((e.count, m), dtype=np.int_)
    e.out = result
    e.filled = 0
    e.fill_rec(0)
    return result.astype(np.int64, copy=False)


cdef class _Dominance:
    cdef Py_ssize_t m, n
    cdef double scale, eps
    cdef const double[:, :] v
    cdef const double[:, :] w
    cdef const double[:] tgt
    cdef double[:, :] posuf
    cdef double[:] S
    cdef long[:] caps
    cdef long[:] assign
    cdef long[:, :] members
    cdef long[:] size

    cdef bint feasible(self, Py_ssize_t depth):
        cdef Py_ssize_t i
        cdef long a
        cdef double ub
        for i in range(depth):
            a = self.assign[i]
            if a == VOID:
                ub = 0.0
            else:
                ub = ((self.S[i] + self.posuf[i, depth]) * self.scale + self.v[i, a]) * 0.5
            if ub < self.tgt[i] - self.eps:
                return False
        return True

    cdef bint leaf_strict(self):
        cdef Py_ssize_t i
        cdef long a
        cdef double u
        for i in range(self.m):
            a = self.assign[i]
            if a == VOID:
                u = 0.0
            else:
                u = (self.S[i] * self.scale + self.v[i, a]) * 0.5
            if u > self.tgt[i] + self.eps:
                return True
        return False

    cdef bint rec(self, Py_ssize_t k):
        cdef Py_ssize_t a, t
        cdef long j
        if k == self.m:
            return self.leaf_strict()
        self.assign[k] = VOID
        if self.feasible(k + 1) and self.rec(k + 1):
            return True
        for a in range(self.n):
            if self.size[a] >= self.caps[a]:
                continue
            self.assign[k] = a
            for t in range(self.size[a]):
                j = self.members[a, t]
                self.S[j] += self.w[j, k]
                self.S[k] += self.w[k, j]
            self.members[a, self.size[a]] = k
            self.size[a] += 1
            if self.feasible(k + 1) and self.rec(k + 1):
                return True
            self.size[a] -= 1
            for t in range(self.size[a]):
                j = self.members[a, t]
                self.S[j] -= self.w[j, k]
            self.S[k] = 0.0
        self.assign[k] = VOID
        return False


def find_dominating(interest, affinity, capacities, target, double eps):
    cdef _Dominance d = _Dominance()
    cdef Py_ssize_t i, k
    cdef double p
    d.v = np.ascontiguousarray(interest, dtype=np.float64)
    d.w = np.ascontiguousarray(affinity, dtype=np.float64)
    d.tgt = np.ascontiguousarray(target, dtype=np.float64)
    d.caps = np.ascontiguousarray(capacities, dtype=np.int64).astype(np.int_)
    d.m = d.v.shape[0]
    d.n = d.caps.shape[0]
    d.scale = 1.0 / (d.m - 1)
    d.eps = eps
    d.posuf = np.zeros((d.m, d.m + 1), dtype=np.float64)
    for i in range(d.m):
        for k in range(d.m - 1, -1, -1):
            p = d.w[i, k] if (k != i and d.w[i, k] > 0.0) else 0.0
            d.posuf[i, k] = d.posuf[i, k + 1] + p
    d.S = np.zeros(d.m, dtype=np.float64)
    d.assign = np.full(d.m, VOID, dtype=np.int_)
    d.members = np.zeros((d.n, d.m), dtype=np.int_)
    d.size = np.zeros(d.n, dtype=np.int_)
    if d.rec(0):
        return np.asarray(d.assign).astype(np.int64)
    return None


cdef double _value(double[:] u, Py_ssize_t m, int objective):
    cdef Py_ssize_t x
    cdef double s
    if objective == OBJ_UTILITARIAN:
        s = 0.0
        for x in range(m):
            s += u[x]
        return s / m
    s = INFINITY
    for x in range(m):
        if u[x] < s:
            s = u[x]
    return s


def hill_climb(interest, affinity, capacities, assignment, int objective,
               long max_steps, double eps):
    cdef const double[:, :] v = np.ascontiguousarray(interest, dtype=np.float64)
    cdef const double[:, :] w = np.ascontiguousarray(affinity, dtype=np.float64)
    cdef long[:] caps = np.ascontiguousarray(capacities, dtype=np.int64).astype(np.int_)
    cdef long[:] assign = np.array(assignment, dtype=np.int_)
    cdef Py_ssize_t m = v.shape[0]
    cdef Py_ssize_t n = caps.shape[0]
    cdef double scale = 1.0 / (m - 1)
    cdef double[:, :] S = np.zeros((m, n), dtype=np.float64)
    cdef double[:] u = np.zeros(m, dtype=np.float64)
    cdef long[:, :] members = np.zeros((n, m), dtype=np.int_)
    cdef long[:] size = np.zeros(n, dtype=np.int_)
    cdef double[:] actmin = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t x, j, i, b, c, t, a, jj
    cdef long best_i, best_b, best_j
    cdef double best, other, nu, nui, nuj, d, tv, cur
    cdef long steps = 0
    cdef bint converged = False

    for x in range(m):
        for j in range(m):
            if j != x:
                S[x, assign[j]] += w[x, j]
    for x in range(m):
        u[x] = (S[x, assign[x]] * scale + v[x, assign[x]]) * 0.5

    cur = _value(u, m, objective)
    history = [cur]
    while steps < max_steps:
        for c in range(n):
            size[c] = 0
        for x in range(m):
            a = assign[x]
            members[a, size[a]] = x
            size[a] += 1
        for c in range(n):
            actmin[c] = INFINITY
            for t in range(size[c]):
                x = members[c, t]
                if u[x] < actmin[c]:
                    actmin[c] = u[x]
        if objective == OBJ_UTILITARIAN:
            best = eps
        else:
            best = cur + eps
        best_i = -1
        best_b = -1
        best_j = -1

        for i in range(m):
            a = assign[i]
            for b in range(n):
                if b == a:
                    continue
                other = INFINITY
                if objective != OBJ_UTILITARIAN:
                    for c in range(n):
                        if c != a and c != b and actmin[c] < other:
                            other = actmin[c]
                if size[b] < caps[b]:
                    nu = (S[i, b] * scale + v[i, b]) * 0.5
                    if objective == OBJ_UTILITARIAN:
                        d = nu - u[i]
                        for t in range(size[a]):
                            x = members[a, t]
                            if x != i:
                                d += ((S[x, a] - w[x, i]) * scale + v[x, a]) * 0.5 - u[x]
                        for t in range(size[b]):
                            x = members[b, t]
                            d += ((S[x, b] + w[x, i]) * scale + v[x, b]) * 0.5 - u[x]
                    else:
                        d = other if other < nu else nu
                        for t in range(size[a]):
                            x = members[a, t]
                            if x != i:
                                tv = ((S[x, a] - w[x, i]) * scale + v[x, a]) * 0.5
                                if tv < d:
                                    d = tv
                        for t in range(size[b]):
                            x = members[b, t]
                            tv = ((S[x, b] + w[x, i]) * scale + v[x, b]) * 0.5
                            if tv < d:
                                d = tv
                    if d > best:
                        best = d
                        best_i = i
                        best_b = b
                        best_j = -1
                    continue
                for jj in range(size[b]):
                    j = members[b, jj]
                    nui = ((S[i, b] - w[i, j]) * scale + v[i, b]) * 0.5
                    nuj = ((S[j, a] - w[j, i]) * scale + v[j, a]) * 0.5
                    if objective == OBJ_UTILITARIAN:
                        d = nui - u[i]
                        d += nuj - u[j]
                        for t in range(size[a]):
                            x = members[a, t]
                            if x != i:
                                d += ((S[x, a] - w[x, i] + w[x, j]) * scale + v[x, a]) * 0.5 - u[x]
                        for t in range(size[b]):
                            x = members[b, t]
                            if x != j:
                                d += ((S[x, b] - w[x, j] + w[x, i]) * scale + v[x, b]) * 0.5 - u[x]
                    else:
                        d = other if other < nui else nui
                        if nuj < d:
                            d = nuj
                        for t in range(size[a]):
                            x = members[a, t]
                            if x != i:
                                tv = ((S[x, a] - w[x, i] + w[x, j]) * scale + v[x, a]) * 0.5
                                if tv < d:
                                    d = tv
                        for t in range(size[b]):
                            x = members[b, t]
                            if x != j:
                                tv = ((S[x, b] - w[x, j] + w[x, i]) * scale + v[x, b]) * 0.5
                                if tv < d:
                                    d = tv
                    if d > best:
                        best = d
                        best_i = i
                        best_b = b
                        best_j = j

        if best_i < 0:
            converged = True
            break
        i = best_i
        b = best_b
        a = assign[i]
        for x in range(m):
            S[x, a] -= w[x, i]
            S[x, b] += w[x, i]
        assign[i] = b
        if best_j >= 0:
            j = best_j
            for x in range(m):
                S[x, b] -= w[x, j]
                S[x, a] += w[x, j]
            assign[j] = a
        for x in range(m):
            u[x] = (S[x, assign[x]] * scale + v[x, assign[x]]) * 0.5
        steps += 1
        cur = _value(u, m, objective)
        history.append(cur)

    return np.asarray(assign).astype(np.int64), history, bool(converged)


cdef inline bint _dominates(const double[:, :] U, Py_ssize_t x, Py_ssize_t y,
                            Py_ssize_t m, double eps) nogil:
    cdef Py_ssize_t c
    cdef bint strict = False
    for c in range(m):
        if U[x, c] < U[y, c] - eps:
            return False
        if U[x, c] > U[y, c] + eps:
            strict = True
    return strict


def pareto_flags(U, double eps):
    cdef const double[:, :] u = np.ascontiguousarray(U, dtype=np.float64)
    cdef Py_ssize_t N = u.shape[0], m = u.shape[1], k, f, r, x, nf = 0
    cdef cnp.intp_t[:] order = np.argsort(-np.asarray(u).sum(axis=1), kind="stable")
    cdef cnp.intp_t[:] front = np.empty(N, dtype=np.intp)
    flags = np.zeros(N, dtype=np.uint8)
    cdef unsigned char[:] fl = flags
    cdef bint dom
    with nogil:
        for k in range(N):
            r = order[k]
            dom = False
            for f in range(nf):
                if _dominates(u, front[f], r, m, eps):
                    dom = True
                    break
            if not dom:
                front[nf] = r
                nf += 1
        for f in range(nf):
            r = front[f]
            dom = False
            for x in range(N):
                if _dominates(u, x, r, m, eps):
                    dom = True
                    break
            fl[r] = not dom
    return flags.astype(bool)
