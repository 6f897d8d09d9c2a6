# cython: language_level=3
"""Compiled twin of skylane._purekern.

Keep this file in lockstep with the fallback: identical branch structure and
floating-point expression order (the build disables fp contraction), so both
backends return bit-identical floats and identical search traces, node counts
included.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

FEAS_TOL = 1e-9

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 1
STATUS_BUDGET = 2

cdef double _TOL = 1e-9
cdef double _INF = float("inf")


def segment_walls(origin, targets, boxes):
    """See skylane._purekern.segment_walls; same semantics, scalar loops."""
    cdef double[::1] org = np.ascontiguousarray(
        np.asarray(origin, dtype=np.float64).reshape(3))
    cdef double[:, ::1] pts = np.ascontiguousarray(
        np.asarray(targets, dtype=np.float64).reshape(-1, 3))
    cdef double[:, ::1] bxs = np.ascontiguousarray(
        np.asarray(boxes, dtype=np.float64).reshape(-1, 6))
    cdef Py_ssize_t num = pts.shape[0]
    cdef Py_ssize_t nb = bxs.shape[0]
    blocked_arr = np.zeros(num, dtype=np.uint8)
    walls_arr = np.zeros(num, dtype=np.int32)
    cdef unsigned char[::1] blocked = blocked_arr
    cdef int[::1] walls = walls_arr
    if nb == 0:
        return blocked_arr, walls_arr

    cdef Py_ssize_t p, b, ax
    cdef double o, dax, lo, hi, t1, t2, tl, th, tmin, tmax
    cdef bint miss
    with nogil:
        for p in range(num):
            for b in range(nb):
                tmin = -_INF
                tmax = _INF
                miss = False
                for ax in range(3):
                    o = org[ax]
                    dax = pts[p, ax] - o
                    lo = bxs[b, ax]
                    hi = bxs[b, 3 + ax]
                    if dax == 0.0:
                        if o < lo or o > hi:
                            miss = True
                    else:
                        t1 = (lo - o) / dax
                        t2 = (hi - o) / dax
                        if t1 < t2:
                            tl = t1
                            th = t2
                        else:
                            tl = t2
                            th = t1
                        if tl > tmin:
                            tmin = tl
                        if th < tmax:
                            tmax = th
                if miss or tmin > tmax:
                    continue
                if tmax >= 0.0 and tmin <= 1.0:
                    blocked[p] = 1
                if tmin > 0.0 and tmin < 1.0:
                    walls[p] += 1
                if tmax > 0.0 and tmax < 1.0:
                    walls[p] += 1
    return blocked_arr, walls_arr


cdef class _Search:
    """DFS state over the compiled all-<= row system."""

    cdef double[::1] obj, rv, rb, vv
    cdef long long[::1] rp, rc, vp, vr
    cdef Py_ssize_t n, m

    cdef signed char[::1] val
    cdef double[::1] minact, maxact
    cdef unsigned char[::1] satisfied, in_queue
    cdef long long[::1] active_cnt, queue

    cdef signed char[::1] ev_kind
    cdef long long[::1] ev_a, ev_b
    cdef double[::1] ev_cost, ev_neg
    cdef long long[::1] re_row
    cdef double[::1] re_min, re_max
    cdef Py_ssize_t ev_len, re_len, q_len

    cdef long long[::1] st_mark, st_var
    cdef signed char[::1] st_second
    cdef Py_ssize_t depth

    cdef double fixed_cost, neg_free, best_obj
    cdef bint has_best
    cdef signed char[::1] best_val
    cdef long long nodes, budget
    cdef bint no_prune

    def __init__(self, obj, rp, rc, rv, rb, vp, vr, vv, budget, no_prune):
        self.obj = obj
        self.rp = rp
        self.rc = rc
        self.rv = rv
        self.rb = rb
        self.vp = vp
        self.vr = vr
        self.vv = vv
        self.n = obj.shape[0]
        self.m = rb.shape[0]
        self.budget = budget
        self.no_prune = no_prune

        cdef Py_ssize_t nnz = rc.shape[0]
        self.val = np.full(self.n, -1, dtype=np.int8)
        self.minact = np.zeros(self.m, dtype=np.float64)
        self.maxact = np.zeros(self.m, dtype=np.float64)
        self.satisfied = np.zeros(self.m, dtype=np.uint8)
        self.in_queue = np.zeros(self.m, dtype=np.uint8)
        self.active_cnt = np.zeros(self.n, dtype=np.int64)
        self.queue = np.zeros(self.m + 1, dtype=np.int64)
        self.ev_kind = np.zeros(self.n + self.m + 1, dtype=np.int8)
        self.ev_a = np.zeros(self.n + self.m + 1, dtype=np.int64)
        self.ev_b = np.zeros(self.n + self.m + 1, dtype=np.int64)
        self.ev_cost = np.zeros(self.n + self.m + 1, dtype=np.float64)
        self.ev_neg = np.zeros(self.n + self.m + 1, dtype=np.float64)
        self.re_row = np.zeros(nnz + 1, dtype=np.int64)
        self.re_min = np.zeros(nnz + 1, dtype=np.float64)
        self.re_max = np.zeros(nnz + 1, dtype=np.float64)
        self.st_mark = np.zeros(self.n + 1, dtype=np.int64)
        self.st_var = np.zeros(self.n + 1, dtype=np.int64)
        self.st_second = np.zeros(self.n + 1, dtype=np.int8)
        self.best_val = np.zeros(self.n, dtype=np.int8)

        self.ev_len = 0
        self.re_len = 0
        self.q_len = 0
        self.depth = 0
        self.fixed_cost = 0.0
        self.neg_free = 0.0
        self.best_obj = 0.0
        self.has_best = False
        self.nodes = 0

        cdef Py_ssize_t r, j, t
        cdef double lo, hi, a, c
        for r in range(self.m):
            lo = 0.0
            hi = 0.0
            for t in range(self.rp[r], self.rp[r + 1]):
                a = self.rv[t]
                if a < 0.0:
                    lo += a
                else:
                    hi += a
            self.minact[r] = lo
            self.maxact[r] = hi
        for j in range(self.n):
            self.active_cnt[j] = self.vp[j + 1] - self.vp[j]
            c = self.obj[j]
            if c < 0.0:
                self.neg_free += c

    cdef void push_row(self, Py_ssize_t r) noexcept:
        if not self.in_queue[r] and not self.satisfied[r]:
            self.in_queue[r] = 1
            self.queue[self.q_len] = r
            self.q_len += 1

    cdef void mark_satisfied(self, Py_ssize_t r) noexcept:
        cdef Py_ssize_t t, j
        self.satisfied[r] = 1
        self.ev_kind[self.ev_len] = 1
        self.ev_a[self.ev_len] = r
        self.ev_b[self.ev_len] = -1
        self.ev_len += 1
        for t in range(self.rp[r], self.rp[r + 1]):
            j = self.rc[t]
            if self.val[j] < 0:
                self.active_cnt[j] -= 1

    cdef void fix(self, Py_ssize_t j, int v) noexcept:
        cdef Py_ssize_t t, r
        cdef double c, a
        self.ev_kind[self.ev_len] = 0
        self.ev_a[self.ev_len] = j
        self.ev_b[self.ev_len] = self.re_len
        self.ev_cost[self.ev_len] = self.fixed_cost
        self.ev_neg[self.ev_len] = self.neg_free
        self.ev_len += 1
        self.val[j] = v
        c = self.obj[j]
        if v == 1:
            self.fixed_cost += c
        if c < 0.0:
            self.neg_free -= c
        for t in range(self.vp[j], self.vp[j + 1]):
            r = self.vr[t]
            a = self.vv[t]
            self.re_row[self.re_len] = r
            self.re_min[self.re_len] = self.minact[r]
            self.re_max[self.re_len] = self.maxact[r]
            self.re_len += 1
            if v == 1:
                if a < 0.0:
                    self.maxact[r] += a
                else:
                    self.minact[r] += a
            else:
                if a < 0.0:
                    self.minact[r] -= a
                else:
                    self.maxact[r] -= a
            self.push_row(r)

    cdef bint propagate(self) noexcept:
        cdef Py_ssize_t r, t, j
        cdef double slack, a
        while self.q_len > 0:
            self.q_len -= 1
            r = self.queue[self.q_len]
            self.in_queue[r] = 0
            if self.satisfied[r]:
                continue
            slack = self.rb[r] - self.minact[r]
            if slack < -_TOL:
                while self.q_len > 0:
                    self.q_len -= 1
                    self.in_queue[self.queue[self.q_len]] = 0
                return False
            if self.maxact[r] <= self.rb[r] + _TOL:
                self.mark_satisfied(r)
                continue
            for t in range(self.rp[r], self.rp[r + 1]):
                j = self.rc[t]
                if self.val[j] >= 0:
                    continue
                a = self.rv[t]
                # fixing to the slack-neutral value keeps this row's slack
                # exact while the scan continues
                if a > slack + _TOL:
                    self.fix(j, 0)
                elif -a > slack + _TOL:
                    self.fix(j, 1)
        return True

    cdef void undo_to(self, Py_ssize_t mark) noexcept:
        cdef Py_ssize_t a, t, r, j
        cdef long long b, cnt
        cdef int kind
        while self.ev_len > mark:
            self.ev_len -= 1
            kind = self.ev_kind[self.ev_len]
            a = self.ev_a[self.ev_len]
            b = self.ev_b[self.ev_len]
            if kind == 1:
                self.satisfied[a] = 0
                for t in range(self.rp[a], self.rp[a + 1]):
                    j = self.rc[t]
                    if self.val[j] < 0:
                        self.active_cnt[j] += 1
            else:
                self.val[a] = -1
                self.fixed_cost = self.ev_cost[self.ev_len]
                self.neg_free = self.ev_neg[self.ev_len]
                while self.re_len > b:
                    self.re_len -= 1
                    r = self.re_row[self.re_len]
                    self.minact[r] = self.re_min[self.re_len]
                    self.maxact[r] = self.re_max[self.re_len]
                cnt = 0
                for t in range(self.vp[a], self.vp[a + 1]):
                    if not self.satisfied[self.vr[t]]:
                        cnt += 1
                self.active_cnt[a] = cnt

    cdef Py_ssize_t pick_branch(self) noexcept:
        cdef Py_ssize_t best_j = -1, j
        cdef long long best_cnt = 0
        for j in range(self.n):
            if self.val[j] < 0 and self.active_cnt[j] > best_cnt:
                best_cnt = self.active_cnt[j]
                best_j = j
        return best_j

    cdef void record(self) noexcept:
        cdef double cand = self.fixed_cost + self.neg_free
        cdef Py_ssize_t j
        if not self.has_best or cand < self.best_obj:
            for j in range(self.n):
                if self.val[j] < 0:
                    self.best_val[j] = 1 if self.obj[j] < 0.0 else 0
                else:
                    self.best_val[j] = self.val[j]
            self.best_obj = cand
            self.has_best = True

    cdef int run(self) noexcept:
        cdef Py_ssize_t r, j
        cdef int v, second
        cdef bint descending, dead, resumed, over_budget
        cdef Py_ssize_t mark

        for r in range(self.m):
            self.push_row(r)
        if not self.propagate():
            return STATUS_INFEASIBLE

        descending = True
        while True:
            if descending:
                dead = False
                if (
                    not self.no_prune
                    and self.has_best
                    and self.fixed_cost + self.neg_free >= self.best_obj
                ):
                    dead = True
                if not dead:
                    j = self.pick_branch()
                    if j < 0:
                        self.record()
                        dead = True
                    else:
                        if self.nodes >= self.budget:
                            return STATUS_BUDGET
                        self.nodes += 1
                        v = 1 if self.obj[j] < 0.0 else 0
                        self.st_mark[self.depth] = self.ev_len
                        self.st_var[self.depth] = j
                        self.st_second[self.depth] = 1 - v
                        self.depth += 1
                        self.fix(j, v)
                        descending = self.propagate()
                        continue
                descending = False

            resumed = False
            over_budget = False
            while self.depth > 0:
                mark = self.st_mark[self.depth - 1]
                j = self.st_var[self.depth - 1]
                second = self.st_second[self.depth - 1]
                self.undo_to(mark)
                if second < 0:
                    self.depth -= 1
                    continue
                if self.nodes >= self.budget:
                    over_budget = True
                    break
                self.nodes += 1
                self.st_second[self.depth - 1] = -1
                self.fix(j, second)
                if self.propagate():
                    resumed = True
                    break
            if over_budget:
                return STATUS_BUDGET
            if resumed:
                descending = True
                continue
            return STATUS_OPTIMAL


def bnb_search(obj, row_ptr, row_cols, row_vals, row_rhs,
               var_ptr, var_rows, var_vals, node_budget, disable_pruning):
    """See skylane._purekern.bnb_search; identical contract and traces."""
    search = _Search(
        np.ascontiguousarray(obj, dtype=np.float64),
        np.ascontiguousarray(row_ptr, dtype=np.int64),
        np.ascontiguousarray(row_cols, dtype=np.int64),
        np.ascontiguousarray(row_vals, dtype=np.float64),
        np.ascontiguousarray(row_rhs, dtype=np.float64),
        np.ascontiguousarray(var_ptr, dtype=np.int64),
        np.ascontiguousarray(var_rows, dtype=np.int64),
        np.ascontiguousarray(var_vals, dtype=np.float64),
        int(node_budget),
        bool(disable_pruning),
    )
    cdef int status = search.run()
    if not search.has_best:
        if status == STATUS_BUDGET:
            return STATUS_BUDGET, None, int(search.nodes)
        return STATUS_INFEASIBLE, None, int(search.nodes)
    return status, np.asarray(search.best_val).copy(), int(search.nodes)
