"""Pure numpy/Python fallback for the hot kernels.

Mirrors skylane._corekern operation-for-operation: the compiled module is
built with floating-point contraction disabled, and this module sticks to
the same expression shapes, so the two backends return bit-identical floats
and identical search traces (including node counts).
"""

from __future__ import annotations

import numpy as np

FEAS_TOL = 1e-9

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 1
STATUS_BUDGET = 2


def segment_walls(origin, targets, boxes):
    """Segment-vs-box sweep from one origin to many targets.

    Parameters are the origin point (3,), target points (P, 3) and boxes
    (B, 6) as [xmin, ymin, zmin, xmax, ymax, zmax] rows.  Returns
    ``(blocked, walls)``: blocked is uint8 (P,), 1 when the closed segment
    meets any box (touching a face counts); walls is int32 (P,), the number
    of box faces the open segment interior crosses, summed over boxes (a
    tangent touch inside the segment counts as an entry plus an exit).
    """
    origin = np.asarray(origin, dtype=np.float64).reshape(3)
    pts = np.ascontiguousarray(targets, dtype=np.float64).reshape(-1, 3)
    bxs = np.ascontiguousarray(boxes, dtype=np.float64).reshape(-1, 6)
    num = pts.shape[0]
    blocked = np.zeros(num, dtype=np.uint8)
    walls = np.zeros(num, dtype=np.int32)
    if bxs.shape[0] == 0:
        return blocked, walls

    d = pts - origin[None, :]
    neg_inf = np.float64(-np.inf)
    pos_inf = np.float64(np.inf)
    for b in range(bxs.shape[0]):
        tmin = np.full(num, neg_inf)
        tmax = np.full(num, pos_inf)
        miss = np.zeros(num, dtype=bool)
        for ax in range(3):
            lo = bxs[b, ax]
            hi = bxs[b, 3 + ax]
            o = origin[ax]
            dax = d[:, ax]
            parallel = dax == 0.0
            miss |= parallel & ((o < lo) | (o > hi))
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = (lo - o) / dax
                t2 = (hi - o) / dax
            t_lo = np.minimum(t1, t2)
            t_hi = np.maximum(t1, t2)
            live = ~parallel
            tmin = np.where(live, np.maximum(tmin, t_lo), tmin)
            tmax = np.where(live, np.minimum(tmax, t_hi), tmax)
        hit = ~miss & (tmin <= tmax)
        blocked |= (hit & (tmax >= 0.0) & (tmin <= 1.0)).astype(np.uint8)
        walls += (hit & (tmin > 0.0) & (tmin < 1.0)).astype(np.int32)
        walls += (hit & (tmax > 0.0) & (tmax < 1.0)).astype(np.int32)
    return blocked, walls


def bnb_search(
    obj,
    row_ptr,
    row_cols,
    row_vals,
    row_rhs,
    var_ptr,
    var_rows,
    var_vals,
    node_budget,
    disable_pruning,
):
    """Exact depth-first search over a compiled 0-1 model.

    All rows are "<= rhs" over binary variables (CSR arrays); the var->row
    incidence comes in CSC form with the matching coefficients.  Nodes are
    counted per attempted value assignment.  Returns ``(status, values,
    nodes)`` where values is an int8 assignment (None when infeasible or
    when the budget ran out before any incumbent).

    Search order is fully deterministic: branch on the free variable hit by
    the most unsatisfied rows (lowest index on ties), try the value favored
    by the objective first, keep the first-found best incumbent.
    """
    obj_l = [float(v) for v in np.asarray(obj, dtype=np.float64)]
    rp = [int(v) for v in np.asarray(row_ptr)]
    rc = [int(v) for v in np.asarray(row_cols)]
    rv = [float(v) for v in np.asarray(row_vals, dtype=np.float64)]
    rb = [float(v) for v in np.asarray(row_rhs, dtype=np.float64)]
    vp = [int(v) for v in np.asarray(var_ptr)]
    vr = [int(v) for v in np.asarray(var_rows)]
    vv = [float(v) for v in np.asarray(var_vals, dtype=np.float64)]
    n = len(obj_l)
    m = len(rb)
    node_budget = int(node_budget)
    disable_pruning = bool(disable_pruning)

    val = [-1] * n
    minact = [0.0] * m
    maxact = [0.0] * m
    satisfied = [False] * m
    active_cnt = [vp[j + 1] - vp[j] for j in range(n)]
    for r in range(m):
        lo = 0.0
        hi = 0.0
        for t in range(rp[r], rp[r + 1]):
            a = rv[t]
            if a < 0.0:
                lo += a
            else:
                hi += a
        minact[r] = lo
        maxact[r] = hi

    fixed_cost = 0.0
    neg_free = 0.0
    for c in obj_l:
        if c < 0.0:
            neg_free += c

    # Undo trail: kind 0 = var fix (a=var, b=row-restore mark, plus saved
    # cost accumulators), kind 1 = row satisfied (a=row).
    ev_kind: list[int] = []
    ev_a: list[int] = []
    ev_b: list[int] = []
    ev_cost: list[float] = []
    ev_neg: list[float] = []
    re_row: list[int] = []
    re_min: list[float] = []
    re_max: list[float] = []

    queue: list[int] = []
    in_queue = [False] * m

    best_obj: float | None = None
    best_val: list[int] | None = None
    nodes = 0

    def push_row(r):
        if not in_queue[r] and not satisfied[r]:
            in_queue[r] = True
            queue.append(r)

    def mark_satisfied(r):
        satisfied[r] = True
        ev_kind.append(1)
        ev_a.append(r)
        ev_b.append(-1)
        for t in range(rp[r], rp[r + 1]):
            j = rc[t]
            if val[j] < 0:
                active_cnt[j] -= 1

    def fix(j, v):
        nonlocal fixed_cost, neg_free
        if val[j] >= 0:
            return val[j] == v
        ev_kind.append(0)
        ev_a.append(j)
        ev_b.append(len(re_row))
        ev_cost.append(fixed_cost)
        ev_neg.append(neg_free)
        val[j] = v
        c = obj_l[j]
        if v == 1:
            fixed_cost += c
        if c < 0.0:
            neg_free -= c
        for t in range(vp[j], vp[j + 1]):
            r = vr[t]
            a = vv[t]
            re_row.append(r)
            re_min.append(minact[r])
            re_max.append(maxact[r])
            if v == 1:
                if a < 0.0:
                    maxact[r] += a
                else:
                    minact[r] += a
            else:
                if a < 0.0:
                    minact[r] -= a
                else:
                    maxact[r] -= a
            push_row(r)
        return True

    def propagate():
        while queue:
            r = queue.pop()
            in_queue[r] = False
            if satisfied[r]:
                continue
            slack = rb[r] - minact[r]
            if slack < -FEAS_TOL:
                while queue:
                    in_queue[queue.pop()] = False
                return False
            if maxact[r] <= rb[r] + FEAS_TOL:
                mark_satisfied(r)
                continue
            for t in range(rp[r], rp[r + 1]):
                j = rc[t]
                if val[j] >= 0:
                    continue
                a = rv[t]
                # fixing to the slack-neutral value keeps this row's slack
                # exact while the scan continues
                if a > slack + FEAS_TOL:
                    fix(j, 0)
                elif -a > slack + FEAS_TOL:
                    fix(j, 1)
        return True

    def undo_to(mark):
        nonlocal fixed_cost, neg_free
        while len(ev_kind) > mark:
            kind = ev_kind.pop()
            a = ev_a.pop()
            b = ev_b.pop()
            if kind == 1:
                satisfied[a] = False
                for t in range(rp[a], rp[a + 1]):
                    j = rc[t]
                    if val[j] < 0:
                        active_cnt[j] += 1
            else:
                val[a] = -1
                fixed_cost = ev_cost.pop()
                neg_free = ev_neg.pop()
                while len(re_row) > b:
                    r = re_row.pop()
                    minact[r] = re_min.pop()
                    maxact[r] = re_max.pop()
                cnt = 0
                for t in range(vp[a], vp[a + 1]):
                    if not satisfied[vr[t]]:
                        cnt += 1
                active_cnt[a] = cnt

    def pick_branch():
        best_j = -1
        best_cnt = 0
        for j in range(n):
            if val[j] < 0 and active_cnt[j] > best_cnt:
                best_cnt = active_cnt[j]
                best_j = j
        return best_j

    def record():
        nonlocal best_obj, best_val
        cand = fixed_cost + neg_free
        if best_obj is None or cand < best_obj:
            sol = val.copy()
            for j in range(n):
                if sol[j] < 0:
                    sol[j] = 1 if obj_l[j] < 0.0 else 0
            best_obj = cand
            best_val = sol

    for r in range(m):
        push_row(r)
    if not propagate():
        return STATUS_INFEASIBLE, None, 0

    # Frames: [trail mark, var, second value to try or None once spent].
    stack: list[list] = []
    status = STATUS_OPTIMAL
    descending = True
    while True:
        if descending:
            dead = False
            if (
                not disable_pruning
                and best_obj is not None
                and fixed_cost + neg_free >= best_obj
            ):
                dead = True
            if not dead:
                j = pick_branch()
                if j < 0:
                    # every row satisfied: finish the frees at their
                    # objective-preferred values
                    record()
                    dead = True
                else:
                    if nodes >= node_budget:
                        status = STATUS_BUDGET
                        break
                    nodes += 1
                    v = 1 if obj_l[j] < 0.0 else 0
                    stack.append([len(ev_kind), j, 1 - v])
                    descending = fix(j, v) and propagate()
                    continue
            descending = False

        resumed = False
        over_budget = False
        while stack:
            mark, j, second = stack[-1]
            undo_to(mark)
            if second is None:
                stack.pop()
                continue
            if nodes >= node_budget:
                over_budget = True
                break
            nodes += 1
            stack[-1][2] = None
            if fix(j, second) and propagate():
                resumed = True
                break
        if over_budget:
            status = STATUS_BUDGET
            break
        if resumed:
            descending = True
            continue
        break

    if best_val is None:
        if status == STATUS_BUDGET:
            return STATUS_BUDGET, None, nodes
        return STATUS_INFEASIBLE, None, nodes
    return status, np.array(best_val, dtype=np.int8), nodes
