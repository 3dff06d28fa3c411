"""Compiled dual simplex for bound-change re-solves.

The state is that of a bounded-variable problem ``A x = b, lo <= x <= up``
(minimisation of ``cost @ x``) at a dual feasible basis with an explicit
inverse. :func:`probe_batch` runs one private re-solve per single-bound
change; :func:`refix` fixes several columns and re-solves in place. The
pivoting rules match :meth:`psapilp.lp._Simplex.dual`.
"""

import numpy as np
from numba import njit

OPTIMAL = 0
INFEASIBLE = 1
CAPPED = 2
BREAKDOWN = 3


@njit(cache=True)
def _tol(v, feas_tol):
    if np.isfinite(v):
        return feas_tol * (1.0 + abs(v))
    return feas_tol


@njit(cache=True)
def _shift(A, basic, is_basic, at_upper, lo, up, inv, x, j):
    # Move a nonbasic column onto its (new) active bound and update x_B.
    m = A.shape[0]
    if is_basic[j]:
        return
    if at_upper[j] and not np.isfinite(up[j]):
        at_upper[j] = False
    target = up[j] if at_upper[j] else lo[j]
    delta = target - x[j]
    if delta != 0.0:
        x[j] = target
        for i in range(m):
            s = 0.0
            for k in range(m):
                s += inv[i, k] * A[k, j]
            x[basic[i]] -= s * delta


@njit(cache=True)
def _dual(A, b, cost, lo, up, basic, is_basic, at_upper, inv, x, updates, live,
          iter_cap, feas_tol, pivot_tol, refactor_every, bland_after, max_iter):
    """Dual simplex on the given state, in place.

    ``live`` lists, in increasing order, every column that may enter the
    basis (fixed columns never do), so pricing skips the rest. Returns
    ``(status, pivots, updates)`` where ``updates`` counts product form
    updates since the last refactorization.
    """
    m, N = A.shape

    used = 0
    degenerate = 0
    bland = False
    row = np.empty(N)
    d = np.empty(N)
    eligible = np.zeros(N, dtype=np.bool_)
    y = np.empty(m)
    alpha = np.empty(m)
    while True:
        # Leaving row: largest bound violation (lowest basic index under Bland).
        p = -1
        best_v = 0.0
        for i in range(m):
            k = basic[i]
            xv = x[k]
            if xv < lo[k] - _tol(lo[k], feas_tol) or xv > up[k] + _tol(up[k], feas_tol):
                v = max(lo[k] - xv, xv - up[k])
                if bland:
                    if p < 0 or k < basic[p]:
                        p = i
                elif p < 0 or v > best_v:
                    p = i
                    best_v = v
        if p < 0:
            return OPTIMAL, used, updates
        if iter_cap >= 0 and used >= iter_cap:
            return CAPPED, used, updates
        if used >= max_iter:
            return CAPPED, used, updates
        leaving = basic[p]
        increase = x[leaving] < lo[leaving]

        for i in range(m):
            y[i] = 0.0
        for i in range(m):
            cb = cost[basic[i]]
            for k in range(m):
                y[k] += cb * inv[i, k]
        # Entering column: eligible means moving it pushes x_p towards its bound.
        best_ratio = np.inf
        for k in live:
            eligible[k] = False
            if is_basic[k] or not (up[k] > lo[k]):
                continue
            r = 0.0
            t = 0.0
            for i in range(m):
                r += inv[p, i] * A[i, k]
                t += y[i] * A[i, k]
            row[k] = r
            d[k] = cost[k] - t
            sr = -r if increase else r
            if (at_upper[k] and sr < -pivot_tol) or (not at_upper[k] and sr > pivot_tol):
                eligible[k] = True
                ratio = abs(d[k]) / abs(row[k])
                if ratio < best_ratio:
                    best_ratio = ratio
        q = -1
        cutoff = best_ratio + 1e-12 * (1.0 + best_ratio)
        for k in live:
            if eligible[k] and abs(d[k]) / abs(row[k]) <= cutoff:
                if q < 0 or (not bland and abs(row[k]) > abs(row[q])):
                    q = k
        if q < 0:
            return INFEASIBLE, used, updates

        for i in range(m):
            s = 0.0
            for k in range(m):
                s += inv[i, k] * A[k, q]
            alpha[i] = s
        if abs(alpha[p]) < pivot_tol:
            return BREAKDOWN, used, updates

        target = lo[leaving] if increase else up[leaving]
        theta = (x[leaving] - target) / alpha[p]
        for i in range(m):
            x[basic[i]] -= theta * alpha[i]
        x[q] += theta
        x[leaving] = target
        is_basic[leaving] = False
        at_upper[leaving] = not increase
        basic[p] = q
        is_basic[q] = True
        at_upper[q] = False

        updates += 1
        if updates >= refactor_every:
            B = np.empty((m, m))
            for i in range(m):
                for k in range(m):
                    B[k, i] = A[k, basic[i]]
            inv[:, :] = np.linalg.inv(B)
            updates = 0
            # Recompute the basic values from the nonbasic ones.
            rhs = b.copy()
            for k in range(N):
                if not is_basic[k]:
                    for i in range(m):
                        rhs[i] -= A[i, k] * x[k]
            for i in range(m):
                s = 0.0
                for k in range(m):
                    s += inv[i, k] * rhs[k]
                x[basic[i]] = s
        else:
            piv = alpha[p]
            for k in range(m):
                inv[p, k] /= piv
            for i in range(m):
                if i != p:
                    f = alpha[i]
                    if f != 0.0:
                        for k in range(m):
                            inv[i, k] -= f * inv[p, k]

        used += 1
        if best_ratio <= 1e-12:
            degenerate += 1
            if degenerate >= bland_after:
                bland = True


@njit(cache=True)
def _prepare(cost, lo, up, basic, x, live):
    """Columns a probe may touch (live or basic) and the objective of the rest."""
    mask = np.zeros(x.shape[0], dtype=np.bool_)
    for k in live:
        mask[k] = True
    for i in range(basic.shape[0]):
        mask[basic[i]] = True
    touched = np.flatnonzero(mask)
    rest = 0.0
    for k in range(x.shape[0]):
        if not mask[k]:
            rest += cost[k] * x[k]
    is_basic = np.zeros(x.shape[0], dtype=np.bool_)
    for i in range(basic.shape[0]):
        is_basic[basic[i]] = True
    return touched, rest, is_basic


@njit(cache=True)
def _probe(A, b, cost, lo, up, basic, is_basic, at_upper, inv, x, updates, live, touched, rest,
           j, new_lo, new_up, iter_cap, feas_tol, pivot_tol, refactor_every, bland_after, max_iter):
    # lo, up, is_basic, at_upper and x are shared between probes. Every entry
    # a probe changes lies in ``touched``, so those are saved and restored.
    T = touched.shape[0]
    saved_x = np.empty(T)
    saved_at = np.empty(T, dtype=np.bool_)
    for t in range(T):
        saved_x[t] = x[touched[t]]
        saved_at[t] = at_upper[touched[t]]
    old_lo = lo[j]
    old_up = up[j]
    work_basic = basic.copy()
    work_inv = inv.copy()
    lo[j] = new_lo
    up[j] = new_up
    _shift(A, work_basic, is_basic, at_upper, lo, up, work_inv, x, j)
    status, _, _ = _dual(A, b, cost, lo, up, work_basic, is_basic, at_upper, work_inv, x, updates,
                         live, iter_cap, feas_tol, pivot_tol, refactor_every, bland_after, max_iter)
    obj = rest
    for t in range(T):
        obj += cost[touched[t]] * x[touched[t]]
    for i in range(work_basic.shape[0]):
        is_basic[work_basic[i]] = False
    for i in range(basic.shape[0]):
        is_basic[basic[i]] = True
    for t in range(T):
        x[touched[t]] = saved_x[t]
        at_upper[touched[t]] = saved_at[t]
    lo[j] = old_lo
    up[j] = old_up
    if status == OPTIMAL or status == CAPPED:
        return obj, status
    if status == INFEASIBLE:
        return np.inf, status
    return np.nan, status


@njit(cache=True)
def refix(A, b, cost, lo, up, basic, is_basic, at_upper, inv, x, updates, js, vals,
          iter_cap, feas_tol, pivot_tol, refactor_every, bland_after, max_iter):
    """Fix ``x[js] = vals`` and restore optimality with the dual simplex, in place."""
    for t in range(js.shape[0]):
        j = js[t]
        lo[j] = vals[t]
        up[j] = vals[t]
        _shift(A, basic, is_basic, at_upper, lo, up, inv, x, j)
    live = np.flatnonzero(up > lo)
    return _dual(A, b, cost, lo, up, basic, is_basic, at_upper, inv, x, updates, live,
                 iter_cap, feas_tol, pivot_tol, refactor_every, bland_after, max_iter)


@njit(cache=True)
def probe_batch(A, b, cost, lo, up, basic, at_upper, inv, x, updates, js, new_lo, new_up,
                iter_cap, feas_tol, pivot_tol, refactor_every, bland_after, max_iter):
    """Run one probe per entry of ``js``; returns internal objectives and status codes."""
    K = js.shape[0]
    values = np.empty(K)
    status = np.empty(K, dtype=np.int64)
    lo = lo.copy()
    up = up.copy()
    at_upper = at_upper.copy()
    x = x.copy()
    probed = up > lo
    for t in range(K):
        probed[js[t]] = True
    live = np.flatnonzero(probed)
    touched, rest, is_basic = _prepare(cost, lo, up, basic, x, live)
    for t in range(K):
        v, s = _probe(A, b, cost, lo, up, basic, is_basic, at_upper, inv, x, updates, live,
                      touched, rest, js[t], new_lo[t], new_up[t],
                      iter_cap, feas_tol, pivot_tol, refactor_every, bland_after, max_iter)
        values[t] = v
        status[t] = s
    return values, status


@njit(cache=True)
def binary_split(A, b, cost, lo, up, basic, at_upper, inv, x, updates, act, ftol,
                 iter_cap, feas_tol, pivot_tol, refactor_every, bland_after, max_iter):
    """Objective with ``x_j`` fixed to 0 and to 1, for every column in ``act``.

    Entries where the current point already has ``x_j = e`` reuse the
    current objective and get code -1; the rest are probed.
    """
    K = act.shape[0]
    values = np.empty((K, 2))
    codes = np.full((K, 2), -1, dtype=np.int64)
    lo = lo.copy()
    up = up.copy()
    at_upper = at_upper.copy()
    x = x.copy()
    probed = up > lo
    for t in range(K):
        probed[act[t]] = True
    live = np.flatnonzero(probed)
    touched, rest, is_basic = _prepare(cost, lo, up, basic, x, live)
    here = cost @ x
    for t in range(K):
        j = act[t]
        for e in range(2):
            if abs(x[j] - e) <= ftol:
                values[t, e] = here
                continue
            new_lo = lo[j] if e == 0 else 1.0
            new_up = 0.0 if e == 0 else up[j]
            v, s = _probe(A, b, cost, lo, up, basic, is_basic, at_upper, inv, x, updates, live,
                          touched, rest, j, new_lo, new_up, iter_cap, feas_tol, pivot_tol,
                          refactor_every, bland_after, max_iter)
            values[t, e] = v
            codes[t, e] = s
    return values, codes
