"""Reference solvers used to cross-check the level sweep.

Neither solver shares code with :mod:`psapilp.search`. Both certify their
answer with the exact feasibility check and objective of
:mod:`psapilp.model`.
"""

from __future__ import annotations

import enum
import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lp
from .errors import PilpError, RelaxationInfeasible, UnboundedRelaxation
from .lp import LpStatus
from .model import Problem, evaluate, is_feasible

BRUTE_FORCE_CAP = 10**7
_CHUNK = 1 << 16


class OracleStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass
class OracleResult:
    status: OracleStatus
    point: Optional[tuple]
    value: Optional[int]
    count: int
    node_log: list = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status is OracleStatus.OPTIMAL


class CapExceeded(PilpError):
    """A reference solver hit its node, point or time cap."""

    def __init__(self, message, incumbent=None, value=None, reason="cap"):
        super().__init__(message)
        self.incumbent = incumbent
        self.value = value
        self.reason = reason


def default_box(p: Problem, opts: lp.LpOptions = lp.DEFAULT_OPTIONS):
    """Per-variable integer upper limits: ``var_upper`` where given, else ``floor(u_j)``."""
    model = lp.relaxation(p)
    box = []
    for j in range(p.n):
        if p.var_upper is not None and p.var_upper[j] is not None:
            box.append(p.var_upper[j])
            continue
        c = np.zeros(p.n)
        c[j] = 1.0
        sol = lp.solve(model.with_objective(c, 0.0, "max"), opts=opts)
        if sol.status is LpStatus.INFEASIBLE:
            raise RelaxationInfeasible("LP relaxation is infeasible")
        if sol.status is LpStatus.UNBOUNDED:
            raise UnboundedRelaxation(f"x_{j} is unbounded over the relaxation")
        box.append(max(0, math.floor(sol.value + 1e-6)))
    return box


def brute_force(p: Problem, box=None, cap=BRUTE_FORCE_CAP) -> OracleResult:
    """Enumerate every lattice point of ``box`` in lexicographic order.

    Returns the lexicographically smallest maximiser.
    """
    if box is None:
        try:
            box = default_box(p)
        except RelaxationInfeasible:
            return OracleResult(OracleStatus.INFEASIBLE, None, None, 0)
    box = [int(v) for v in box]
    if len(box) != p.n or any(v < 0 for v in box):
        raise ValueError("box must give one non-negative limit per variable")
    radix = [v + 1 for v in box]
    total = math.prod(radix)
    if total > cap:
        raise CapExceeded(f"{total} lattice points exceed the brute-force cap of {cap}",
                          reason="point_cap")
    exact64 = _int64_safe(p, box)
    a = np.array(p.a_num, dtype=np.int64 if exact64 else object).reshape(p.m, p.n)
    b = np.array(p.b_num, dtype=np.int64 if exact64 else object)
    c = np.array(p.c, dtype=np.int64 if exact64 else object)
    # Place values: first coordinate most significant, so index order is lexicographic.
    place = [math.prod(radix[j + 1:]) for j in range(p.n)]
    best_val, best_idx = None, None
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        pts = np.stack([(idx // place[j]) % radix[j] for j in range(p.n)], axis=1)
        if not exact64:
            pts = pts.astype(object)
        ok = np.all(pts @ a.T <= b, axis=1) if p.m else np.ones(len(idx), dtype=bool)
        if not ok.any():
            continue
        vals = pts[ok] @ c
        k = int(np.argmax(vals)) if exact64 else max(range(len(vals)), key=lambda i: (vals[i], -i))
        v = int(vals[k]) + p.h
        if best_val is None or v > best_val:
            best_val, best_idx = v, int(idx[ok][k])
    if best_idx is None:
        return OracleResult(OracleStatus.INFEASIBLE, None, None, total)
    point = tuple(int((best_idx // place[j]) % radix[j]) for j in range(p.n))
    if not is_feasible(p, point) or evaluate(p, point) != best_val:
        raise PilpError("brute-force maximiser failed the exact certificate")
    return OracleResult(OracleStatus.OPTIMAL, point, best_val, total)


def _int64_safe(p, box):
    reach = sum(box) + 1
    big = max([abs(v) for row in p.a_num for v in row] + [abs(v) for v in p.c] + [1])
    return big * reach < 2**62 and max([abs(v) for v in p.b_num] + [abs(p.h)]) < 2**62


BEST_BOUND = "best-bound"
DEPTH_FIRST = "depth-first"


@dataclass
class NodeRecord:
    node: int
    value: float
    branched_on: Optional[int] = None
    branch_value: Optional[float] = None
    integral: bool = False


def branch_and_bound(p: Problem, node_select=BEST_BOUND, node_cap=200_000,
                     opts: lp.LpOptions = lp.DEFAULT_OPTIONS, int_tol=1e-6,
                     time_limit=None) -> OracleResult:
    """LP-based branch and bound on the most fractional variable.

    Node relaxations are solved when a node is created, so best-bound
    selection pops nodes in order of their own relaxation value. With
    integral objective data a node is pruned once its bound cannot reach
    ``z_best + 1``.
    """
    if node_select not in (BEST_BOUND, DEPTH_FIRST):
        raise ValueError(f"unknown node selection {node_select!r}")
    deadline = None if time_limit is None else time.monotonic() + time_limit
    root_model = lp.relaxation(p)
    log = []
    counter = 0
    open_nodes = []
    best_x, best_val = None, None

    def evaluate_node(lower, upper, warm):
        model = root_model.with_bounds(lower, upper)
        sol = lp.solve(model, warm, opts)
        if sol.status is LpStatus.UNBOUNDED:
            raise UnboundedRelaxation("node relaxation is unbounded")
        return sol

    def push(sol, lower, upper):
        nonlocal counter
        counter += 1
        if counter > node_cap:
            raise CapExceeded(f"branch and bound exceeded {node_cap} nodes", best_x, best_val,
                              "node_cap")
        key = -sol.value if node_select == BEST_BOUND else -counter
        heapq.heappush(open_nodes, (key, counter, sol, lower, upper))

    root = evaluate_node(root_model.lower, root_model.upper, None)
    if root.status is LpStatus.INFEASIBLE:
        return OracleResult(OracleStatus.INFEASIBLE, None, None, 1)
    push(root, root_model.lower.copy(), root_model.upper.copy())
    while open_nodes:
        if deadline is not None and time.monotonic() > deadline:
            raise CapExceeded("branch and bound hit its time limit", best_x, best_val, "time_limit")
        _, node_id, sol, lower, upper = heapq.heappop(open_nodes)
        if best_val is not None and sol.value < best_val + 1 - int_tol:
            continue
        x = sol.point
        frac = np.abs(x - np.round(x))
        record = NodeRecord(node_id, sol.value)
        log.append(record)
        if np.all(frac <= int_tol):
            cand = tuple(int(v) for v in np.round(x))
            if is_feasible(p, cand):
                v = evaluate(p, cand)
                record.integral = True
                if best_val is None or v > best_val or (v == best_val and cand < best_x):
                    best_x, best_val = cand, v
                continue
            # Rounded point fails the exact check: branch on the largest deviation.
            j = int(np.argmax(frac))
            if frac[j] == 0:
                raise PilpError("integral LP point rejected by the exact feasibility check")
        else:
            j = int(np.argmax(np.where(frac > int_tol, -np.abs(x - np.floor(x) - 0.5), -np.inf)))
        record.branched_on, record.branch_value = j, float(x[j])
        down = math.floor(x[j])
        for lo_j, up_j in ((lower[j], down), (down + 1, upper[j])):
            if lo_j > up_j:
                continue
            lo, up = lower.copy(), upper.copy()
            lo[j], up[j] = lo_j, up_j
            child = evaluate_node(lo, up, sol.basis)
            if child.status is LpStatus.INFEASIBLE:
                continue
            if best_val is not None and child.value < best_val + 1 - int_tol:
                continue
            push(child, lo, up)
    if best_x is None:
        return OracleResult(OracleStatus.INFEASIBLE, None, None, counter, log)
    return OracleResult(OracleStatus.OPTIMAL, best_x, best_val, counter, log)
