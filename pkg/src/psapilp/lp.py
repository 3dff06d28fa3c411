"""Bounded-variable revised simplex (primal and dual) on dense data.

Constraints are ``A x <= b`` with per-variable bounds ``lower <= x <= upper``.
Internally every row receives a slack ``s >= 0`` so the working system is
``[A I] (x, s) = b``; nonbasic variables sit at one of their bounds. The
basis inverse is kept as an LU factorization plus an eta file and is
refactorized every ``refactor_every`` pivots.

Pricing is Dantzig's rule until ``3 * (n + m)`` degenerate pivots have been
made in one solve, after which Bland's rule takes over for the remainder of
that solve.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import IterationLimit, NumericalBreakdown


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class BoundStatus(enum.Enum):
    EXACT = "exact"
    VALID_BOUND = "valid_bound"
    RESTRICTED_INFEASIBLE = "restricted_infeasible"


SET_UPPER = "upper"
SET_LOWER = "lower"


@dataclass(frozen=True)
class LpOptions:
    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    pivot_tol: float = 1e-9
    refactor_every: int = 50
    max_iter: Optional[int] = None


DEFAULT_OPTIONS = LpOptions()


def _frozen(a, ndim, width=None):
    # Read-only float arrays of the right shape are shared, not copied.
    if (isinstance(a, np.ndarray) and a.dtype == np.float64 and not a.flags.writeable
            and a.ndim == ndim and (width is None or a.shape[1] == width)):
        return a
    a = np.array(a, dtype=float)
    return a.reshape(-1) if ndim == 1 else a.reshape(-1, width)


@dataclass(frozen=True, eq=False)
class LpModel:
    """``max`` (or ``min``) ``c.x + const`` s.t. ``A x <= b``, ``lower <= x <= upper``."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    const: float = 0.0
    sense: str = "max"

    def __post_init__(self):
        c = _frozen(self.c, 1)
        n = c.size
        A = _frozen(self.A, 2, n) if n else np.zeros((0, 0))
        b = _frozen(self.b, 1)
        lower = _frozen(self.lower, 1)
        upper = _frozen(self.upper, 1)
        if A.shape[0] != b.size:
            raise ValueError("A and b disagree on the row count")
        if lower.size != n or upper.size != n:
            raise ValueError("bound vectors must have one entry per variable")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        if not np.all(np.isfinite(lower)):
            raise ValueError("free or -inf lower bounds are not supported")
        if self.sense not in ("max", "min"):
            raise ValueError(f"unknown sense {self.sense!r}")
        for name, arr in (("c", c), ("A", A), ("b", b), ("lower", lower), ("upper", upper)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "const", float(self.const))

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def m(self) -> int:
        return self.b.size

    def with_bounds(self, lower=None, upper=None) -> "LpModel":
        return replace(
            self,
            lower=self.lower if lower is None else lower,
            upper=self.upper if upper is None else upper,
        )

    def with_objective(self, c, const=0.0, sense=None) -> "LpModel":
        return replace(self, c=c, const=const, sense=self.sense if sense is None else sense)

    def with_fixed(self, values: dict) -> "LpModel":
        """Copy with ``lower[j] = upper[j] = v`` for every ``j: v`` in ``values``.

        Skips the validation of :meth:`__post_init__`; values are expected to
        lie within the current bounds.
        """
        js = np.fromiter(values.keys(), dtype=np.int64, count=len(values))
        vs = np.fromiter(values.values(), dtype=float, count=len(values))
        lower = self.lower.copy()
        upper = self.upper.copy()
        lower[js] = vs
        upper[js] = vs
        lower.setflags(write=False)
        upper.setflags(write=False)
        out = object.__new__(LpModel)
        out.__dict__.update(self.__dict__)
        object.__setattr__(out, "lower", lower)
        object.__setattr__(out, "upper", upper)
        return out

    def fix(self, j: int, value: float) -> "LpModel":
        lower = self.lower.copy()
        upper = self.upper.copy()
        lower[j] = upper[j] = value
        return self.with_bounds(lower, upper)


def relaxation(problem, sense="max") -> LpModel:
    """LP relaxation of a :class:`~psapilp.model.Problem`."""
    return LpModel(
        problem.c_array,
        problem.A,
        problem.b,
        np.zeros(problem.n),
        problem.upper_array,
        float(problem.h),
        sense,
    )


@dataclass(frozen=True)
class Basis:
    """Basic column indices (structurals ``0..n-1``, slacks ``n..n+m-1``)
    and the set of nonbasic columns resting at their upper bound."""

    basic: tuple
    at_upper: frozenset = frozenset()


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    point: Optional[np.ndarray]
    value: float
    _basis: Optional[Basis]
    iterations: int
    infeasibility: float = 0.0
    # Solve context that produced an optimal solution; lets bound probes
    # skip refactorizing the same basis.
    _ctx: object = field(default=None, repr=False, compare=False)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    @property
    def basis(self) -> Optional[Basis]:
        # Exported on first use; the context is never mutated after solving.
        if self._basis is None and self._ctx is not None and self.optimal:
            object.__setattr__(self, "_basis", self._ctx.export_basis())
        return self._basis


class _Factor:
    """Explicit basis inverse, refreshed from an LU factorization.

    Bases here are small (one row per constraint), so an explicit inverse
    with product-form row updates beats repeated triangular solves.
    """

    def __init__(self, B, pivot_tol):
        self.m = B.shape[0]
        self.updates = 0
        self.inv = np.zeros((0, 0))
        if self.m:
            lu = lu_factor(B, check_finite=False)
            diag = np.abs(np.diag(lu[0]))
            if diag.min() <= pivot_tol * max(1.0, diag.max()):
                raise NumericalBreakdown("singular basis matrix")
            self.inv = lu_solve(lu, np.eye(self.m), check_finite=False)

    def ftran(self, a):
        return self.inv @ a

    def btran(self, v):
        return v @ self.inv

    def row(self, r):
        return self.inv[r]

    def update(self, r, alpha):
        pr = self.inv[r] / alpha[r]
        self.inv -= np.outer(alpha, pr)
        self.inv[r] = pr
        self.updates += 1

    def copy(self):
        twin = object.__new__(_Factor)
        twin.m, twin.updates, twin.inv = self.m, self.updates, self.inv.copy()
        return twin


class _Simplex:
    """One worker-owned solve context."""

    def __init__(self, model: LpModel, opts: LpOptions):
        self.opts = opts
        self.model = model
        m, n = model.m, model.n
        self.m, self.n = m, n
        A = model.A
        # Row equilibration: keeps tolerances meaningful for large coefficients.
        scale = np.abs(A).max(axis=1) if n else np.ones(m)
        scale = np.where(scale > 0, scale, 1.0)
        self.row_scale = scale
        self.A = np.hstack([A / scale[:, None], np.eye(m)])
        self.b = model.b / scale
        self.lo = np.concatenate([model.lower, np.zeros(m)])
        self.up = np.concatenate([model.upper, np.full(m, np.inf)])
        sign = -1.0 if model.sense == "max" else 1.0
        self.sign = sign
        self.const = model.const
        self.true_cost = np.concatenate([sign * model.c, np.zeros(m)])
        self.cost = self.true_cost
        self.n_art = 0
        self.iterations = 0
        self.degenerate = 0
        self.bland = False
        self.bland_after = 3 * (n + m)
        self.max_iter = opts.max_iter if opts.max_iter is not None else 20000 + 50 * (n + m)

    # -- state -------------------------------------------------------------

    @property
    def N(self):
        return self.A.shape[1]

    def _set_basis(self, basic, at_upper):
        self.basic = np.array(basic, dtype=int)
        self.is_basic = np.zeros(self.N, dtype=bool)
        self.is_basic[self.basic] = True
        self.at_upper = np.zeros(self.N, dtype=bool)
        idx = np.fromiter(at_upper, dtype=int, count=len(at_upper))
        self.at_upper[idx[idx < self.N]] = True
        self.at_upper &= ~self.is_basic & np.isfinite(self.up)
        self._refactor()

    def fork(self) -> "_Simplex":
        """Copy of the mutable state; matrix, costs and LU factors are shared."""
        twin = object.__new__(_Simplex)
        twin.__dict__.update(self.__dict__)
        for name in ("basic", "is_basic", "at_upper", "lo", "up", "x"):
            setattr(twin, name, getattr(self, name).copy())
        twin.factor = self.factor.copy()
        return twin

    def _refactor(self):
        self.factor = _Factor(self.A[:, self.basic], self.opts.pivot_tol)

    def _primal_values(self):
        xn = np.where(self.at_upper, self.up, self.lo)
        xn[self.basic] = 0.0
        rhs = self.b - self.A @ xn
        xn[self.basic] = self.factor.ftran(rhs)
        self.x = xn

    def _reduced_costs(self):
        y = self.factor.btran(self.cost[self.basic])
        d = self.cost - self.A.T @ y
        d[self.basic] = 0.0
        return d

    def _feas_tol(self, bound):
        return self.opts.feas_tol * (1.0 + np.abs(np.where(np.isfinite(bound), bound, 0.0)))

    def _objective(self):
        return float(self.true_cost @ self.x)

    def _pivot(self, p, q, alpha, leaving_to_upper):
        leaving = self.basic[p]
        self.is_basic[leaving] = False
        self.at_upper[leaving] = leaving_to_upper
        self.basic[p] = q
        self.is_basic[q] = True
        self.at_upper[q] = False
        if self.factor.updates + 1 >= self.opts.refactor_every:
            self._refactor()
        else:
            self.factor.update(p, alpha)

    def _tick(self, degenerate):
        self.iterations += 1
        if degenerate:
            self.degenerate += 1
            if self.degenerate >= self.bland_after:
                self.bland = True

    # -- primal simplex -----------------------------------------------------

    def primal(self):
        """Run primal simplex from a primal feasible basis.

        Returns ``"optimal"`` or ``"unbounded"``.
        """
        ptol = self.opts.pivot_tol
        while True:
            if self.iterations >= self.max_iter:
                raise IterationLimit(
                    "simplex iteration limit exceeded", best_bound=self._report(self._objective())
                )
            d = self._reduced_costs()
            movable = ~self.is_basic & (self.up > self.lo)
            otol = self.opts.opt_tol
            inc = movable & ~self.at_upper & (d < -otol)
            dec = movable & self.at_upper & (d > otol)
            elig = inc | dec
            if not elig.any():
                return "optimal"
            if self.bland:
                q = int(np.flatnonzero(elig)[0])
            else:
                score = np.where(elig, np.abs(d), -1.0)
                q = int(np.argmax(score))
            delta = 1.0 if inc[q] else -1.0
            alpha = self.factor.ftran(self.A[:, q])
            s = delta * alpha
            xb = self.x[self.basic]
            lob = self.lo[self.basic]
            upb = self.up[self.basic]
            ratios = np.full(self.m, np.inf)
            down = s > ptol
            up = (s < -ptol) & np.isfinite(upb)
            ratios[down] = (xb[down] - lob[down]) / s[down]
            ratios[up] = (upb[up] - xb[up]) / (-s[up])
            ratios = np.maximum(ratios, 0.0)
            t_flip = self.up[q] - self.lo[q]
            t_row = ratios.min() if self.m else np.inf
            if not np.isfinite(t_row) and not np.isfinite(t_flip):
                return "unbounded"
            if t_flip <= t_row:
                self.at_upper[q] = not self.at_upper[q]
                self._primal_values()
                self._tick(False)
                continue
            ties = np.flatnonzero(ratios <= t_row + 1e-12 * (1.0 + t_row))
            if self.bland:
                p = int(ties[np.argmin(self.basic[ties])])
            else:
                p = int(ties[np.argmax(np.abs(s[ties]))])
            if abs(alpha[p]) < ptol:
                raise NumericalBreakdown("pivot element below tolerance")
            self._pivot(p, q, alpha, leaving_to_upper=not down[p])
            self._primal_values()
            self._tick(t_row <= 1e-12)

    # -- dual simplex -------------------------------------------------------

    def dual(self, iter_cap=None):
        """Run dual simplex from a dual feasible basis.

        Returns ``"optimal"``, ``"infeasible"`` or ``"capped"``.
        """
        ptol = self.opts.pivot_tol
        used = 0
        # Bounds stay fixed during a dual run, so tolerances are computed once.
        lo_tol = self.lo - self._feas_tol(self.lo)
        up_tol = self.up + self._feas_tol(self.up)
        movable = self.up > self.lo
        while True:
            basic = self.basic
            xb = self.x[basic]
            below = self.lo[basic] - xb
            above = xb - self.up[basic]
            viol = np.maximum(lo_tol[basic] - xb, xb - up_tol[basic])
            bad = viol > 0
            if not bad.any():
                return "optimal"
            if iter_cap is not None and used >= iter_cap:
                return "capped"
            if self.iterations >= self.max_iter:
                raise IterationLimit(
                    "dual simplex iteration limit exceeded",
                    best_bound=self._report(self._objective()),
                )
            if self.bland:
                rows = np.flatnonzero(bad)
                p = int(rows[np.argmin(basic[rows])])
            else:
                p = int(np.argmax(np.where(bad, np.maximum(below, above), -np.inf)))
            increase = below[p] > above[p]
            row = self.factor.row(p) @ self.A
            d = self._reduced_costs()
            # Entering columns must move x_p towards its violated bound.
            sr = -row if increase else row
            elig = movable & ~self.is_basic & np.where(self.at_upper, sr < -ptol, sr > ptol)
            if not elig.any():
                return "infeasible"
            idx = np.flatnonzero(elig)
            ratios = np.abs(d[idx]) / np.abs(row[idx])
            best = ratios.min()
            ties = idx[ratios <= best + 1e-12 * (1.0 + best)]
            if self.bland:
                q = int(ties.min())
            else:
                q = int(ties[np.argmax(np.abs(row[ties]))])
            alpha = self.factor.ftran(self.A[:, q])
            if abs(alpha[p]) < ptol:
                raise NumericalBreakdown("dual pivot element below tolerance")
            self._pivot(p, q, alpha, leaving_to_upper=not increase)
            self._primal_values()
            used += 1
            self._tick(best <= 1e-12)

    def dual_feasible(self):
        d = self._reduced_costs()
        free = ~self.is_basic & (self.up > self.lo)
        otol = self.opts.opt_tol
        bad = free & ((~self.at_upper & (d < -otol)) | (self.at_upper & (d > otol)))
        return not bad.any()

    def primal_feasible(self):
        xb = self.x[self.basic]
        lob = self.lo[self.basic]
        upb = self.up[self.basic]
        return bool(np.all(xb >= lob - self._feas_tol(lob)) and np.all(xb <= upb + self._feas_tol(upb)))

    # -- drivers ------------------------------------------------------------

    def cold_start(self):
        """Slack basis plus artificials for violated rows; Phase I then Phase II."""
        m, n = self.m, self.n
        self._set_basis(np.arange(n, n + m), ())
        self._primal_values()
        slack = self.x[n:n + m]
        bad_rows = np.flatnonzero(slack < -self._feas_tol(np.zeros(m)))
        if bad_rows.size:
            k = bad_rows.size
            art = np.zeros((m, k))
            art[bad_rows, np.arange(k)] = -1.0
            self.A = np.hstack([self.A, art])
            self.lo = np.concatenate([self.lo, np.zeros(k)])
            self.up = np.concatenate([self.up, np.full(k, np.inf)])
            self.true_cost = np.concatenate([self.true_cost, np.zeros(k)])
            self.n_art = k
            basic = np.arange(n, n + m)
            basic[bad_rows] = n + m + np.arange(k)
            self._set_basis(basic, ())
            self._primal_values()
            self.cost = np.concatenate([np.zeros(n + m), np.ones(k)])
            if self.primal() != "optimal":
                raise NumericalBreakdown("phase one reported an unbounded ray")
            infeas = float(self.x[n + m:].sum())
            if infeas > self.opts.feas_tol * (1.0 + np.abs(self.b).max()):
                return "infeasible", infeas
            self.up[n + m:] = 0.0
            self.at_upper[n + m:] = False
            self.cost = self.true_cost
            self._primal_values()
        return self.primal(), 0.0

    def warm_start(self, basis: Basis, iter_cap=None):
        """Try the given basis; returns a termination token or ``None`` when unusable."""
        if len(basis.basic) != self.m or any(j >= self.n + self.m for j in basis.basic):
            return None
        try:
            self._set_basis(basis.basic, basis.at_upper)
        except NumericalBreakdown:
            return None
        self._primal_values()
        if self.primal_feasible():
            return self.primal()
        if self.dual_feasible():
            return self.dual(iter_cap)
        return None

    def _report(self, internal_obj):
        return self.sign * internal_obj + self.const

    def export_basis(self) -> Basis:
        limit = self.n + self.m
        basic = []
        for p, j in enumerate(self.basic):
            if j >= limit:
                # Artificial for row r spans the same direction as slack r.
                r = int(np.flatnonzero(self.A[:, j])[0])
                j = self.n + r
            basic.append(int(j))
        at_upper = frozenset(np.flatnonzero(self.at_upper[:limit]).tolist())
        return Basis(tuple(basic), at_upper)

    def solution(self, status: LpStatus, infeasibility=0.0) -> LpSolution:
        if status is LpStatus.OPTIMAL:
            point = self.x[: self.n].copy()
            value = self._report(self._objective())
        else:
            point, value = None, np.nan
        ctx = self if status is LpStatus.OPTIMAL else None
        return LpSolution(status, point, value, None, self.iterations, infeasibility, ctx)


_TOKEN = {
    "optimal": LpStatus.OPTIMAL,
    "infeasible": LpStatus.INFEASIBLE,
    "unbounded": LpStatus.UNBOUNDED,
}


def solve(model: LpModel, warm: Optional[Basis] = None, opts: LpOptions = DEFAULT_OPTIONS) -> LpSolution:
    """Solve ``model``; ``warm`` seeds the starting basis when it is usable."""
    ctx = _Simplex(model, opts)
    if warm is not None:
        token = ctx.warm_start(warm)
        if token is not None:
            return ctx.solution(_TOKEN[token])
        ctx = _Simplex(model, opts)
    token, infeas = ctx.cold_start()
    return ctx.solution(_TOKEN[token], infeas)


def resolve(model: LpModel, basis: Basis, iter_cap=None, opts: LpOptions = DEFAULT_OPTIONS):
    """Dual simplex re-solve of ``model`` from a basis that is dual feasible for it.

    Returns ``(value, status, solution)``. With ``iter_cap`` the dual simplex
    may stop early; every intermediate objective of a dual feasible basis
    over-estimates the maximum (under-estimates the minimum), so the value
    returned with ``VALID_BOUND`` is still a valid bound.
    """
    ctx = _Simplex(model, opts)
    token = None
    if len(basis.basic) == ctx.m:
        try:
            ctx._set_basis(basis.basic, basis.at_upper)
        except NumericalBreakdown:
            token = "cold"
        else:
            ctx._primal_values()
            if ctx.primal_feasible():
                token = ctx.primal()
            elif ctx.dual_feasible():
                token = ctx.dual(iter_cap)
            else:
                token = "cold"
    else:
        token = "cold"
    if token == "cold":
        sol = solve(model, opts=opts)
        if sol.status is LpStatus.INFEASIBLE:
            return -np.inf if model.sense == "max" else np.inf, BoundStatus.RESTRICTED_INFEASIBLE, sol
        if sol.status is LpStatus.UNBOUNDED:
            return np.inf if model.sense == "max" else -np.inf, BoundStatus.EXACT, sol
        return sol.value, BoundStatus.EXACT, sol
    if token == "infeasible":
        sol = ctx.solution(LpStatus.INFEASIBLE)
        return -np.inf if model.sense == "max" else np.inf, BoundStatus.RESTRICTED_INFEASIBLE, sol
    if token == "capped":
        return ctx._report(ctx._objective()), BoundStatus.VALID_BOUND, None
    if token == "unbounded":
        sol = ctx.solution(LpStatus.UNBOUNDED)
        return np.inf if model.sense == "max" else -np.inf, BoundStatus.EXACT, sol
    sol = ctx.solution(LpStatus.OPTIMAL)
    return sol.value, BoundStatus.EXACT, sol


def resolve_with_bound(model: LpModel, sol: LpSolution, j: int, kind: str, v: float,
                       iter_cap=None, opts: LpOptions = DEFAULT_OPTIONS):
    """Tighten one bound of ``x_j`` and re-solve from ``sol``'s basis.

    ``kind`` is :data:`SET_UPPER` or :data:`SET_LOWER`. Returns
    ``(bound, status)``.
    """
    if not sol.optimal:
        raise ValueError("resolve_with_bound needs an optimal starting solution")
    lower = model.lower.copy()
    upper = model.upper.copy()
    if kind == SET_UPPER:
        upper[j] = v
    elif kind == SET_LOWER:
        lower[j] = v
    else:
        raise ValueError(f"unknown bound kind {kind!r}")
    if lower[j] > upper[j]:
        return (-np.inf if model.sense == "max" else np.inf), BoundStatus.RESTRICTED_INFEASIBLE
    value, status, _ = resolve(model.with_bounds(lower, upper), sol.basis, iter_cap, opts)
    return value, status


class BoundProbe:
    """Repeated single-bound re-solves from one optimal solution.

    The parent basis is factorized once; each :meth:`probe` works on a
    forked copy of the solve context, so the cost of a probe is the dual
    simplex pivots it needs.
    """

    def __init__(self, model: LpModel, sol: LpSolution, opts: LpOptions = DEFAULT_OPTIONS):
        if not sol.optimal:
            raise ValueError("bound probes need an optimal starting solution")
        self.model = model
        self.sol = sol
        self.opts = opts
        self.ctx = None
        if sol._ctx is not None and sol._ctx.model is model and sol._ctx.opts == opts:
            self.ctx = sol._ctx
            return
        ctx = _Simplex(model, opts)
        if len(sol.basis.basic) == ctx.m:
            try:
                ctx._set_basis(sol.basis.basic, sol.basis.at_upper)
            except NumericalBreakdown:
                ctx = None
            else:
                ctx._primal_values()
                if not ctx.dual_feasible():
                    ctx = None
        else:
            ctx = None
        self.ctx = ctx

    def probe(self, j: int, kind: str, v: float, iter_cap=None):
        """Same contract as :func:`resolve_with_bound`."""
        model = self.model
        worst = -np.inf if model.sense == "max" else np.inf
        lo_j, up_j = model.lower[j], model.upper[j]
        if kind == SET_UPPER:
            up_j = v
        elif kind == SET_LOWER:
            lo_j = v
        else:
            raise ValueError(f"unknown bound kind {kind!r}")
        if lo_j > up_j:
            return worst, BoundStatus.RESTRICTED_INFEASIBLE
        if self.ctx is None or lo_j < model.lower[j] or up_j > model.upper[j]:
            # A loosened bound can break dual feasibility; take the general path.
            return resolve_with_bound(model, self.sol, j, kind, v, iter_cap, self.opts)
        ctx = self.ctx.fork()
        ctx.lo[j], ctx.up[j] = lo_j, up_j
        if not ctx.is_basic[j] and ctx.at_upper[j] and not np.isfinite(up_j):
            ctx.at_upper[j] = False
        ctx._primal_values()
        token = ctx.dual(iter_cap)
        if token == "infeasible":
            return worst, BoundStatus.RESTRICTED_INFEASIBLE
        value = ctx._report(ctx._objective())
        if token == "capped":
            return value, BoundStatus.VALID_BOUND
        return value, BoundStatus.EXACT

    def probe_many(self, requests, iter_cap=None):
        """Batch form of :meth:`probe` over ``(j, kind, v)`` requests, run compiled."""
        requests = list(requests)
        if self.ctx is None or not requests:
            return [self.probe(j, kind, v, iter_cap) for j, kind, v in requests]
        model = self.model
        js = np.array([r[0] for r in requests], dtype=np.int64)
        los = model.lower[js].copy()
        ups = model.upper[js].copy()
        for t, (j, kind, v) in enumerate(requests):
            if kind == SET_UPPER:
                ups[t] = v
            elif kind == SET_LOWER:
                los[t] = v
            else:
                raise ValueError(f"unknown bound kind {kind!r}")
        values, codes = self.probe_bounds(js, los, ups, iter_cap)
        return [(float(v), _CODE_STATUS[c]) for v, c in zip(values, codes)]

    def probe_bounds(self, js, los, ups, iter_cap=None):
        """Re-solve with bounds ``los[t] <= x[js[t]] <= ups[t]``, one column at a time.

        Array form of :meth:`probe`. Returns ``(values, codes)`` where codes
        index ``(EXACT, VALID_BOUND, RESTRICTED_INFEASIBLE)``.
        """
        from . import _kernels

        model, ctx = self.model, self.ctx
        js = np.asarray(js, dtype=np.int64)
        los = np.asarray(los, dtype=float)
        ups = np.asarray(ups, dtype=float)
        K = js.size
        worst = -np.inf if model.sense == "max" else np.inf
        values = np.full(K, worst)
        codes = np.full(K, 2, dtype=np.int64)
        empty = los > ups
        # Loosened bounds can break dual feasibility; those go the general way.
        slow = ~empty & ((los < model.lower[js]) | (ups > model.upper[js]))
        if ctx is None:
            slow = ~empty
        fast = ~empty & ~slow
        if fast.any():
            raw, kc = _kernels.probe_batch(
                ctx.A, ctx.b, ctx.cost, ctx.lo, ctx.up, ctx.basic, ctx.at_upper,
                ctx.factor.inv, ctx.x, ctx.factor.updates, js[fast], los[fast], ups[fast],
                -1 if iter_cap is None else int(iter_cap), self.opts.feas_tol,
                self.opts.pivot_tol, self.opts.refactor_every, ctx.bland_after, ctx.max_iter,
            )
            idx = np.flatnonzero(fast)
            ok = (kc == _kernels.OPTIMAL) | (kc == _kernels.CAPPED)
            values[idx[ok]] = ctx.sign * raw[ok] + ctx.const
            codes[idx[ok]] = np.where(kc[ok] == _kernels.OPTIMAL, 0, 1)
            slow[idx[kc == _kernels.BREAKDOWN]] = True
        for t in np.flatnonzero(slow):
            j = int(js[t])
            lower = model.lower.copy()
            upper = model.upper.copy()
            lower[j], upper[j] = los[t], ups[t]
            v, st, _ = resolve(model.with_bounds(lower, upper), self.sol.basis, iter_cap, self.opts)
            values[t] = v
            codes[t] = _STATUS_CODE[st]
        return values, codes

    def binary_split(self, act, ftol, iter_cap=None):
        """Optimal values with ``x_j = 0`` and ``x_j = 1`` for each binary ``j`` in ``act``.

        Where the current optimum already has ``x_j = e`` (within ``ftol``)
        its value is reused; otherwise ``x_j <= 0`` or ``x_j >= 1`` is
        imposed and re-solved. Returns ``(values, exact, probes)``:
        ``values[t, e]`` is NaN when ``x_j = e`` is infeasible.
        """
        from . import _kernels

        act = np.asarray(act, dtype=np.int64)
        ctx = self.ctx
        if ctx is None:
            vals = np.empty((act.size, 2))
            exact = np.ones((act.size, 2), dtype=bool)
            probes = 0
            x = self.sol.point
            for t, j in enumerate(act):
                for e, (kind, v) in enumerate(((SET_UPPER, 0.0), (SET_LOWER, 1.0))):
                    if abs(x[j] - e) <= ftol:
                        vals[t, e] = self.sol.value
                        continue
                    probes += 1
                    value, st = self.probe(int(j), kind, v, iter_cap)
                    vals[t, e] = np.nan if st is BoundStatus.RESTRICTED_INFEASIBLE else value
                    exact[t, e] = st is BoundStatus.EXACT
            return vals, exact, probes
        raw, kc = _kernels.binary_split(
            ctx.A, ctx.b, ctx.cost, ctx.lo, ctx.up, ctx.basic, ctx.at_upper, ctx.factor.inv,
            ctx.x, ctx.factor.updates, act, ftol, -1 if iter_cap is None else int(iter_cap),
            self.opts.feas_tol, self.opts.pivot_tol, self.opts.refactor_every, ctx.bland_after,
            ctx.max_iter,
        )
        vals = ctx.sign * raw + ctx.const
        exact = kc != _kernels.CAPPED
        vals[kc == _kernels.INFEASIBLE] = np.nan
        probes = int(np.count_nonzero(kc >= 0))
        for t, e in zip(*np.nonzero(kc == _kernels.BREAKDOWN)):
            kind, v = (SET_UPPER, 0.0) if e == 0 else (SET_LOWER, 1.0)
            value, st = self.probe(int(act[t]), kind, v, iter_cap)
            vals[t, e] = np.nan if st is BoundStatus.RESTRICTED_INFEASIBLE else value
            exact[t, e] = st is BoundStatus.EXACT
        return vals, exact, probes


_CODE_STATUS = (BoundStatus.EXACT, BoundStatus.VALID_BOUND, BoundStatus.RESTRICTED_INFEASIBLE)
_STATUS_CODE = {s: k for k, s in enumerate(_CODE_STATUS)}

def refix(model: LpModel, sol: LpSolution, fixings: dict, opts: LpOptions = DEFAULT_OPTIONS) -> LpSolution:
    """Solve ``model``, which is ``sol``'s model with the columns in
    ``fixings`` fixed, by compiled dual simplex pivots from ``sol``.

    Falls back to a warm-started :func:`solve` when ``sol`` carries no
    reusable context or the compiled run breaks down.
    """
    from . import _kernels

    ctx = sol._ctx
    if (not sol.optimal or ctx is None or ctx.opts != opts or ctx.n_art
            or ctx.model.sense != model.sense or ctx.model.A is not model.A):
        return solve(model, sol.basis if sol.optimal else None, opts)
    child = ctx.fork()
    child.model = model
    js = np.fromiter(fixings.keys(), dtype=np.int64, count=len(fixings))
    vals = np.fromiter(fixings.values(), dtype=float, count=len(fixings))
    code, used, updates = _kernels.refix(
        child.A, child.b, child.cost, child.lo, child.up, child.basic, child.is_basic,
        child.at_upper, child.factor.inv, child.x, child.factor.updates, js, vals, -1,
        opts.feas_tol, opts.pivot_tol, opts.refactor_every, child.bland_after,
        max(child.max_iter - child.iterations, 0),
    )
    if code == _kernels.OPTIMAL:
        child.factor.updates = updates
        child.iterations += used
        return child.solution(LpStatus.OPTIMAL)
    if code == _kernels.INFEASIBLE:
        child.iterations += used
        return child.solution(LpStatus.INFEASIBLE)
    return solve(model, sol.basis, opts)
