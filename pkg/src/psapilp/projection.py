"""Projections of the objective onto the (x_j, z) planes and level ranges.

For each active variable ``x_j`` a :class:`Projection` records, at every
integer abscissa ``e`` of its domain, the smallest and largest objective
value the LP relaxation allows once ``x_j = e``. Slicing a projection at
level ``z`` yields the integers ``x_j`` may take on that level
(:func:`range_at`).

All floating-point slack is spent in the safe direction: domains and ranges
are widened, never narrowed, so that no feasible integer point is lost.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import lp
from .errors import DomainTooLarge, RelaxationInfeasible, UnboundedRelaxation
from .lp import LpModel, LpOptions, LpStatus
from .model import ReducedProblem

RANGE_TOL = 1e-6
DOM_TOL = 1e-6
EXACT_DOMAIN_CAP = 10_000


@dataclass(frozen=True)
class ProjectionPoint:
    e: int
    low: float
    up: float
    low_exact: bool = True
    up_exact: bool = True


@dataclass(frozen=True)
class Projection:
    var: int
    l: float
    u: float
    points: tuple

    def abscissae(self):
        return [pt.e for pt in self.points]

    def at(self, e) -> Optional[ProjectionPoint]:
        for pt in self.points:
            if pt.e == e:
                return pt
        return None


@dataclass(frozen=True)
class RangeSet:
    var: int
    level: int
    values: tuple

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class ProjectionTable:
    """Projections of several variables as padded arrays, one row each.

    ``low`` and ``up`` hold NaN where a row has no point, so a level slice
    (:meth:`in_range`) never selects padding.
    """

    var: np.ndarray
    e: np.ndarray
    low: np.ndarray
    up: np.ndarray
    low_exact: np.ndarray
    up_exact: np.ndarray
    l: np.ndarray
    u: np.ndarray

    def __len__(self):
        return self.var.size

    @classmethod
    def of(cls, projections) -> "ProjectionTable":
        if isinstance(projections, ProjectionTable):
            return projections
        projections = list(projections)
        k = len(projections)
        w = max((len(pr.points) for pr in projections), default=0)
        e = np.zeros((k, w), dtype=np.int64)
        low = np.full((k, w), np.nan)
        up = np.full((k, w), np.nan)
        low_exact = np.zeros((k, w), dtype=bool)
        up_exact = np.zeros((k, w), dtype=bool)
        for r, pr in enumerate(projections):
            for t, pt in enumerate(pr.points):
                e[r, t], low[r, t], up[r, t] = pt.e, pt.low, pt.up
                low_exact[r, t], up_exact[r, t] = pt.low_exact, pt.up_exact
        return cls(np.array([pr.var for pr in projections], dtype=np.int64), e, low, up,
                   low_exact, up_exact, np.array([pr.l for pr in projections], dtype=float),
                   np.array([pr.u for pr in projections], dtype=float))

    def projections(self) -> list:
        out = []
        for r in range(len(self)):
            keep = ~np.isnan(self.up[r])
            points = tuple(
                ProjectionPoint(int(e), float(lo), float(up), bool(lx), bool(ux))
                for e, lo, up, lx, ux in zip(self.e[r][keep], self.low[r][keep], self.up[r][keep],
                                             self.low_exact[r][keep], self.up_exact[r][keep])
            )
            l, u = self.l[r], self.u[r]
            if float(l).is_integer() and float(u).is_integer() and points:
                l, u = int(l), int(u)
            out.append(Projection(int(self.var[r]), l, u, points))
        return out

    def in_range(self, z, tol=RANGE_TOL) -> np.ndarray:
        """Boolean mask of the points with ``low <= z <= up`` (widened by ``tol``)."""
        return (self.low <= z + tol) & (self.up >= z - tol)


class Relaxation:
    """LP relaxation of a problem with some variables fixed through their bounds.

    Fixed variables keep their columns with ``lower == upper``, which lets a
    child relaxation re-solve from its parent's optimal basis with a few
    dual simplex pivots.
    """

    def __init__(self, model: LpModel, active, *, warm_max=None, warm_min=None,
                 opts: LpOptions = lp.DEFAULT_OPTIONS, tally: Optional[Counter] = None):
        self.model = model
        self.active = tuple(active)
        self.opts = opts
        self.tally = tally if tally is not None else Counter()
        self._warm_max = warm_max
        self._warm_min = warm_min
        self._max = None
        self._min = None
        # (parent maximum, fixings) for a compiled re-solve of the maximum.
        self._refix = None
        self._nonneg = None
        self._binary = None
        self._fixed_vec = None
        self.active_array = np.array(self.active, dtype=np.int64)

    @classmethod
    def of(cls, p, opts: LpOptions = lp.DEFAULT_OPTIONS, tally=None) -> "Relaxation":
        if isinstance(p, Relaxation):
            return p
        if isinstance(p, ReducedProblem):
            return cls.of(p.base, opts, tally).fix(p.fixing.fixed)
        return cls(lp.relaxation(p), range(p.n), opts=opts, tally=tally)

    def fix(self, values) -> "Relaxation":
        if not values:
            return self
        model = self.model.with_fixed(values)
        active = [j for j in self.active if j not in values]
        # Warm starts are kept as solutions so bases are only exported when used.
        child = Relaxation(
            model, active,
            warm_max=self._max if self._max is not None and self._max.optimal else self._warm_max,
            warm_min=self._min if self._min is not None and self._min.optimal else self._warm_min,
            opts=self.opts, tally=self.tally,
        )
        if self._max is not None and self._max.optimal:
            child._refix = (self._max, dict(values))
        elif self._max is None and self._refix is not None:
            # This relaxation was never solved: re-solve from its own source.
            sol, pending = self._refix
            child._refix = (sol, {**pending, **values})
        child._nonneg = self._nonneg
        child._binary = self._binary
        return child

    def _fixed_index(self):
        fixed = self.model.lower == self.model.upper
        fixed[self.active_array] = False
        return np.flatnonzero(fixed)

    def _fixed_vector(self):
        # Fixed values in place, zero on the active columns.
        if self._fixed_vec is None:
            v = np.where(self.model.lower == self.model.upper, self.model.lower, 0.0)
            v[self.active_array] = 0.0
            self._fixed_vec = v
        return self._fixed_vec

    @property
    def fixed_values(self) -> dict:
        idx = self._fixed_index()
        return dict(zip(idx.tolist(), self.model.lower[idx].tolist()))

    def _solve(self, model, warm):
        self.tally["lp"] += 1
        if isinstance(warm, lp.LpSolution):
            warm = warm.basis
        sol = lp.solve(model, warm, self.opts)
        if sol.status is LpStatus.UNBOUNDED:
            raise UnboundedRelaxation("LP relaxation is unbounded")
        return sol

    def maximum(self) -> lp.LpSolution:
        """Optimal solution of the maximising relaxation (cached)."""
        if self._max is None:
            if self._refix is not None:
                self.tally["lp"] += 1
                self._max = lp.refix(self.model, *self._refix, self.opts)
                self._refix = None
            else:
                self._max = self._solve(self.model, self._warm_max)
        if self._max.status is LpStatus.INFEASIBLE:
            raise RelaxationInfeasible("LP relaxation is infeasible")
        return self._max

    def minimum(self) -> lp.LpSolution:
        if self._min is None:
            model = self.model.with_objective(self.model.c, self.model.const, "min")
            self._min = self._solve(model, self._warm_min or self._warm_max)
        if self._min.status is LpStatus.INFEASIBLE:
            raise RelaxationInfeasible("LP relaxation is infeasible")
        return self._min

    def is_feasible(self) -> bool:
        try:
            self.maximum()
        except RelaxationInfeasible:
            return False
        return True

    def closed_form_lower(self) -> bool:
        """True when the zero completion is always optimal for the minimisation.

        Holds when the active columns and objective coefficients are
        non-negative and the right-hand side left over by the fixed columns is
        non-negative: then ``x_j = e`` with everything else at zero is
        feasible whenever any point with ``x_j = e`` is, and it minimises.
        """
        act = self.active_array
        if not act.size:
            return True
        if self._nonneg is None:
            # Signs of A and c do not change under fixing; children inherit this.
            self._nonneg = bool(np.all(self.model.A >= 0) and np.all(self.model.c >= 0))
        if not self._nonneg:
            A = self.model.A
            if np.any(A[:, act] < 0) or np.any(self.model.c[act] < 0):
                return False
        if np.any(self.model.lower[act] != 0):
            return False
        return bool(np.all(self.residual_rhs() >= 0))

    def residual_rhs(self) -> np.ndarray:
        return self.model.b - self.model.A @ self._fixed_vector()

    def objective_constant(self) -> float:
        return float(self.model.const + self.model.c @ self._fixed_vector())

    def is_binary(self) -> bool:
        """True when every active variable has bounds ``[0, 1]``."""
        if self._binary is None:
            act = self.active_array
            self._binary = bool(np.all(self.model.upper[act] == 1) and np.all(self.model.lower[act] == 0))
        return self._binary


def _unit_objective(model, j, sense):
    c = np.zeros(model.n)
    c[j] = 1.0
    return model.with_objective(c, 0.0, sense)


def variable_bounds(p, j, opts: LpOptions = lp.DEFAULT_OPTIONS, tally=None):
    """Smallest and largest value of ``x_j`` over the LP relaxation."""
    rel = Relaxation.of(p, opts, tally)
    warm = rel.maximum().basis
    lo = rel._solve(_unit_objective(rel.model, j, "min"), warm)
    hi = rel._solve(_unit_objective(rel.model, j, "max"), warm)
    if lo.status is LpStatus.INFEASIBLE or hi.status is LpStatus.INFEASIBLE:
        raise RelaxationInfeasible("LP relaxation is infeasible")
    return lo.value, hi.value


def projection_values_at(p, j, lam, opts: LpOptions = lp.DEFAULT_OPTIONS, tally=None):
    """Lower and upper projection of ``x_j`` at ``x_j = lam``.

    Returns ``(low, up, low_exact, up_exact)`` or ``None`` when no point of
    the relaxation has ``x_j = lam``.
    """
    rel = Relaxation.of(p, opts, tally)
    return _values_at(rel, j, lam)


def _values_at(rel: Relaxation, j, lam):
    model = rel.model.fix(j, lam)
    up = rel._solve(model, rel.maximum().basis)
    if up.status is LpStatus.INFEASIBLE:
        return None
    low = rel._solve(model.with_objective(model.c, model.const, "min"), rel.minimum().basis)
    if low.status is LpStatus.INFEASIBLE:
        return None
    return low.value, up.value, True, True


def integer_domain(l, u, tol=DOM_TOL):
    return range(math.ceil(l - tol), math.floor(u + tol) + 1)


def build_projections_exact(p, opts: LpOptions = lp.DEFAULT_OPTIONS, tally=None,
                            cap=EXACT_DOMAIN_CAP, dom_tol=DOM_TOL):
    """Exact lower/upper projection values at every integer abscissa.

    Raises :class:`DomainTooLarge` when the active domains hold more than
    ``cap`` integer abscissae in total.
    """
    rel = Relaxation.of(p, opts, tally)
    rel.maximum()
    rel.minimum()
    bounds = {j: variable_bounds(rel, j) for j in rel.active}
    total = sum(len(integer_domain(l, u, dom_tol)) for l, u in bounds.values())
    if total > cap:
        raise DomainTooLarge(f"{total} integer abscissae exceed the exact-mode cap of {cap}")
    out = []
    for j in rel.active:
        l, u = bounds[j]
        points = []
        for e in integer_domain(l, u, dom_tol):
            vals = _values_at(rel, j, e)
            if vals is not None:
                points.append(ProjectionPoint(e, *vals))
        out.append(Projection(j, l, u, tuple(points)))
    return out


def build_projections_two_phase(p, opts: LpOptions = lp.DEFAULT_OPTIONS, tally=None,
                                iter_cap=None, feas_tol=None):
    """Projections of a binary problem from one LP solve plus dual re-solves.

    Phase 1 solves the relaxation; a variable whose optimal value is integral
    gets its upper projection at that value from the LP optimum directly.
    Every remaining upper value comes from a dual simplex re-solve after
    adding ``x_j <= 0`` or ``x_j >= 1``. Lower projections use the closed
    form ``c_j e + h`` when :meth:`Relaxation.closed_form_lower` holds, and
    the mirror-image procedure on the minimisation otherwise.

    In this mode ``l`` and ``u`` report the smallest and largest feasible
    abscissa rather than the continuous extremes of ``x_j``.
    """
    return two_phase_table(p, opts, tally, iter_cap, feas_tol).projections()


def two_phase_table(p, opts: LpOptions = lp.DEFAULT_OPTIONS, tally=None, iter_cap=None,
                    feas_tol=None) -> ProjectionTable:
    """:func:`build_projections_two_phase` in table form."""
    rel = Relaxation.of(p, opts, tally)
    model = rel.model
    act = rel.active_array
    if not rel.is_binary():
        raise ValueError("two-phase projections need binary active variables")
    ftol = opts.feas_tol if feas_tol is None else feas_tol
    top = rel.maximum()
    up, up_exact = _phase_values(rel, top, model, act, ftol, iter_cap)
    if rel.closed_form_lower():
        low = rel.objective_constant() + np.outer(model.c[act], (0.0, 1.0))
        low_exact = np.ones(low.shape, dtype=bool)
    else:
        bottom = rel.minimum()
        min_model = model.with_objective(model.c, model.const, "min")
        low, low_exact = _phase_values(rel, bottom, min_model, act, ftol, iter_cap)
    exists = ~np.isnan(up) & ~np.isnan(low)
    low = np.where(exists, low, np.nan)
    up = np.where(exists, up, np.nan)
    x = top.point[act]
    l = np.where(exists[:, 0], 0.0, np.where(exists[:, 1], 1.0, x))
    u = np.where(exists[:, 1], 1.0, np.where(exists[:, 0], 0.0, x))
    e = np.zeros(up.shape, dtype=np.int64)
    e[:, 1] = 1
    return ProjectionTable(act, e, low, up, low_exact & exists, up_exact & exists, l, u)


def _phase_values(rel, sol, model, act, ftol, iter_cap):
    """Projection values of one sense at ``e = 0, 1``, NaN where infeasible.

    Uses the LP optimum where it is integral and a re-solve elsewhere.
    """
    vals, exact, probes = lp.BoundProbe(model, sol, rel.opts).binary_split(act, ftol, iter_cap)
    rel.tally["lp"] += probes
    return vals, exact


def is_binary_relaxation(rel: Relaxation) -> bool:
    return rel.is_binary()


def build_table(p, mode="auto", opts: LpOptions = lp.DEFAULT_OPTIONS, tally=None,
                iter_cap=None, cap=EXACT_DOMAIN_CAP) -> ProjectionTable:
    """Dispatch on ``mode``: ``"exact"``, ``"two-phase"`` or ``"auto"``
    (two-phase when every active variable is binary)."""
    rel = Relaxation.of(p, opts, tally)
    if mode == "auto":
        mode = "two-phase" if rel.is_binary() else "exact"
    if mode == "two-phase":
        return two_phase_table(rel, opts, tally, iter_cap)
    if mode == "exact":
        return ProjectionTable.of(build_projections_exact(rel, opts, tally, cap))
    raise ValueError(f"unknown projection mode {mode!r}")


def build_projections(p, mode="auto", opts: LpOptions = lp.DEFAULT_OPTIONS, tally=None,
                      iter_cap=None, cap=EXACT_DOMAIN_CAP) -> list:
    """Projections of every active variable, as :class:`Projection` records."""
    rel = Relaxation.of(p, opts, tally)
    if mode == "auto":
        mode = "two-phase" if rel.is_binary() else "exact"
    if mode == "exact":
        return build_projections_exact(rel, opts, tally, cap)
    return build_table(rel, mode, opts, tally, iter_cap, cap).projections()


def range_at(pr: Projection, z, tol=RANGE_TOL) -> RangeSet:
    """Integers ``e`` with ``low(e) <= z <= up(e)``, widened by ``tol``."""
    values = tuple(pt.e for pt in pr.points if pt.low <= z + tol and pt.up >= z - tol)
    return RangeSet(pr.var, z, values)
