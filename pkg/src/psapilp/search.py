"""Objective-level sweep with projection-driven variable fixing.

:func:`solve` walks integer objective levels from the top of the LP range
downwards. At each level :func:`inspect_level` slices every projection at
that level, fixes all variables whose range is a single integer, recomputes
projections of the reduced problem and repeats; when every active range has
several values it splits on one variable and queues one partial candidate
per value. Complete candidates are checked exactly: a feasible candidate
whose objective equals the level being scanned is optimal.
"""

from __future__ import annotations

import enum
import math
import time
from collections import Counter, OrderedDict, deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import lp
from .errors import Aborted, RelaxationInfeasible
from .model import PartialCandidate, Problem, evaluate, is_feasible
from .projection import RANGE_TOL, ProjectionTable, Relaxation, build_table

SPLIT_POLICIES = ("max-coeff", "min-range", "first")
LIST_POLICIES = ("lifo", "fifo")
_BYTES_PER_COORD = 8


@dataclass(frozen=True)
class SearchConfig:
    split: str = "max-coeff"
    list_policy: str = "lifo"
    stream_check: bool = False
    range_tol: float = RANGE_TOL
    iter_cap: Optional[int] = None
    max_list_size: Optional[int] = None
    time_limit: Optional[float] = None
    projection_mode: str = "auto"
    projection_cache: int = 1_000_000
    trace: bool = False
    lp_options: lp.LpOptions = lp.DEFAULT_OPTIONS

    def __post_init__(self):
        if self.split not in SPLIT_POLICIES:
            raise ValueError(f"unknown split policy {self.split!r}")
        if self.list_policy not in LIST_POLICIES:
            raise ValueError(f"unknown list policy {self.list_policy!r}")


@dataclass(frozen=True)
class LevelInterval:
    z_hi: int
    z_lo: int

    def levels(self):
        return range(self.z_hi, self.z_lo - 1, -1)


@dataclass(frozen=True)
class CandidateSet:
    level: int
    points: tuple

    def __len__(self):
        return len(self.points)

    def __contains__(self, x):
        return tuple(x) in self.points


@dataclass
class SearchStats:
    levels_scanned: int = 0
    av_after_first_pass: dict = field(default_factory=dict)
    peak_list_size: int = 0
    lp_solves: int = 0
    candidates_checked: int = 0
    max_range_size: int = 0
    nodes: int = 0
    peak_mem_bytes: int = 0

    @property
    def final_av_pct(self) -> Optional[float]:
        """AV% after the first fixing pass on the last level scanned."""
        if not self.av_after_first_pass:
            return None
        return self.av_after_first_pass[min(self.av_after_first_pass)]


class OutcomeStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass
class Outcome:
    status: OutcomeStatus
    point: Optional[tuple]
    value: Optional[int]
    stats: SearchStats
    incumbents: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    interval: Optional[LevelInterval] = None

    @property
    def optimal(self) -> bool:
        return self.status is OutcomeStatus.OPTIMAL


def level_interval(p, range_tol=RANGE_TOL, opts: lp.LpOptions = lp.DEFAULT_OPTIONS) -> LevelInterval:
    """Integer superset of the attainable objective values.

    Raises :class:`RelaxationInfeasible` when the relaxation is empty.
    """
    rel = Relaxation.of(p, opts)
    hi = rel.maximum().value
    lo = rel.minimum().value
    return LevelInterval(math.floor(hi + range_tol), math.ceil(lo - range_tol))


def select_split_variable(ranges, c, policy="max-coeff") -> int:
    """Pick the active variable to split on.

    ``ranges`` maps variable index to its range (anything with ``len``).
    """
    active = sorted(ranges)
    if policy == "max-coeff":
        return max(active, key=lambda j: (c[j], -j))
    if policy == "min-range":
        return min(active, key=lambda j: (len(ranges[j]), j))
    if policy == "first":
        return active[0]
    raise ValueError(f"unknown split policy {policy!r}")


def _split_row(tab: ProjectionTable, counts, c, policy):
    # Row of the split variable; same choice as select_split_variable.
    var = tab.var
    if policy == "max-coeff":
        return int(np.lexsort((var, -c[var]))[0])
    if policy == "min-range":
        return int(np.lexsort((var, counts))[0])
    if policy == "first":
        return int(np.argmin(var))
    raise ValueError(f"unknown split policy {policy!r}")


def pop_candidate(L: deque, policy="lifo"):
    if not L:
        raise IndexError("pop from an empty candidate list")
    return L.pop() if policy == "lifo" else L.popleft()


@dataclass
class LevelStats:
    level: int
    av_pct: Optional[float] = None
    nodes: int = 0


class _Budget:
    def __init__(self, cfg: SearchConfig):
        self.cfg = cfg
        self.deadline = None if cfg.time_limit is None else time.monotonic() + cfg.time_limit

    def check(self, list_size=0):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise Aborted("time_limit")
        if self.cfg.max_list_size is not None and list_size > self.cfg.max_list_size:
            raise Aborted("max_list_size")


class ProjectionCache:
    """LRU store of reduced-problem projections keyed by the fixing.

    Projections of a reduced problem do not depend on the level, and the
    tree searched at level ``z`` largely repeats the one searched at
    ``z + 1``, so the sweep reuses them. ``capacity`` bounds the total
    number of cached projection points; ``None`` entries record infeasible
    reductions.
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.size = 0
        self.hits = 0
        self._store = OrderedDict()

    def get(self, key):
        if key not in self._store:
            return False, None
        self._store.move_to_end(key)
        self.hits += 1
        return True, self._store[key]

    @staticmethod
    def _cost(tab):
        return 1 if tab is None else 1 + tab.e.size

    def put(self, key, tab):
        if self.capacity <= 0 or key in self._store:
            return
        self._store[key] = tab
        self.size += self._cost(tab)
        while self.size > self.capacity and self._store:
            _, old = self._store.popitem(last=False)
            self.size -= self._cost(old)


def inspect_level(p: Problem, z: int, projections, cfg: SearchConfig = SearchConfig(), *,
                  root: Optional[Relaxation] = None, stats: Optional[SearchStats] = None,
                  on_candidate: Optional[Callable] = None, trace: Optional[list] = None,
                  budget: Optional[_Budget] = None, cache: Optional[ProjectionCache] = None):
    """Generate the candidate set of level ``z``.

    ``projections`` are the root projections of ``p``. ``on_candidate`` is
    called with each new complete candidate; a true return value stops the
    inspection early. Returns ``(CandidateSet, LevelStats)``.
    """
    stats = stats if stats is not None else SearchStats()
    if root is None:
        root = Relaxation.of(p, cfg.lp_options)
    budget = budget or _Budget(cfg)
    n = p.n
    level = LevelStats(z)
    cs = {}
    L = deque()
    stop = False

    def emit(x):
        nonlocal stop
        if x in cs:
            return
        cs[x] = None
        if trace is not None:
            trace.append(("candidate", z, x))
        if on_candidate is not None and on_candidate(x):
            stop = True

    def project(rel, pc):
        key = pc.entries
        if cache is not None:
            hit, tab = cache.get(key)
            if hit:
                if tab is None:
                    raise RelaxationInfeasible("cached infeasible reduction")
                return tab
        try:
            tab = build_table(rel, cfg.projection_mode, cfg.lp_options, rel.tally, cfg.iter_cap)
        except RelaxationInfeasible:
            if cache is not None:
                cache.put(key, None)
            raise
        if cache is not None:
            cache.put(key, tab)
        return tab

    c = p.c_array
    tol = cfg.range_tol
    pc = PartialCandidate.empty(n, z)
    rel = root
    tab = ProjectionTable.of(projections)
    first_pass = True
    while True:
        level.nodes += 1
        stats.nodes += 1
        while tab is not None and not stop:
            budget.check(len(L))
            k = len(tab)
            mask = tab.in_range(z, tol)
            counts = mask.sum(axis=1)
            if k:
                stats.max_range_size = max(stats.max_range_size, int(counts.max()))
            if k == 0 or not counts.all():
                if first_pass:
                    level.av_pct, first_pass = 100.0, False
                if trace is not None:
                    trace.append(("empty", z, str(pc)))
                break
            rows = np.flatnonzero(counts == 1)
            if rows.size:
                vals = tab.e[rows, mask[rows].argmax(axis=1)]
                singles = dict(zip(tab.var[rows].tolist(), vals.tolist()))
                pc = pc.fix(singles)
                if trace is not None:
                    trace.append(("fix", z, dict(singles)))
                if first_pass:
                    level.av_pct, first_pass = 100.0 * (k - rows.size) / n, False
                if rows.size == k:
                    emit(pc.point())
                    break
                rel = rel.fix(singles)
                try:
                    tab = project(rel, pc)
                except RelaxationInfeasible:
                    if trace is not None:
                        trace.append(("infeasible", z, str(pc)))
                    break
                continue
            if first_pass:
                level.av_pct, first_pass = 100.0, False
            row = _split_row(tab, counts, c, cfg.split)
            s = int(tab.var[row])
            values = tuple(tab.e[row][mask[row]].tolist())
            if trace is not None:
                trace.append(("split", z, s, values))
            if k == 1:
                for r in values:
                    emit(pc.fix({s: r}).point())
                    if stop:
                        break
            else:
                for r in values:
                    L.append((pc.fix({s: r}), rel, s, r))
                stats.peak_list_size = max(stats.peak_list_size, len(L))
            break
        stats.peak_mem_bytes = max(stats.peak_mem_bytes, (len(L) + len(cs)) * n * _BYTES_PER_COORD)
        if stop or not L:
            break
        budget.check(len(L))
        pc, parent, s, r = pop_candidate(L, cfg.list_policy)
        rel = parent.fix({s: r})
        try:
            tab = project(rel, pc)
        except RelaxationInfeasible:
            if trace is not None:
                trace.append(("infeasible", z, str(pc)))
            tab = None
    return CandidateSet(z, tuple(cs)), level


def solve(p: Problem, cfg: SearchConfig = SearchConfig()) -> Outcome:
    """Solve ``p`` exactly by sweeping objective levels downwards."""
    stats = SearchStats()
    tally = Counter()
    trace = [] if cfg.trace else None
    budget = _Budget(cfg)
    cache = ProjectionCache(cfg.projection_cache)
    root = Relaxation.of(p, cfg.lp_options, tally)

    def finish(status, point=None, value=None, interval=None):
        stats.lp_solves = tally["lp"]
        return Outcome(status, point, value, stats, incumbents, trace or [], interval)

    incumbents = []
    try:
        interval = level_interval(root, cfg.range_tol, cfg.lp_options)
    except RelaxationInfeasible:
        return finish(OutcomeStatus.INFEASIBLE)
    try:
        projections = build_table(root, cfg.projection_mode, cfg.lp_options, tally, cfg.iter_cap)
    except RelaxationInfeasible:
        return finish(OutcomeStatus.INFEASIBLE, interval=interval)

    best, z_best = None, interval.z_lo - 1
    found = None

    def check(x, z):
        nonlocal best, z_best, found
        stats.candidates_checked += 1
        if not is_feasible(p, x):
            return False
        v = evaluate(p, x)
        if v == z:
            found = (x, v)
            return True
        if v > z_best:
            best, z_best = x, v
            incumbents.append((z, x, v))
            if trace is not None:
                trace.append(("incumbent", z, x, v))
        return False

    z = interval.z_hi
    try:
        while z >= interval.z_lo and (z > z_best or (z == z_best and best is None)):
            stats.levels_scanned += 1
            if trace is not None:
                trace.append(("level", z))
            on_candidate = (lambda x, z=z: check(x, z)) if cfg.stream_check else None
            cs, level = inspect_level(p, z, projections, cfg, root=root, stats=stats,
                                      on_candidate=on_candidate, trace=trace, budget=budget,
                                      cache=cache)
            stats.av_after_first_pass[z] = level.av_pct
            if not cfg.stream_check:
                for x in cs.points:
                    if check(x, z):
                        break
            if found is not None:
                return finish(OutcomeStatus.OPTIMAL, found[0], found[1], interval)
            z -= 1
    except Aborted as exc:
        stats.lp_solves = tally["lp"]
        raise Aborted(exc.reason, best, None if best is None else z_best, stats) from None
    if best is not None:
        return finish(OutcomeStatus.OPTIMAL, best, z_best, interval)
    return finish(OutcomeStatus.INFEASIBLE, interval=interval)
