"""Random 0-1 multidimensional knapsack instances and batch benchmarking."""

from __future__ import annotations

import csv
import enum
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import mean
from typing import Optional, Sequence

from .errors import Aborted, PilpError
from .model import Problem
from .oracle import CapExceeded, branch_and_bound, brute_force
from .search import SearchConfig, solve

MASK64 = (1 << 64) - 1


class Xoshiro256:
    """xoshiro256** 1.0 seeded through splitmix64.

    Used instead of :mod:`random` because only ``random()`` has a stream
    guaranteed across Python versions; instance files must be reproducible
    byte for byte.
    """

    def __init__(self, seed: int):
        x = seed & MASK64
        state = []
        for _ in range(4):
            x = (x + 0x9E3779B97F4A7C15) & MASK64
            z = x
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
            state.append(z ^ (z >> 31))
        self.s = state

    @staticmethod
    def _rotl(x, k):
        return ((x << k) | (x >> (64 - k))) & MASK64

    def next64(self) -> int:
        s = self.s
        result = (self._rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = self._rotl(s[3], 45)
        return result

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer on the closed interval ``[lo, hi]`` (rejection sampling)."""
        span = hi - lo + 1
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            v = self.next64()
            if v < limit:
                return lo + v % span


class Correlation(str, enum.Enum):
    UNCORRELATED = "uncorrelated"
    WEAKLY = "weak"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        aliases = {"u": cls.UNCORRELATED, "uncorrelated": cls.UNCORRELATED,
                   "w": cls.WEAKLY, "weak": cls.WEAKLY, "weakly": cls.WEAKLY,
                   "weakly-correlated": cls.WEAKLY, "weaklycorrelated": cls.WEAKLY}
        if key not in aliases:
            raise ValueError(f"unknown correlation {text!r}")
        return aliases[key]


@dataclass(frozen=True)
class GenSpec:
    n: int
    m: int
    alpha: float = 0.5
    correlation: Correlation = Correlation.UNCORRELATED
    seed: int = 0
    exact_b: bool = False

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("need n >= 1 and m >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError("tightness ratio must lie in (0, 1)")
        object.__setattr__(self, "correlation", Correlation.parse(self.correlation))

    @property
    def alpha_exact(self) -> Fraction:
        # Decimal reading of alpha: 0.3 means 3/10, not its binary float.
        return Fraction(repr(float(self.alpha)))


def weak_cost(column_sum: int, m: int, xi: int) -> int:
    """``round(column_sum / m) + xi`` (halves rounded up), clamped at zero."""
    return max(0, (2 * column_sum + m) // (2 * m) + xi)


def generate(spec: GenSpec) -> Problem:
    """A binary MKP instance: ``a_ij`` on [0, 1000], ``b_i = floor(alpha * sum_j a_ij)``."""
    rng = Xoshiro256(spec.seed)
    a = [[rng.integer(0, 1000) for _ in range(spec.n)] for _ in range(spec.m)]
    if spec.correlation is Correlation.UNCORRELATED:
        c = [rng.integer(0, 1000) for _ in range(spec.n)]
    else:
        c = [weak_cost(sum(a[i][j] for i in range(spec.m)), spec.m, rng.integer(-100, 100))
             for j in range(spec.n)]
    alpha = spec.alpha_exact
    if spec.exact_b:
        b = [alpha * sum(row) for row in a]
    else:
        b = [math.floor(alpha * sum(row)) for row in a]
    return Problem.from_rationals(c, 0, a, b, (1,) * spec.n)


# -- batch runs -------------------------------------------------------------

SOLVERS = ("psa", "bb", "brute")
COLUMNS = ("n", "m", "corr", "seed", "solver", "status", "value", "time_s", "levels",
           "av_pct", "peak_list", "lp_solves", "mem_bytes")


@dataclass(frozen=True)
class Limits:
    time_limit: Optional[float] = None
    max_list_size: Optional[int] = None
    node_cap: int = 200_000
    brute_cap: int = 10**7


@dataclass
class RunRow:
    n: int
    m: int
    corr: str
    seed: int
    solver: str
    status: str
    value: Optional[int] = None
    time_s: Optional[float] = None
    levels: Optional[int] = None
    av_pct: Optional[float] = None
    peak_list: Optional[int] = None
    lp_solves: Optional[int] = None
    mem_bytes: Optional[int] = None

    def cells(self):
        out = []
        for name in COLUMNS:
            v = getattr(self, name)
            if v is None:
                out.append("")
            elif isinstance(v, float):
                out.append(f"{v:.4f}" if name == "time_s" else f"{v:.2f}")
            else:
                out.append(str(v))
        return out


@dataclass
class RunReport:
    rows: list = field(default_factory=list)

    def summary(self):
        """Per (n, m, corr, solver) averages over solved instances."""
        groups = {}
        for r in self.rows:
            groups.setdefault((r.n, r.m, r.corr, r.solver), []).append(r)
        out = []
        for (n, m, corr, solver), rows in groups.items():
            ok = [r for r in rows if r.status == "optimal"]

            def avg(name):
                vals = [getattr(r, name) for r in ok if getattr(r, name) is not None]
                return mean(vals) if vals else None

            out.append({"n": n, "m": m, "corr": corr, "solver": solver,
                        "solved": len(ok), "count": len(rows), "time_s": avg("time_s"),
                        "levels": avg("levels"), "av_pct": avg("av_pct")})
        return out


def _run_one(job):
    spec, solver, limits = job
    return run_instance(generate(spec), solver, limits, spec.correlation.value, spec.seed)


def run_instance(p: Problem, solver: str, limits: Limits = Limits(), corr: str = "",
                 seed: int = 0) -> RunRow:
    """One report row for ``solver`` on ``p``; failures become status tokens."""
    row = RunRow(p.n, p.m, corr, seed, solver, "error")
    start = time.perf_counter()
    try:
        if solver == "psa":
            cfg = SearchConfig(time_limit=limits.time_limit, max_list_size=limits.max_list_size)
            out = solve(p, cfg)
            row.status = out.status.value
            row.value = out.value
            st = out.stats
            row.levels = st.levels_scanned
            row.av_pct = st.final_av_pct
            row.peak_list = st.peak_list_size
            row.lp_solves = st.lp_solves
            row.mem_bytes = st.peak_mem_bytes
        elif solver == "bb":
            res = branch_and_bound(p, node_cap=limits.node_cap, time_limit=limits.time_limit)
            row.status = res.status.value
            row.value = res.value
            row.lp_solves = res.count
        elif solver == "brute":
            res = brute_force(p, cap=limits.brute_cap)
            row.status = res.status.value
            row.value = res.value
        else:
            raise ValueError(f"unknown solver {solver!r}")
    except Aborted as exc:
        row.status = f"aborted:{exc.reason}"
        row.value = exc.value
    except CapExceeded as exc:
        row.status = f"aborted:{exc.reason}"
        row.value = exc.value
    except PilpError as exc:
        row.status = f"error:{type(exc).__name__}"
    row.time_s = time.perf_counter() - start
    return row


def run_batch(specs: Sequence[GenSpec], solvers=("psa",), limits: Limits = Limits(),
              workers: int = 1) -> RunReport:
    """Run every solver on every generated instance; rows follow spec order."""
    for s in solvers:
        if s not in SOLVERS:
            raise ValueError(f"unknown solver {s!r}")
    jobs = [(spec, solver, limits) for spec in specs for solver in solvers]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_run_one, jobs))
    else:
        rows = [_run_one(job) for job in jobs]
    return RunReport(rows)


def emit_report(report: RunReport, fmt="csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in report.rows:
            writer.writerow(row.cells())
        return buf.getvalue()
    if fmt == "table":
        table = [list(COLUMNS)] + [row.cells() for row in report.rows]
        widths = [max(len(r[k]) for r in table) for k in range(len(COLUMNS))]
        return "".join(
            "  ".join(cell.rjust(w) for cell, w in zip(r, widths)).rstrip() + "\n" for r in table
        )
    if fmt == "summary":
        buf = io.StringIO()
        cols = ("n", "m", "corr", "solver", "solved", "count", "time_s", "levels", "av_pct")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for rec in report.summary():
            writer.writerow(["" if rec[k] is None else
                             (f"{rec[k]:.2f}" if isinstance(rec[k], float) else rec[k]) for k in cols])
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")


def read_spec_csv(text: str):
    """Rows of ``n,m,alpha,corr,seed`` (header required; ``count`` optional).

    With ``count`` present, ``count`` consecutive seeds starting at ``seed``
    are expanded.
    """
    specs = []
    for rec in csv.DictReader(io.StringIO(text)):
        rec = {k.strip(): (v or "").strip() for k, v in rec.items() if k}
        count = int(rec.get("count") or 1)
        for k in range(count):
            specs.append(GenSpec(
                int(rec["n"]), int(rec["m"]), float(rec.get("alpha") or 0.5),
                Correlation.parse(rec.get("corr") or "uncorrelated"),
                int(rec.get("seed") or 0) + k,
            ))
    return specs
