"""Pure integer linear programs: data model, exact evaluation and reduction.

A :class:`Problem` describes::

    maximize   c.x + h
    subject to A x <= b,  x >= 0 integer,  x <= var_upper (where given)

``c`` and ``h`` are integers. Each constraint row is stored as integer
numerators over one positive per-row denominator, so ``A`` and ``b`` may be
arbitrary rationals while feasibility checks stay exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Integral, Rational
from typing import Mapping, Optional

import numpy as np

from .errors import InstanceError, ParseError

# |a| * sum|x| below this bound cannot overflow an int64 dot product.
_INT64_SAFE = 2**62


def _as_int(value, what):
    if isinstance(value, bool) or not isinstance(value, Integral):
        if isinstance(value, Rational) and value.denominator == 1:
            return int(value.numerator)
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise InstanceError(f"non-integer {what}: {value!r}")
    return int(value)


def _as_fraction(value):
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


@dataclass(frozen=True)
class Problem:
    """An immutable PILP instance.

    Rows are normalised on construction (common factors of a row's
    numerators and denominator are divided out) so that equal rational
    data always compares equal.
    """

    c: tuple
    h: int
    a_num: tuple
    row_den: tuple
    b_num: tuple
    var_upper: Optional[tuple] = None

    def __post_init__(self):
        c = tuple(_as_int(v, "objective coefficient") for v in self.c)
        if not c:
            raise InstanceError("problem needs at least one variable")
        n = len(c)
        h = _as_int(self.h, "objective constant")
        a_rows = tuple(tuple(_as_int(v, "row numerator") for v in row) for row in self.a_num)
        dens = tuple(_as_int(d, "row denominator") for d in self.row_den)
        b = tuple(_as_int(v, "rhs numerator") for v in self.b_num)
        if not (len(a_rows) == len(dens) == len(b)):
            raise InstanceError("row count mismatch between A, denominators and b")
        rows, new_dens, new_b = [], [], []
        for i, (row, den, bi) in enumerate(zip(a_rows, dens, b)):
            if len(row) != n:
                raise InstanceError(f"row {i} has {len(row)} coefficients, expected {n}")
            if den <= 0:
                raise InstanceError(f"row {i} has non-positive denominator {den}")
            g = math.gcd(den, bi, *row)
            if g > 1:
                row = tuple(v // g for v in row)
                den //= g
                bi //= g
            rows.append(row)
            new_dens.append(den)
            new_b.append(bi)
        upper = self.var_upper
        if upper is not None:
            upper = tuple(None if u is None else _as_int(u, "variable upper bound") for u in upper)
            if len(upper) != n:
                raise InstanceError(f"upper bound vector has length {len(upper)}, expected {n}")
            if any(u is not None and u < 0 for u in upper):
                raise InstanceError("negative variable upper bound")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "a_num", tuple(rows))
        object.__setattr__(self, "row_den", tuple(new_dens))
        object.__setattr__(self, "b_num", tuple(new_b))
        object.__setattr__(self, "var_upper", upper)

    @classmethod
    def from_rationals(cls, c, h, A, b, var_upper=None):
        """Build from rational (or integer) ``A`` rows and ``b`` entries."""
        A = [[_as_fraction(v) for v in row] for row in A]
        b = [_as_fraction(v) for v in b]
        if len(A) != len(b):
            raise InstanceError("A and b have different row counts")
        a_num, dens, b_num = [], [], []
        for row, bi in zip(A, b):
            den = math.lcm(bi.denominator, *(v.denominator for v in row))
            a_num.append(tuple(int(v * den) for v in row))
            b_num.append(int(bi * den))
            dens.append(den)
        return cls(tuple(c), h, tuple(a_num), tuple(dens), tuple(b_num), var_upper)

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def m(self) -> int:
        return len(self.a_num)

    # Floating-point mirrors for the LP layer.

    @cached_property
    def A(self) -> np.ndarray:
        if not self.a_num:
            return np.zeros((0, self.n))
        num = np.array(self.a_num, dtype=float)
        return num / np.array(self.row_den, dtype=float)[:, None]

    @cached_property
    def b(self) -> np.ndarray:
        return np.array([bn / d for bn, d in zip(self.b_num, self.row_den)], dtype=float)

    @cached_property
    def c_array(self) -> np.ndarray:
        return np.array(self.c, dtype=float)

    @cached_property
    def upper_array(self) -> np.ndarray:
        if self.var_upper is None:
            return np.full(self.n, np.inf)
        return np.array([np.inf if u is None else u for u in self.var_upper], dtype=float)

    @cached_property
    def _a_int64(self):
        if not self.a_num:
            return np.zeros((0, self.n), dtype=np.int64)
        biggest = max(abs(v) for row in self.a_num for v in row)
        if biggest >= 2**31:
            return None
        return np.array(self.a_num, dtype=np.int64)

    def A_exact(self):
        """``A`` as a list of rows of Fractions."""
        return [[Fraction(v, d) for v in row] for row, d in zip(self.a_num, self.row_den)]

    def b_exact(self):
        return [Fraction(v, d) for v, d in zip(self.b_num, self.row_den)]

    @property
    def is_binary(self) -> bool:
        return self.var_upper is not None and all(u == 1 for u in self.var_upper)

    def row_activity(self, x) -> list:
        """Exact numerators of ``A x`` (row ``i`` is over ``row_den[i]``)."""
        a64 = self._a_int64
        if a64 is not None and x:
            total = sum(abs(v) for v in x)
            if total < _INT64_SAFE // 2**31:
                return [int(v) for v in a64 @ np.asarray(x, dtype=np.int64)]
        return [sum(a * v for a, v in zip(row, x)) for row in self.a_num]


def _check_dim(p: Problem, x) -> tuple:
    x = tuple(int(v) for v in x)
    if len(x) != p.n:
        raise InstanceError(f"point has {len(x)} coordinates, problem has {p.n} variables")
    return x


def evaluate(p: Problem, x) -> int:
    """Exact objective value ``c.x + h``."""
    x = _check_dim(p, x)
    return sum(cj * xj for cj, xj in zip(p.c, x)) + p.h


def is_feasible(p: Problem, x) -> bool:
    x = _check_dim(p, x)
    if any(v < 0 for v in x):
        return False
    if p.var_upper is not None:
        if any(u is not None and v > u for v, u in zip(x, p.var_upper)):
            return False
    return all(act <= bn for act, bn in zip(p.row_activity(x), p.b_num))


@dataclass(frozen=True)
class PartialCandidate:
    """A point with some coordinates fixed; ``None`` marks an unfixed one."""

    entries: tuple
    origin_level: int = 0

    def __post_init__(self):
        entries = tuple(None if v is None else int(v) for v in self.entries)
        if any(v is not None and v < 0 for v in entries):
            raise InstanceError("fixed values must be non-negative")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def empty(cls, n: int, level: int = 0) -> "PartialCandidate":
        return cls((None,) * n, level)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def active(self) -> tuple:
        return tuple(j for j, v in enumerate(self.entries) if v is None)

    @property
    def fixed(self) -> dict:
        return {j: v for j, v in enumerate(self.entries) if v is not None}

    @property
    def is_complete(self) -> bool:
        return all(v is not None for v in self.entries)

    def point(self) -> tuple:
        if not self.is_complete:
            raise ValueError("partial candidate still has unfixed coordinates")
        return self.entries

    def fix(self, values: Mapping[int, int]) -> "PartialCandidate":
        entries = list(self.entries)
        for j, v in values.items():
            if entries[j] is not None:
                raise ValueError(f"coordinate {j} is already fixed")
            v = int(v)
            if v < 0:
                raise InstanceError("fixed values must be non-negative")
            entries[j] = v
        # Existing entries are already validated; skip the full re-check.
        out = object.__new__(PartialCandidate)
        object.__setattr__(out, "entries", tuple(entries))
        object.__setattr__(out, "origin_level", self.origin_level)
        return out

    def merge(self, other: "PartialCandidate") -> "PartialCandidate":
        """Combine two fixings over disjoint coordinates."""
        return self.fix(other.fixed)

    def __str__(self):
        return "(" + ",".join("?" if v is None else str(v) for v in self.entries) + ")"


@dataclass(frozen=True)
class ReducedProblem:
    """``base`` with the fixed coordinates of ``fixing`` substituted out."""

    base: Problem
    fixing: PartialCandidate
    derived_b_num: tuple
    derived_h: int
    active: tuple

    @property
    def n_active(self) -> int:
        return len(self.active)

    @property
    def derived_b(self) -> list:
        return [Fraction(v, d) for v, d in zip(self.derived_b_num, self.base.row_den)]

    @cached_property
    def problem(self) -> Problem:
        """The reduced system as a standalone problem over the active variables."""
        if not self.active:
            raise InstanceError("reduced problem has no free variables")
        base = self.base
        c = tuple(base.c[j] for j in self.active)
        a = tuple(tuple(row[j] for j in self.active) for row in base.a_num)
        upper = None
        if base.var_upper is not None:
            upper = tuple(base.var_upper[j] for j in self.active)
        return Problem(c, self.derived_h, a, base.row_den, self.derived_b_num, upper)

    def lift(self, y) -> tuple:
        """Merge a completion of the active coordinates into a full point."""
        y = list(y)
        if len(y) != len(self.active):
            raise InstanceError("completion length does not match the active set")
        x = list(self.fixing.entries)
        for j, v in zip(self.active, y):
            x[j] = int(v)
        return tuple(x)

    def completion_feasible(self, y) -> bool:
        """Feasibility of ``y`` in the reduced system (also valid with no active variables)."""
        y = tuple(int(v) for v in y)
        if any(v < 0 for v in y):
            return False
        base = self.base
        if base.var_upper is not None:
            # The fixed part counts too: a fixing beyond its bound admits no completion.
            merged = zip(self.active, y)
            for j, v in itertools.chain(merged, self.fixing.fixed.items()):
                u = base.var_upper[j]
                if u is not None and v > u:
                    return False
        for row, bn in zip(base.a_num, self.derived_b_num):
            if sum(row[j] * v for j, v in zip(self.active, y)) > bn:
                return False
        return True

    def completion_value(self, y) -> int:
        return self.derived_h + sum(self.base.c[j] * int(v) for j, v in zip(self.active, y))


def reduce(p: Problem, pc: PartialCandidate) -> ReducedProblem:
    if pc.n != p.n:
        raise InstanceError("partial candidate dimension does not match the problem")
    fixed = pc.fixed
    b_num = tuple(
        bn - sum(row[j] * v for j, v in fixed.items()) for row, bn in zip(p.a_num, p.b_num)
    )
    h = p.h + sum(p.c[j] * v for j, v in fixed.items())
    return ReducedProblem(p, pc, b_num, h, pc.active)


# -- instance text format ---------------------------------------------------


def _parse_int(tok, line, col, what):
    body = tok[1:] if tok[:1] in "+-" else tok
    if not (body.isascii() and body.isdigit()):
        raise ParseError(f"non-integer {what} {tok!r}", line, col)
    return int(tok)


def _parse_rational(tok, line, col):
    num, sep, den = tok.partition("/")
    n = _parse_int(num, line, col, "numerator")
    d = 1
    if sep:
        d = _parse_int(den, line, col, "denominator")
        if d <= 0:
            raise ParseError(f"non-positive denominator in {tok!r}", line, col)
    return Fraction(n, d)


def _tokens(raw):
    """Split a line into (token, 1-based column) pairs."""
    out, i = [], 0
    while i < len(raw):
        if raw[i].isspace():
            i += 1
            continue
        start = i
        while i < len(raw) and not raw[i].isspace():
            i += 1
        out.append((raw[start:i], start + 1))
    return out


def parse_instance(text: str) -> Problem:
    """Parse the line-oriented ``pilp`` instance format."""
    header = None
    objective = None
    rows = []
    upper = None
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.split("#", 1)[0]
        toks = _tokens(raw)
        if not toks:
            continue
        last_line = lineno
        key, kcol = toks[0]
        args = toks[1:]
        if header is None:
            if key != "pilp" or len(args) != 2:
                raise ParseError("expected header 'pilp <n> <m>'", lineno, kcol)
            n = _parse_int(args[0][0], lineno, args[0][1], "variable count")
            m = _parse_int(args[1][0], lineno, args[1][1], "constraint count")
            if n < 1 or m < 0:
                raise ParseError("header needs n >= 1 and m >= 0", lineno, kcol)
            header = (n, m)
            continue
        n, m = header
        if key == "obj":
            if objective is not None:
                raise ParseError("duplicate 'obj' line", lineno, kcol)
            if len(args) != n + 1:
                raise ParseError(f"'obj' needs {n + 1} values, got {len(args)}", lineno, kcol)
            vals = []
            for tok, col in args:
                vals.append(_parse_int(tok, lineno, col, "objective coefficient"))
            objective = (vals[0], vals[1:])
        elif key == "row":
            if len(args) != n + 1:
                raise ParseError(f"'row' needs {n + 1} values, got {len(args)}", lineno, kcol)
            vals = [_parse_rational(tok, lineno, col) for tok, col in args]
            rows.append((vals[0], vals[1:]))
        elif key == "upper":
            if upper is not None:
                raise ParseError("duplicate 'upper' line", lineno, kcol)
            if len(args) != n:
                raise ParseError(f"'upper' needs {n} values, got {len(args)}", lineno, kcol)
            upper = []
            for tok, col in args:
                if tok == "*":
                    upper.append(None)
                else:
                    v = _parse_int(tok, lineno, col, "upper bound")
                    if v < 0:
                        raise ParseError(f"negative upper bound {tok!r}", lineno, col)
                    upper.append(v)
        else:
            raise ParseError(f"unknown directive {key!r}", lineno, kcol)
    if header is None:
        raise ParseError("missing header 'pilp <n> <m>'", last_line or 1, 1)
    n, m = header
    if objective is None:
        raise ParseError("missing 'obj' line", last_line or 1, 1)
    if len(rows) != m:
        raise ParseError(f"header declares {m} rows, found {len(rows)}", last_line or 1, 1)
    h, c = objective
    return Problem.from_rationals(
        c, h, [r[1] for r in rows], [r[0] for r in rows], None if upper is None else tuple(upper)
    )


def _fmt_rational(num, den):
    f = Fraction(num, den)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def serialize_instance(p: Problem) -> str:
    lines = [f"pilp {p.n} {p.m}", "obj " + " ".join(str(v) for v in (p.h, *p.c))]
    for row, den, bn in zip(p.a_num, p.row_den, p.b_num):
        vals = [_fmt_rational(bn, den)] + [_fmt_rational(a, den) for a in row]
        lines.append("row " + " ".join(vals))
    if p.var_upper is not None:
        lines.append("upper " + " ".join("*" if u is None else str(u) for u in p.var_upper))
    return "\n".join(lines) + "\n"
