import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from psapilp.bench import GenSpec, generate
from psapilp.model import Problem, parse_instance

UKP_TEXT = """\
# max 9x1 + 3x2 + 8x3  s.t.  10x1 + 5x2 + 7x3 <= 12
pilp 3 1
obj 0 9 3 8
row 12 10 5 7
"""


@pytest.fixture
def ukp():
    return parse_instance(UKP_TEXT)


def random_mkp(rng: random.Random, n_range=(4, 12), m_range=(1, 4), alphas=(0.25, 0.5, 0.75)):
    """Seeded binary MKP through the package generator."""
    spec = GenSpec(rng.randint(*n_range), rng.randint(*m_range), rng.choice(alphas),
                   rng.choice(("uncorrelated", "weak")), rng.getrandbits(32))
    return generate(spec)


def random_general(rng: random.Random, n_max=8, u_max=4, m_max=3, signed=True):
    """Small general-integer instance with explicit upper bounds.

    Negative entries are allowed when ``signed`` so that the zero point is
    not always feasible and infeasible instances show up.
    """
    n = rng.randint(1, n_max)
    m = rng.randint(1, m_max)
    lo = -4 if signed else 0
    A = [[rng.randint(lo, 9) for _ in range(n)] for _ in range(m)]
    b = [rng.randint(-3 if signed else 0, 20) for _ in range(m)]
    c = [rng.randint(-3, 10) for _ in range(n)]
    upper = [rng.randint(0, u_max) for _ in range(n)]
    return Problem.from_rationals(c, rng.randint(-5, 5), A, b, upper)


@st.composite
def problems(draw, max_n=5, max_m=3, max_upper=3, rational=True):
    """Hypothesis strategy for small bounded PILP instances."""
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, max_m))
    coef = st.integers(-3, 9)
    c = draw(st.lists(st.integers(-5, 10), min_size=n, max_size=n))
    h = draw(st.integers(-10, 10))
    den = st.integers(1, 4) if rational else st.just(1)
    rows, rhs = [], []
    for _ in range(m):
        d = draw(den)
        rows.append([Fraction(draw(coef), d) for _ in range(n)])
        rhs.append(Fraction(draw(st.integers(-2, 25)), d))
    upper = draw(st.lists(st.integers(0, max_upper), min_size=n, max_size=n))
    return Problem.from_rationals(c, h, rows, rhs, upper)


def random_lp(rng: random.Random, n_max=6, m_max=6):
    """Bounded random LP ``max c.x, A x <= b, 0 <= x <= u`` (possibly infeasible)."""
    from psapilp.lp import LpModel

    n = rng.randint(1, n_max)
    m = rng.randint(1, m_max)
    A = [[rng.randint(-5, 9) for _ in range(n)] for _ in range(m)]
    b = [rng.randint(-4, 30) for _ in range(m)]
    c = [rng.randint(-5, 10) for _ in range(n)]
    u = [rng.randint(1, 6) for _ in range(n)]
    return LpModel(c, A, b, [0.0] * n, u, rng.randint(-3, 3))


def vertex_optimum(model):
    """Optimum of a bounded LP by enumerating every basic solution.

    Returns ``None`` when no vertex is feasible.
    """
    n = model.n
    G = np.vstack([model.A, np.eye(n), -np.eye(n)])
    h = np.concatenate([model.b, model.upper, -model.lower])
    best = None
    combos = np.array(list(itertools.combinations(range(G.shape[0]), n)))
    M = G[combos]
    ok = np.abs(np.linalg.det(M)) > 1e-9
    M, rhs = M[ok], h[combos[ok]]
    if not len(M):
        return None
    X = np.linalg.solve(M, rhs[..., None])[..., 0]
    feas = np.all(X @ G.T <= h + 1e-9, axis=1)
    if not feas.any():
        return None
    vals = X[feas] @ model.c
    best = vals.max() if model.sense == "max" else vals.min()
    return float(best) + model.const
