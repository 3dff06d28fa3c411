import itertools
import random
from collections import deque

import pytest
from hypothesis import given, settings

from psapilp.errors import Aborted
from psapilp.model import PartialCandidate, Problem, evaluate, is_feasible, reduce
from psapilp.oracle import brute_force
from psapilp.projection import build_table
from psapilp.search import (
    OutcomeStatus,
    SearchConfig,
    inspect_level,
    level_interval,
    pop_candidate,
    select_split_variable,
    solve,
)

from conftest import problems, random_general, random_mkp


def test_level_interval_ukp(ukp):
    iv = level_interval(ukp)
    assert (iv.z_lo, iv.z_hi) == (0, 13)
    assert list(iv.levels())[:3] == [13, 12, 11]


def test_level_interval_constant_objective():
    p = Problem.from_rationals([0, 0], 5, [[1, 1]], [3])
    iv = level_interval(p)
    assert (iv.z_lo, iv.z_hi) == (5, 5)


def test_level_interval_covers_small_cod():
    # Objective values 3..6 only; the interval is anchored at the top.
    p = Problem.from_rationals([1, 2], 3, [[1, 1]], [2], (1, 1))
    iv = level_interval(p)
    assert iv.z_hi == 6 and iv.z_lo <= 3


@pytest.mark.parametrize("z, points", [(13, ()), (12, ((0, 0, 1),)), (11, ((0, 1, 1),))])
def test_inspect_level_ukp(ukp, z, points):
    projs = build_table(ukp)
    cs, _ = inspect_level(ukp, z, projs)
    assert cs.level == z and cs.points == points


def test_inspect_level_fixing_order_ukp(ukp):
    trace = []
    inspect_level(ukp, 11, build_table(ukp), trace=trace)
    fixes = [e[2] for e in trace if e[0] == "fix"]
    assert fixes == [{2: 1}, {0: 0}, {1: 1}]
    assert trace[-1] == ("candidate", 11, (0, 1, 1))


def test_solve_ukp_golden_trace(ukp):
    out = solve(ukp, SearchConfig(trace=True))
    assert out.status is OutcomeStatus.OPTIMAL
    assert (out.point, out.value) == ((0, 1, 1), 11)
    assert out.stats.levels_scanned == 3
    assert out.incumbents == [(12, (0, 0, 1), 8)]
    assert [e[1] for e in out.trace if e[0] == "level"] == [13, 12, 11]
    assert out.stats.final_av_pct == pytest.approx(200 / 3)


def test_solve_infeasible_relaxation():
    p = Problem.from_rationals([1, 2], 0, [[0, 0]], [-1])
    out = solve(p)
    assert out.status is OutcomeStatus.INFEASIBLE and out.point is None


def test_solve_integer_infeasible():
    # 2 x1 = 1 has a fractional solution only.
    p = Problem.from_rationals([1, 1], 0, [[2, 0], [-2, 0]], [1, -1], (1, 1))
    out = solve(p)
    assert out.status is OutcomeStatus.INFEASIBLE
    assert out.stats.levels_scanned >= 1


def test_solve_single_variable():
    p = Problem.from_rationals([9], 0, [[10]], [12])
    out = solve(p)
    assert (out.point, out.value) == ((1,), 9)


def test_select_split_variable_examples():
    sizes = {0: (0, 1), 1: (0, 1), 2: (0, 1)}
    assert select_split_variable(sizes, (9, 3, 8)) == 0
    assert select_split_variable({1: (0, 1), 2: (0, 1)}, (0, 4, 4)) == 1
    assert select_split_variable({0: (0, 1, 2), 1: (0, 1)}, (1, 1), "min-range") == 1
    assert select_split_variable({3: (0, 1), 1: (0, 1)}, (0, 0, 0, 9), "first") == 1


def test_pop_candidate_policies():
    L = deque("abc")
    assert pop_candidate(L) == "c"
    assert pop_candidate(deque("a")) == "a"
    assert pop_candidate(deque("ab"), "fifo") == "a"
    with pytest.raises(IndexError):
        pop_candidate(deque())


def test_bad_config_rejected():
    with pytest.raises(ValueError):
        SearchConfig(split="random")
    with pytest.raises(ValueError):
        SearchConfig(list_policy="stack")


def _box(p):
    return [u for u in p.var_upper]


def _check_against_brute(p, cfg=SearchConfig()):
    out = solve(p, cfg)
    ref = brute_force(p)
    assert out.status.value == ref.status.value
    assert out.value == ref.value
    if out.optimal:
        assert is_feasible(p, out.point) and evaluate(p, out.point) == out.value
        assert out.stats.peak_list_size <= p.n * max(out.stats.max_range_size, 1)
        levels = [e[1] for e in out.trace if e[0] == "level"]
        assert levels == sorted(set(levels), reverse=True)
        assert min(levels, default=out.value) >= out.value
    return out


@given(problems(max_n=5, max_upper=3))
@settings(max_examples=120, deadline=None)
def test_matches_brute_force(p):
    _check_against_brute(p, SearchConfig(trace=True))


def test_matches_brute_force_mkp():
    rng = random.Random(21)
    for _ in range(40):
        _check_against_brute(random_mkp(rng), SearchConfig(trace=True))


def test_matches_brute_force_general():
    rng = random.Random(22)
    for _ in range(40):
        _check_against_brute(random_general(rng), SearchConfig(trace=True))


@pytest.mark.parametrize("cfg", [
    SearchConfig(split="min-range"),
    SearchConfig(split="first"),
    SearchConfig(list_policy="fifo"),
    SearchConfig(stream_check=True),
    SearchConfig(projection_cache=0),
    SearchConfig(projection_mode="exact"),
    SearchConfig(iter_cap=1),
])
def test_config_variants_agree(cfg):
    rng = random.Random(23)
    for _ in range(15):
        p = random_mkp(rng, n_range=(4, 9))
        base = solve(p)
        other = solve(p, cfg)
        assert (other.status, other.value) == (base.status, base.value)


def test_stream_check_only_changes_stats():
    rng = random.Random(24)
    for _ in range(20):
        p = random_general(rng)
        a = solve(p)
        b = solve(p, SearchConfig(stream_check=True))
        assert (a.status, a.value) == (b.status, b.value)
        assert b.stats.candidates_checked <= a.stats.candidates_checked


def test_upper_bounds_equal_rows():
    rng = random.Random(25)
    for _ in range(25):
        p = random_general(rng, signed=False)
        rows = [list(r) for r in p.A_exact()] + [
            [1 if k == j else 0 for k in range(p.n)] for j in range(p.n)]
        q = Problem.from_rationals(p.c, p.h, rows, p.b_exact() + list(p.var_upper))
        a, b = solve(p), solve(q)
        assert (a.status, a.value) == (b.status, b.value)


def test_optimal_points_reach_candidate_set():
    rng = random.Random(26)
    for _ in range(25):
        p = random_general(rng, n_max=5, u_max=3)
        ref = brute_force(p)
        if not ref.optimal:
            continue
        optima = [x for x in itertools.product(*(range(u + 1) for u in _box(p)))
                  if is_feasible(p, x) and evaluate(p, x) == ref.value]
        cs, _ = inspect_level(p, ref.value, build_table(p))
        for x in optima:
            assert x in cs


def test_suffix_fixings_keep_optimum():
    rng = random.Random(27)
    for _ in range(25):
        p = random_general(rng, n_max=6)
        ref = brute_force(p)
        if not ref.optimal:
            continue
        for k in range(1, p.n):
            pc = PartialCandidate((None,) * k + ref.point[k:])
            red = reduce(p, pc)
            out = solve(red.problem)
            assert out.optimal and out.value == ref.value


def test_time_limit_aborts():
    p = random_mkp(random.Random(1), n_range=(12, 12))
    with pytest.raises(Aborted) as info:
        solve(p, SearchConfig(time_limit=0.0))
    assert info.value.reason == "time_limit"


def test_list_size_limit_aborts():
    rng = random.Random(28)
    for _ in range(50):
        p = random_mkp(rng, n_range=(10, 12))
        if solve(p).stats.peak_list_size > 0:
            break
    with pytest.raises(Aborted) as info:
        solve(p, SearchConfig(max_list_size=0))
    assert info.value.reason == "max_list_size"
    assert info.value.stats is not None
