import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from psapilp.errors import InstanceError, ParseError
from psapilp.model import (
    PartialCandidate,
    Problem,
    evaluate,
    is_feasible,
    parse_instance,
    reduce,
    serialize_instance,
)

from conftest import UKP_TEXT, problems


def test_ukp_parses(ukp):
    assert (ukp.n, ukp.m) == (3, 1)
    assert ukp.c == (9, 3, 8)
    assert ukp.h == 0
    assert ukp.A_exact() == [[10, 5, 7]]
    assert ukp.b_exact() == [12]


@pytest.mark.parametrize("x, value", [((0, 1, 1), 11), ((0, 0, 1), 8), ((0, 0, 0), 0)])
def test_evaluate_ukp(ukp, x, value):
    assert evaluate(ukp, x) == value


def test_evaluate_zero_point_is_h():
    p = Problem.from_rationals([4, -2], 17, [[1, 1]], [3])
    assert evaluate(p, (0, 0)) == 17


def test_evaluate_is_exact_for_huge_values():
    big = 10**30
    p = Problem.from_rationals([big, big + 1], -1, [[1, 1]], [10**25])
    assert evaluate(p, (10**24, 3)) == big * 10**24 + 3 * (big + 1) - 1


@pytest.mark.parametrize("x, ok", [((0, 1, 1), True), ((1, 1, 1), False), ((0, -1, 0), False),
                                   ((1, 0, 0), True), ((0, 2, 0), True), ((0, 3, 0), False)])
def test_is_feasible_ukp(ukp, x, ok):
    assert is_feasible(ukp, x) is ok


def test_dimension_mismatch_raises(ukp):
    with pytest.raises(InstanceError):
        evaluate(ukp, (1, 0))
    with pytest.raises(InstanceError):
        is_feasible(ukp, (1, 0, 0, 0))


def test_rational_rows_are_checked_exactly():
    # x1/3 + x2/3 <= 2/3 holds with equality at (1, 1); floats would wobble here.
    p = Problem.from_rationals([1, 1], 0, [[Fraction(1, 3), Fraction(1, 3)]], [Fraction(2, 3)])
    assert is_feasible(p, (1, 1))
    assert not is_feasible(p, (2, 1))


def test_var_upper_enforced():
    p = Problem.from_rationals([1, 1], 0, [], [], (1, None))
    assert is_feasible(p, (1, 50))
    assert not is_feasible(p, (2, 0))


def test_non_integer_objective_rejected():
    with pytest.raises(InstanceError, match="non-integer objective coefficient"):
        Problem.from_rationals([Fraction(5, 2)], 0, [[1]], [1])


def test_reduce_ukp_fix_x3(ukp):
    red = reduce(ukp, PartialCandidate((None, None, 1)))
    assert red.derived_h == 8
    assert red.derived_b == [5]
    sub = red.problem
    assert sub.c == (9, 3) and sub.h == 8
    assert sub.A_exact() == [[10, 5]]


def test_reduce_ukp_fix_x1_x3(ukp):
    red = reduce(ukp, PartialCandidate((0, None, 1)))
    assert red.active == (1,)
    assert red.problem.c == (3,) and red.problem.h == 8
    assert red.derived_b == [5]


def test_reduce_empty_fixing_is_identity(ukp):
    assert reduce(ukp, PartialCandidate.empty(3)).problem == ukp


def test_reduce_complete_fixing_succeeds(ukp):
    red = reduce(ukp, PartialCandidate((1, 1, 0)))
    assert red.active == ()
    assert red.derived_b == [-3]
    assert not red.completion_feasible(())
    assert red.completion_value(()) == 12


@given(problems(), st.data())
@settings(max_examples=60, deadline=None)
def test_reduce_composition(p, data):
    first = data.draw(st.lists(st.integers(0, 3), min_size=p.n, max_size=p.n))
    mask1 = data.draw(st.lists(st.booleans(), min_size=p.n, max_size=p.n))
    mask2 = data.draw(st.lists(st.booleans(), min_size=p.n, max_size=p.n))
    pc1 = PartialCandidate(tuple(v if k else None for v, k in zip(first, mask1)))
    pc2 = PartialCandidate(tuple(v if (k and not k1) else None
                                 for v, k, k1 in zip(first, mask2, mask1)))
    direct = reduce(p, pc1.merge(pc2))
    red1 = reduce(p, pc1)
    if not red1.active:
        assert direct.derived_b_num == red1.derived_b_num
        return
    # pc2 restricted to the coordinates left active by pc1.
    inner = PartialCandidate(tuple(pc2.entries[j] for j in red1.active))
    nested = reduce(red1.problem, inner)
    assert nested.derived_h == direct.derived_h
    assert [Fraction(v, d) for v, d in zip(nested.derived_b_num, red1.problem.row_den)] \
        == direct.derived_b


@given(problems(max_n=4, max_upper=2), st.data())
@settings(max_examples=60, deadline=None)
def test_reduced_feasibility_matches_merged_point(p, data):
    mask = data.draw(st.lists(st.booleans(), min_size=p.n, max_size=p.n))
    vals = data.draw(st.lists(st.integers(0, 2), min_size=p.n, max_size=p.n))
    pc = PartialCandidate(tuple(v if k else None for v, k in zip(vals, mask)))
    red = reduce(p, pc)
    for y in itertools.product(range(3), repeat=len(red.active)):
        x = red.lift(y)
        assert red.completion_feasible(y) == is_feasible(p, x)
        assert red.completion_value(y) == evaluate(p, x)


@given(problems())
@settings(max_examples=100, deadline=None)
def test_round_trip(p):
    text = serialize_instance(p)
    assert parse_instance(text) == p
    assert serialize_instance(parse_instance(text)) == text


def test_parse_serialize_ukp_text():
    p = parse_instance(UKP_TEXT)
    assert serialize_instance(p) == "pilp 3 1\nobj 0 9 3 8\nrow 12 10 5 7\n"


def test_parse_no_rows_with_upper():
    p = parse_instance("pilp 2 0\nobj 1 2 3\nupper 4 *\n")
    assert p.m == 0 and p.var_upper == (4, None) and p.h == 1


def test_parse_rational_row():
    p = parse_instance("pilp 2 1\nobj 0 1 1\nrow 3/2 1/2 1/4\n")
    assert p.A_exact() == [[Fraction(1, 2), Fraction(1, 4)]]
    assert p.b_exact() == [Fraction(3, 2)]


@pytest.mark.parametrize("text, line, column, message", [
    ("pilp 2 1\nobj 0 2.5 1\nrow 1 1 1\n", 2, 7, "non-integer objective coefficient"),
    ("pilp 2 1\nobj 0 1 1\nrow 1 1\n", 3, 1, "'row' needs 3 values"),
    ("pilp 2 1\nobj 0 1 1\nrow 1 1 1/0\n", 3, 9, "non-positive denominator"),
    ("pilp 2 1\nobj 0 1 1\nrow 1 1 x\n", 3, 9, "non-integer numerator"),
    ("pilp 2\n", 1, 1, "expected header"),
    ("obj 0 1\n", 1, 1, "expected header"),
    ("pilp 1 1\nobj 0 1\nrow 1 1\nbogus 1\n", 4, 1, "unknown directive"),
    ("pilp 1 2\nobj 0 1\nrow 1 1\n", 3, 1, "declares 2 rows"),
    ("pilp 1 0\n", 1, 1, "missing 'obj'"),
    ("pilp 2 0\nobj 0 1 1\nupper 1 -1\n", 3, 9, "negative upper bound"),
])
def test_parse_errors_carry_position(text, line, column, message):
    with pytest.raises(ParseError, match=message) as info:
        parse_instance(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_comments_and_blank_lines_ignored():
    text = "# header follows\n\npilp 1 1   # one var\nobj 0 3\n\nrow 2 1 # x <= 2\n"
    p = parse_instance(text)
    assert p.c == (3,) and p.b_exact() == [2]


def test_rows_are_normalised():
    a = Problem((1,), 0, ((2,),), (4,), (2,))
    b = Problem.from_rationals([1], 0, [[Fraction(1, 2)]], [Fraction(1, 2)])
    assert a == b
    assert a.row_den == (2,)


def test_partial_candidate_fix_rules():
    pc = PartialCandidate.empty(3)
    pc = pc.fix({2: 1})
    assert pc.active == (0, 1) and pc.fixed == {2: 1}
    with pytest.raises(ValueError):
        pc.fix({2: 0})
    with pytest.raises(InstanceError):
        pc.fix({0: -1})
    with pytest.raises(ValueError):
        pc.point()
    assert pc.fix({0: 0, 1: 1}).point() == (0, 1, 1)
    assert str(pc) == "(?,?,1)"
