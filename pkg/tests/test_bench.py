import math
import statistics

import pytest

from psapilp.bench import (
    COLUMNS,
    Correlation,
    GenSpec,
    Limits,
    RunReport,
    Xoshiro256,
    emit_report,
    generate,
    read_spec_csv,
    run_batch,
    run_instance,
    weak_cost,
)
from psapilp.model import serialize_instance


def test_splitmix_seeding_reference():
    # First splitmix64 output for seed 0.
    assert Xoshiro256(0).s[0] == 0xE220A8397B1DCDAF


def test_xoshiro_reference_stream():
    rng = Xoshiro256(0)
    rng.s = [1, 2, 3, 4]
    assert [rng.next64() for _ in range(4)] == [11520, 0, 1509978240, 1215971899390074240]


def test_integer_draws_cover_closed_interval():
    rng = Xoshiro256(3)
    seen = {rng.integer(-2, 2) for _ in range(500)}
    assert seen == {-2, -1, 0, 1, 2}


def test_generation_is_deterministic():
    spec = GenSpec(5, 3, 0.5, "uncorrelated", 42)
    a, b = generate(spec), generate(spec)
    assert a == b
    assert serialize_instance(a) == serialize_instance(b)
    assert generate(GenSpec(5, 3, 0.5, "uncorrelated", 43)) != a


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 0.3])
@pytest.mark.parametrize("corr", ["uncorrelated", "weak"])
def test_rhs_identity(alpha, corr):
    for seed in range(20):
        spec = GenSpec(7, 3, alpha, corr, seed)
        p = generate(spec)
        for row, b in zip(p.A_exact(), p.b_exact()):
            assert b == math.floor(spec.alpha_exact * sum(row))
        assert p.var_upper == (1,) * 7
        assert all(0 <= a <= 1000 for row in p.A_exact() for a in row)


def test_exact_rhs_flag():
    spec = GenSpec(5, 2, 0.5, seed=9, exact_b=True)
    p = generate(spec)
    for row, b in zip(p.A_exact(), p.b_exact()):
        assert b == sum(row) / 2


def test_coefficient_mean_within_three_sigma():
    p = generate(GenSpec(1000, 10, 0.5, seed=1))
    draws = [a for row in p.A_exact() for a in row]
    assert len(draws) == 10**4
    sigma = math.sqrt((1001**2 - 1) / 12) / math.sqrt(len(draws))
    assert abs(statistics.fmean(draws) - 500) <= 3 * sigma


def test_weak_cost_constant_columns():
    for k in (0, 50, 500, 1000):
        for m in (1, 3, 5):
            costs = {weak_cost(m * k, m, xi) for xi in range(-100, 101)}
            assert min(costs) == max(0, k - 100) and max(costs) == k + 100
    assert weak_cost(3, 2, 0) == 2


def test_weak_instance_costs_track_columns():
    spec = GenSpec(20, 4, 0.5, Correlation.WEAKLY, 5)
    p = generate(spec)
    A = p.A_exact()
    for j, c in enumerate(p.c):
        centre = round(sum(A[i][j] for i in range(4)) / 4)
        assert max(0, centre - 101) <= c <= centre + 101


def test_bad_specs_rejected():
    for args in ((0, 1), (1, 0), (1, 1, 1.0), (1, 1, 0.0)):
        with pytest.raises(ValueError):
            GenSpec(*args)
    with pytest.raises(ValueError):
        GenSpec(1, 1, 0.5, "strong")


def test_report_shape_and_columns():
    specs = [GenSpec(6, 2, 0.5, "weak", s) for s in range(3)]
    report = run_batch(specs, ("psa", "bb", "brute"))
    assert len(report.rows) == 9
    assert [(r.seed, r.solver) for r in report.rows[:3]] == [(0, "psa"), (0, "bb"), (0, "brute")]
    by_seed = {}
    for r in report.rows:
        by_seed.setdefault(r.seed, set()).add((r.status, r.value))
    assert all(len(v) == 1 for v in by_seed.values())
    text = emit_report(report)
    lines = text.splitlines()
    assert lines[0] == ",".join(COLUMNS)
    assert len(lines) == 10
    assert all(len(line.split(",")) == len(COLUMNS) for line in lines)


def test_single_row_and_empty_reports():
    assert emit_report(RunReport()) == ",".join(COLUMNS) + "\n"
    assert run_batch([]).rows == []
    report = run_batch([GenSpec(4, 1, seed=1)])
    assert len(emit_report(report).splitlines()) == 2


def test_failure_row_carries_reason():
    report = run_batch([GenSpec(12, 2, seed=3)], ("psa",), Limits(time_limit=0.0))
    (row,) = report.rows
    assert row.status == "aborted:time_limit"
    assert emit_report(report).splitlines()[1].split(",")[5] == "aborted:time_limit"
    report = run_batch([GenSpec(30, 2, seed=3)], ("brute",), Limits(brute_cap=10))
    assert report.rows[0].status == "aborted:point_cap"


def test_ukp_row(ukp):
    row = run_instance(ukp, "psa")
    assert (row.status, row.value, row.levels) == ("optimal", 11, 3)
    assert row.cells()[COLUMNS.index("av_pct")] == "66.67"


def test_other_formats():
    report = run_batch([GenSpec(5, 1, seed=s) for s in range(2)])
    table = emit_report(report, "table").splitlines()
    assert table[0].split() == list(COLUMNS)
    summary = emit_report(report, "summary").splitlines()
    assert summary[0].startswith("n,m,corr,solver,solved,count")
    assert summary[1].startswith("5,1,uncorrelated,psa,2,2")
    with pytest.raises(ValueError):
        emit_report(report, "xml")


def test_read_spec_csv():
    specs = read_spec_csv("n,m,alpha,corr,seed,count\n10,2,0.25,weak,7,3\n5,1,,,,\n")
    assert [(s.n, s.m, s.alpha, s.correlation, s.seed) for s in specs] == [
        (10, 2, 0.25, Correlation.WEAKLY, 7),
        (10, 2, 0.25, Correlation.WEAKLY, 8),
        (10, 2, 0.25, Correlation.WEAKLY, 9),
        (5, 1, 0.5, Correlation.UNCORRELATED, 0),
    ]
