import threading
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from fibwalk.errors import CapacityError, OffsetRangeError
from fibwalk.fibcore import (
    EXPLICIT_CAP,
    LAM,
    MU,
    CoefficientSet,
    TauTable,
    a_explicit,
    a_inhomogeneous,
    a_recurrence,
    anchored_solution,
    continuant_tails,
    cross_difference,
    explicit_products,
    fibonacci,
    reduce_column,
    reduction_chain,
    tau,
)

F6 = [
    "λ_0 1 λ_0 λ_0 1 λ_0 1 λ_0 λ_0 1 λ_0 λ_0 1",
    "λ_1 μ_0 1 λ_1 μ_0 λ_1 μ_0 1 λ_1 μ_0 1 λ_1 μ_0",
    "λ_2 λ_2 μ_1 1 1 λ_2 λ_2 μ_1 λ_2 λ_2 μ_1 1 1",
    "λ_3 λ_3 λ_3 μ_2 μ_2 1 1 1 λ_3 λ_3 λ_3 μ_2 μ_2",
    "λ_4 λ_4 λ_4 λ_4 λ_4 μ_3 μ_3 μ_3 1 1 1 1 1",
    "λ_5 λ_5 λ_5 λ_5 λ_5 λ_5 λ_5 λ_5 μ_4 μ_4 μ_4 μ_4 μ_4",
]


def exact(x) -> Fraction:
    return Fraction(x.mantissa) * Fraction(2) ** x.exponent


def a_exact(i, m, coeffs) -> Fraction:
    """Continuant in rational arithmetic: the reference for every evaluator."""
    if i == -1:
        return Fraction(0)
    prev, cur = Fraction(0), Fraction(1)
    for k in range(i):
        mu = Fraction(coeffs.mu_at(m + k - 1)) if k else Fraction(0)
        prev, cur = cur, Fraction(coeffs.lam_at(m + k)) * cur + mu * prev
    return cur


def random_coeffs(rng, lo=-12, hi=45, low=-2.0, high=2.0):
    keys = range(lo, hi)
    return CoefficientSet({k: rng.uniform(low, high) for k in keys}, {k: rng.uniform(low, high) for k in keys})


# -- Fibonacci numbers and column reduction ----------------------------------


@pytest.mark.parametrize("n, f", [(0, 1), (1, 1), (2, 2), (6, 13), (10, 89), (20, 10946)])
def test_fibonacci(n, f):
    assert fibonacci(n) == f


def test_fibonacci_large_is_exact():
    assert fibonacci(100) == fibonacci(99) + fibonacci(98)
    assert fibonacci(100) == 573147844013817084101


def test_fibonacci_concurrent_growth():
    results = []
    threads = [threading.Thread(target=lambda k=k: results.append((k, fibonacci(300 + k)))) for k in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for k, value in results:
        assert value == fibonacci(299 + k) + fibonacci(298 + k)


@pytest.mark.parametrize("j, i, expected", [(12, 2, 1), (11, 2, 3), (5, 4, 5), (13, 1, 2)])
def test_reduce_column_examples(j, i, expected):
    assert reduce_column(j, i) == expected


def test_reduce_column_rejects_non_positive():
    with pytest.raises(ValueError):
        reduce_column(0, 1)


def test_reduction_depth_bound():
    # within a table of order n the number of subtractions is at most (n - i) / 2
    for n in range(1, 17):
        for i in range(1, n + 1):
            for j in range(1, fibonacci(n) + 1):
                assert len(reduction_chain(j, i)) - 1 <= (n - i) / 2


def test_reduction_depth_strict_bound_has_counterexample():
    # the strict form fails already in the order-3 table: column 3, row 1
    n, i, j = 3, 1, 3
    assert len(reduction_chain(j, i)) - 1 == 1
    assert not 1 < (n - i) / 2


# -- tau-table ---------------------------------------------------------------


def test_order_six_table():
    table = TauTable.from_rule(6)
    assert table.n_columns == 13
    assert [" ".join(row) for row in table.rows()] == F6


def test_small_tables():
    assert TauTable.from_rule(0).rows() == [["1"]]
    assert TauTable.from_rule(2).rows() == [["λ_0", "1"], ["λ_1", "μ_0"]]


@pytest.mark.parametrize("n", range(0, 11))
def test_rule_matches_block_construction(n):
    rule, blocks = TauTable.from_rule(n), TauTable.from_blocks(n)
    assert rule == blocks
    assert rule.n_columns == fibonacci(n)


@pytest.mark.parametrize("n", range(2, 11))
def test_columns_repeat_inside_parent_table(n):
    parent = TauTable.from_rule(n + 1)
    for i in range(1, n):
        for j in range(1, fibonacci(n - 1) + 1):
            assert parent.cell(i, fibonacci(n) + j) == parent.cell(i, j)


def test_tau_examples():
    coeffs = CoefficientSet({k: 10.0 + k for k in range(8)}, {k: -1.0 - k for k in range(8)})
    assert tau(3, 7, 0, coeffs) == coeffs.lam_at(2)
    assert tau(2, 10, 0, coeffs) == coeffs.mu_at(0)
    assert tau(5, 13, 0, coeffs) == 1.0


def test_tau_missing_offset_is_reported():
    coeffs = CoefficientSet({0: 1.0}, {})
    with pytest.raises(OffsetRangeError, match=r"lam\[2\]"):
        tau(3, 1, 0, coeffs)


# -- explicit expansion ------------------------------------------------------


def test_symbolic_expansion_matches_recurrence():
    lam = sympy.symbols("l0:12")
    mu = sympy.symbols("u0:12")
    prev, cur = sympy.Integer(0), sympy.Integer(1)
    for i in range(1, 10):
        prev, cur = cur, sympy.expand(lam[i - 1] * cur + (mu[i - 2] * prev if i >= 2 else 0))
        table = TauTable.from_rule(i)
        total = 0
        for j in range(1, table.n_columns + 1):
            term = sympy.Integer(1)
            for k in range(1, i + 1):
                cell = table.cell(k, j)
                if cell.kind == LAM:
                    term *= lam[cell.offset]
                elif cell.kind == MU:
                    term *= mu[cell.offset]
            total += term
        assert sympy.expand(total - cur) == 0


def test_explicit_examples():
    rng = np.random.default_rng(3)
    coeffs = random_coeffs(rng, 0, 6)
    lam, mu = coeffs.lam_at, coeffs.mu_at
    assert a_explicit(3, 0, coeffs) == pytest.approx(lam(0) * lam(1) * lam(2) + mu(0) * lam(2) + lam(0) * mu(1))
    assert a_explicit(3, 1, coeffs) == pytest.approx(lam(1) * lam(2) * lam(3) + mu(1) * lam(3) + lam(1) * mu(2))
    assert a_explicit(0, 0, coeffs) == 1.0
    constant = CoefficientSet({k: 2.0 for k in range(4)}, {k: -1.0 for k in range(4)})
    assert a_explicit(3, 0, constant) == 4.0


@pytest.mark.parametrize("i", range(0, 15))
def test_term_count(i):
    coeffs = CoefficientSet({k: 1.0 for k in range(-1, 20)}, {k: 1.0 for k in range(-1, 20)})
    assert explicit_products(i, 0, coeffs).size == fibonacci(i)
    assert a_explicit(i, 0, coeffs) == fibonacci(i)


def test_explicit_cap():
    coeffs = CoefficientSet({k: 1.0 for k in range(30)}, {k: 1.0 for k in range(30)})
    a_explicit(EXPLICIT_CAP, 0, coeffs)
    with pytest.raises(CapacityError):
        a_explicit(EXPLICIT_CAP + 1, 0, coeffs)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 14), st.integers(-10, 10))
def test_explicit_matches_recurrence(seed, i, m):
    coeffs = random_coeffs(np.random.default_rng(seed))
    ref = a_exact(i, m, coeffs)
    rec = exact(a_recurrence(i, m, coeffs))
    # the recurrence is compensated and lands on the rational value
    assert abs(rec - ref) <= abs(ref) * Fraction(1, 10**13)
    # the plain column sum loses accuracy when terms cancel; bound it by their size
    scale = float(np.sum(np.abs(explicit_products(i, m, coeffs))))
    assert abs(a_explicit(i, m, coeffs) - float(ref)) <= 1e-13 * scale


# -- recurrence and shifted identity ------------------------------------------


def test_recurrence_examples():
    rng = np.random.default_rng(5)
    coeffs = random_coeffs(rng, -1, 6)
    lam, mu = coeffs.lam_at, coeffs.mu_at
    assert a_recurrence(-1, 4, coeffs).to_real() == 0.0
    assert a_recurrence(0, 4, coeffs).to_real() == 1.0
    assert a_recurrence(2, 0, coeffs).to_real() == pytest.approx(lam(0) * lam(1) + mu(0))
    expected = (lam(0) * lam(1) * lam(2) * lam(3) + mu(0) * lam(2) * lam(3) + lam(0) * mu(1) * lam(3)
                + lam(0) * lam(1) * mu(2) + mu(0) * mu(2))
    assert a_recurrence(4, 0, coeffs).to_real() == pytest.approx(expected)


def test_recurrence_survives_overflow():
    coeffs = CoefficientSet({k: 3.0 for k in range(2000)}, {k: -0.5 for k in range(2000)})
    value = a_recurrence(1500, 0, coeffs)
    assert value.exponent > 1024
    ratio = (a_recurrence(1500, 0, coeffs) / a_recurrence(1499, 0, coeffs)).to_real()
    assert ratio == pytest.approx((3 + np.sqrt(7)) / 2, rel=1e-14)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 30), st.integers(-10, 10))
def test_shifted_identity(seed, n, m):
    coeffs = random_coeffs(np.random.default_rng(seed))
    lhs = exact(a_recurrence(n + 1, m, coeffs))
    rhs = (Fraction(coeffs.lam_at(m)) * exact(a_recurrence(n, m + 1, coeffs))
           + Fraction(coeffs.mu_at(m)) * exact(a_recurrence(n - 1, m + 2, coeffs)))
    assert abs(lhs - rhs) <= abs(lhs) * Fraction(1, 10**12)


def test_tails_match_forward_values():
    coeffs = random_coeffs(np.random.default_rng(11), -5, 25)
    tails = continuant_tails(-3, 20, coeffs)
    for c in range(-3, 23):
        ref = a_exact(20 - c + 1, c, coeffs)
        got = exact(tails[c])
        assert abs(got - ref) <= abs(ref) * Fraction(1, 10**13) + Fraction(1, 10**300)


def test_missing_offset_in_recurrence():
    coeffs = CoefficientSet({0: 1.0, 1: 1.0}, {0: 1.0, 1: 1.0})
    with pytest.raises(OffsetRangeError, match=r"lam\[2\] is not defined \(defined on 0..1\)"):
        a_recurrence(3, 0, coeffs)


# -- inhomogeneous solutions ---------------------------------------------------


def test_inhomogeneous_trivial_cases():
    rng = np.random.default_rng(2)
    coeffs = CoefficientSet(
        {k: rng.uniform(1, 2) for k in range(-1, 10)},
        {k: rng.uniform(-1, 0) for k in range(-1, 10)},
        {k: 0.0 for k in range(-1, 10)},
    )
    assert a_inhomogeneous(0, 2, coeffs, 0.3, 0.7).to_real() == 0.7
    for i in range(1, 6):
        got = a_inhomogeneous(i, 1, coeffs, 0.3, 0.7).to_real()
        want = 0.7 * a_recurrence(i, 1, coeffs).to_real() + 0.3 * coeffs.mu_at(0) * a_recurrence(i - 1, 2, coeffs).to_real()
        assert got == pytest.approx(want, rel=1e-13)


def test_inhomogeneous_matches_iteration():
    rng = np.random.default_rng(8)
    keys = range(-2, 12)
    coeffs = CoefficientSet(*({k: rng.uniform(-2, 2) for k in keys} for _ in range(3)))
    m, h0, h1 = 1, -0.4, 1.3
    y = {m - 1: Fraction(h0), m: Fraction(h1)}
    for t in range(m, m + 8):
        y[t + 1] = (Fraction(coeffs.lam_at(t)) * y[t] + Fraction(coeffs.mu_at(t - 1)) * y[t - 1]
                    + Fraction(coeffs.inhom_at(t)))
    for i in range(9):
        assert a_inhomogeneous(i, m, coeffs, h0, h1).to_real() == pytest.approx(float(y[m + i]), rel=1e-9, abs=1e-12)


def test_cross_difference_matches_products():
    coeffs = random_coeffs(np.random.default_rng(4), -3, 20)
    m, length = -2, 9
    for i in range(0, length + 1):
        for n in range(1, i + 2):
            ref = (a_exact(i - n, m + n, coeffs) * a_exact(length, m, coeffs)
                   - a_exact(length - n, m + n, coeffs) * a_exact(i, m, coeffs))
            got = exact(cross_difference(m, n, i, length, coeffs))
            assert abs(got - ref) <= abs(ref) * Fraction(1, 10**12) + Fraction(1, 10**200)


@pytest.mark.parametrize("head0", [None, 0.7])
def test_anchored_solution_solves_two_point_problem(head0):
    rng = np.random.default_rng(9)
    m, length = -3, 7
    keys = range(m - 1, m + length + 1)
    coeffs = CoefficientSet(
        {k: rng.uniform(2, 3) for k in keys},
        {k: rng.uniform(-1, -0.1) for k in keys},
        {k: rng.uniform(-1, 0) for k in keys},
    )
    # y[t+1] - lam[t] y[t] - mu[t-1] y[t-1] = inhom[t] with y[m-1] = head0, y[m+length] = 0
    a = np.zeros((length, length))
    b = np.zeros(length)
    y_left = head0 or 0.0
    for row, t in enumerate(range(m, m + length)):
        k = t - m
        a[row, k] = -coeffs.lam_at(t)
        if k + 1 < length:
            a[row, k + 1] = 1.0
        if k >= 1:
            a[row, k - 1] = -coeffs.mu_at(t - 1)
        else:
            b[row] += coeffs.mu_at(t - 1) * y_left
        b[row] += coeffs.inhom_at(t)
    want = np.linalg.solve(a, b)
    got = [v.to_real() for v in anchored_solution(coeffs, m, length, head0)]
    np.testing.assert_allclose(got, want, rtol=1e-12)
