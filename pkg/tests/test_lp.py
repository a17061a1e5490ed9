from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from adeglab.lp import LPError, solve


def _random_feasible(seed: int, m: int, n: int):
    rng = np.random.default_rng(seed)
    A = rng.integers(-4, 5, size=(m, n))
    x0 = rng.integers(0, 3, size=n)
    b = A @ x0
    # bounded: add sum x <= cap via a slack column
    A = np.vstack([A, np.ones(n, dtype=int)])
    A = np.hstack([A, np.zeros((m + 1, 1), dtype=int)])
    A[-1, -1] = 1
    b = np.append(b, int(x0.sum()) + 5)
    c = rng.integers(-5, 6, size=n + 1)
    return A.tolist(), b.tolist(), c.tolist()


def _check_optimal(A, b, c, res):
    x, y = res.x, res.y
    assert all(v >= 0 for v in x)
    for row, bi in zip(A, b):
        assert sum(Fraction(a) * v for a, v in zip(row, x)) == bi
    for j in range(len(c)):
        assert sum(Fraction(A[i][j]) * y[i] for i in range(len(A))) >= c[j]
    assert sum(Fraction(bi) * yi for bi, yi in zip(b, y)) == res.value


@given(st.integers(0, 10**6), st.integers(1, 5), st.integers(2, 8))
def test_exact_simplex_matches_float_oracle(seed, m, n):
    A, b, c = _random_feasible(seed, m, n)
    res = solve(A, b, c)
    assert res.status == "optimal"
    _check_optimal(A, b, c, res)
    ref = linprog(-np.array(c, float), A_eq=np.array(A, float), b_eq=np.array(b, float), bounds=(0, None), method="highs")
    assert ref.status == 0
    assert abs(float(res.value) + ref.fun) <= 1e-7 * (1 + abs(ref.fun))


def test_warm_start_agrees_with_simplex():
    A, b, c = _random_feasible(7, 30, 80)
    cold = solve(A, b, c, warm_start=False)
    warm = solve(A, b, c, warm_start=True)
    assert warm.engine == "verified-basis"
    assert cold.value == warm.value
    _check_optimal(A, b, c, warm)


def test_infeasible_and_unbounded():
    assert solve([[1, 1]], [-1], [1, 1], check=False).status == "infeasible"
    assert solve([[1, -1]], [0], [1, 0], check=False).status == "unbounded"


def test_fraction_entries():
    res = solve([[Fraction(1, 2), Fraction(1, 3)]], [Fraction(1, 6)], [1, 1])
    assert res.value == Fraction(1, 2)


def test_row_length_mismatch():
    with pytest.raises(LPError):
        solve([[1, 2]], [1], [1])


def test_redundant_rows_keep_duals_aligned():
    # more equality rows than columns, so phase 1 leaves artificial rows to drop
    A, b, c = _random_feasible(147, 4, 2)
    res = solve(A, b, c)
    _check_optimal(A, b, c, res)
    assert res.value == -4
