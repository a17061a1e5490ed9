import math
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adeglab.coloring import (
    Coloring,
    balance_guarantee,
    balance_profile,
    balanced_on,
    color_of,
    delta_for_eps,
    eps_delta_frontier,
    existence_check,
    explicit_coloring,
    random_coloring,
    subset_sum_counts,
    verify_balance,
)
from adeglab.numtheory import ParameterError

small = st.tuples(st.integers(3, 8), st.integers(1, 3), st.integers(2, 4), st.integers(0, 1000)).filter(lambda t: t[1] <= t[0])


def brute_fraction(c: Coloring, eps: Fraction, l: int) -> Fraction:
    """Fraction of l-subsets on which some color class leaves the (1 +- eps)/r window."""
    bad = total = 0
    for A in combinations(range(c.n), l):
        counts = [0] * c.r
        for S in combinations(A, c.k):
            counts[color_of(c, S) - 1] += 1
        tot = math.comb(l, c.k)
        total += 1
        if any(abs(Fraction(v, tot) - Fraction(1, c.r)) > eps / c.r for v in counts):
            bad += 1
    return Fraction(bad, total)


@given(small, st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1)]))
def test_verify_balance_matches_brute_force(params, eps):
    n, k, r, seed = params
    c = random_coloring(n, k, r, seed)
    m = max(k, n - 2)
    cert = verify_balance(c, eps, Fraction(1, 2), m)
    for lv in cert.levels:
        assert lv.fraction == brute_fraction(c, eps, lv.level)


@given(small)
def test_z_coloring_colors(params):
    n, k, r, seed = params
    z = [(seed * (i + 3)) % 17 for i in range(n)]
    c = Coloring(n, k, r, z=tuple(z))
    for S in combinations(range(n), k):
        assert color_of(c, S) == 1 + sum(z[i] for i in S) % r
    counts = subset_sum_counts(z, k, r)
    sizes = c.class_sizes()
    assert [counts[(col - 1) % r] for col in range(1, r + 1)] == sizes
    assert sum(sizes) == math.comb(n, k)


def test_frontier_is_pareto_and_consistent():
    c = random_coloring(8, 2, 3, 4)
    prof = balance_profile(c, 4)
    front = eps_delta_frontier(prof)
    assert front[0][0] == 0
    for (e1, d1), (e2, d2) in zip(front, front[1:]):
        assert e1 < e2 and d1 > d2
    for e, d in front:
        assert delta_for_eps(prof, e) == d
        assert verify_balance(c, e, d, 4).passed


def test_balanced_on_whole_set():
    c = Coloring(6, 2, 3, z=(0, 1, 2, 0, 1, 2))
    sizes = c.class_sizes()
    worst = max(abs(3 * s - 15) for s in sizes)
    assert balanced_on(c, range(6), Fraction(worst, 15))
    assert worst == 0 or not balanced_on(c, range(6), Fraction(worst - 1, 15))


def test_json_round_trip():
    for c in (random_coloring(6, 2, 3, 1), Coloring(5, 2, 2, z=(1, 2, 3, 4, 5))):
        assert Coloring.from_json(c.to_json()) == c


def test_existence_check_matches_float():
    for n, m, k, r in [(20, 10, 2, 2), (100, 40, 3, 3), (50, 8, 2, 4)]:
        for eps, delta in [(Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 10), Fraction(1, 100))]:
            lhs = math.comb(m, k)
            rhs = 3 * r / float(eps) ** 2 * math.log(2 * r * n / float(delta))
            assert existence_check(n, m, k, r, eps, delta) == (lhs >= rhs)


@given(st.integers(8, 60), st.integers(2, 5), st.integers(1, 2), st.integers(2, 7))
def test_explicit_coloring_size(n, m, k, r):
    if not (n / 2 >= m > k):
        return
    ex = explicit_coloring(n, m, k, r)
    assert n / 2 < ex.n_prime <= n
    assert ex.coloring.n == ex.n_prime and ex.coloring.r == r


def test_guarantee_is_finite_and_monotone_in_disc():
    z = [1, 2, 3, 5, 8, 13, 21, 34]
    g = balance_guarantee(z, 3, 6, 2, 0.5, 0.5)
    assert g.eps > 0 and g.delta > 0 and 0 <= g.disc <= 1
    bad = balance_guarantee([0] * 8, 3, 6, 2, 0.5, 0.5)
    assert bad.eps >= g.eps


def test_parameter_errors():
    with pytest.raises(ParameterError):
        Coloring(3, 4, 2, z=(1, 2, 3))
    with pytest.raises(ParameterError):
        Coloring(3, 2, 2, table=(1, 2))
    with pytest.raises(ParameterError):
        verify_balance(random_coloring(5, 2, 2), Fraction(1, 2), Fraction(1, 2), 1)
