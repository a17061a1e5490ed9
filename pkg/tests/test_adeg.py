from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from adeglab.adeg import (
    RealFunction,
    adeg,
    best_error,
    degree_table,
    dual_witness,
    negate,
    onedeg,
    pm_encoding,
    primal_error,
    restricted,
    witness_report,
)
from adeglab.hypercube import (
    ResourceError,
    TruthTable,
    and_fn,
    constant_fn,
    dnf_to_truth_table,
    or_fn,
    parity_fn,
    popcount,
    random_dnf,
    threshold_fn,
)
from adeglab.poly import INF, orth


def float_best_error(f, d, one_sided=False):
    """Independent float LP: min e with |p(x) - f(x)| <= e over the domain."""
    g = RealFunction.of(f)
    mons = [sum(1 << i for i in s) for k in range(d + 1) for s in combinations(range(g.arity), k)]
    rows, rhs = [], []
    for x, v in zip(g.points, g.values):
        phi = [1.0 if x & s == s else 0.0 for s in mons]
        if not (one_sided and v == 1):
            rows.append(phi + [-1.0])
            rhs.append(float(v))  # p - e <= f
        rows.append([-a for a in phi] + [-1.0])
        rhs.append(-float(v))  # f - e <= p
    c = [0.0] * len(mons) + [1.0]
    bounds = [(None, None)] * len(mons) + [(0, None)]
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    assert res.status == 0
    return res.fun


small_tables = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.integers(0, 1), min_size=1 << n, max_size=1 << n).map(lambda v: TruthTable.from_values(n, v))
)


@given(small_tables, st.integers(0, 4), st.booleans())
def test_best_error_matches_float_oracle(f, d, one_sided):
    d = min(d, f.arity)
    ex = best_error(f, d, one_sided)
    assert abs(float(ex.error) - float_best_error(f, d, one_sided)) <= 1e-7
    assert primal_error(f, ex.poly, one_sided) == ex.error
    rep = witness_report(f, ex.witness)
    if ex.error > 0:
        assert rep.l1 == 1 and rep.correlation == ex.error and rep.orth > d


@given(small_tables, st.sampled_from([Fraction(1, 3), Fraction(1, 4), Fraction(2, 5)]))
def test_degree_certificates_are_consistent(f, eps):
    for res in (adeg(f, eps), onedeg(f, eps)):
        assert res.consistent(f)


def test_symmetric_route_agrees_with_cube_route():
    for f in (or_fn(4), threshold_fn(5, 2), parity_fn(3), and_fn(4)):
        for d in range(f.arity + 1):
            assert best_error(f, d, route="levels").error == best_error(f, d, route="cube").error


def test_known_degrees():
    assert adeg(parity_fn(5), Fraction(1, 3)).degree == 5
    assert adeg(constant_fn(4, 1), Fraction(1, 3)).degree == 0
    assert adeg(or_fn(4), Fraction(1, 3)).degree == adeg(and_fn(4), Fraction(1, 3)).degree == 2
    assert adeg(or_fn(4), Fraction(-1, 3)).degree == INF
    assert adeg(or_fn(4), Fraction(1, 2)).degree == 0


def test_onesided_or_at_most_twosided():
    for n in range(1, 8):
        assert onedeg(or_fn(n), Fraction(1, 3)).degree <= adeg(or_fn(n), Fraction(1, 3)).degree


def test_degree_table_monotone_in_eps():
    t = degree_table(threshold_fn(6, 3), [Fraction(1, 10), Fraction(1, 4), Fraction(1, 3), Fraction(2, 5)])
    degs = [t[e].degree for e in sorted(t)]
    assert degs == sorted(degs, reverse=True)


def test_dual_witness_certifies_lower_bound():
    psi, rep, eps_star = dual_witness(or_fn(6), 2)
    assert rep.l1 == 1 and orth(psi) >= 2 and rep.correlation == eps_star > Fraction(1, 3)


def test_restricted_function_degree():
    f = restricted(or_fn(6), 2)
    assert all(popcount(x) <= 2 for x in f.points)
    assert adeg(f, Fraction(1, 3)).consistent(f)


@given(st.integers(3, 5), st.integers(0, 10**6))
def test_negation_and_pm_identities(n, seed):
    f = dnf_to_truth_table(random_dnf(n, 3, 2, np.random.default_rng(seed)))
    for eps in (Fraction(1, 3), Fraction(1, 4)):
        d = adeg(f, eps).degree
        assert adeg(negate(f), eps).degree == d
        assert adeg(pm_encoding(f), 2 * eps).degree == d


def test_non_boolean_one_sided_rejected():
    with pytest.raises(ValueError):
        best_error(pm_encoding(or_fn(2)), 1, one_sided=True)


def test_size_guard(monkeypatch):
    import adeglab.adeg as mod

    monkeypatch.setattr(mod, "MAX_POINTS", 8)
    with pytest.raises(ResourceError):
        best_error(or_fn(4), 1)
