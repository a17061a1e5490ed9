import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from adeglab.duals import (
    GadgetError,
    corrector,
    corrector_at,
    corrector_levels,
    measured_decay,
    onesided_corrector,
    or_dual,
    truncate,
    truncate_onesided,
    univariate_orth,
    write_gadget,
)
from adeglab.hypercube import popcount
from adeglab.poly import RationalMeasure, orth, read_measure

fracs = st.fractions(min_value=-3, max_value=3, max_denominator=5)


def float_or_dual_at_zero(n, target):
    A = [[(-1) ** t * math.comb(t, j) for t in range(n + 1)] for j in range(target)] + [[1] * (n + 1)]
    b = [0] * target + [1]
    res = linprog([-1] + [0] * n, A_eq=np.array(A, float), b_eq=np.array(b, float), bounds=(0, None), method="highs")
    return -res.fun


def test_or_dual_small_values():
    assert or_dual(1, 1).values == (Fraction(1, 2), Fraction(-1, 2))
    w = or_dual(9, 3)
    assert w.at_zero == Fraction(5, 16) and w.eps_floor == Fraction(3, 8)


@given(st.integers(1, 14), st.data())
def test_or_dual_against_float_oracle(n, data):
    target = data.draw(st.integers(1, n))
    w = or_dual(n, target)
    assert all(w.check().values())
    assert abs(float(w.at_zero) - float_or_dual_at_zero(n, target)) <= 1e-9
    assert univariate_orth(w.values) >= target


def test_or_dual_lift_orth():
    for n, target in [(4, 2), (6, 3), (7, 1)]:
        w = or_dual(n, target)
        lift = w.lift()
        assert lift.l1() == 1 and orth(lift) == w.orth
        assert lift[0] == w.at_zero


def test_or_dual_target_range():
    with pytest.raises(GadgetError):
        or_dual(3, 4)


def test_measured_decay_is_tight():
    pts = [(1, 0.5), (2, 0.1)]
    c = measured_decay(pts, lambda c, t: 1 / (c * t))
    assert c == pytest.approx(1.0)
    c = measured_decay([(1, 4.0)], lambda c, t: 1 / (c * t))
    assert c == pytest.approx(0.25, rel=1e-9)


@pytest.mark.parametrize("n", range(1, 11))
def test_corrector_closed_form(n):
    for D in range(n):
        a = corrector_levels(n, D)
        assert a == [(-1) ** (D - t + 1) * math.comb(n - t - 1, D - t) for t in range(D + 1)]


def test_corrector_small_cases():
    z = corrector(2, 1).measure
    assert [z[x] for x in range(4)] == [1, -1, -1, 1]
    assert corrector(3, 0).measure[0] == -1


@given(st.integers(2, 9), st.data())
def test_corrector_at_random_anchor(B, data):
    y = data.draw(st.integers(1, (1 << B) - 1))
    D = data.draw(st.integers(0, popcount(y) - 1))
    c = corrector_at(y, D, B)
    assert all(c.check().values())


def test_corrector_rejects_light_anchor():
    with pytest.raises(GadgetError):
        corrector_at(0b11, 2, 4)


def random_measure(n, data):
    return RationalMeasure(n, data.draw(st.dictionaries(st.integers(0, (1 << n) - 1), fracs, max_size=10)))


@given(st.integers(3, 7), st.data())
def test_truncation_contract_and_linearity(n, data):
    T = data.draw(st.integers(1, n))
    D = data.draw(st.integers(0, T))
    a, b = random_measure(n, data), random_measure(n, data)
    ta, tb, tab = truncate(a, T, D), truncate(b, T, D), truncate(a + b, T, D)
    assert tab.truncated == ta.truncated + tb.truncated
    for t in (ta, tb, tab):
        assert all(t.check().values())
        assert all(t.truncated[x] == t.original[x] for x in range(1 << n) if D < popcount(x) <= T)


def test_truncation_preserves_inner_products():
    phi = RationalMeasure(5, {31: 1, 15: -2, 3: Fraction(1, 2)})
    tr = truncate(phi, 3, 2)
    assert orth(tr.removed) > 2
    assert tr.heavy_mass == 3


@given(st.integers(2, 3), st.data())
def test_onesided_truncation(n, data):
    theta, k, D = 2, 1, data.draw(st.integers(0, 1))
    T = max(n + D, theta * k)
    phi = random_measure(n * theta, data)
    tr = truncate_onesided(phi, n, theta, k, T, D)
    assert all(tr.check().values())
    assert tr.truncated.block == phi.block


def test_onesided_corrector_contract():
    c = onesided_corrector(0b111011, 3, 2, 1, 4, 1)
    assert all(c.check().values())
    assert c.pivot_block == 0
    with pytest.raises(GadgetError):
        onesided_corrector(0b111011, 3, 1, 1, 4, 1)


def test_write_gadget(tmp_path):
    c = corrector(4, 2)
    write_gadget(c.measure, c.metadata(), tmp_path / "z.measure")
    assert read_measure(tmp_path / "z.measure") == c.measure
    meta = json.loads((tmp_path / "z.measure.json").read_text())
    assert meta["checks"]["orth_above_D"] is True
