import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adeglab.amplifier import (
    AmplifierParams,
    ConstructionError,
    amplify,
    check_decoder,
    color_vector,
    composed_table,
    decoder,
    flatten_monotone,
    iteration_count,
    normalize_family,
    plan_iteration,
    plan_params,
    pseudodistributions,
    tuples_summing_to,
    vector_color,
)
from adeglab.coloring import random_coloring
from adeglab.hypercube import Dnf, dictator_fn, dnf_to_truth_table, popcount, random_dnf
from adeglab.poly import orth


@pytest.fixture(scope="module")
def toy_family():
    gamma = random_coloring(6, 2, 2, 6)
    fam = pseudodistributions(gamma, 4, 2, target=2)
    return gamma, fam, normalize_family(fam)


def test_color_vector_round_trip():
    for N in range(1, 5):
        for c in range(1, N + 2):
            assert vector_color(color_vector(c, N), N) == c
    with pytest.raises(ValueError):
        vector_color(0b11, 2)


@pytest.mark.parametrize("u,N,theta,count", [(0, 2, 2, 1), (0b1, 2, 2, 2), (0b11, 2, 2, 2), (0b111, 3, 2, 0), (0b11, 3, 3, 6)])
def test_tuples_summing_to(u, N, theta, count):
    vs = tuples_summing_to(u, N, theta)
    assert len(vs) == count == (math.perm(theta, popcount(u)) if popcount(u) <= theta else 0)
    for v in vs:
        acc = 0
        for x in v:
            assert popcount(x) <= 1 and not acc & x
            acc |= x
        assert acc == u


def test_pseudodistributions_recomputed(toy_family):
    gamma, fam, _ = toy_family
    assert all(fam.checks.values())
    k, m = 2, 4
    for i, p in fam.phi.items():
        cls = set(gamma.class_of(i))
        assert sum(v for x, v in p.items() if popcount(x) == k) == 1
        assert {x for x in p.support() if popcount(x) == k} == cls
        assert all(popcount(x) == k or popcount(x) >= m for x in p.support())
    assert orth(fam.phi[1] - fam.phi[2]) == 2


def test_normalized_family(toy_family):
    gamma, fam, lam = toy_family
    assert all(lam.checks.values())
    for i, l in lam.lam.items():
        assert l.total() == 1 and l.min_value() >= 0
    seen = set()
    for l in lam.lam.values():
        level = {x for x in l.support() if popcount(x) == 2}
        assert not seen & level
        seen |= level
    assert orth(lam.lam[1] - lam.lam[2]) == 2
    assert lam.beta == Fraction(1, 6)


def test_normalized_family_padding(toy_family):
    _, fam, _ = toy_family
    wide = normalize_family(fam, n=8)
    assert wide.n == 8 and wide.checks["trailing_bits_zero"]


def test_pseudodistributions_reject_bad_parameters():
    gamma = random_coloring(6, 2, 2, 6)
    with pytest.raises(ConstructionError):
        pseudodistributions(gamma, 2, 2)
    with pytest.raises(ConstructionError):
        pseudodistributions(gamma, 4, 3)


def test_decoder_semantics(toy_family):
    gamma, _, lam = toy_family
    dec = decoder(gamma, 2, 1, theta=2)
    assert all(check_decoder(dec, lam).values())
    H = dec.H_tables()[0]
    for x in range(1 << 12):
        assert H(x) == (dec.h[0].evaluate(x & 63) | dec.h[0].evaluate(x >> 6))
    for S in combinations(range(6), 2):
        z = sum(1 << i for i in S)
        assert dec.h_value(z) == color_vector(int(gamma.colors[list(gamma.subsets).index(z)]), 1)


def _params(**kw):
    base = dict(n=6, m=4, k=2, N=1, theta=2, D=2, T=8, eps=Fraction(2, 5), omega_target=2)
    base.update(kw)
    return AmplifierParams(**base)


def test_amplify_two_sided_toy():
    cert = amplify(dictator_fn(1), _params(), random_coloring(6, 2, 2, 6), cross_check=True, waive_hypotheses=True)
    assert cert.passed, [k for k, v in cert.checks.items() if not v]
    assert cert.certified_bound == 2 and not cert.short_circuit
    assert cert.measured["eps_prime"] == "1/15"


def test_amplify_enforces_hypotheses():
    with pytest.raises(ConstructionError, match="analytic"):
        amplify(dictator_fn(1), _params(), random_coloring(6, 2, 2, 6))


def test_amplify_one_sided_needs_false_at_all_ones():
    with pytest.raises(ConstructionError):
        amplify(dictator_fn(1), _params(T=8, D=1), random_coloring(6, 2, 2, 6), side="one", waive_hypotheses=True)


def test_params_json_round_trip():
    p = _params(beta=Fraction(1, 5))
    assert AmplifierParams.from_json(p.to_json()) == p


@given(st.integers(1, 4), st.integers(1, 2), st.integers(0, 10**6))
def test_flatten_matches_composition(terms, width, seed):
    gamma = random_coloring(6, 2, 3, 6)
    dec = decoder(gamma, 2, 2, theta=2)
    f = random_dnf(2, terms, width, np.random.default_rng(seed), monotone=True)
    flat = flatten_monotone(f, dec)
    assert flat.is_monotone and flat.width <= f.width * (dec.k + 1)
    assert dnf_to_truth_table(flat) == composed_table(dnf_to_truth_table(f), dec)


def test_flatten_absorption_is_minimal():
    dec = decoder(random_coloring(6, 2, 3, 6), 2, 2, theta=2)
    flat = flatten_monotone(Dnf.monotone(2, [[0, 1]]), dec)
    masks = [sum(1 << i for i in t.pos) for t in flat.terms]
    assert not any(a != b and a & b == a for a in masks for b in masks)
    assert flat.size == 96 and flat.width == 4


def test_plan_params_reference_point():
    p = plan_params(1, 1, 1, 100)
    assert (p.n, p.m, p.k, p.D, p.T, p.N) == (100, 3, 99, 6, 4414, 100)
    assert p.beta == Fraction(1, 882800)
    assert p.feasibility["n_half_m_k"] is False


def test_plan_params_monotone_in_theta():
    grid = [plan_params(0.5, 1, 1, th) for th in (4, 8, 16, 64, 256, 1024, 4096)]
    for a, b in zip(grid, grid[1:]):
        assert a.n <= b.n and a.N <= b.N and a.T <= b.T and a.m <= b.m
        assert a.beta >= b.beta


def test_iteration_count_exact():
    assert iteration_count(1) == 1
    for delta in (Fraction(1, 2), Fraction(2, 5), Fraction(1, 10), Fraction(1, 50)):
        K = iteration_count(delta)
        q = Fraction(2, 3)
        assert (1 - q**K) / (1 + q ** (K - 1)) > 1 - delta
        assert K == 1 or (1 - q ** (K - 1)) / (1 + q ** (K - 2)) <= 1 - delta
    with pytest.raises(ValueError):
        iteration_count(0)


def test_plan_iteration_reference():
    s = plan_iteration(1, 1, 1 << 16)
    assert s.K == 1 and s.T == (256, 16384) and all(s.chain_bound)
    assert plan_iteration(Fraction(2, 5), 1, 1 << 16).K == 4


@given(st.integers(16, 40), st.sampled_from([1, Fraction(1, 2), Fraction(2, 5), Fraction(1, 4)]), st.integers(1, 3))
def test_t_chain_bound(e, delta, Delta):
    n = 1 << e
    s = plan_iteration(delta, Delta, n)
    lg = e
    for i, T in enumerate(s.T):
        assert T * lg ** (2 * (s.K - i)) <= n
    assert all(isinstance(st_.eps, Fraction) for st_ in s.stages)
