"""Walk through the amplification pipeline on a six-bit toy instance.

The analytic size hypotheses cannot hold at this scale, so they are waived;
every structural property is still checked exactly.

Run: python demos/amplify_toy.py
"""
from fractions import Fraction

from adeglab.amplifier import (
    AmplifierParams,
    amplify,
    decoder,
    flatten_monotone,
    normalize_family,
    pseudodistributions,
)
from adeglab.coloring import random_coloring
from adeglab.hypercube import Dnf, dictator_fn

gamma = random_coloring(6, 2, 2, seed=6)
print("class sizes of the 2-coloring of 2-subsets of [6]:", gamma.class_sizes())

fam = pseudodistributions(gamma, m=4, k=2, target=2)
lam = normalize_family(fam)
print("pseudodistribution checks:", fam.checks)
print("beta =", lam.beta, " orth(lambda_1 - lambda_2) =", lam.measured["orth_min"])

params = AmplifierParams(n=6, m=4, k=2, N=1, theta=2, D=2, T=8, eps=Fraction(2, 5), omega_target=2)
cert = amplify(dictator_fn(1), params, gamma, cross_check=True, waive_hypotheses=True)
print("\ncertified degree bound:", cert.certified_bound, " at eps' =", cert.measured["eps_prime"])
print("failed checks:", [k for k, v in cert.checks.items() if not v] or "none")
print("direct LP error at degree bound-1:", cert.measured["cross_check_best_error"])

# f o H stays a monotone DNF of bounded width
gamma3 = random_coloring(6, 2, 3, seed=6)
dec = decoder(gamma3, 2, 2, theta=2)
flat = flatten_monotone(Dnf.monotone(2, [[0, 1]]), dec)
print(f"\nAND_2 o H as a monotone DNF: {flat.size} terms of width {flat.width}")
