"""Compare the explicit low-discrepancy set with random sets of the same size.

At these moduli the explicit set is far from optimal: its R consecutive
shifts keep the first exponential sum close to |S|.

Run: python demos/lowdisc_vs_random.py
"""
import numpy as np

from adeglab.numtheory import ResidueMultiset, build_lowdisc_set, discrepancy, disc_shape

rng = np.random.default_rng(0)
print("M      t     branch      |S|  disc(S)  median random  shape")
for M, t in [(1000, 81), (1000, 625), (4096, 1296), (9973, 4096), (500, 600)]:
    low = build_lowdisc_set(M, t)
    s = low.multiset
    d = discrepancy(s)
    rand = [discrepancy(ResidueMultiset.of(M, rng.choice(M, size=len(s), replace=False))).value for _ in range(50)]
    print(f"{M:<7}{t:<6}{low.branch:<12}{len(s):<5}{d.value:<9.4f}{np.median(rand):<15.4f}{disc_shape(M, t):.3f}")
