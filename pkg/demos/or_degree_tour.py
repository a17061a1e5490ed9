"""Approximate degree of OR, its dual witnesses, and the gadgets built from them.

Run: python demos/or_degree_tour.py
"""
from fractions import Fraction

from adeglab.adeg import adeg, onedeg
from adeglab.duals import corrector, or_dual, truncate
from adeglab.hypercube import or_fn
from adeglab.poly import RationalMeasure, orth

print("n  deg_1/3  deg+_1/3  witness correlation")
for n in range(1, 11):
    two = adeg(or_fn(n), Fraction(1, 3))
    one = onedeg(or_fn(n), Fraction(1, 3))
    corr = two.witness_report.correlation if two.witness_report else "-"
    print(f"{n:<3}{two.degree:<9}{one.degree:<10}{corr}")

# the univariate dual used to build pseudodistributions
w = or_dual(9, 3)
print("\nomega on {0..9} with orth >= 3:", [str(v) for v in w.values])
print("omega(0) =", w.at_zero, " decay constant =", round(w.decay_constant(), 4))

# a corrector moves mass off 1^n without touching low-degree moments
z = corrector(5, 2)
print("\ncorrector(5, 2): l1 =", z.measure.l1(), "bound =", z.l1_bound, "orth =", orth(z.measure))

phi = RationalMeasure(5, {0b11111: 1, 0b01111: -1, 0b00011: Fraction(1, 2)})
tr = truncate(phi, T=3, D=2)
print("truncate to weight <= 3: removed l1 =", tr.removed.l1(), " checks:", tr.check())
