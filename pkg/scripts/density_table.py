"""Density r(n) = #(W_n with zero weight) / #W_n and its ratio under doubling n.

For r ~ c n^(-nu/2) the ratio r(2n)/r(n) tends to 2^(-nu/2): 1/2 for nu = 2
and about 0.707 for nu = 1.
"""

from fractions import Fraction

from relgrowth.counting import edge_weighting, relative_growth_sequence
from relgrowth.fixtures import load_fixture

for name in ("f2", "f2_nu1"):
    a = load_fixture(name)
    w = edge_weighting(a)
    rel, tot = relative_growth_sequence(a, w, 320)
    print(f"{name} (nu = {w.nu}, limit {2 ** (-w.nu / 2):.4f})")
    for n in (10, 20, 40, 80, 160):
        r1 = Fraction(rel[n], tot[n])
        r2 = Fraction(rel[2 * n], tot[2 * n])
        print(f"  r({2 * n:3d}) / r({n:3d}) = {float(r2 / r1):.6f}   r({n}) = {float(r1):.6g}")
