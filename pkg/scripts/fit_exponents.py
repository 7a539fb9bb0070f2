"""Fitted exponent of N(Dn, 0) lambda^(-Dn) against log(Dn) over sliding windows.

Usage: python scripts/fit_exponents.py [fixture] [n_max]
"""

import sys

from relgrowth.automaton import decompose
from relgrowth.counting import edge_weighting, relative_growth_sequence
from relgrowth.fixtures import load_fixture
from relgrowth.lattice import lattice_report
from relgrowth.series import asymptotic_fit

name = sys.argv[1] if len(sys.argv) > 1 else "f2"
n_max = int(sys.argv[2]) if len(sys.argv) > 2 else 200

a = load_fixture(name)
w = edge_weighting(a)
ca = decompose(a)
D = lattice_report(a, ca, w).D_lcm
rel, _ = relative_growth_sequence(a, w, n_max)
print(f"{name}: nu = {w.nu}, D = {D}, target slope {-w.nu / 2}")
lo = 20
while 2 * lo <= n_max:
    fit = asymptotic_fit(rel, ca.lam, D, (lo, 2 * lo))
    print(f"  [{lo:4d}, {2 * lo:4d}]  slope {fit.slope:+.5f}  constant {fit.constant:.5f}")
    lo *= 2
fit = asymptotic_fit(rel, ca.lam, D, (40, n_max))
print(f"  [  40, {n_max:4d}]  slope {fit.slope:+.5f}  constant {fit.constant:.5f}")
