"""How close is Hus_J Op_J to the identity?

Both maps are diagonal on spherical harmonics, so the composition is fixed by
one number per degree l. This script prints those numbers, shows that they
tend to 1 as the spin grows, and compares the defect 1 - b_l with the
first-order guess l(l+1)/(2J+1).
"""
import numpy as np

from spinsemi.quantize import berezin_eigenvalues, berezin_inversion_check
from spinsemi.sphere import random_band_function
from spinsemi.su2_rep import HalfInt

print("Berezin eigenvalues b_l for small spins")
for t in range(1, 7):
    J = HalfInt(t)
    print(f"  J = {str(J):>3}:", " ".join(f"{b:.4f}" for b in berezin_eigenvalues(J)))

print("\nDefect 1 - b_l against l(l+1)/(2J+1) for l = 3")
for J in (5, 10, 20, 40, 80):
    b = berezin_eigenvalues(J)[3]
    print(f"  J = {J:>3}: defect {1 - b:.3e}   guess {12 / (2 * J + 1):.3e}   ratio {(1 - b) * (2 * J + 1) / 12:.4f}")

print("\nInversion bounds on a random band-6 function (lhs <= rhs)")
rng = np.random.default_rng(0)
f = random_band_function(6, rng)
for J in (2, 6, 12):
    rep = berezin_inversion_check(J, f, 0.5)
    lhs, rhs = rep.bounds["f2"]
    print(f"  J = {J:>2}: ||(1 - Hus Op) f|| = {lhs:.3e} <= {rhs:.3e}")
