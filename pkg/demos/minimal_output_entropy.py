"""Which input states make an equivariant channel least noisy?

For the bottom vertex K - J the answer is a coherent state. This script
confirms that numerically and then shows a vertex channel with J = 3/2 where
the minimiser is not a coherent state of any index. For J = 1/2 and J = 1
every pure state is rotation-equivalent to a coherent state or to a
one-parameter family between coherent states, and no such example appears.
"""
import numpy as np

from spinsemi.entropy_opt import best_coherent_baseline, coherent_baseline, min_output_entropy
from spinsemi.su2_rep import HalfInt, spin_operators

print("Bottom vertex: optimiser against the coherent state |J>")
for J, K in (("1/2", 1), (1, 2), (1, 3)):
    w = {HalfInt.of(K) - HalfInt.of(J): 1.0}
    res = min_output_entropy(J, K, w, restarts=16, seed=0)
    base = coherent_baseline(J, K, w, HalfInt.of(J))
    print(f"  J={J}, K={K}: min {res.value:.10f}  coherent {base:.10f}")

print("\nJ = 3/2, K = 2, vertex M = 5/2")
w = {HalfInt.of("5/2"): 1.0}
res = min_output_entropy("3/2", 2, w, restarts=16, seed=0)
base, i = best_coherent_baseline("3/2", 2, w)
print(f"  optimiser {res.value:.6f}, best coherent {base:.6f} (index {i}), gap {base - res.value:.4f}")
S = spin_operators("3/2").xyz()
psi = res.state
spin = np.array([np.vdot(psi, s @ psi).real for s in S])
print(f"  <S> of the minimiser = {np.round(spin, 4)}, length {np.linalg.norm(spin):.4f}")
print("  A coherent state of index i has |<S>| = |i|; the minimiser matches none of 3/2, 1/2.")
