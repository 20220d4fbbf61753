"""Equivariant channels between spin representations and their classical shadows.

A channel B(H_J) -> B(H_K) that commutes with rotations is a mixture of
vertex channels labelled by M, or equivalently by i = M - K. For large K a
vertex channel looks like "measure a coherent state of index -i, then prepare
the matching coherent state of spin K". This script checks the two extreme
vertices, where the picture is exact, and watches the error decay for an
interior vertex.
"""
import numpy as np

from spinsemi.channels import Channel, exact_identity_residuals
from spinsemi.semiclassics import channel_residuals, rate_fit
from spinsemi.su2_rep import HalfInt, random_density_matrix

print("Extreme vertices (matrix-unit basis, max residual)")
for J, K in (("1/2", 1), (1, 2), (2, 5)):
    r = exact_identity_residuals(J, K)
    print(f"  J={J}, K={K}")
    for key in sorted(r):
        print(f"    {key:<20} {r[key]:.2e}")
print("  The top vertex M = K+J pairs with index -J and the bottom vertex with +J.")

print("\nInterior vertex J = 1, i = 0: distance to Op_K Hus_J^0")
rng = np.random.default_rng(1)
rho = random_density_matrix(3, rng)
Ks = list(range(2, 21, 2))
errs = []
for K in Ks:
    rep = channel_residuals(1, K, rho, ps=(1.0,), i=0)
    errs.append(rep.lhs_op[1.0])
    print(f"  K = {K:>2}: {rep.lhs_op[1.0]:.4e}   bound {rep.rhs_op[1.0]:.4e}")
fit = rate_fit([2 * K + 1 for K in Ks], errs, discard=2)
print(f"  fitted exponent in 2K+1: {fit.slope:.3f}")

print("\nA channel is trace preserving and maps the identity to a multiple of the identity")
ch = Channel.mixture(1, 2, {HalfInt.of(1): 0.5, HalfInt.of(3): 0.5})
out = ch(np.eye(3) / 3)
print(f"  Phi(1/3) = {out[0, 0].real:.4f} * 1, trace {np.trace(out).real:.4f}")
