"""Coherent-state quantization on the sphere and SU(2)-equivariant channels."""
from .su2_rep import HalfInt, spin_operators, wigner_rotation, coherent_vector, beta_transpose
from .su2_rep import casimir_superop, schatten_norm, von_neumann_entropy
from .clebsch import cg_table, embedding_isometry, projection
from .sphere import SphereFunction, SphereGrid, make_grid, synthesis, analysis

__version__ = "0.1.0"
