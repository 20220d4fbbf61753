import numpy as np
import pytest

from spinsemi.su2_rep import (
    HalfInt,
    beta_transpose,
    casimir_power,
    casimir_superop,
    casimir_superop_commutators,
    coherent_vector,
    isotypic_projection,
    magnetic_values,
    random_density_matrix,
    random_operator,
    rotation_matrix,
    schatten_norm,
    spin_operators,
    von_neumann_entropy,
    wigner_rotation,
    wigner_small_d,
)

SPINS = [HalfInt(t) for t in range(0, 9)]


def test_halfint_parsing_and_arithmetic():
    assert HalfInt.of("3/2").twice == 3
    assert HalfInt.of(1.5) == HalfInt.of("3/2")
    assert HalfInt.of(2).dim == 5
    assert str(HalfInt.of(1) + HalfInt.of("1/2")) == "3/2"
    assert (-HalfInt.of("1/2")).twice == -1
    with pytest.raises(ValueError):
        HalfInt.of("1/3")
    with pytest.raises(ValueError):
        HalfInt.of(0.3)


def test_basis_order_is_descending_m():
    assert np.abs(magnetic_values(1) - np.array([1, 0, -1])).max() < 1e-15
    ops = spin_operators("3/2")
    assert np.abs(np.diag(ops.Sz) - np.array([1.5, 0.5, -0.5, -1.5])).max() < 1e-15


@pytest.mark.parametrize("J", SPINS)
def test_commutators_and_casimir(J):
    Sx, Sy, Sz = spin_operators(J).xyz()
    assert np.abs(Sx @ Sy - Sy @ Sx - 1j * Sz).max() < 1e-12
    assert np.abs(Sy @ Sz - Sz @ Sy - 1j * Sx).max() < 1e-12
    C = Sx @ Sx + Sy @ Sy + Sz @ Sz
    assert np.abs(C - J.value * (J.value + 1) * np.eye(J.dim)).max() < 1e-12


def test_small_d_closed_forms():
    t = 0.7
    half = np.array([[np.cos(t / 2), -np.sin(t / 2)], [np.sin(t / 2), np.cos(t / 2)]])
    assert np.abs(wigner_small_d("1/2", t) - half).max() < 1e-14
    # d^1_{1,1} = (1+cos)/2, d^1_{1,0} = -sin/sqrt2, d^1_{1,-1} = (1-cos)/2
    d1 = wigner_small_d(1, t)
    assert abs(d1[0, 0] - (1 + np.cos(t)) / 2) < 1e-14
    assert abs(d1[0, 1] + np.sin(t) / np.sqrt(2)) < 1e-14
    assert abs(d1[0, 2] - (1 - np.cos(t)) / 2) < 1e-14


@pytest.mark.parametrize("J", SPINS[1:])
def test_rotation_covers_so3(J):
    phi, theta = 1.1, 0.4
    U = wigner_rotation(J, phi, theta)
    assert np.abs(U @ U.conj().T - np.eye(J.dim)).max() < 1e-12
    S = spin_operators(J).xyz()
    R = rotation_matrix(phi, theta)
    # U S_z U^* = n.S with n the rotated north pole
    n = R[:, 2]
    assert np.abs(U @ S[2] @ U.conj().T - sum(n[a] * S[a] for a in range(3))).max() < 1e-12


@pytest.mark.parametrize("J", SPINS[1:])
def test_coherent_vectors_are_eigenvectors(J):
    rng = np.random.default_rng(3)
    omega = rng.normal(size=3)
    omega /= np.linalg.norm(omega)
    S = spin_operators(J).xyz()
    nS = sum(omega[a] * S[a] for a in range(3))
    for m in magnetic_values(J):
        i = HalfInt(int(round(2 * m)))
        v = coherent_vector(J, omega, i)
        assert abs(np.linalg.norm(v) - 1) < 1e-13
        assert np.abs(nS @ v - m * v).max() < 1e-12


@pytest.mark.parametrize("J", SPINS[1:])
def test_beta_transpose_properties(J):
    rng = np.random.default_rng(5)
    A, B = random_operator(J.dim, rng), random_operator(J.dim, rng)
    for S in spin_operators(J).xyz():
        assert np.abs(beta_transpose(S, J) + S).max() < 1e-12
    assert np.abs(beta_transpose(A @ B, J) - beta_transpose(B, J) @ beta_transpose(A, J)).max() < 1e-12
    assert np.abs(beta_transpose(beta_transpose(A, J), J) - A).max() < 1e-12
    # beta is unitary-similar to the ordinary transpose, so the spectrum is kept
    rho = random_density_matrix(J.dim, rng)
    lam = np.linalg.eigvalsh(rho)
    assert np.abs(np.linalg.eigvalsh(beta_transpose(rho, J)) - lam).max() < 1e-12


@pytest.mark.parametrize("J", SPINS[1:])
def test_casimir_superop(J):
    rng = np.random.default_rng(7)
    X = random_operator(J.dim, rng)
    assert np.abs(casimir_superop(X, J) - casimir_superop_commutators(X, J)).max() < 1e-10
    assert np.abs(casimir_power(X, J, 1.0) - casimir_superop(X, J)).max() < 1e-10
    parts = [isotypic_projection(X, J, l) for l in range(J.twice + 1)]
    assert np.abs(sum(parts) - X).max() < 1e-10
    for l, P in enumerate(parts):
        assert np.abs(casimir_superop(P, J) - l * (l + 1) * P).max() < 1e-9
    # constants are killed
    assert np.abs(casimir_superop(np.eye(J.dim), J)).max() < 1e-12


def test_schatten_and_entropy():
    rng = np.random.default_rng(11)
    X = random_operator(5, rng)
    s = np.linalg.svd(X, compute_uv=False)
    assert abs(schatten_norm(X, 1) - s.sum()) < 1e-12
    assert abs(schatten_norm(X, 2) - np.sqrt((s**2).sum())) < 1e-12
    assert abs(schatten_norm(X, np.inf) - s.max()) < 1e-12
    assert abs(schatten_norm(X, 3) - (s**3).sum() ** (1 / 3)) < 1e-12
    assert abs(von_neumann_entropy(np.eye(4) / 4) - np.log(4)) < 1e-14
    psi = np.zeros(3)
    psi[1] = 1
    assert abs(von_neumann_entropy(np.outer(psi, psi))) < 1e-14
    with pytest.raises(ValueError):
        von_neumann_entropy(np.diag([1.2, -0.2]))
