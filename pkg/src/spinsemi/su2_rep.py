"""
Irreducible SU(2) representations: spin matrices, rotations, coherent
states, the beta-transpose, the ad-Casimir, Schatten norms and entropy.

Basis convention: index ``k = 0..2J`` holds the S_z eigenvector with
eigenvalue ``m = J - k`` (descending), so ``S_z = diag(J, J-1, ..., -J)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Union

import numpy as np

# eigenvalues below this are treated as zero in entropy evaluation
ENTROPY_CLIP = 1e-12
# tolerance on trace / positivity for density matrices
DENSITY_TOL = 1e-10

SpinLike = Union["HalfInt", int, float, Fraction, str]


@dataclass(frozen=True, order=True)
class HalfInt:
    """A half-integer stored exactly as twice its value."""

    twice: int

    @classmethod
    def of(cls, x: SpinLike) -> "HalfInt":
        if isinstance(x, HalfInt):
            return x
        if isinstance(x, str):
            x = Fraction(x)
        if isinstance(x, (int, np.integer)):
            return cls(2 * int(x))
        t = 2 * x
        tr = round(float(t))
        if abs(float(t) - tr) > 1e-9:
            raise ValueError(f"{x!r} is not a half-integer")
        return cls(int(tr))

    @property
    def value(self) -> float:
        return self.twice / 2

    @property
    def dim(self) -> int:
        """Dimension 2J+1 of the irrep with this label."""
        if self.twice < 0:
            raise ValueError("negative spin label has no representation")
        return self.twice + 1

    def __float__(self) -> float:
        return self.value

    def __add__(self, other):
        return HalfInt(self.twice + HalfInt.of(other).twice)

    def __sub__(self, other):
        return HalfInt(self.twice - HalfInt.of(other).twice)

    def __neg__(self):
        return HalfInt(-self.twice)

    def __str__(self) -> str:
        return str(self.twice // 2) if self.twice % 2 == 0 else f"{self.twice}/2"

    def __repr__(self) -> str:
        return f"HalfInt({self})"


def twice(x: SpinLike) -> int:
    return HalfInt.of(x).twice


def spin_dim(J: SpinLike) -> int:
    return HalfInt.of(J).dim


def magnetic_values(J: SpinLike) -> np.ndarray:
    """The S_z eigenvalues J, J-1, ..., -J in basis order."""
    tj = twice(J)
    return (tj - 2 * np.arange(tj + 1)) / 2


def basis_index(J: SpinLike, m: SpinLike) -> int:
    tj, tm = twice(J), twice(m)
    if abs(tm) > tj or (tj - tm) % 2:
        raise ValueError(f"m={HalfInt(tm)} is not a magnetic index of J={HalfInt(tj)}")
    return (tj - tm) // 2


class IrrepOps(NamedTuple):
    J: HalfInt
    Sz: np.ndarray
    Splus: np.ndarray
    Sminus: np.ndarray

    @property
    def Sx(self) -> np.ndarray:
        return (self.Splus + self.Sminus) / 2

    @property
    def Sy(self) -> np.ndarray:
        return (self.Splus - self.Sminus) / 2j

    def xyz(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.Sx, self.Sy, self.Sz.astype(complex)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def _spin_ops(tj: int) -> IrrepOps:
    m = (tj - 2 * np.arange(tj + 1)) / 2
    J = tj / 2
    Sz = np.diag(m)
    # S+ |m> = sqrt((J-m)(J+m+1)) |m+1>; |m+1> sits one index above |m>
    sp = np.sqrt((J - m[1:]) * (J + m[1:] + 1))
    Splus = np.diag(sp, k=1).astype(complex)
    Sminus = Splus.T.copy()
    return IrrepOps(HalfInt(tj), _readonly(Sz), _readonly(Splus), _readonly(Sminus))


def spin_operators(J: SpinLike) -> IrrepOps:
    """Spin matrices S_z, S_+, S_- of the spin-J irrep."""
    return _spin_ops(twice(J))


@lru_cache(maxsize=None)
def _sy_eig(tj: int) -> tuple[np.ndarray, np.ndarray]:
    lam, V = np.linalg.eigh(_spin_ops(tj).Sy)
    return _readonly(lam), _readonly(V)


def wigner_small_d(J: SpinLike, theta) -> np.ndarray:
    """exp(-i theta S_y); broadcasts over an array of angles (leading axes)."""
    lam, V = _sy_eig(twice(J))
    theta = np.asarray(theta, dtype=float)
    ph = np.exp(-1j * theta[..., None] * lam)
    return np.einsum("ak,...k,bk->...ab", V, ph, V.conj())


def wigner_rotation(J: SpinLike, phi: float, theta: float) -> np.ndarray:
    """R(phi, theta) = exp(-i phi S_z) exp(-i theta S_y)."""
    m = magnetic_values(J)
    return np.exp(-1j * phi * m)[:, None] * wigner_small_d(J, theta)


def rotation_matrix(phi: float, theta: float) -> np.ndarray:
    """The SO(3) matrix covered by :func:`wigner_rotation`."""
    cp, sp, ct, st = np.cos(phi), np.sin(phi), np.cos(theta), np.sin(theta)
    Rz = np.array([[cp, -sp, 0], [sp, cp, 0], [0, 0, 1]])
    Ry = np.array([[ct, 0, st], [0, 1, 0], [-st, 0, ct]])
    return Rz @ Ry


def sphere_angles(omega) -> tuple[np.ndarray, np.ndarray]:
    """(theta, phi) of unit vector(s) ``omega`` with shape (..., 3)."""
    omega = np.asarray(omega, dtype=float)
    theta = np.arccos(np.clip(omega[..., 2], -1.0, 1.0))
    phi = np.arctan2(omega[..., 1], omega[..., 0])
    return theta, phi


def coherent_vectors(J: SpinLike, theta, phi, i: SpinLike, gamma=None) -> np.ndarray:
    """Rows ``R(phi_p, theta_p) exp(-i gamma_p S_z)|i>`` for arrays of angles.

    ``gamma`` is the third Euler angle; it only multiplies each row by
    ``exp(-i gamma i)`` and is exposed to probe phase-convention dependence.
    """
    tj = twice(J)
    k = basis_index(J, i)
    lam, V = _sy_eig(tj)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    # column k of exp(-i theta S_y)
    col = (np.exp(-1j * theta[:, None] * lam) * V[k].conj()) @ V.T
    m = magnetic_values(J)
    out = np.exp(-1j * phi[:, None] * m) * col
    if gamma is not None:
        out = out * np.exp(-1j * np.asarray(gamma, dtype=float) * HalfInt.of(i).value)[:, None]
    return out


def coherent_vector(J: SpinLike, omega, i: SpinLike | None = None) -> np.ndarray:
    """Unit eigenvector of omega.S with eigenvalue i (default i = J)."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (3,) or abs(np.linalg.norm(omega) - 1) > 1e-12:
        raise ValueError("omega must be a unit 3-vector")
    if i is None:
        i = J
    theta, phi = sphere_angles(omega)
    return coherent_vectors(J, theta, phi, i)[0]


def _check_dim(rho: np.ndarray, J: SpinLike) -> np.ndarray:
    rho = np.asarray(rho)
    d = spin_dim(J)
    if rho.shape != (d, d):
        raise ValueError(f"operator of shape {rho.shape} does not act on H_J with dim {d}")
    return rho


@lru_cache(maxsize=None)
def _beta_matrix(tj: int) -> np.ndarray:
    # linear part W of U_J = W K: W|m> = (-1)^(J-m) |-m>
    d = tj + 1
    W = np.zeros((d, d))
    for k in range(d):
        # |m> at index k maps to |-m> at index d-1-k, sign (-1)^(J-m) = (-1)^k
        W[d - 1 - k, k] = (-1) ** k
    return _readonly(W)


def beta_transpose(rho, J: SpinLike) -> np.ndarray:
    """Transpose with respect to the invariant bilinear form: U rho^* U^{-1}."""
    rho = _check_dim(rho, J)
    W = _beta_matrix(twice(J))
    # U A U^{-1} = W conj(A) W^{-1} for linear A; W is real orthogonal
    return W @ rho.T @ W.T


def casimir_superop(rho, J: SpinLike) -> np.ndarray:
    """Ad-Casimir: sum over a of [S_a, [S_a, rho]]."""
    rho = _check_dim(rho, J)
    ops = spin_operators(J)
    Jv = HalfInt.of(J).value
    Sz, Sp, Sm = ops.Sz, ops.Splus, ops.Sminus
    return 2 * Jv * (Jv + 1) * rho - 2 * Sz @ rho @ Sz - Sp @ rho @ Sm - Sm @ rho @ Sp


def casimir_superop_commutators(rho, J: SpinLike) -> np.ndarray:
    """Same map as :func:`casimir_superop`, built from nested commutators."""
    rho = _check_dim(rho, J)
    out = np.zeros(rho.shape, dtype=complex)
    for S in spin_operators(J).xyz():
        c = S @ rho - rho @ S
        out += S @ c - c @ S
    return out


@lru_cache(maxsize=None)
def _casimir_matrix(tj: int) -> np.ndarray:
    d = tj + 1
    ops = _spin_ops(tj)
    Jv = tj / 2
    # row-major vec: vec(A X B) = (A kron B^T) vec(X)
    M = 2 * Jv * (Jv + 1) * np.eye(d * d) - 2 * np.kron(ops.Sz, ops.Sz)
    M = M - np.kron(ops.Splus, ops.Sminus.T) - np.kron(ops.Sminus, ops.Splus.T)
    return _readonly(M)


def casimir_matrix(J: SpinLike) -> np.ndarray:
    """Matrix of the ad-Casimir on row-major vectorised operators."""
    return _casimir_matrix(twice(J))


@lru_cache(maxsize=None)
def _casimir_eig(tj: int) -> tuple[np.ndarray, np.ndarray]:
    lam, V = np.linalg.eigh(_casimir_matrix(tj))
    # eigenvalues are l(l+1), l = 0..2J; snap the roundoff
    ell = np.rint((-1 + np.sqrt(1 + 4 * np.clip(lam, 0, None))) / 2)
    return _readonly(ell), _readonly(V)


def casimir_power(rho, J: SpinLike, s: float) -> np.ndarray:
    """Q^s rho by spectral calculus of the (PSD) ad-Casimir."""
    rho = _check_dim(rho, J)
    ell, V = _casimir_eig(twice(J))
    lam = ell * (ell + 1)
    w = np.where(lam > 0, lam, 0.0) ** s if s != 0 else np.ones_like(lam)
    v = V @ (w * (V.conj().T @ rho.reshape(-1)))
    return v.reshape(rho.shape)


def isotypic_projection(rho, J: SpinLike, ell: int) -> np.ndarray:
    """Component of rho in the spin-ell summand of B(H_J)."""
    rho = _check_dim(rho, J)
    ells, V = _casimir_eig(twice(J))
    sel = V[:, ells == ell]
    return (sel @ (sel.conj().T @ rho.reshape(-1))).reshape(rho.shape)


def schatten_norm(rho, p: float = 2) -> float:
    """Schatten p-norm from singular values; p = inf gives the operator norm."""
    if not p >= 1:
        raise ValueError("Schatten norm needs p >= 1")
    sv = np.linalg.svd(np.atleast_2d(rho), compute_uv=False)
    if np.isinf(p):
        return float(sv.max(initial=0.0))
    if p == 1:
        return float(sv.sum())
    if p == 2:
        return float(np.sqrt(np.sum(sv**2)))
    return float(np.sum(sv**p) ** (1 / p))


def von_neumann_entropy(rho, check: bool = True) -> float:
    """-Tr rho log rho in nats."""
    rho = np.asarray(rho)
    if check:
        if np.abs(rho - rho.conj().T).max(initial=0) > DENSITY_TOL:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(rho) - 1) > DENSITY_TOL:
            raise ValueError("density matrix must have unit trace")
    lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if check and lam.min(initial=0) < -DENSITY_TOL:
        raise ValueError("density matrix must be positive semidefinite")
    return entropy_of_spectrum(lam)


def entropy_of_spectrum(lam) -> float:
    lam = np.asarray(lam, dtype=float)
    lam = lam[lam > ENTROPY_CLIP]
    return float(-np.sum(lam * np.log(lam)))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Density matrix from a Ginibre draw (full rank unless ``rank`` given)."""
    r = dim if rank is None else rank
    G = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_operator(dim: int, rng: np.random.Generator) -> np.ndarray:
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
