"""
SU(2)-equivariant channels B(H_J) -> B(H_K).

The vertices Phi^M, M = |K-J|, ..., K+J, are built three ways:

* ``projection``: (2J+1)/(2M+1) Tr_J[P^M (rho^beta (x) 1_K)], H_J leg first.
* ``embedding-up``: (2J+1)/(2K+1) q (rho (x) 1_M) iota with iota: H_K -> H_J (x) H_M.
* ``embedding-down``: Tr_M[iota rho q] with iota: H_J -> H_K (x) H_M, H_M leg second.

Choi matrices live on H_K (x) H_J^*, K leg first:
C[k a, k' a'] = Phi(|a><a'|)[k, k'].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .clebsch import admissible, check_triangle, embedding_isometry, projection
from .quantize import husimi, husimi_values, op_quantize
from .sphere import make_grid
from .su2_rep import (
    HalfInt,
    SpinLike,
    _check_dim,
    beta_transpose,
    random_density_matrix,
    random_operator,
    schatten_norm,
    spin_dim,
    twice,
    wigner_rotation,
)

FORMULAS = ("projection", "embedding-up", "embedding-down")


def _vertex_projection(tj: int, tk: int, tm: int, rho: np.ndarray) -> np.ndarray:
    dj, dk = tj + 1, tk + 1
    P = projection(HalfInt(tj), HalfInt(tk), HalfInt(tm)).reshape(dj, dk, dj, dk)
    rb = beta_transpose(rho, HalfInt(tj))
    return (dj / (tm + 1)) * np.einsum("abcd,ca->bd", P, rb)


def _vertex_up(tj: int, tk: int, tm: int, rho: np.ndarray) -> np.ndarray:
    dj, dk, dm = tj + 1, tk + 1, tm + 1
    iota = embedding_isometry(HalfInt(tj), HalfInt(tm), HalfInt(tk)).reshape(dj, dm, dk)
    return (dj / dk) * np.einsum("ack,ab,bcl->kl", iota.conj(), rho, iota)


def _vertex_down(tj: int, tk: int, tm: int, rho: np.ndarray) -> np.ndarray:
    dj, dk, dm = tj + 1, tk + 1, tm + 1
    iota = embedding_isometry(HalfInt(tk), HalfInt(tm), HalfInt(tj)).reshape(dk, dm, dj)
    return np.einsum("kca,ab,lcb->kl", iota, rho, iota.conj())


_IMPL = dict(zip(FORMULAS, (_vertex_projection, _vertex_up, _vertex_down)))


def channel_vertex_apply(J: SpinLike, K: SpinLike, M: SpinLike, rho, formula: str = "projection") -> np.ndarray:
    tj, tk, tm = check_triangle(J, K, M)
    rho = _check_dim(rho, HalfInt(tj))
    try:
        impl = _IMPL[formula]
    except KeyError:
        raise ValueError(f"formula must be one of {FORMULAS}") from None
    return impl(tj, tk, tm, rho.astype(complex))


def _validate_weights(J: SpinLike, K: SpinLike, weights: Mapping, tol: float = 1e-12) -> dict[HalfInt, float]:
    allowed = set(admissible(J, K))
    out = {}
    for M, lam in weights.items():
        M = HalfInt.of(M)
        lam = float(lam)
        if M not in allowed:
            check_triangle(J, K, M)
        if lam < -tol:
            raise ValueError(f"negative weight {lam} on vertex M={M}")
        if lam > 0:
            out[M] = out.get(M, 0.0) + lam
    total = sum(out.values())
    if abs(total - 1) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {total}")
    return out


@dataclass(frozen=True)
class Channel:
    """Convex combination sum_M lambda_M Phi^M of vertex channels."""

    J: HalfInt
    K: HalfInt
    weights: dict = field(hash=False)

    @classmethod
    def vertex(cls, J: SpinLike, K: SpinLike, M: SpinLike) -> "Channel":
        check_triangle(J, K, M)
        return cls(HalfInt.of(J), HalfInt.of(K), {HalfInt.of(M): 1.0})

    @classmethod
    def mixture(cls, J: SpinLike, K: SpinLike, weights: Mapping) -> "Channel":
        return cls(HalfInt.of(J), HalfInt.of(K), _validate_weights(J, K, weights))

    @classmethod
    def from_i(cls, J: SpinLike, K: SpinLike, weights_i: Mapping) -> "Channel":
        """Weights keyed by i with M = K + i."""
        K = HalfInt.of(K)
        return cls.mixture(J, K, {K + HalfInt.of(i): lam for i, lam in weights_i.items()})

    @property
    def weights_i(self) -> dict[HalfInt, float]:
        return {M - self.K: lam for M, lam in self.weights.items()}

    def __call__(self, rho, formula: str = "projection") -> np.ndarray:
        out = np.zeros((self.K.dim, self.K.dim), dtype=complex)
        for M, lam in self.weights.items():
            out += lam * channel_vertex_apply(self.J, self.K, M, rho, formula)
        return out

    def adjoint(self, sigma) -> np.ndarray:
        return adjoint_from_choi(self.choi(), self.J, self.K, sigma)

    def choi(self) -> np.ndarray:
        return sum(lam * choi_matrix(self.J, self.K, M) for M, lam in self.weights.items())


def channel_mix(J: SpinLike, K: SpinLike, weights: Mapping, rho, formula: str = "projection") -> np.ndarray:
    return Channel.mixture(J, K, weights)(rho, formula)


def vertex_labels(J: SpinLike, K: SpinLike) -> list[HalfInt]:
    return admissible(J, K)


def choi_matrix(J: SpinLike, K: SpinLike, M: SpinLike) -> np.ndarray:
    tj, tk, tm = check_triangle(J, K, M)
    dj, dk = tj + 1, tk + 1
    C = np.zeros((dk, dj, dk, dj), dtype=complex)
    for a in range(dj):
        for b in range(dj):
            E = np.zeros((dj, dj))
            E[a, b] = 1.0
            C[:, a, :, b] = _vertex_projection(tj, tk, tm, E)
    return C.reshape(dk * dj, dk * dj)


def apply_choi(C: np.ndarray, J: SpinLike, K: SpinLike, rho) -> np.ndarray:
    """Phi(rho) = Tr_{H_J^*}[C (1 (x) rho^t)]."""
    dj, dk = spin_dim(J), spin_dim(K)
    rho = _check_dim(rho, J)
    return np.einsum("kalb,ab->kl", C.reshape(dk, dj, dk, dj), rho)


def adjoint_from_choi(C: np.ndarray, J: SpinLike, K: SpinLike, sigma) -> np.ndarray:
    """Phi^*(sigma) for the Hilbert-Schmidt pairing Tr[sigma^dag Phi(rho)]."""
    dj, dk = spin_dim(J), spin_dim(K)
    sigma = _check_dim(sigma, K)
    return np.einsum("kl,kalb->ab", sigma, C.reshape(dk, dj, dk, dj).conj())


def channel_adjoint(J: SpinLike, K: SpinLike, M: SpinLike, sigma) -> np.ndarray:
    return adjoint_from_choi(choi_matrix(J, K, M), J, K, sigma)


@dataclass(frozen=True)
class ChoiReport:
    min_eig: float
    trace: float
    partial_trace_err: float
    equivariance_err: float
    projection_err: float | None
    rank: int

    def ok(self, tol: float = 1e-10) -> bool:
        checks = [self.min_eig >= -1e-11, self.partial_trace_err <= tol, self.equivariance_err <= tol]
        if self.projection_err is not None:
            checks.append(self.projection_err <= tol)
        return all(checks)


def choi_checks(C: np.ndarray, J: SpinLike, K: SpinLike, vertex_M: SpinLike | None = None,
                rng: np.random.Generator | None = None, n_rot: int = 3) -> ChoiReport:
    """Complete positivity, trace preservation and equivariance of a Choi matrix.

    Equivariance is tested as [C, R_K (x) conj(R_J)] = 0 for random rotations.
    When ``vertex_M`` is given, C / ||C||_inf is also checked to be a rank
    2M+1 projection.
    """
    rng = rng or np.random.default_rng(0)
    dj, dk = spin_dim(J), spin_dim(K)
    H = (C + C.conj().T) / 2
    lam = np.linalg.eigvalsh(H)
    pt = np.einsum("kakb->ab", C.reshape(dk, dj, dk, dj))
    eq = 0.0
    for _ in range(n_rot):
        phi, theta = rng.uniform(0, 2 * np.pi), rng.uniform(0, np.pi)
        U = np.kron(wigner_rotation(K, phi, theta), wigner_rotation(J, phi, theta).conj())
        eq = max(eq, np.abs(U @ C - C @ U).max())
    rank = int(np.sum(lam > 1e-9 * max(lam.max(), 1e-300)))
    perr = None
    if vertex_M is not None:
        Pn = H / lam.max()
        perr = float(max(np.abs(Pn @ Pn - Pn).max(), abs(rank - spin_dim(vertex_M))))
    return ChoiReport(float(lam.min()), float(np.trace(C).real), float(np.abs(pt - np.eye(dj)).max()),
                      float(eq), perr, rank)


def pp_norm_closed_form(J: SpinLike, K: SpinLike, p: float) -> float:
    r = spin_dim(J) / spin_dim(K)
    return r if np.isinf(p) else r ** (1 - 1 / p)


def channel_pp_norm(J: SpinLike, K: SpinLike, weights: Mapping, p: float,
                    rng: np.random.Generator | None = None, n_random: int = 50) -> float:
    """Lower estimate of ||Phi||_{p->p} by maximising over structured and random inputs."""
    if not (p in (1, 2) or np.isinf(p)):
        raise ValueError("p must be 1, 2 or inf")
    rng = rng or np.random.default_rng(0)
    ch = Channel.mixture(J, K, weights)
    d = spin_dim(J)
    cands = [np.eye(d)]
    for a in range(d):
        E = np.zeros((d, d))
        E[a, a] = 1
        cands.append(E)
    for _ in range(n_random):
        cands.append(random_density_matrix(d, rng))
        X = random_operator(d, rng)
        cands.append(X + X.conj().T)
        cands.append(X)
    return max(schatten_norm(ch(x), p) / schatten_norm(x, p) for x in cands)


# -- comparison with the quantization maps -------------------------------------

def op_hus(J: SpinLike, K: SpinLike, rho, i: SpinLike) -> np.ndarray:
    """Op_K(Hus_J^i(rho))."""
    return op_quantize(K, husimi(J, rho, i=i))


def hus_of_channel_values(ch: Channel, rho, grid) -> np.ndarray:
    """Grid values of Hus_K(Phi(rho))."""
    return husimi_values(ch.K, ch(rho), grid)


def _basis(d: int):
    for a in range(d):
        for b in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[a, b] = 1
            yield E


def exact_identity_residuals(J: SpinLike, K: SpinLike) -> dict[str, float]:
    """Residuals over the matrix-unit basis of B(H_J) for the two coherent-state identities.

    With c = (2J+1)/(2K+1):

    * ``top_vertex[i]`` : max ||Phi^{K+J}(E) - c Op_K Hus_J^i(E)||
    * ``bottom_vertex[i]`` : max ||Hus_K Phi^{K-J}(E) - c Hus_J^i(E)||_inf on a grid

    each for i = +J and i = -J.
    """
    J, K = HalfInt.of(J), HalfInt.of(K)
    if K < J:
        raise ValueError("the bottom vertex K-J needs K >= J")
    c = J.dim / K.dim
    top = Channel.vertex(J, K, K + J)
    bottom = Channel.vertex(J, K, K - J)
    grid = make_grid(2 * (J.twice + K.twice))
    out = {}
    for sign, label in ((1, "+J"), (-1, "-J")):
        i = J if sign > 0 else -J
        r_top = r_bot = 0.0
        for E in _basis(J.dim):
            r_top = max(r_top, np.abs(top(E) - c * op_hus(J, K, E, i)).max())
            lhs = hus_of_channel_values(bottom, E, grid)
            r_bot = max(r_bot, np.abs(lhs - c * husimi_values(J, E, grid, i)).max())
        out[f"top_vertex[{label}]"] = float(r_top)
        out[f"bottom_vertex[{label}]"] = float(r_bot)
    return out
