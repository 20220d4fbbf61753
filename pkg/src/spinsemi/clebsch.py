"""Clebsch-Gordan coefficients and the equivariant embeddings H_M -> H_J (x) H_K."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .su2_rep import HalfInt, SpinLike, basis_index, spin_operators, twice


def check_triangle(J: SpinLike, K: SpinLike, M: SpinLike) -> tuple[int, int, int]:
    tj, tk, tm = twice(J), twice(K), twice(M)
    if min(tj, tk, tm) < 0:
        raise ValueError("spin labels must be non-negative")
    if not (abs(tk - tj) <= tm <= tk + tj) or (tj + tk - tm) % 2:
        raise ValueError(
            f"triangle rule violated: need |K-J| <= M <= K+J with J+K-M integer "
            f"(J={HalfInt(tj)}, K={HalfInt(tk)}, M={HalfInt(tm)})"
        )
    return tj, tk, tm


def admissible(J: SpinLike, K: SpinLike) -> list[HalfInt]:
    """Labels M = |K-J|, ..., K+J occurring in H_J (x) H_K."""
    tj, tk = twice(J), twice(K)
    return [HalfInt(t) for t in range(abs(tk - tj), tk + tj + 1, 2)]


def _top_row(tj: int, tk: int, tm: int) -> np.ndarray:
    """c_l = C^{M,M}_{J,M-K+l; K,K-l}, l = 0..J+K-M, from S_+ annihilation."""
    J, K, M = tj / 2, tk / 2, tm / 2
    n = (tj + tk - tm) // 2 + 1
    c = np.empty(n)
    c[0] = 1.0
    for l in range(n - 1):
        num = (J - M + K - l) * (J + M - K + l + 1)
        den = (l + 1) * (2 * K - l)
        c[l + 1] = -np.sqrt(num / den) * c[l]
    c /= np.linalg.norm(c)
    # C^{M,M}_{J,J;K,M-J} > 0 is the last entry (j = J)
    if c[-1] < 0:
        c = -c
    return c


@lru_cache(maxsize=None)
def _embedding(tj: int, tk: int, tm: int) -> np.ndarray:
    dj, dk, dm = tj + 1, tk + 1, tm + 1
    J, K, M = tj / 2, tk / 2, tm / 2
    iota = np.zeros((dj * dk, dm))
    c = _top_row(tj, tk, tm)
    for l, cl in enumerate(c):
        j = M - K + l
        a = basis_index(J, j)
        b = basis_index(K, K - l)
        iota[a * dk + b, 0] = cl
    Sm_j = spin_operators(J).Sminus.real
    Sm_k = spin_operators(K).Sminus.real
    lower = np.kron(Sm_j, np.eye(dk)) + np.kron(np.eye(dj), Sm_k)
    for col in range(1, dm):
        v = lower @ iota[:, col - 1]
        iota[:, col] = v / np.linalg.norm(v)
    iota.setflags(write=False)
    return iota


def embedding_isometry(J: SpinLike, K: SpinLike, M: SpinLike) -> np.ndarray:
    """Real (2J+1)(2K+1) x (2M+1) isometry; row index a*(2K+1) + b for |a>_J|b>_K."""
    return _embedding(*check_triangle(J, K, M))


def projection(J: SpinLike, K: SpinLike, M: SpinLike) -> np.ndarray:
    """Orthogonal projection P^M onto the spin-M summand of H_J (x) H_K."""
    iota = embedding_isometry(J, K, M)
    return iota @ iota.T


@dataclass(frozen=True)
class CGTable:
    J: HalfInt
    K: HalfInt
    M: HalfInt
    iota: np.ndarray

    def coefficient(self, m: SpinLike, j: SpinLike) -> float:
        """C^{M,m}_{J,j; K,m-j}; zero outside the allowed ranges."""
        tmm, tjj = twice(m), twice(j)
        tJ, tK, tM = self.J.twice, self.K.twice, self.M.twice
        tk = tmm - tjj
        if abs(tmm) > tM or abs(tjj) > tJ or abs(tk) > tK:
            return 0.0
        if (tM - tmm) % 2 or (tJ - tjj) % 2:
            return 0.0
        a = (tJ - tjj) // 2
        b = (tK - tk) // 2
        col = (tM - tmm) // 2
        return float(self.iota[a * (tK + 1) + b, col])

    def row(self, m: SpinLike) -> dict[HalfInt, float]:
        """Non-zero coefficients of the m-row keyed by j."""
        tmm = twice(m)
        out = {}
        for tjj in range(-self.J.twice, self.J.twice + 1, 2):
            c = self.coefficient(HalfInt(tmm), HalfInt(tjj))
            if c != 0.0:
                out[HalfInt(tjj)] = c
        return out


def cg_table(J: SpinLike, K: SpinLike, M: SpinLike) -> CGTable:
    tj, tk, tm = check_triangle(J, K, M)
    return CGTable(HalfInt(tj), HalfInt(tk), HalfInt(tm), _embedding(tj, tk, tm))


def clebsch_gordan(J, j, K, k, M, m) -> float:
    """<J j; K k | M m> in the standard (Condon-Shortley) phase."""
    if twice(j) + twice(k) != twice(m):
        return 0.0
    return cg_table(J, K, M).coefficient(m, j)


def cg_by_casimir(J: SpinLike, K: SpinLike, M: SpinLike) -> np.ndarray:
    """Highest-weight column of the embedding from diagonalising the total Casimir.

    Independent of the recursion in :func:`embedding_isometry`; the sign is
    fixed by the same positivity convention.
    """
    tj, tk, tm = check_triangle(J, K, M)
    dj, dk = tj + 1, tk + 1
    oj, ok = spin_operators(J), spin_operators(K)
    tot = [np.kron(a, np.eye(dk)) + np.kron(np.eye(dj), b) for a, b in zip(oj.xyz(), ok.xyz())]
    Mv = tm / 2
    casimir = sum(t @ t for t in tot)
    # restrict to the total-S_z = M sector, then pick the M(M+1) eigenvector
    sz = np.real(np.diag(tot[2]))
    idx = np.flatnonzero(np.abs(sz - Mv) < 1e-9)
    sub = casimir[np.ix_(idx, idx)]
    lam, V = np.linalg.eigh(sub)
    k = int(np.argmin(np.abs(lam - Mv * (Mv + 1))))
    v = np.zeros(dj * dk, dtype=complex)
    v[idx] = V[:, k]
    # fix the global phase: coefficient with j = J real positive
    a = 0
    b = basis_index(K, Mv - tj / 2)
    ref = v[a * dk + b]
    v = v * np.exp(-1j * np.angle(ref))
    return v.real


@dataclass(frozen=True)
class TailBoundReport:
    J: HalfInt
    K: HalfInt
    M: HalfInt
    eps: float
    c: np.ndarray
    geometric_ok: bool
    leading_ok: bool

    @property
    def ok(self) -> bool:
        return self.geometric_ok and self.leading_ok


def cg_tail_bound_check(J: SpinLike, K: SpinLike, M: SpinLike, slack: float = 1e-12) -> TailBoundReport:
    """Check |c_l|^2 <= eps^l |c_0|^2 and 0 <= 1 - |c_0|^2 <= eps."""
    tj, tk, tm = check_triangle(J, K, M)
    Jv, Kv, Mv = tj / 2, tk / 2, tm / 2
    eps = (Jv - Mv + Kv) * (Jv + Mv - Kv + 1) / (-Jv + Mv + Kv + 1)
    tab = cg_table(J, K, M)
    n = (tj + tk - tm) // 2 + 1
    c = np.array([tab.coefficient(M, Mv - Kv + l) for l in range(n)])
    c2 = c**2
    geometric = bool(np.all(c2 <= eps ** np.arange(n) * c2[0] + slack))
    gap = 1 - c2[0]
    leading = bool(-slack <= gap <= eps + slack)
    return TailBoundReport(HalfInt(tj), HalfInt(tk), HalfInt(tm), eps, c, geometric, leading)
