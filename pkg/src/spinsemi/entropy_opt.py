"""
Minimal output entropy of equivariant channels.

Entropy is concave and a channel is affine, so S_vN(Phi(rho)) is concave in
rho and its minimum over density matrices is attained at an extreme point, a
pure state. The search therefore runs on the unit sphere of H_J.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Mapping, Sequence

import numpy as np

from .channels import Channel, vertex_labels
from .su2_rep import (
    ENTROPY_CLIP,
    HalfInt,
    SpinLike,
    basis_index,
    coherent_vector,
    entropy_of_spectrum,
    haar_state,
    magnetic_values,
    spin_dim,
    von_neumann_entropy,
)


def n_workers() -> int:
    """Worker cap from SPINSEMI_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("SPINSEMI_THREADS", "1")))
    except ValueError:
        return 1


class EntropyObjective:
    """psi -> S_vN(Phi(|psi><psi|)) with its Riemannian gradient."""

    def __init__(self, channel: Channel):
        self.channel = channel
        dj, dk = channel.J.dim, channel.K.dim
        self.dj, self.dk = dj, dk
        self.C = channel.choi().reshape(dk, dj, dk, dj)

    def output(self, psi: np.ndarray) -> np.ndarray:
        return np.einsum("kalb,a,b->kl", self.C, psi, psi.conj())

    def value(self, psi: np.ndarray) -> float:
        lam = np.linalg.eigvalsh(self._herm(self.output(psi)))
        return entropy_of_spectrum(lam)

    @staticmethod
    def _herm(A):
        return (A + A.conj().T) / 2

    def value_and_gradient(self, psi: np.ndarray) -> tuple[float, np.ndarray]:
        """Entropy and the tangent gradient 2 (G psi - <psi, G psi> psi).

        G = Phi^*(-log sigma - 1). For a trace functional Tr phi(sigma) the
        divided-difference (Daleckii-Krein) derivative reduces to phi'(sigma),
        so no divided differences are needed here.
        """
        sigma = self._herm(self.output(psi))
        lam, U = np.linalg.eigh(sigma)
        S = entropy_of_spectrum(lam)
        dphi = -np.log(np.clip(lam, ENTROPY_CLIP, None)) - 1
        T = (U * dphi) @ U.conj().T
        G = np.einsum("kl,kalb->ab", T, self.C.conj())
        Gpsi = G @ psi
        return S, 2 * (Gpsi - np.vdot(psi, Gpsi).real * psi)


def _normalize(v):
    return v / np.linalg.norm(v)


@dataclass
class DescentResult:
    value: float
    state: np.ndarray
    trace: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0


def riemannian_descent(obj: EntropyObjective, psi0: np.ndarray, max_iter: int = 2000,
                       gtol: float = 1e-9, ftol: float = 1e-14) -> DescentResult:
    """Gradient descent on the sphere with Barzilai-Borwein steps and Armijo backtracking.

    Retraction is normalisation. Accepted steps never increase the objective.
    """
    psi = _normalize(np.asarray(psi0, dtype=complex))
    f, g = obj.value_and_gradient(psi)
    trace = [f]
    step = 0.5
    prev = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        gn2 = np.vdot(g, g).real
        if np.sqrt(gn2) < gtol:
            converged = True
            break
        if prev is not None:
            s, y = psi - prev[0], g - prev[1]
            sy = np.vdot(s, y).real
            if sy > 1e-16:
                step = min(max(np.vdot(s, s).real / sy, 1e-6), 1e3)
        t = step
        while True:
            cand = _normalize(psi - t * g)
            fc, gc = obj.value_and_gradient(cand)
            if fc <= f - 1e-4 * t * gn2 or t < 1e-14:
                break
            t *= 0.5
        if fc > f + 1e-12:
            converged = True
            break
        prev = (psi, g)
        small = f - fc < ftol * max(1.0, abs(f))
        psi, f, g = cand, fc, gc
        trace.append(f)
        if small and t < 1e-10:
            converged = True
            break
    else:
        converged = bool(np.sqrt(np.vdot(g, g).real) < 1e-6)
    return DescentResult(f, psi, trace, converged, it)


@dataclass
class MinEntropyResult:
    value: float
    state: np.ndarray
    trace_log: list
    converged: bool
    start: str


def _starts(J: HalfInt, restarts: int, seed: int) -> list[tuple[str, np.ndarray]]:
    d = J.dim
    starts = [(f"basis[{m:g}]", np.eye(d, dtype=complex)[k]) for k, m in enumerate(magnetic_values(J))]
    ss = np.random.SeedSequence(seed)
    n_haar = max(restarts - d, 1) if restarts > 0 else 0
    for k, child in enumerate(ss.spawn(n_haar)):
        starts.append((f"haar[{k}]", haar_state(d, np.random.default_rng(child))))
    return starts


def min_output_entropy(J: SpinLike, K: SpinLike, weights: Mapping, restarts: int = 32, seed: int = 0,
                       max_iter: int = 2000) -> MinEntropyResult:
    """Best pure-state output entropy over basis starts |m> and Haar-random starts.

    ``weights`` are keyed by the vertex label M.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    ch = Channel.mixture(J, K, weights)
    obj = EntropyObjective(ch)
    starts = _starts(ch.J, restarts, seed)
    run = lambda s: riemannian_descent(obj, s[1], max_iter=max_iter)  # noqa: E731
    if n_workers() > 1 and len(starts) > 1:
        with ThreadPoolExecutor(n_workers()) as ex:
            results = list(ex.map(run, starts))
    else:
        results = [run(s) for s in starts]
    k = int(np.argmin([r.value for r in results]))
    best = results[k]
    trace_log = [(name, r.value, r.iterations, r.converged) for (name, _), r in zip(starts, results)]
    return MinEntropyResult(best.value, best.state, trace_log, best.converged, starts[k][0])


def coherent_baseline(J: SpinLike, K: SpinLike, weights: Mapping, i: SpinLike, omega=None) -> float:
    """S_vN(Phi(|w;i><w;i|)), by default at the north pole."""
    ch = Channel.mixture(J, K, weights)
    J = ch.J
    if omega is None:
        psi = np.zeros(J.dim, dtype=complex)
        psi[basis_index(J, i)] = 1
    else:
        psi = coherent_vector(J, omega, i)
    rho = np.outer(psi, psi.conj())
    return von_neumann_entropy(ch(rho))


def best_coherent_baseline(J: SpinLike, K: SpinLike, weights: Mapping) -> tuple[float, HalfInt]:
    J = HalfInt.of(J)
    vals = [(coherent_baseline(J, K, weights, HalfInt(int(round(2 * m)))), HalfInt(int(round(2 * m))))
            for m in magnetic_values(J)]
    return min(vals, key=lambda t: t[0])


def simplex_grid(n_vertices: int, step: float) -> list[tuple[float, ...]]:
    """Points of the probability simplex with coordinates on a 1/step lattice."""
    n = round(1 / step)
    if abs(n * step - 1) > 1e-12:
        raise ValueError("step must divide 1")
    pts = []
    for c in iproduct(range(n + 1), repeat=n_vertices - 1):
        if sum(c) <= n:
            pts.append(tuple(x / n for x in c) + ((n - sum(c)) / n,))
    return pts


@dataclass(frozen=True)
class ScanRow:
    J: HalfInt
    K: HalfInt
    weights: tuple
    min_entropy: float
    coherent: float
    coherent_i: HalfInt
    gap: float
    flagged: bool
    converged: bool


def counterexample_scan(J: SpinLike, K_list: Sequence[SpinLike], step: float = 0.25, restarts: int = 8,
                        seed: int = 0, threshold: float = 1e-5, max_iter: int = 2000) -> list[ScanRow]:
    """Scan channels on a simplex grid for minimisers that beat every coherent state.

    ``gap`` = best coherent baseline - optimiser value; rows with gap > threshold
    are flagged.
    """
    J = HalfInt.of(J)
    rows = []
    for K in K_list:
        K = HalfInt.of(K)
        Ms = vertex_labels(J, K)
        for w in simplex_grid(len(Ms), step):
            weights = {M: lam for M, lam in zip(Ms, w) if lam > 0}
            res = min_output_entropy(J, K, weights, restarts, seed, max_iter)
            base, bi = best_coherent_baseline(J, K, weights)
            gap = base - res.value
            rows.append(ScanRow(J, K, tuple(zip(Ms, w)), res.value, base, bi, gap, gap > threshold, res.converged))
    return rows


def gradient_check(J: SpinLike, K: SpinLike, weights: Mapping, n: int = 10, h: float = 1e-5,
                   seed: int = 0) -> float:
    """Worst relative error of the Riemannian gradient against central differences."""
    obj = EntropyObjective(Channel.mixture(J, K, weights))
    rng = np.random.default_rng(seed)
    worst = 0.0
    d = spin_dim(J)
    for _ in range(n):
        psi = haar_state(d, rng)
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v -= np.vdot(psi, v) * psi
        v /= np.linalg.norm(v)
        _, g = obj.value_and_gradient(psi)
        exact = np.vdot(g, v).real
        fd = (obj.value(_normalize(psi + h * v)) - obj.value(_normalize(psi - h * v))) / (2 * h)
        worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-4))
    return worst
