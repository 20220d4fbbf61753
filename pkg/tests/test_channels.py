import numpy as np
import pytest

from spinsemi.channels import (
    FORMULAS,
    Channel,
    apply_choi,
    channel_pp_norm,
    channel_vertex_apply,
    choi_checks,
    choi_matrix,
    exact_identity_residuals,
    pp_norm_closed_form,
    vertex_labels,
)
from spinsemi.su2_rep import HalfInt, random_density_matrix, random_operator, wigner_rotation

PAIRS = [("1/2", "1/2"), (1, 2), ("1/2", 3), ("3/2", 1), (2, "5/2"), (1, 1)]


def all_vertices():
    for J, K in PAIRS:
        for M in vertex_labels(J, K):
            yield HalfInt.of(J), HalfInt.of(K), M


@pytest.mark.parametrize("J,K,M", list(all_vertices()))
def test_three_formulas_agree(J, K, M):
    rng = np.random.default_rng(J.twice * 31 + K.twice * 7 + M.twice)
    for _ in range(5):
        X = random_operator(J.dim, rng)
        outs = [channel_vertex_apply(J, K, M, X, f) for f in FORMULAS]
        assert np.abs(outs[0] - outs[1]).max() < 1e-12
        assert np.abs(outs[0] - outs[2]).max() < 1e-12


@pytest.mark.parametrize("J,K,M", list(all_vertices()))
def test_vertex_is_cptp_and_equivariant(J, K, M):
    rep = choi_checks(choi_matrix(J, K, M), J, K, vertex_M=M)
    assert rep.ok()
    assert rep.rank == M.dim


@pytest.mark.parametrize("J,K,M", list(all_vertices()))
def test_equivariance_direct(J, K, M):
    rng = np.random.default_rng(3)
    ch = Channel.vertex(J, K, M)
    rho = random_density_matrix(J.dim, rng)
    UJ, UK = wigner_rotation(J, 0.4, 2.1), wigner_rotation(K, 0.4, 2.1)
    lhs = ch(UJ @ rho @ UJ.conj().T)
    rhs = UK @ ch(rho) @ UK.conj().T
    assert np.abs(lhs - rhs).max() < 1e-12
    assert abs(np.trace(ch(rho)) - 1) < 1e-12


def test_identity_vertex():
    ch = Channel.vertex("1/2", "1/2", 0)
    rho = random_operator(2, np.random.default_rng(0))
    assert np.abs(ch(rho) - rho).max() < 1e-14


def test_trivial_input_gives_maximally_mixed():
    for K in (HalfInt.of("1/2"), HalfInt.of(2)):
        out = Channel.vertex(0, K, K)(np.ones((1, 1)))
        assert np.abs(out - np.eye(K.dim) / K.dim).max() < 1e-14


def test_choi_application_and_adjoint():
    J, K = HalfInt.of(1), HalfInt.of("3/2")
    rng = np.random.default_rng(5)
    w = dict(zip(vertex_labels(J, K), rng.dirichlet(np.ones(3))))
    ch = Channel.mixture(J, K, w)
    C = ch.choi()
    rho, sigma = random_operator(J.dim, rng), random_operator(K.dim, rng)
    assert np.abs(apply_choi(C, J, K, rho) - ch(rho)).max() < 1e-12
    # Tr(sigma^* Phi(rho)) = Tr(Phi^*(sigma)^* rho)
    lhs = np.trace(sigma.conj().T @ ch(rho))
    rhs = np.trace(ch.adjoint(sigma).conj().T @ rho)
    assert abs(lhs - rhs) < 1e-12
    # the adjoint is unital
    assert np.abs(ch.adjoint(np.eye(K.dim)) - np.eye(J.dim)).max() < 1e-12
    assert choi_checks(C, J, K).ok()


def test_i_labels_match_vertices():
    ch = Channel.from_i(1, 3, {HalfInt.of(-1): 0.25, HalfInt.of(1): 0.75})
    assert {str(M): w for M, w in ch.weights.items()} == {"2": 0.25, "4": 0.75}
    assert {str(i): w for i, w in ch.weights_i.items()} == {"-1": 0.25, "1": 0.75}


def test_validation():
    with pytest.raises(ValueError, match="triangle"):
        Channel.vertex("1/2", 1, 3)
    with pytest.raises(ValueError, match="sum to 1"):
        Channel.mixture(1, 1, {0: 0.5, 1: 0.2})
    with pytest.raises(ValueError, match="negative"):
        Channel.mixture(1, 1, {0: 1.5, 1: -0.5})
    with pytest.raises(ValueError):
        Channel.vertex(1, 1, 1)(np.eye(2))


@pytest.mark.parametrize("J,K", [(1, 2), ("1/2", 3), (2, 1), ("3/2", "3/2")])
def test_pp_norms(J, K):
    rng = np.random.default_rng(8)
    w = dict(zip(vertex_labels(J, K), rng.dirichlet(np.ones(len(vertex_labels(J, K))))))
    for p in (1, 2, np.inf):
        est = channel_pp_norm(J, K, w, p, rng, n_random=20)
        # the identity input attains the closed form and nothing beats it
        assert abs(est - pp_norm_closed_form(J, K, p)) < 1e-10


@pytest.mark.parametrize("J,K", [("1/2", 1), (1, 2), (1, "3/2"), (2, 5)])
def test_coherent_identities_with_opposite_index(J, K):
    r = exact_identity_residuals(J, K)
    assert r["top_vertex[-J]"] < 1e-10
    assert r["bottom_vertex[+J]"] < 1e-10
