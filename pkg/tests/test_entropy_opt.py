import numpy as np
import pytest

from spinsemi.channels import Channel
from spinsemi.entropy_opt import (
    EntropyObjective,
    best_coherent_baseline,
    coherent_baseline,
    counterexample_scan,
    gradient_check,
    min_output_entropy,
    riemannian_descent,
    simplex_grid,
)
from spinsemi.su2_rep import HalfInt, haar_state, von_neumann_entropy


def bottom(J, K):
    return {HalfInt.of(K) - HalfInt.of(J): 1.0}


@pytest.mark.parametrize("J,K", [("1/2", 1), (1, 2), (1, 3)])
def test_bottom_vertex_is_minimised_by_coherent_states(J, K):
    res = min_output_entropy(J, K, bottom(J, K), restarts=8, seed=0)
    base = coherent_baseline(J, K, bottom(J, K), HalfInt.of(J))
    assert abs(res.value - base) < 1e-7
    assert res.converged


@pytest.mark.parametrize("J,K", [("1/2", 1), (1, 2), ("3/2", 2)])
def test_gradient_matches_finite_differences(J, K):
    assert gradient_check(J, K, bottom(J, K)) < 1e-5
    mix = {HalfInt.of(K) - HalfInt.of(J): 0.5, HalfInt.of(K) + HalfInt.of(J): 0.5}
    assert gradient_check(J, K, mix, seed=3) < 1e-5


def test_descent_is_monotone_and_state_is_consistent():
    ch = Channel.mixture(1, 2, {HalfInt.of(1): 0.3, HalfInt.of(2): 0.3, HalfInt.of(3): 0.4})
    obj = EntropyObjective(ch)
    res = riemannian_descent(obj, haar_state(3, np.random.default_rng(0)))
    assert all(b <= a + 1e-12 for a, b in zip(res.trace, res.trace[1:]))
    assert abs(np.linalg.norm(res.state) - 1) < 1e-12
    rho = np.outer(res.state, res.state.conj())
    assert abs(von_neumann_entropy(ch(rho)) - res.value) < 1e-9


def test_trivial_input():
    res = min_output_entropy(0, 2, {HalfInt.of(2): 1.0}, restarts=1)
    assert abs(res.value - np.log(5)) < 1e-12


def test_identity_channel_has_zero_minimum():
    res = min_output_entropy(1, 1, {HalfInt.of(0): 1.0}, restarts=3)
    assert abs(res.value) < 1e-9


def test_coherent_baseline_is_rotation_invariant():
    w = {HalfInt.of(1): 0.4, HalfInt.of(2): 0.6}
    rng = np.random.default_rng(1)
    omega = rng.normal(size=3)
    omega /= np.linalg.norm(omega)
    for i in (HalfInt.of(1), HalfInt.of(0)):
        a = coherent_baseline(1, 2, w, i)
        b = coherent_baseline(1, 2, w, i, omega=omega)
        assert abs(a - b) < 1e-10


def test_optimiser_never_loses_to_coherent_states():
    w = {HalfInt.of("1/2"): 0.25, HalfInt.of("3/2"): 0.25, HalfInt.of("5/2"): 0.5}
    res = min_output_entropy(1, "3/2", w, restarts=6, seed=2)
    base, _ = best_coherent_baseline(1, "3/2", w)
    assert res.value <= base + 1e-9


def test_simplex_grid():
    pts = simplex_grid(3, 0.25)
    assert len(pts) == 15
    assert np.abs(np.sum(pts, axis=1) - 1).max() < 1e-15
    with pytest.raises(ValueError):
        simplex_grid(2, 0.3)


def test_scan_rows_for_spin_half():
    rows = counterexample_scan("1/2", [1], step=0.5, restarts=2)
    assert len(rows) == 3
    assert not any(r.flagged for r in rows)


def test_non_coherent_minimiser_at_spin_three_halves():
    # vertex M = 5/2 of J = 3/2 -> K = 2, that is i = 1/2
    w = {HalfInt.of("5/2"): 1.0}
    base, _ = best_coherent_baseline("3/2", 2, w)
    gaps = [base - min_output_entropy("3/2", 2, w, restarts=8, seed=s).value for s in (0, 1)]
    assert min(gaps) > 1e-5
    assert abs(gaps[0] - gaps[1]) < 1e-6


def test_restarts_validated():
    with pytest.raises(ValueError):
        min_output_entropy(1, 2, bottom(1, 2), restarts=0)
