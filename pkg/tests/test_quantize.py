from math import factorial

import numpy as np
import pytest

from spinsemi.quantize import (
    berezin_eigenvalues,
    berezin_inversion_check,
    berezin_matrix,
    berezin_spectrum,
    husimi,
    husimi_offdiag,
    husimi_values,
    op_quantize,
    op_wigner_eckart,
    stratonovich_weyl,
    upper_symbol,
)
from spinsemi.sphere import SphereFunction, make_grid, omega_component, random_band_function, synthesis
from spinsemi.su2_rep import HalfInt, magnetic_values, random_density_matrix, random_operator, spin_operators

SPINS = [HalfInt(t) for t in range(1, 9)]


def factorial_formula(J, ell):
    tj = HalfInt.of(J).twice
    return factorial(tj) * factorial(tj + 1) / (factorial(tj + ell + 1) * factorial(tj - ell))


def indices(J):
    return [HalfInt(int(round(2 * m))) for m in magnetic_values(J)]


@pytest.mark.parametrize("J", SPINS)
def test_berezin_eigenvalues_factorial(J):
    b = berezin_eigenvalues(J)
    ref = np.array([factorial_formula(J, l) for l in range(J.twice + 1)])
    assert np.abs(b - ref).max() < 1e-14
    B = berezin_spectrum(J)
    assert B(J.twice + 1) == 0
    assert abs(B(1) - J.value / (J.value + 1)) < 1e-14


def test_spectrum_spin_one():
    assert np.abs(berezin_eigenvalues(1) - np.array([1, 0.5, 0.1])).max() < 1e-15


@pytest.mark.parametrize("J", SPINS[:5])
def test_berezin_matrix_eigenvalues(J):
    lam = np.sort(np.linalg.eigvals(berezin_matrix(J)).real)
    ref = np.sort(np.concatenate([[factorial_formula(J, l)] * (2 * l + 1) for l in range(J.twice + 1)]))
    assert np.abs(lam - ref).max() < 1e-12


@pytest.mark.parametrize("J", SPINS)
def test_quantize_constants_and_coordinates(J):
    Sz = spin_operators(J).Sz
    assert np.abs(op_quantize(J, SphereFunction.constant(1.0)) - np.eye(J.dim)).max() < 1e-12
    z = omega_component("z")
    grid = make_grid(2 * J.twice + 4)
    pz = grid.points[:, 2]
    Jv = J.value
    for i in indices(J):
        assert np.abs(op_quantize(J, z, i=i) - i.value / (Jv * (Jv + 1)) * Sz).max() < 1e-12
        assert np.abs(husimi_values(J, Sz, grid, i) - i.value * pz).max() < 1e-12
        assert np.abs(husimi_values(J, np.eye(J.dim), grid, i) - 1).max() < 1e-12


@pytest.mark.parametrize("J", SPINS)
def test_wigner_eckart_oracle(J):
    rng = np.random.default_rng(J.twice)
    f = random_band_function(min(J.twice + 2, 8), rng, real=False)
    assert np.abs(op_quantize(J, f) - op_wigner_eckart(J, f)).max() < 1e-11


@pytest.mark.parametrize("J", SPINS[:5])
def test_adjointness(J):
    rng = np.random.default_rng(10 + J.twice)
    rho = random_operator(J.dim, rng)
    f = random_band_function(J.twice, rng, real=False)
    grid = make_grid(4 * J.twice + 2)
    lhs = np.trace(rho.conj().T @ op_quantize(J, f))
    rhs = J.dim * grid.integrate(husimi_values(J, rho, grid).conj() * synthesis(f, grid))
    assert abs(lhs - rhs) < 1e-11


@pytest.mark.parametrize("J", SPINS[:5])
def test_positivity(J):
    rng = np.random.default_rng(20 + J.twice)
    f = random_band_function(3, rng)
    f = f * f  # non-negative
    assert np.linalg.eigvalsh(op_quantize(J, f)).min() > -1e-12
    rho = random_density_matrix(J.dim, rng)
    assert husimi_values(J, rho, make_grid(30)).real.min() > -1e-12


def test_husimi_band_and_errors():
    rho = random_density_matrix(3, np.random.default_rng(0))
    h = husimi(1, rho)
    assert h.Lmax == 2
    with pytest.raises(ValueError):
        husimi(1, rho, Lout=1)
    with pytest.raises(ValueError):
        op_quantize(2, random_band_function(3, np.random.default_rng(1)), grid=make_grid(4))
    with pytest.raises(ValueError):
        op_quantize(1, SphereFunction.constant(1.0), i=HalfInt.of("1/2"))


def test_offdiagonal_husimi_reduces_to_diagonal():
    J = HalfInt.of("3/2")
    rho = random_operator(J.dim, np.random.default_rng(4))
    grid = make_grid(10)
    for i in indices(J):
        assert np.abs(husimi_offdiag(J, i, i, rho, grid) - husimi_values(J, rho, grid, i)).max() < 1e-12


@pytest.mark.parametrize("J", SPINS[:6])
def test_upper_symbol_inverts_quantization(J):
    rho = random_operator(J.dim, np.random.default_rng(5))
    assert np.abs(op_quantize(J, upper_symbol(J, rho)) - rho).max() < 1e-10


def test_inversion_examples():
    J = HalfInt.of(2)
    rep = berezin_inversion_check(J, SphereFunction.constant(1.0), 0.5)
    assert all(abs(lhs) < 1e-13 for lhs, _ in rep.bounds.values())
    Y = SphereFunction.harmonic(1, 0)
    rep = berezin_inversion_check(J, Y, 1.0)
    lhs, rhs = rep.bounds["f2"]
    assert abs(lhs - 1 / (J.value + 1)) < 1e-13
    assert abs(rhs - 2 / J.dim) < 1e-13
    assert lhs < rhs


@pytest.mark.parametrize("J", [HalfInt(t) for t in (1, 2, 5, 10, 20)])
def test_inversion_bounds_hold(J):
    rng = np.random.default_rng(30 + J.twice)
    for s in (0.0, 0.5, 1.0):
        rep = berezin_inversion_check(J, random_band_function(6, rng), s, random_density_matrix(J.dim, rng))
        assert rep.violations() == []
        assert max(rep.measured_C.values()) <= 1.0


def test_berezin_monotone_in_J():
    prev = berezin_eigenvalues("1/2")
    for t in range(2, 16):
        cur = berezin_eigenvalues(HalfInt(t))
        assert np.all(cur[: len(prev)] >= prev * (1 - 1e-12))
        prev = cur


@pytest.mark.parametrize("J", SPINS[:5])
def test_stratonovich_weyl(J):
    sw = stratonovich_weyl(J)
    rng = np.random.default_rng(40 + J.twice)
    r1, r2 = random_operator(J.dim, rng), random_operator(J.dim, rng)
    s1, s2 = sw.symbol(r1), sw.symbol(r2)
    lhs = np.trace(r1.conj().T @ r2) / J.dim
    assert abs(lhs - np.vdot(s1.coeffs, s2.coeffs)) < 1e-10
    one = sw.symbol(np.eye(J.dim))
    assert abs(one.coeff(0, 0) - 1) < 1e-12
    assert np.abs(one.coeffs[1:]).max() < 1e-12
    assert np.abs(sw.quantize(s1) - r1).max() < 1e-10
