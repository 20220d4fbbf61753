"""
Coherent-state quantization Op_J^i, Husimi functions Hus_J^i, the Berezin
transform and the Stratonovich-Weyl pair built from them.

    Op_J^i(f) = (2J+1) * integral of f(w) |w;i><w;i| dw
    Hus_J^i(rho)(w) = <w;i| rho |w;i>

Integrals are evaluated with the Gauss-Legendre product grid, which is exact
because coherent-state matrix elements are spherical polynomials of degree 2J.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .clebsch import cg_table
from .su2_rep import (
    HalfInt,
    SpinLike,
    _check_dim,
    casimir_power,
    coherent_vectors,
    isotypic_projection,
    schatten_norm,
    spin_dim,
    twice,
)
from .sphere import (
    SphereFunction,
    SphereGrid,
    _grid,
    analysis,
    degrees,
    fractional_laplacian,
    lm_index,
    lp_norm,
    make_grid,
    synthesis,
    synthesis_matrix,
)


def _index(J: SpinLike, i: SpinLike | None) -> int:
    tj = twice(J)
    ti = tj if i is None else twice(i)
    if abs(ti) > tj or (tj - ti) % 2:
        raise ValueError(f"index i={HalfInt(ti)} not allowed for J={HalfInt(tj)}")
    return ti


@lru_cache(maxsize=64)
def _grid_vectors(tj: int, ti: int, n_theta: int, n_phi: int) -> np.ndarray:
    g = _grid(n_theta, n_phi)
    V = coherent_vectors(HalfInt(tj), g.theta, g.phi, HalfInt(ti))
    V.setflags(write=False)
    return V


def grid_vectors(J: SpinLike, i: SpinLike | None, grid: SphereGrid) -> np.ndarray:
    """Coherent vectors |w;i> at every grid node, shape (npts, 2J+1)."""
    return _grid_vectors(twice(J), _index(J, i), grid.n_theta, grid.n_phi)


def op_quantize(J: SpinLike, f: SphereFunction, i: SpinLike | None = None, grid: SphereGrid | None = None) -> np.ndarray:
    """Op_J^i(f); i defaults to J."""
    need = twice(J) + f.Lmax
    grid = make_grid(need) if grid is None else grid
    if grid.degree_exact < need:
        raise ValueError(f"quantization needs grid degree >= 2J + Lmax = {need}, got {grid.degree_exact}")
    V = grid_vectors(J, i, grid)
    c = spin_dim(J) * grid.weights * synthesis(f, grid)
    return (V.T * c) @ V.conj()


def husimi_values(J: SpinLike, rho, grid: SphereGrid, i: SpinLike | None = None) -> np.ndarray:
    rho = _check_dim(rho, J)
    V = grid_vectors(J, i, grid)
    return np.einsum("pa,ab,pb->p", V.conj(), rho, V)


def husimi(J: SpinLike, rho, i: SpinLike | None = None, Lout: int | None = None) -> SphereFunction:
    """Hus_J^i(rho) as a band-Lout function (default Lout = 2J, its exact band)."""
    tj = twice(J)
    Lout = tj if Lout is None else Lout
    if Lout < tj:
        raise ValueError(f"Husimi functions have band 2J = {tj}; Lout={Lout} would truncate")
    grid = make_grid(tj + Lout)
    return analysis(husimi_values(J, rho, grid, i), Lout, grid, band=tj)


def husimi_offdiag(J: SpinLike, a: SpinLike, b: SpinLike, rho, grid: SphereGrid, gamma=None) -> np.ndarray:
    """<w;a| rho |w;b> on the grid.

    Depends on the phase convention of the coherent vectors. ``gamma`` (one
    angle per node) switches to the convention with an extra exp(-i gamma S_z).
    """
    rho = _check_dim(rho, J)
    ta, tb = _index(J, a), _index(J, b)
    Va = coherent_vectors(J, grid.theta, grid.phi, HalfInt(ta), gamma)
    Vb = coherent_vectors(J, grid.theta, grid.phi, HalfInt(tb), gamma)
    return np.einsum("pa,ab,pb->p", Va.conj(), rho, Vb)


@dataclass(frozen=True)
class BerezinSpectrum:
    J: HalfInt
    eigenvalues: np.ndarray

    def __call__(self, ell) -> np.ndarray:
        """Eigenvalue for degree ell; zero above 2J."""
        ell = np.asarray(ell)
        out = np.zeros(ell.shape)
        ok = ell <= self.J.twice
        out[ok] = self.eigenvalues[ell[ok].astype(int)]
        return out

    def apply(self, f: SphereFunction) -> SphereFunction:
        """Hus_J Op_J f."""
        return f.map_degree(self)


def berezin_eigenvalues(J: SpinLike) -> np.ndarray:
    """(2J)!(2J+1)! / ((2J+l+1)!(2J-l)!) for l = 0..2J.

    Evaluated as the telescoping product of (2J+1-k)/(2J+1+k), k = 1..l,
    which keeps full relative accuracy and never overflows.
    """
    n = twice(J)
    k = np.arange(1, n + 1)
    return np.concatenate([[1.0], np.cumprod((n + 1 - k) / (n + 1 + k))])


def berezin_spectrum(J: SpinLike) -> BerezinSpectrum:
    return BerezinSpectrum(HalfInt(twice(J)), berezin_eigenvalues(J))


def quantization_matrix(J: SpinLike, L: int | None = None) -> np.ndarray:
    """Op_J on harmonics up to L (default 2J): column k is vec(Op_J(Y_k)), row-major."""
    tj = twice(J)
    L = tj if L is None else L
    grid = make_grid(tj + L)
    V = grid_vectors(J, None, grid)
    Y = synthesis_matrix(grid, L)
    d = tj + 1
    # vec(Op Y_k)[a*d+b] = d * sum_p w_p Y_k(p) V[p,a] conj(V[p,b])
    outer = (V[:, :, None] * V.conj()[:, None, :]).reshape(len(grid.weights), d * d)
    return d * outer.T @ (grid.weights[:, None] * Y)


def husimi_matrix(J: SpinLike, L: int | None = None) -> np.ndarray:
    """Hus_J from row-major vec(rho) to coefficients up to L (default 2J)."""
    tj = twice(J)
    L = tj if L is None else L
    grid = make_grid(tj + L)
    V = grid_vectors(J, None, grid)
    Y = synthesis_matrix(grid, L)
    d = tj + 1
    outer = (V.conj()[:, :, None] * V[:, None, :]).reshape(len(grid.weights), d * d)
    return Y.conj().T @ (grid.weights[:, None] * outer)


def berezin_matrix(J: SpinLike) -> np.ndarray:
    """Hus_J o Op_J assembled on the harmonic basis l <= 2J by quadrature."""
    return husimi_matrix(J) @ quantization_matrix(J)


def tensor_operator(J: SpinLike, ell: int, m: int) -> np.ndarray:
    """T[a, b] proportional to C^{J,m_a}_{J,m_b; ell,m}, normalised to ||T||_HS^2 = 2J+1."""
    tj = twice(J)
    d = tj + 1
    tab = cg_table(J, ell, J)
    T = np.zeros((d, d))
    for a in range(d):
        for b in range(d):
            ta, tb = tj - 2 * a, tj - 2 * b
            if ta - tb == 2 * m:
                T[a, b] = tab.coefficient(HalfInt(ta), HalfInt(tb))
    return T * np.sqrt(d) / np.linalg.norm(T)


def op_wigner_eckart(J: SpinLike, f: SphereFunction) -> np.ndarray:
    """Op_J(f) assembled from Clebsch-Gordan tensor operators, no quadrature.

    Op_J(Y_lm) = s_l sqrt(b_l) T_lm, with the sign s_l fixed so the (J, J)
    entry of the m = 0 component is positive (it equals (2J+1) times the
    integral of Y_l0 against ((1 + cos t)/2)^{2J}, whose Legendre
    coefficients are all positive).
    """
    tj = twice(J)
    b = berezin_eigenvalues(J)
    out = np.zeros((tj + 1, tj + 1), dtype=complex)
    for ell in range(min(tj, f.Lmax) + 1):
        s = np.sign(tensor_operator(J, ell, 0)[0, 0])
        for m in range(-ell, ell + 1):
            c = f.coeffs[lm_index(ell, m)]
            if c != 0:
                out += c * s * np.sqrt(b[ell]) * tensor_operator(J, ell, m)
    return out


def upper_symbol(J: SpinLike, rho) -> SphereFunction:
    """The unique f with band <= 2J and Op_J(f) = rho."""
    b = berezin_eigenvalues(J)
    return husimi(J, rho).map_degree(lambda l: 1 / b[l.astype(int)])


@dataclass(frozen=True)
class InversionReport:
    """Left and right sides of the inversion bounds.

    ``bounds`` holds the L^2 bounds with explicit constant 1 as (lhs, rhs).
    ``measured_C`` holds, for the L^p bounds with an unspecified constant,
    the smallest C making ``lhs <= C * rhs`` true.
    """

    J: HalfInt
    s: float
    bounds: dict
    measured_C: dict

    def violations(self, slack: float = 1e-10) -> list[str]:
        return [k for k, (lhs, rhs) in self.bounds.items() if lhs > rhs + slack]

    @property
    def ok(self) -> bool:
        return not self.violations()


def _ratio(a: float, b: float) -> float:
    return a / b if b > 0 else 0.0


def berezin_inversion_check(J: SpinLike, f: SphereFunction, s: float, rho=None,
                            ps=(1.0, 2.0, np.inf)) -> InversionReport:
    """Evaluate the inversion bounds for Hus_J Op_J on f and Op_J Hus_J on rho.

    Both compositions act diagonally on degree l with the Berezin eigenvalue,
    and the Laplacian and the ad-Casimir act with l(l+1).
    """
    if not 0 <= s <= 1:
        raise ValueError("s must lie in [0, 1]")
    tj = twice(J)
    N = tj + 1
    B = berezin_spectrum(J)
    bounds, C = {}, {}

    err = f - B.apply(f)
    bounds["f2"] = (err.l2_norm(), N ** (-s) * fractional_laplacian(f, s).l2_norm())
    second = err + f.map_degree(lambda l: -l * (l + 1)) / N
    bounds["f2_second"] = (second.l2_norm(), N ** (-1 - s) * fractional_laplacian(f, 1 + s).l2_norm())
    grid = make_grid(2 * f.Lmax + 8)
    smooth = f.map_degree(lambda l: 1 + 4 * l * (l + 1))
    for p in ps:
        C[f"f:{p:g}"] = _ratio(lp_norm(err, p, grid), lp_norm(smooth, p, grid) / N)

    if rho is not None:
        rho = _check_dim(rho, J)
        ells = range(tj + 1)
        parts = [isotypic_projection(rho, J, l) for l in ells]
        err_r = sum((1 - B.eigenvalues[l]) * parts[l] for l in ells)
        bounds["rho2"] = (schatten_norm(err_r, 2), N ** (-s) * schatten_norm(casimir_power(rho, J, s), 2))
        second_r = err_r - sum(l * (l + 1) * parts[l] for l in ells) / N
        bounds["rho2_second"] = (schatten_norm(second_r, 2),
                                 N ** (-1 - s) * schatten_norm(casimir_power(rho, J, 1 + s), 2))
        smooth_r = sum((1 + 4 * l * (l + 1)) * parts[l] for l in ells)
        for p in ps:
            C[f"rho:{p:g}"] = _ratio(schatten_norm(err_r, p), schatten_norm(smooth_r, p) / N)
    return InversionReport(HalfInt(tj), s, bounds, C)


@dataclass(frozen=True)
class StratonovichWeyl:
    """sigma_J = Hus_J (Op_J Hus_J)^{-1/2} and its left inverse, as matrices.

    ``symbol`` maps row-major vec(rho) to coefficients l <= 2J; ``quantizer``
    maps coefficients back to vec operators.
    """

    J: HalfInt
    symbol_matrix: np.ndarray
    quantizer_matrix: np.ndarray

    def symbol(self, rho) -> SphereFunction:
        rho = _check_dim(rho, self.J)
        return SphereFunction(self.J.twice, self.symbol_matrix @ rho.reshape(-1))

    def quantize(self, f: SphereFunction) -> np.ndarray:
        d = self.J.dim
        c = f.resized(self.J.twice).coeffs
        return (self.quantizer_matrix @ c).reshape(d, d)


def stratonovich_weyl(J: SpinLike) -> StratonovichWeyl:
    tj = twice(J)
    b = berezin_eigenvalues(J)
    D = 1 / np.sqrt(b[degrees(tj)])
    H = husimi_matrix(J)
    O = quantization_matrix(J)
    return StratonovichWeyl(HalfInt(tj), D[:, None] * H, O * D[None, :])
