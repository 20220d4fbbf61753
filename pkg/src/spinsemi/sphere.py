"""
Band-limited functions on the unit sphere.

Functions are stored as coefficients in complex spherical harmonics that are
orthonormal for the normalised area measure (total mass 1), so ``Y_00 = 1``.
Coefficient (l, m) lives at flat index ``l*l + l + m``. Harmonics carry the
Condon-Shortley phase, which makes ``L_+ Y_lm = sqrt((l-m)(l+m+1)) Y_{l,m+1}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import eval_legendre, roots_legendre, sph_harm_y

from .su2_rep import wigner_rotation


def n_coeffs(L: int) -> int:
    return (L + 1) ** 2


def lm_index(l: int, m: int) -> int:
    return l * l + l + m


@lru_cache(maxsize=None)
def _lm_arrays(L: int) -> tuple[np.ndarray, np.ndarray]:
    ls = np.concatenate([np.full(2 * l + 1, l) for l in range(L + 1)])
    ms = np.concatenate([np.arange(-l, l + 1) for l in range(L + 1)])
    ls.setflags(write=False)
    ms.setflags(write=False)
    return ls, ms


def degrees(L: int) -> np.ndarray:
    """Degree l of each flat coefficient slot up to band L."""
    return _lm_arrays(L)[0]


def orders(L: int) -> np.ndarray:
    return _lm_arrays(L)[1]


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Gauss-Legendre nodes in cos(theta) times a uniform phi grid."""

    n_theta: int
    n_phi: int
    theta: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def degree_exact(self) -> int:
        return min(2 * self.n_theta - 1, self.n_phi - 1)

    @property
    def size(self) -> int:
        return self.theta.size

    @property
    def points(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)], axis=-1)

    def integrate(self, values) -> complex | float:
        return np.sum(self.weights * np.asarray(values))


@lru_cache(maxsize=None)
def _grid(n_theta: int, n_phi: int) -> SphereGrid:
    x, w = roots_legendre(n_theta)
    phis = 2 * np.pi * np.arange(n_phi) / n_phi
    theta = np.repeat(np.arccos(x), n_phi)
    phi = np.tile(phis, n_theta)
    weights = np.repeat(w / 2, n_phi) / n_phi
    for a in (theta, phi, weights):
        a.setflags(write=False)
    return SphereGrid(n_theta, n_phi, theta, phi, weights)


def make_grid(degree_needed: int) -> SphereGrid:
    """Product grid integrating spherical polynomials of degree <= degree_needed exactly."""
    if degree_needed < 0:
        raise ValueError("degree must be non-negative")
    n_theta = -(-(degree_needed + 1) // 2) + 1
    return _grid(n_theta, degree_needed + 2)


def ylm(L: int, theta, phi) -> np.ndarray:
    """Harmonics up to band L at the given points, shape (npts, (L+1)^2)."""
    ls, ms = _lm_arrays(L)
    theta = np.asarray(theta, dtype=float).reshape(-1, 1)
    phi = np.asarray(phi, dtype=float).reshape(-1, 1)
    return np.sqrt(4 * np.pi) * sph_harm_y(ls[None, :], ms[None, :], theta, phi)


@lru_cache(maxsize=64)
def _synthesis_matrix(n_theta: int, n_phi: int, L: int) -> np.ndarray:
    g = _grid(n_theta, n_phi)
    Y = ylm(L, g.theta, g.phi)
    Y.setflags(write=False)
    return Y


def synthesis_matrix(grid: SphereGrid, L: int) -> np.ndarray:
    return _synthesis_matrix(grid.n_theta, grid.n_phi, L)


@dataclass(frozen=True, eq=False)
class SphereFunction:
    Lmax: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (n_coeffs(self.Lmax),):
            raise ValueError(f"band {self.Lmax} needs {n_coeffs(self.Lmax)} coefficients, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, L: int) -> "SphereFunction":
        return cls(L, np.zeros(n_coeffs(L), dtype=complex))

    @classmethod
    def constant(cls, c: complex = 1.0) -> "SphereFunction":
        return cls(0, np.array([c], dtype=complex))

    @classmethod
    def harmonic(cls, l: int, m: int) -> "SphereFunction":
        f = cls.zeros(l)
        f.coeffs[lm_index(l, m)] = 1.0
        return f

    def coeff(self, l: int, m: int) -> complex:
        if l > self.Lmax:
            return 0j
        return complex(self.coeffs[lm_index(l, m)])

    def resized(self, L: int) -> "SphereFunction":
        """Zero-pad or truncate to band L."""
        out = np.zeros(n_coeffs(L), dtype=complex)
        n = min(n_coeffs(L), self.coeffs.size)
        out[:n] = self.coeffs[:n]
        return SphereFunction(L, out)

    def band(self, tol: float = 1e-12) -> int:
        """Largest l carrying a coefficient above tol."""
        nz = np.flatnonzero(np.abs(self.coeffs) > tol)
        return int(degrees(self.Lmax)[nz[-1]]) if nz.size else 0

    def conj(self) -> "SphereFunction":
        # conj(Y_lm) = (-1)^m Y_{l,-m}
        ls, ms = _lm_arrays(self.Lmax)
        src = ls * ls + ls - ms
        return SphereFunction(self.Lmax, ((-1.0) ** ms) * self.coeffs[src].conj())

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.abs(self.coeffs - self.conj().coeffs).max(initial=0) <= tol)

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def inner(self, other: "SphereFunction") -> complex:
        """L2 inner product, conjugate-linear in self."""
        L = max(self.Lmax, other.Lmax)
        return complex(np.vdot(self.resized(L).coeffs, other.resized(L).coeffs))

    def map_degree(self, fn: Callable[[np.ndarray], np.ndarray]) -> "SphereFunction":
        """Multiply each (l, m) coefficient by fn(l)."""
        return SphereFunction(self.Lmax, fn(degrees(self.Lmax).astype(float)) * self.coeffs)

    def _binary(self, other, op):
        if isinstance(other, SphereFunction):
            L = max(self.Lmax, other.Lmax)
            return SphereFunction(L, op(self.resized(L).coeffs, other.resized(L).coeffs))
        c = self.coeffs.copy()
        c[0] = op(c[0], other)
        return SphereFunction(self.Lmax, c)

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return SphereFunction(self.Lmax, -self.coeffs)

    def __mul__(self, a):
        if isinstance(a, SphereFunction):
            return product(self, a)
        return SphereFunction(self.Lmax, a * self.coeffs)

    __rmul__ = __mul__

    def __truediv__(self, a):
        return SphereFunction(self.Lmax, self.coeffs / a)

    def __call__(self, omega) -> np.ndarray:
        from .su2_rep import sphere_angles

        theta, phi = sphere_angles(omega)
        return evaluate(self, theta, phi)


def evaluate(f: SphereFunction, theta, phi) -> np.ndarray:
    return ylm(f.Lmax, theta, phi) @ f.coeffs


def synthesis(f: SphereFunction, grid: SphereGrid) -> np.ndarray:
    return synthesis_matrix(grid, f.Lmax) @ f.coeffs


def analysis(values, Lmax: int, grid: SphereGrid, band: int | None = None, check: bool = True) -> SphereFunction:
    """Coefficients up to Lmax of grid values of a band-``band`` function.

    The quadrature is exact when ``grid.degree_exact >= band + Lmax``;
    ``band`` defaults to Lmax. Pass ``check=False`` for non-polynomial data.
    """
    band = Lmax if band is None else band
    if check and grid.degree_exact < band + Lmax:
        raise ValueError(
            f"grid of exact degree {grid.degree_exact} cannot resolve band {band} analysed to {Lmax}"
        )
    Y = synthesis_matrix(grid, Lmax)
    return SphereFunction(Lmax, Y.conj().T @ (grid.weights * np.asarray(values)))


def from_callable(fn: Callable[..., np.ndarray], Lmax: int) -> SphereFunction:
    """Project ``fn(x, y, z)`` (a polynomial of degree <= Lmax) onto band Lmax."""
    grid = make_grid(2 * Lmax)
    x, y, z = grid.points.T
    return analysis(fn(x, y, z), Lmax, grid)


def omega_component(axis: str) -> SphereFunction:
    """The coordinate function omega_x, omega_y or omega_z."""
    r = 1 / np.sqrt(6)
    c = np.zeros(4, dtype=complex)
    if axis == "z":
        c[lm_index(1, 0)] = 1 / np.sqrt(3)
    elif axis == "x":
        c[lm_index(1, -1)], c[lm_index(1, 1)] = r, -r
    elif axis == "y":
        c[lm_index(1, -1)], c[lm_index(1, 1)] = 1j * r, 1j * r
    else:
        raise ValueError(f"unknown axis {axis!r}")
    return SphereFunction(1, c)


def random_band_function(L: int, rng: np.random.Generator, real: bool = True) -> SphereFunction:
    """Random function with unit-variance coefficients in every (l, m) up to L."""
    c = rng.normal(size=n_coeffs(L)) + 1j * rng.normal(size=n_coeffs(L))
    f = SphereFunction(L, c)
    if real:
        f = (f + f.conj()) / 2
    return f


def product(f: SphereFunction, g: SphereFunction) -> SphereFunction:
    """Pointwise product, computed exactly at band Lf + Lg."""
    L = f.Lmax + g.Lmax
    grid = make_grid(2 * L)
    return analysis(synthesis(f, grid) * synthesis(g, grid), L, grid)


def laplacian(f: SphereFunction) -> SphereFunction:
    return f.map_degree(lambda l: -l * (l + 1))


def fractional_laplacian(f: SphereFunction, s: float) -> SphereFunction:
    """(-Delta)^s f."""
    if s == 0:
        return f
    return f.map_degree(lambda l: (l * (l + 1)) ** s)


def legendre_truncation(f: SphereFunction, L: int) -> SphereFunction:
    """Pi_L f by coefficient selection."""
    return f.map_degree(lambda l: (l == L).astype(float))


def legendre_projection(f: SphereFunction, L: int, grid: SphereGrid) -> np.ndarray:
    """Pi_L f at the grid nodes via the (2L+1) P_L(w.w') kernel."""
    if grid.degree_exact < f.Lmax + L:
        raise ValueError("grid too coarse for the projection kernel")
    pts = grid.points
    vals = synthesis(f, grid)
    kernel = (2 * L + 1) * eval_legendre(L, np.clip(pts @ pts.T, -1, 1))
    return kernel @ (grid.weights * vals)


def angular_momentum(f: SphereFunction, axis: str) -> SphereFunction:
    """L_a f for a in {'x', 'y', 'z', '+', '-'}, with L = -i (omega x grad)."""
    ls, ms = _lm_arrays(f.Lmax)
    c = f.coeffs
    if axis == "z":
        return SphereFunction(f.Lmax, ms * c)
    # L_+ sends (l, m) -> (l, m+1)
    up = np.zeros_like(c)
    dn = np.zeros_like(c)
    src_up = ms < ls
    up[np.flatnonzero(src_up) + 1] = np.sqrt((ls - ms) * (ls + ms + 1))[src_up] * c[src_up]
    src_dn = ms > -ls
    dn[np.flatnonzero(src_dn) - 1] = np.sqrt((ls + ms) * (ls - ms + 1))[src_dn] * c[src_dn]
    if axis == "+":
        return SphereFunction(f.Lmax, up)
    if axis == "-":
        return SphereFunction(f.Lmax, dn)
    if axis == "x":
        return SphereFunction(f.Lmax, (up + dn) / 2)
    if axis == "y":
        return SphereFunction(f.Lmax, (up - dn) / 2j)
    raise ValueError(f"unknown axis {axis!r}")


def _require(grid: SphereGrid, degree: int, what: str):
    if grid.degree_exact < degree:
        raise ValueError(f"{what} needs a grid of exact degree >= {degree}, got {grid.degree_exact}")


def grad_dot(f: SphereFunction, g: SphereFunction, grid: SphereGrid) -> np.ndarray:
    """Grid values of grad f . grad g = (Delta(fg) - f Delta g - g Delta f) / 2."""
    _require(grid, 2 * (f.Lmax + g.Lmax), "grad_dot")
    fg = product(f, g)
    F, G = synthesis(f, grid), synthesis(g, grid)
    out = synthesis(laplacian(fg), grid) - F * synthesis(laplacian(g), grid) - G * synthesis(laplacian(f), grid)
    return out / 2


def poisson_bracket(f: SphereFunction, g: SphereFunction, grid: SphereGrid) -> np.ndarray:
    """Grid values of {f, g} = -omega . (L f x L g)."""
    _require(grid, 2 * (f.Lmax + g.Lmax), "poisson_bracket")
    Lf = [synthesis(angular_momentum(f, a), grid) for a in "xyz"]
    Lg = [synthesis(angular_momentum(g, a), grid) for a in "xyz"]
    x, y, z = grid.points.T
    cross_x = Lf[1] * Lg[2] - Lf[2] * Lg[1]
    cross_y = Lf[2] * Lg[0] - Lf[0] * Lg[2]
    cross_z = Lf[0] * Lg[1] - Lf[1] * Lg[0]
    return -(x * cross_x + y * cross_y + z * cross_z)


def _as_function(op, f: SphereFunction, g: SphereFunction) -> SphereFunction:
    L = f.Lmax + g.Lmax
    grid = make_grid(2 * L)
    return analysis(op(f, g, grid), L, grid)


def grad_dot_function(f: SphereFunction, g: SphereFunction) -> SphereFunction:
    return _as_function(grad_dot, f, g)


def poisson_bracket_function(f: SphereFunction, g: SphereFunction) -> SphereFunction:
    return _as_function(poisson_bracket, f, g)


def _check_p(p: float):
    if not p >= 1:
        raise ValueError("L^p norms need p >= 1")


def lp_norm(f: SphereFunction | np.ndarray, p: float, grid: SphereGrid) -> float:
    """L^p norm by quadrature; p = inf takes the grid maximum."""
    _check_p(p)
    vals = np.abs(synthesis(f, grid) if isinstance(f, SphereFunction) else np.asarray(f))
    if np.isinf(p):
        return float(vals.max())
    return float(np.sum(grid.weights * vals**p) ** (1 / p))


def derivative_magnitudes(f: SphereFunction, k: int, grid: SphereGrid) -> list[np.ndarray]:
    """|nabla^n f| on the grid for n = 0..k, from words in L_x, L_y, L_z.

    For n = 1 this is exactly |grad f|; for n >= 2 it is a norm equivalent to
    the covariant-tensor one.
    """
    level = [f]
    out = [np.abs(synthesis(f, grid))]
    for _ in range(k):
        level = [angular_momentum(h, a) for h in level for a in "xyz"]
        sq = sum(np.abs(synthesis(h, grid)) ** 2 for h in level)
        out.append(np.sqrt(sq))
    return out


def sobolev_norm(f: SphereFunction, k: int, p: float, grid: SphereGrid) -> float:
    """W^{k,p} norm built from :func:`derivative_magnitudes`."""
    if k not in range(5):
        raise ValueError("Sobolev order must be in 0..4")
    _check_p(p)
    mags = derivative_magnitudes(f, k, grid)
    if np.isinf(p):
        return float(max(m.max() for m in mags))
    return float(sum(np.sum(grid.weights * m**p) for m in mags) ** (1 / p))


def holder_seminorm(f: SphereFunction | np.ndarray, alpha: float, grid: SphereGrid, chunk: int = 512) -> float:
    """Max over distinct grid-node pairs of |f(w) - f(w')| / |w - w'|^alpha.

    A lower bound for the true seminorm.
    """
    if not 0 < alpha <= 1:
        raise ValueError("Holder exponent must lie in (0, 1]")
    vals = synthesis(f, grid) if isinstance(f, SphereFunction) else np.asarray(f)
    pts = grid.points
    best = 0.0
    for s in range(0, len(vals), chunk):
        d = np.linalg.norm(pts[s : s + chunk, None, :] - pts[None, :, :], axis=-1)
        num = np.abs(vals[s : s + chunk, None] - vals[None, :])
        mask = d > 1e-12
        if mask.any():
            best = max(best, float((num[mask] / d[mask] ** alpha).max()))
    return best


class Composition(NamedTuple):
    function: SphereFunction
    aliasing: float


def compose(phi: Callable[[np.ndarray], np.ndarray], f: SphereFunction, grid: SphereGrid, Lout: int,
            check_grid: SphereGrid | None = None) -> Composition:
    """Band-Lout projection of phi(f), with the sup-residual on a finer grid."""
    vals = synthesis(f, grid)
    if np.abs(vals.imag).max() < 1e-12:
        # real data stays real so that domain errors (log of a negative) surface
        vals = vals.real
    with np.errstate(all="raise"):
        try:
            out = phi(vals)
        except FloatingPointError as exc:
            raise ValueError("f leaves the domain of phi") from exc
    if not np.all(np.isfinite(out)):
        raise ValueError("f leaves the domain of phi")
    h = analysis(out, Lout, grid, check=False)
    fine = check_grid or make_grid(2 * grid.degree_exact + 2)
    resid = np.abs(synthesis(h, fine) - phi(synthesis(f, fine))).max()
    return Composition(h, float(resid))


def rotate(f: SphereFunction, phi: float, theta: float) -> SphereFunction:
    """Coefficients of f o R^{-1} with R = R_z(phi) R_y(theta)."""
    out = np.empty_like(f.coeffs)
    for l in range(f.Lmax + 1):
        # spin-l basis is ordered m = l..-l; coefficients are m = -l..l
        D = wigner_rotation(l, phi, theta)[::-1, ::-1]
        sl = slice(l * l, (l + 1) ** 2)
        out[sl] = D @ f.coeffs[sl]
    return SphereFunction(f.Lmax, out)
