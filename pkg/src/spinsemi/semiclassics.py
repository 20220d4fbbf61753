"""
Residuals of the semiclassical approximations and the bounds they obey.

Every report carries the measured left-hand side next to the right-hand side.
Bounds with an explicit constant are checked directly. Bounds whose constant
is unspecified are reported as a measured constant ``lhs / scale``.

Rates are fitted against N = 2J+1 (or 2K+1) on log-log axes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .channels import Channel
from .quantize import husimi, husimi_values, op_quantize, upper_symbol
from .sphere import (
    SphereFunction,
    grad_dot_function,
    holder_seminorm,
    laplacian,
    lp_norm,
    make_grid,
    poisson_bracket_function,
    product,
    sobolev_norm,
    synthesis,
)
from .su2_rep import HalfInt, SpinLike, _check_dim, entropy_of_spectrum, schatten_norm, spin_dim, twice


# -- test functions phi --------------------------------------------------------

@dataclass(frozen=True)
class ScalarFunction:
    """A scalar phi with the metadata the bounds need.

    ``dd_sup`` is sup |phi''| on [0, 1] (inf when unbounded). ``holder`` is
    (alpha, seminorm) on [0, 1].
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    dd_sup: float = np.inf
    holder: tuple[float, float] | None = None
    convex: bool = False
    affine: bool = False

    def __call__(self, x):
        return self.fn(x)


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    if np.any(x < -1e-12):
        raise ValueError("x log x needs x >= 0")
    return out


def _holder_on_unit(fn, alpha: float, n: int = 2001) -> float:
    x = np.linspace(0, 1, n)
    y = fn(x)
    d = np.abs(x[:, None] - x[None, :])
    mask = d > 0
    return float((np.abs(y[:, None] - y[None, :])[mask] / d[mask] ** alpha).max())


def make_phi(name: str, alpha: float | None = None) -> ScalarFunction:
    """Registry: identity, affine, square, exp, xlogx, abs_alpha."""
    if name == "identity":
        return ScalarFunction("identity", lambda x: np.asarray(x, dtype=float) * 1.0, 0.0, (1.0, 1.0), True, True)
    if name == "affine":
        return ScalarFunction("affine", lambda x: 2.0 * np.asarray(x) - 0.5, 0.0, (1.0, 2.0), True, True)
    if name == "square":
        return ScalarFunction("square", lambda x: np.asarray(x) ** 2, 2.0, (1.0, 2.0), True)
    if name == "exp":
        return ScalarFunction("exp", np.exp, float(np.e), (1.0, float(np.e)), True)
    if name == "xlogx":
        return ScalarFunction("xlogx", _xlogx, np.inf, (0.5, _holder_on_unit(_xlogx, 0.5)), True)
    if name == "abs_alpha":
        if alpha is None or alpha <= 0:
            raise ValueError("abs_alpha needs a positive exponent")
        fn = lambda x, a=alpha: np.abs(x) ** a  # noqa: E731
        dd = alpha * (alpha - 1) if alpha >= 2 or alpha == 1 else np.inf
        h = (min(alpha, 1.0), _holder_on_unit(fn, min(alpha, 1.0)))
        return ScalarFunction(f"abs_alpha({alpha:g})", fn, float(dd), h, alpha >= 1, alpha == 1)
    raise ValueError(f"unknown phi {name!r}")


def is_midpoint_convex(phi: Callable, lo: float, hi: float, n: int = 257, tol: float = 1e-12) -> bool:
    if hi <= lo:
        return True
    x = np.linspace(lo, hi, n)
    X, Y = np.meshgrid(x, x)
    with np.errstate(invalid="ignore"):
        mid = phi((X + Y) / 2)
        avg = (phi(X) + phi(Y)) / 2
    if not (np.all(np.isfinite(mid)) and np.all(np.isfinite(avg))):
        return False
    return bool(np.all(mid <= avg + tol * (1 + np.abs(avg))))


# -- rate fits -----------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r2: float
    n_used: int


def rate_fit(xs: Sequence[float], errs: Sequence[float], discard: int = 0) -> RateFit:
    """Least squares for log(err) = slope * log(x) + intercept.

    The ``discard`` smallest x values are dropped first.
    """
    xs = np.asarray(xs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    if xs.shape != errs.shape:
        raise ValueError("xs and errs differ in length")
    order = np.argsort(xs)[discard:]
    xs, errs = xs[order], errs[order]
    if xs.size < 4:
        raise ValueError("a rate fit needs at least 4 points")
    if np.any(errs <= 0) or np.any(xs <= 0):
        raise ValueError("a log-log fit needs positive data")
    if np.ptp(xs) == 0:
        raise ValueError("all x values coincide")
    lx, ly = np.log(xs), np.log(errs)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss = np.sum((ly - ly.mean()) ** 2)
    r2 = 1 - np.sum(resid**2) / ss if ss > 0 else 1.0
    return RateFit(float(slope), float(intercept), float(r2), int(xs.size))


# -- helpers -------------------------------------------------------------------

def _fine_grid(*bands: int, extra: int = 40) -> object:
    return make_grid(2 * max(bands) + extra)


def gradient_norm_sq(f: SphereFunction) -> float:
    """||grad f||_2^2 = <f, -Delta f>."""
    return float(np.real(f.inner(-laplacian(f))))


# -- products (multiplicativity) -----------------------------------------------

@dataclass
class ProductReport:
    J: HalfInt
    p: float
    residuals: dict
    scales: dict

    @property
    def measured_C(self) -> dict:
        return {k: (self.residuals[k] / self.scales[k] if self.scales[k] > 0 else 0.0) for k in self.residuals}


def product_norms(f: SphereFunction, g: SphereFunction, p1: float, p2: float) -> dict:
    """Sobolev and Holder norms used as scales by :func:`product_residuals`."""
    ng = make_grid(2 * max(f.Lmax, g.Lmax) + 16)
    hg = make_grid(24)
    return {("f", 2, p1): sobolev_norm(f, 2, p1, ng), ("g", 2, p2): sobolev_norm(g, 2, p2, ng),
            ("f", 4, 2): sobolev_norm(f, 4, 2, ng), ("g", 4, 2): sobolev_norm(g, 4, 2, ng),
            ("f", "holder"): holder_seminorm(f, 1.0, hg), ("g", "holder"): holder_seminorm(g, 1.0, hg)}


def product_residuals(J: SpinLike, f: SphereFunction, g: SphereFunction, p: float, p1: float, p2: float,
                      norms: dict | None = None) -> ProductReport:
    """Residuals of Op_J(f) Op_J(g) against the classical product and its corrections.

    Keys: ``hus`` and ``op`` (first order), ``sym_holder`` (symmetrised, trace
    norm), ``hus_second`` and ``op_second`` (second order, trace norm) and
    ``commutator``. ``scales`` holds the right-hand sides without the
    universal constant. ``norms`` may carry the output of :func:`product_norms`.
    """
    inv = lambda q: 0.0 if np.isinf(q) else 1.0 / q  # noqa: E731
    if abs(inv(p) - inv(p1) - inv(p2)) > 1e-12:
        raise ValueError("exponents must satisfy 1/p = 1/p1 + 1/p2")
    tj = twice(J)
    N = tj + 1
    norms = norms or product_norms(f, g, p1, p2)

    Of, Og = op_quantize(J, f), op_quantize(J, g)
    fg = product(f, g)
    pb = poisson_bracket_function(f, g)
    gd = grad_dot_function(f, g)
    OfOg = Of @ Og
    Ofg = op_quantize(J, fg)
    grid = _fine_grid(tj, fg.Lmax)
    hus_prod = husimi_values(J, OfOg, grid)
    res, sc = {}, {}

    res["hus"] = lp_norm(hus_prod - synthesis(fg, grid), p, grid)
    sc["hus"] = norms[("f", 2, p1)] * norms[("g", 2, p2)] / N
    res["op"] = N ** (-inv(p)) * schatten_norm(OfOg - Ofg, p)
    sc["op"] = sc["hus"]
    sym = (OfOg + Og @ Of) / 2 - Ofg
    res["sym_holder"] = schatten_norm(sym, 1) / N
    sc["sym_holder"] = norms[("f", "holder")] * norms[("g", "holder")] / N
    corr = (1j * pb - gd + laplacian(fg)) / N
    res["hus_second"] = lp_norm(hus_prod - synthesis(fg + corr, grid), 1, grid)
    sc["hus_second"] = norms[("f", 4, 2)] * norms[("g", 4, 2)] / N**2
    res["op_second"] = schatten_norm(OfOg - op_quantize(J, fg + (1j * pb - gd) / N), 1) / N
    sc["op_second"] = sc["hus_second"]
    comm = OfOg - Og @ Of - (2j / N) * op_quantize(J, pb)
    res["commutator"] = schatten_norm(comm, 1) / N
    sc["commutator"] = sc["hus_second"]
    return ProductReport(HalfInt(tj), p, res, sc)


# -- traces --------------------------------------------------------------------

def trace_of_function(J: SpinLike, phi: Callable, f: SphereFunction) -> float:
    """(2J+1)^{-1} Tr phi(Op_J f) for real f."""
    lam = np.linalg.eigvalsh(_hermitian(op_quantize(J, f)))
    return float(np.sum(phi(lam)) / spin_dim(J))


def classical_integral(phi: Callable, f: SphereFunction, grid=None) -> float:
    """Quadrature of phi(f); phi(f) is not polynomial so a generous grid is used."""
    grid = grid or make_grid(max(4 * f.Lmax, 2 * f.Lmax + 80))
    vals = synthesis(f, grid)
    if np.abs(vals.imag).max() > 1e-10:
        raise ValueError("f must be real")
    return float(np.sum(grid.weights * phi(vals.real)))


def _hermitian(A: np.ndarray) -> np.ndarray:
    return (A + A.conj().T) / 2


@dataclass(frozen=True)
class TraceReport:
    J: HalfInt
    quantum: float
    classical: float
    bound_dd: float
    holder_scale: float

    @property
    def error(self) -> float:
        """E in (2J+1)^{-1} Tr phi(Op f) = integral of phi(f) - E."""
        return self.classical - self.quantum

    @property
    def dd_ok(self) -> bool:
        return abs(self.error) <= self.bound_dd + 1e-12

    @property
    def measured_holder_C(self) -> float:
        return abs(self.error) / self.holder_scale if self.holder_scale > 0 else 0.0


def trace_report(J: SpinLike, phi: ScalarFunction, f: SphereFunction) -> TraceReport:
    N = spin_dim(J)
    q = trace_of_function(J, phi, f)
    c = classical_integral(phi, f)
    bound = phi.dd_sup * gradient_norm_sq(f) / N if np.isfinite(phi.dd_sup) else np.inf
    if phi.dd_sup == 0:
        bound = 0.0
    hs = 0.0
    if phi.holder is not None:
        alpha, semi = phi.holder
        smooth = f.map_degree(lambda l: 1 + 4 * l * (l + 1))
        hs = semi * lp_norm(smooth, 1, make_grid(2 * f.Lmax + 40)) ** alpha / N**alpha
    return TraceReport(HalfInt(twice(J)), q, c, bound, hs)


@dataclass(frozen=True)
class BerezinLieb:
    lower: float
    middle: float
    upper: float

    def ordered(self, slack: float = 1e-10) -> bool:
        return self.lower <= self.middle + slack and self.middle <= self.upper + slack


def berezin_lieb_gap(J: SpinLike, phi: Callable, rho=None, f: SphereFunction | None = None) -> BerezinLieb:
    """(integral phi(g), Tr phi(rho)/(2J+1), integral phi(f)) with rho = Op_J f, g = Hus_J rho.

    Given rho (Hermitian), f is its upper symbol of band <= 2J.
    """
    if (rho is None) == (f is None):
        raise ValueError("give exactly one of rho and f")
    if f is None:
        rho = _check_dim(rho, J)
        if np.abs(rho - rho.conj().T).max() > 1e-10:
            raise ValueError("rho must be Hermitian")
        f = upper_symbol(J, rho)
        f = (f + f.conj()) / 2
    else:
        rho = op_quantize(J, f)
    g = husimi(J, rho)
    grid = make_grid(max(4 * f.Lmax, 2 * f.Lmax + 80))
    fv, gv = synthesis(f, grid).real, synthesis(g, grid).real
    lam = np.linalg.eigvalsh(_hermitian(rho))
    lo = min(fv.min(), gv.min(), lam.min())
    hi = max(fv.max(), gv.max(), lam.max())
    if not is_midpoint_convex(phi, lo, hi):
        raise ValueError("phi fails the midpoint convexity test on the relevant range")
    N = spin_dim(J)
    return BerezinLieb(float(np.sum(grid.weights * phi(gv))), float(np.sum(phi(lam)) / N),
                       float(np.sum(grid.weights * phi(fv))))


# -- channels ------------------------------------------------------------------

def _channel_and_hus(J: HalfInt, K: HalfInt, i, weights_i):
    """Channel and the matching combination {index: weight} of Hus_J^{-i}."""
    if (i is None) == (weights_i is None):
        raise ValueError("give exactly one of i and weights_i")
    if i is not None:
        i = HalfInt.of(i)
        return Channel.from_i(J, K, {i: 1.0}), {-i: 1.0}
    ch = Channel.from_i(J, K, weights_i)
    return ch, {-ii: lam for ii, lam in ch.weights_i.items()}


def _hus_mix_values(J, rho, hus_w, grid):
    return sum(lam * husimi_values(J, rho, grid, i) for i, lam in hus_w.items())


def _op_hus_mix(J, K, rho, hus_w):
    return sum(lam * op_quantize(K, husimi(J, rho, i=i)) for i, lam in hus_w.items())


@dataclass(frozen=True)
class ChannelResidualReport:
    J: HalfInt
    K: HalfInt
    label: str
    lhs_op: dict
    rhs_op: dict
    lhs_hus: dict
    rhs_hus: dict

    def violations(self, slack: float = 0.0) -> list[str]:
        bad = [f"op:p={p:g}" for p in self.lhs_op if self.lhs_op[p] > self.rhs_op[p] + slack]
        bad += [f"hus:p={p:g}" for p in self.lhs_hus if self.lhs_hus[p] > self.rhs_hus[p] + slack]
        return bad


def channel_residuals(J: SpinLike, K: SpinLike, rho, ps: Sequence[float] = (1.0, 2.0, np.inf),
                      i: SpinLike | None = None, weights_i: Mapping | None = None) -> ChannelResidualReport:
    """Distance of a channel from Op_K Hus_J^{-i} and of Hus_K o channel from Hus_J^{-i}.

    For a vertex i the right-hand sides are 12 (J-i)(J+i+1)/(2K-J+i+1) ||rho||_p
    and 2 (J+i)(J-i+1)/(2K-J+i+1) ||rho||_p. For a mixture (needs K >= 2J)
    they are 6 (2J+1)^2/(2K+1) ||rho||_p and (2J+1)^2/(2K+1) ||rho||_p.
    """
    J, K = HalfInt.of(J), HalfInt.of(K)
    rho = _check_dim(rho, J).astype(complex)
    ch, hus_w = _channel_and_hus(J, K, i, weights_i)
    NJ, NK = J.dim, K.dim
    r = NK / NJ
    out = r * ch(rho)
    diff_op = out - _op_hus_mix(J, K, rho, hus_w)
    grid = make_grid(2 * max(K.twice, J.twice) + 40)
    diff_hus = r * husimi_values(K, ch(rho), grid) - _hus_mix_values(J, rho, hus_w, grid)
    if i is not None:
        iv, Jv, Kv = HalfInt.of(i).value, J.value, K.value
        den = 2 * Kv - Jv + iv + 1
        c_op = 12 * (Jv - iv) * (Jv + iv + 1) / den
        c_hus = 2 * (Jv + iv) * (Jv - iv + 1) / den
        label = f"i={HalfInt.of(i)}"
    else:
        if K.twice < 2 * J.twice:
            raise ValueError("mixture bounds need K >= 2J")
        c_op = 6 * NJ**2 / NK
        c_hus = NJ**2 / NK
        label = "mixture"
    lo, ro, lh, rh = {}, {}, {}, {}
    for p in ps:
        inv = 0.0 if np.isinf(p) else 1 / p
        nr = schatten_norm(rho, p)
        lo[p] = r ** (-inv) * schatten_norm(diff_op, p)
        ro[p] = c_op * nr
        lh[p] = NJ**inv * lp_norm(diff_hus, p, grid)
        rh[p] = c_hus * nr
    return ChannelResidualReport(J, K, label, lo, ro, lh, rh)


@dataclass(frozen=True)
class ChannelTraceReport:
    J: HalfInt
    K: HalfInt
    label: str
    quantum: float
    classical: float
    bound_dd: float
    holder_scale: float

    @property
    def error(self) -> float:
        return self.quantum - self.classical

    @property
    def dd_ok(self) -> bool:
        return abs(self.error) <= self.bound_dd + 1e-12

    @property
    def measured_holder_C(self) -> float:
        return abs(self.error) / self.holder_scale if self.holder_scale > 0 else 0.0


def channel_trace_residuals(J: SpinLike, K: SpinLike, phi: ScalarFunction, rho,
                            i: SpinLike | None = None, weights_i: Mapping | None = None) -> ChannelTraceReport:
    """(2K+1)^{-1} Tr phi((2K+1)/(2J+1) Phi(rho)) against the integral of phi(Hus_J^{-i} rho)."""
    J, K = HalfInt.of(J), HalfInt.of(K)
    rho = _check_dim(rho, J)
    ch, hus_w = _channel_and_hus(J, K, i, weights_i)
    NJ, NK = J.dim, K.dim
    lam = np.clip(np.linalg.eigvalsh(_hermitian(NK / NJ * ch(rho))), 0.0, None)
    quantum = float(np.sum(phi(lam)) / NK)
    grid = make_grid(2 * J.twice + 120)
    h = np.clip(_hus_mix_values(J, rho, hus_w, grid).real, 0.0, None)
    classical = float(np.sum(grid.weights * phi(h)))
    if i is not None:
        iv, Jv, Kv = HalfInt.of(i).value, J.value, K.value
        ratio = (Jv - abs(iv) + 1) / (2 * Kv - Jv + iv + 1)
        const, label = 10.0, f"i={HalfInt.of(i)}"
    else:
        if K.twice < 2 * J.twice:
            raise ValueError("mixture bounds need K >= 2J")
        ratio = NJ / NK
        const, label = 4.0, "mixture"
    bound = 0.0 if phi.dd_sup == 0 else const * phi.dd_sup * ratio
    hs = phi.holder[1] * ratio ** phi.holder[0] if phi.holder else 0.0
    return ChannelTraceReport(J, K, label, quantum, classical, bound, hs)


@dataclass(frozen=True)
class EntropyExpansionReport:
    J: HalfInt
    K: HalfInt
    label: str
    entropy: float
    approximation: float
    scale: float

    @property
    def error(self) -> float:
        return self.entropy - self.approximation

    @property
    def measured_C(self) -> float:
        return abs(self.error) / self.scale if self.scale > 0 else 0.0


def entropy_expansion(J: SpinLike, K: SpinLike, rho, i: SpinLike | None = None,
                      weights_i: Mapping | None = None, grid_degree: int = 240) -> EntropyExpansionReport:
    """S_vN(Phi(rho)) against log((2K+1)/(2J+1)) - (2J+1) * integral of h log h, h = Hus_J^{(lambda)} rho."""
    J, K = HalfInt.of(J), HalfInt.of(K)
    if K.twice < 2:
        raise ValueError("the expansion needs K >= 1")
    rho = _check_dim(rho, J)
    ch, hus_w = _channel_and_hus(J, K, i, weights_i)
    NJ, NK = J.dim, K.dim
    S = entropy_of_spectrum(np.linalg.eigvalsh(_hermitian(ch(rho))))
    grid = make_grid(grid_degree)
    h = np.clip(_hus_mix_values(J, rho, hus_w, grid).real, 0.0, None)
    approx = float(np.log(NK / NJ) - NJ * np.sum(grid.weights * _xlogx(h)))
    if i is not None:
        iv, Jv, Kv = HalfInt.of(i).value, J.value, K.value
        scale = np.log(NK) * NJ * (Jv - abs(iv) + 1) / (2 * Kv - Jv + iv + 1)
        label = f"i={HalfInt.of(i)}"
    else:
        if K.twice < 2 * J.twice:
            raise ValueError("mixture envelope needs K >= 2J")
        scale = np.log(NK) * NJ**2 / NK
        label = "mixture"
    return EntropyExpansionReport(J, K, label, float(S), approx, float(scale))
