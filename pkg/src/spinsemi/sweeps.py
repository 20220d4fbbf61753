"""Config-driven sweeps behind ``spinsemi verify``.

A sweep returns a :class:`SweepReport`: flat records for the CSV output and a
list of named checks. The run passes when every check passes.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Callable

import numpy as np

from .quantize import berezin_inversion_check
from .semiclassics import (
    ScalarFunction,
    berezin_lieb_gap,
    channel_residuals,
    channel_trace_residuals,
    entropy_expansion,
    make_phi,
    product_norms,
    product_residuals,
    rate_fit,
    trace_report,
)
from .sphere import SphereFunction, make_grid, omega_component, random_band_function, synthesis
from .su2_rep import HalfInt, random_density_matrix

SWEEPS = ("inversion", "products", "traces", "channels", "entropy")


class ConfigError(ValueError):
    pass


def default_config() -> dict:
    text = resources.files("spinsemi").joinpath("data/default_config.json").read_text()
    return json.loads(text)


def load_config(path: str | None) -> dict:
    if path is None:
        return default_config()
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def spin_values(spec) -> list[HalfInt]:
    """A list of labels, or {"from": a, "to": b, "step": s} with inclusive ends."""
    try:
        if isinstance(spec, dict):
            a, b, s = HalfInt.of(spec["from"]), HalfInt.of(spec["to"]), HalfInt.of(spec.get("step", 1))
            if s.twice <= 0:
                raise ConfigError("step must be positive")
            return [HalfInt(t) for t in range(a.twice, b.twice + 1, s.twice)]
        return [HalfInt.of(x) for x in spec]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad spin list {spec!r}: {exc}") from exc


def parse_p(x) -> float:
    if x in ("inf", "infinity", float("inf")):
        return float("inf")
    try:
        p = float(x)
    except (TypeError, ValueError):
        raise ConfigError(f"bad exponent {x!r}") from None
    if p < 1:
        raise ConfigError(f"exponent {x!r} must be >= 1")
    return p


_CALL = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def _parse_call(text: str) -> tuple[str, list[float]]:
    m = _CALL.match(str(text))
    if not m:
        raise ConfigError(f"cannot parse {text!r}")
    args = [a.strip() for a in m.group(2).split(",")] if m.group(2) else []
    try:
        return m.group(1), [float(a) for a in args if a]
    except ValueError:
        raise ConfigError(f"non-numeric argument in {text!r}") from None


def make_function(text: str) -> SphereFunction:
    """Registry: omega_x, omega_y, omega_z, band_random(L, seed)."""
    name, args = _parse_call(text)
    if name in ("omega_x", "omega_y", "omega_z") and not args:
        return omega_component(name[-1])
    if name == "band_random" and len(args) == 2:
        return random_band_function(int(args[0]), np.random.default_rng(int(args[1])))
    raise ConfigError(f"unknown test function {text!r}")


def make_phi_from_text(text: str) -> ScalarFunction:
    name, args = _parse_call(text)
    try:
        if name == "abs_alpha":
            if len(args) != 1:
                raise ConfigError("abs_alpha takes one argument")
            return make_phi(name, args[0])
        if args:
            raise ConfigError(f"{name} takes no arguments")
        return make_phi(name)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class SweepReport:
    sweep: str
    seed: int
    records: list[dict] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, detail: str = ""):
        self.checks.append(Check(name, bool(passed), detail))


def _section(cfg: dict, name: str) -> dict:
    sec = cfg.get(name)
    if not isinstance(sec, dict):
        raise ConfigError(f"config has no '{name}' section")
    return sec


def _rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([seed, *keys])


def run_inversion(cfg: dict) -> SweepReport:
    sec = _section(cfg, "inversion")
    seed = int(cfg.get("seed", 0))
    rep = SweepReport("inversion", seed)
    Js = spin_values(sec["J"])
    ss = [float(s) for s in sec.get("s", [0, 0.5, 1])]
    nf = int(sec.get("n_functions", 10))
    band = int(sec.get("band", 6))
    slack = float(sec.get("slack", 1e-10))
    violations, Cs = 0, {}
    for jk, J in enumerate(Js):
        for k in range(nf):
            rng = _rng(seed, jk, k)
            f = random_band_function(band, rng)
            rho = random_density_matrix(J.dim, rng)
            for s in ss:
                r = berezin_inversion_check(J, f, s, rho)
                bad = r.violations(slack)
                violations += len(bad)
                for key, (lhs, rhs) in r.bounds.items():
                    rep.records.append(dict(J=str(J), case=k, s=s, bound=key, lhs=lhs, rhs=rhs))
                for key, c in r.measured_C.items():
                    Cs.setdefault(key, []).append(c)
    rep.check("inversion_explicit_bounds", violations == 0, f"violations={violations}")
    cmax = max(max(v) for v in Cs.values())
    for key in sorted(Cs):
        rep.records.append(dict(J="all", case=-1, s=-1.0, bound=f"measured_C[{key}]", lhs=max(Cs[key]), rhs=1.0))
    rep.check("inversion_measured_C_le_1", cmax <= 1.0, f"max_C={cmax:.6g}")
    return rep


def _stability(values) -> float:
    """max/min of a measured constant over the upper half of a sweep."""
    upper = np.asarray(values[len(values) // 2:], dtype=float)
    return float(upper.max() / upper.min()) if upper.min() > 0 else float("inf")


def run_products(cfg: dict) -> SweepReport:
    sec = _section(cfg, "products")
    seed = int(cfg.get("seed", 0))
    rep = SweepReport("products", seed)
    Js = spin_values(sec["J"])
    f, g = make_function(sec.get("f", "omega_z")), make_function(sec.get("g", "omega_x"))
    p = parse_p(sec.get("p", "inf"))
    p1, p2 = parse_p(sec.get("p1", "inf")), parse_p(sec.get("p2", "inf"))
    max_ratio = float(sec.get("max_ratio", 3.0))
    norms = product_norms(f, g, p1, p2)
    Cs: dict[str, list[float]] = {}
    for J in Js:
        r = product_residuals(J, f, g, p, p1, p2, norms)
        for key in sorted(r.residuals):
            Cs.setdefault(key, []).append(r.measured_C[key])
            rep.records.append(dict(J=str(J), quantity=key, residual=r.residuals[key], scale=r.scales[key],
                                    measured_C=r.measured_C[key]))
    for key in sorted(Cs):
        ratio = _stability(Cs[key])
        rep.check(f"measured_C_stable[{key}]", ratio <= max_ratio, f"max/min={ratio:.6f}")
    return rep


def run_traces(cfg: dict) -> SweepReport:
    sec = _section(cfg, "traces")
    seed = int(cfg.get("seed", 0))
    rep = SweepReport("traces", seed)
    Js = spin_values(sec["J"])
    phi = make_phi_from_text(sec.get("phi", "square"))
    f = make_function(sec.get("f", "omega_z"))
    errs, viol = [], 0
    for J in Js:
        r = trace_report(J, phi, f)
        viol += not r.dd_ok
        errs.append(abs(r.error))
        rep.records.append(dict(J=str(J), case="trace", lower=r.quantum, middle=r.classical, upper=r.bound_dd,
                                value=r.error))
    fit = rate_fit([J.dim for J in Js], errs, int(sec.get("discard", 2)))
    want, tol = sec.get("slope", [-1.0, 0.1])
    rep.check("trace_dd_bound", viol == 0, f"violations={viol}")
    rep.check("trace_slope", abs(fit.slope - want) <= tol, f"slope={fit.slope:.6f} target={want}+-{tol}")

    bl = sec.get("berezin_lieb", {})
    n_cases = int(bl.get("n_cases", 50))
    bl_J = spin_values(bl.get("J", [1, 2, 3]))
    phis = [make_phi_from_text(t) for t in bl.get("phis", ["square", "exp", "xlogx"])]
    bad = 0
    for k in range(n_cases):
        rng = _rng(seed, 7, k)
        J = bl_J[k % len(bl_J)]
        phi_k = phis[k % len(phis)]
        if phi_k.name == "xlogx":
            h = random_band_function(2, rng)
            shift = 0.1 - synthesis(h, make_grid(40)).real.min()
            res = berezin_lieb_gap(J, phi_k, f=h + shift)
        else:
            res = berezin_lieb_gap(J, phi_k, rho=random_density_matrix(J.dim, rng))
        bad += not res.ordered()
        rep.records.append(dict(J=str(J), case=f"berezin_lieb:{phi_k.name}", lower=res.lower, middle=res.middle,
                                upper=res.upper, value=res.upper - res.lower))
    rep.check("berezin_lieb_sandwich", bad == 0, f"unordered={bad} of {n_cases}")
    return rep


def run_channels(cfg: dict) -> SweepReport:
    sec = _section(cfg, "channels")
    seed = int(cfg.get("seed", 0))
    rep = SweepReport("channels", seed)
    Js = spin_values(sec["J"])
    Kmax = HalfInt.of(sec.get("K_max", 20))
    Kstep = HalfInt.of(sec.get("K_step", 1))
    ps = [parse_p(p) for p in sec.get("p", [1, 2, "inf"])]
    n_rho = int(sec.get("n_rho", 5))
    slack = float(sec.get("slack", 1e-10))
    fit_ps = [parse_p(p) for p in sec.get("fit_p", [1])]
    want, tol = sec.get("slope", [-1.0, 0.15])
    phis = [make_phi_from_text(t) for t in sec.get("trace_phis", ["square", "exp"])]
    discard = int(sec.get("discard", 2))
    viol5 = viol7 = 0
    off_target: list[str] = []
    for jk, J in enumerate(Js):
        rhos = [random_density_matrix(J.dim, _rng(seed, 11, jk, k)) for k in range(n_rho)]
        Ks = [HalfInt(t) for t in range(2 * J.twice, Kmax.twice + 1, Kstep.twice)]
        i_vals = [HalfInt(t) for t in range(-J.twice, J.twice + 1, 2)]
        for i in i_vals:
            worst = {p: [] for p in fit_ps}
            for K in Ks:
                reps = [channel_residuals(J, K, rho, ps, i=i) for rho in rhos]
                for r in reps:
                    viol5 += len(r.violations(slack))
                for p in ps:
                    for kind in ("op", "hus"):
                        lhs = [getattr(r, f"lhs_{kind}")[p] for r in reps]
                        rhs = [getattr(r, f"rhs_{kind}")[p] for r in reps]
                        k = int(np.argmax(np.divide(lhs, rhs, out=np.zeros(len(lhs)), where=np.array(rhs) > 0)))
                        rep.records.append(dict(J=str(J), K=str(K), i=str(i), p=p, quantity=f"channel_{kind}",
                                                lhs=lhs[k], rhs=rhs[k]))
                for p in fit_ps:
                    worst[p].append(max(r.lhs_op[p] for r in reps))
                for phi in phis:
                    ts = [channel_trace_residuals(J, K, phi, rho, i=i) for rho in rhos]
                    viol7 += sum(not t.dd_ok for t in ts)
                    rep.records.append(dict(J=str(J), K=str(K), i=str(i), p=0.0, quantity=f"trace:{phi.name}",
                                            lhs=max(abs(t.error) for t in ts), rhs=ts[0].bound_dd))
            if i != J:
                for p in fit_ps:
                    fit = rate_fit([K.dim for K in Ks], worst[p], discard)
                    if abs(fit.slope - want) > tol:
                        off_target.append(f"J={J},i={i},p={p:g}:{fit.slope:.3f}")
                    rep.records.append(dict(J=str(J), K="fit", i=str(i), p=p, quantity="slope_channel_op",
                                            lhs=fit.slope, rhs=fit.r2))
        # mixtures; every K in the sweep already satisfies K >= 2J
        for K in Ks:
            w = _rng(seed, 13, jk, K.twice).dirichlet(np.ones(len(i_vals)))
            wi = dict(zip(i_vals, w))
            for rho in rhos[:2]:
                r = channel_residuals(J, K, rho, ps, weights_i=wi)
                viol5 += len(r.violations(slack))
                for phi in phis:
                    t = channel_trace_residuals(J, K, phi, rho, weights_i=wi)
                    viol7 += not t.dd_ok
    rep.check("channel_approx_constants", viol5 == 0, f"violations={viol5}")
    rep.check("channel_approx_slope", not off_target,
              f"target={want}+-{tol}; off target: {' '.join(off_target) or 'none'}")
    rep.check("channel_trace_constants", viol7 == 0, f"violations={viol7}")
    return rep


def run_entropy(cfg: dict) -> SweepReport:
    sec = _section(cfg, "entropy")
    seed = int(cfg.get("seed", 0))
    rep = SweepReport("entropy", seed)
    J = HalfInt.of(sec.get("J", 0.5))
    i = HalfInt.of(sec.get("i", 0.5))
    Ks = spin_values(sec.get("K", {"from": 2, "to": 40}))
    rho = np.zeros((J.dim, J.dim), dtype=complex)
    rho[0, 0] = 1
    q = []
    for K in Ks:
        r = entropy_expansion(J, K, rho, i=i)
        q.append(r.measured_C)
        rep.records.append(dict(J=str(J), K=str(K), label=r.label, entropy=r.entropy,
                                approximation=r.approximation, measured_C=r.measured_C))
    ratio = _stability(q)
    rep.check("entropy_C_stability", ratio <= float(sec.get("max_ratio", 3.0)), f"max/min={ratio:.6f}")
    mix = sec.get("mixture", {})
    if mix:
        Jm = HalfInt.of(mix.get("J", 1))
        i_vals = [HalfInt(t) for t in range(-Jm.twice, Jm.twice + 1, 2)]
        Cs = []
        for k, K in enumerate(spin_values(mix.get("K", [4]))):
            w = _rng(seed, 17, k).dirichlet(np.ones(len(i_vals)))
            r = entropy_expansion(Jm, K, random_density_matrix(Jm.dim, _rng(seed, 19, k)),
                                  weights_i=dict(zip(i_vals, w)))
            Cs.append(r.measured_C)
            rep.records.append(dict(J=str(Jm), K=str(K), label=r.label, entropy=r.entropy,
                                    approximation=r.approximation, measured_C=r.measured_C))
        rep.check("entropy_mixture_C_finite", bool(np.all(np.isfinite(Cs))), f"max_C={max(Cs):.6g}")
    return rep


RUNNERS: dict[str, Callable[[dict], SweepReport]] = {
    "inversion": run_inversion,
    "products": run_products,
    "traces": run_traces,
    "channels": run_channels,
    "entropy": run_entropy,
}


def run_sweep(name: str, cfg: dict) -> SweepReport:
    if name not in RUNNERS:
        raise ConfigError(f"unknown sweep {name!r}")
    try:
        return RUNNERS[name](cfg)
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc} in '{name}'") from None


def fmt(x: Any) -> str:
    """Locale-independent scientific notation with 17 significant digits for floats."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".16e")
    return str(x)
