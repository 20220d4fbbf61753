"""Command-line interface: ``spinsemi`` or ``python -m spinsemi``.

Exit codes: 0 success, 1 a checked inequality failed, 2 bad usage or input.
Floats are printed in scientific notation with 17 significant digits.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .channels import Channel, vertex_labels
from .entropy_opt import counterexample_scan, min_output_entropy
from .quantize import berezin_spectrum
from .sweeps import SWEEPS, ConfigError, fmt, load_config, run_sweep
from .su2_rep import HalfInt


class UsageError(Exception):
    pass


def _spin(text: str) -> HalfInt:
    try:
        return HalfInt.of(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a half-integer spin: {text!r}") from exc


def parse_weights(text: str) -> dict[HalfInt, float]:
    """'M:w,M:w,...' e.g. '1/2:0.25,3/2:0.75'."""
    out = {}
    try:
        for part in text.split(","):
            M, w = part.split(":")
            out[HalfInt.of(M.strip())] = float(w)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse weights {text!r}; expected M:w pairs separated by commas") from None
    return out


def read_operator(path: str) -> np.ndarray:
    try:
        with open(path) as fh:
            doc = json.load(fh)
        dim = int(doc["dim"])
        entries = np.asarray(doc["entries"], dtype=float)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read operator file {path}: {exc}") from None
    if entries.shape != (dim * dim, 2):
        raise UsageError(f"operator file {path}: expected {dim * dim} [re, im] pairs")
    return (entries[:, 0] + 1j * entries[:, 1]).reshape(dim, dim)


def dump_json(obj) -> str:
    """JSON text with every float rendered by :func:`fmt`."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dump_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dump_json(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            return json.dumps(str(x))
        return fmt(x)
    return json.dumps(str(obj))


def operator_doc(A: np.ndarray) -> dict:
    flat = A.reshape(-1)
    return {"dim": A.shape[0], "entries": [[float(z.real), float(z.imag)] for z in flat]}


def write_csv(rows: list[dict], out) -> None:
    if not rows:
        return
    header = list(rows[0])
    for r in rows[1:]:
        header += [k for k in r if k not in header]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(r[k]) if k in r else "" for k in header])


# -- subcommands ---------------------------------------------------------------

def cmd_spectrum(args) -> int:
    B = berezin_spectrum(args.J)
    write_csv([{"ell": ell, "eigenvalue": float(b)} for ell, b in enumerate(B.eigenvalues)], sys.stdout)
    return 0


def cmd_verify(args) -> int:
    try:
        cfg = load_config(args.config)
        rep = run_sweep(args.sweep, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    buf = io.StringIO()
    buf.write(f"# sweep={rep.sweep} seed={rep.seed}\n")
    for c in rep.checks:
        buf.write(f"# check {c.name} {'PASS' if c.passed else 'FAIL'} {c.detail}\n")
    write_csv(rep.records, buf)
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for c in rep.checks:
        if not c.passed:
            print(f"spinsemi: check {c.name} failed: {c.detail}", file=sys.stderr)
    return 0 if rep.ok else 1


def _channel_from_args(args) -> Channel:
    if (args.M is None) == (args.weights is None):
        raise UsageError("give exactly one of --M and --weights")
    try:
        if args.M is not None:
            return Channel.vertex(args.J, args.K, args.M)
        return Channel.mixture(args.J, args.K, parse_weights(args.weights))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_channel_apply(args) -> int:
    ch = _channel_from_args(args)
    rho = read_operator(args.rho)
    if rho.shape != (ch.J.dim, ch.J.dim):
        raise UsageError(f"operator has dimension {rho.shape[0]}, expected 2J+1 = {ch.J.dim}")
    text = dump_json(operator_doc(ch(rho))) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_entropy_minimize(args) -> int:
    try:
        weights = parse_weights(args.weights) if args.weights else {HalfInt.of(args.K) - HalfInt.of(args.J): 1.0}
        res = min_output_entropy(args.J, args.K, weights, restarts=args.restarts, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    doc = {"value": res.value, "converged": res.converged, "start": res.start,
           "state": [[float(z.real), float(z.imag)] for z in res.state]}
    sys.stdout.write(dump_json(doc) + "\n")
    return 0


def cmd_scan(args) -> int:
    Ks = [HalfInt(t) for t in range(1, HalfInt.of(args.Kmax).twice + 1)]
    Ks = [K for K in Ks if vertex_labels(args.J, K)]
    try:
        rows = counterexample_scan(args.J, Ks, step=args.step, restarts=args.restarts, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = []
    for r in rows:
        out.append({"J": str(r.J), "K": str(r.K),
                    "weights": " ".join(f"{M}:{w:g}" for M, w in r.weights),
                    "min_entropy": r.min_entropy, "coherent": r.coherent, "coherent_i": str(r.coherent_i),
                    "gap": r.gap, "flagged": int(r.flagged), "converged": int(r.converged)})
    write_csv(out, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinsemi", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="Berezin eigenvalues as CSV")
    sp.add_argument("--J", type=_spin, required=True)
    sp.set_defaults(func=cmd_spectrum)

    vp = sub.add_parser("verify", help="run a configured sweep")
    vp.add_argument("sweep", choices=SWEEPS)
    vp.add_argument("--config", help="JSON config; the shipped default when omitted")
    vp.add_argument("--out", help="write the report here instead of stdout")
    vp.set_defaults(func=cmd_verify)

    cp = sub.add_parser("channel", help="channel operations")
    csub = cp.add_subparsers(dest="action", required=True)
    ap_ = csub.add_parser("apply", help="apply a channel to an operator file")
    ap_.add_argument("--J", type=_spin, required=True)
    ap_.add_argument("--K", type=_spin, required=True)
    ap_.add_argument("--M", type=_spin)
    ap_.add_argument("--weights")
    ap_.add_argument("--rho", required=True)
    ap_.add_argument("--out")
    ap_.set_defaults(func=cmd_channel_apply)

    ep = sub.add_parser("entropy", help="minimal output entropy")
    esub = ep.add_subparsers(dest="action", required=True)
    mp = esub.add_parser("minimize")
    mp.add_argument("--J", type=_spin, required=True)
    mp.add_argument("--K", type=_spin, required=True)
    mp.add_argument("--weights", help="M:w pairs; the bottom vertex K-J when omitted")
    mp.add_argument("--restarts", type=int, default=32)
    mp.add_argument("--seed", type=int, default=0)
    mp.set_defaults(func=cmd_entropy_minimize)

    scp = sub.add_parser("scan", help="scans")
    ssub = scp.add_subparsers(dest="action", required=True)
    cx = ssub.add_parser("counterexamples")
    cx.add_argument("--J", type=_spin, required=True)
    cx.add_argument("--Kmax", type=_spin, required=True)
    cx.add_argument("--step", type=float, default=0.25)
    cx.add_argument("--restarts", type=int, default=8)
    cx.add_argument("--seed", type=int, default=0)
    cx.set_defaults(func=cmd_scan)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"spinsemi: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
