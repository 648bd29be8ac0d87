"""Command-line front end: ``hyperc2pf {truth-table, sweep, scan-reflection, simulate}``.

Exit status is 0 on success, 1 when a verification fails or the photons are
lost, 2 for usage and parse errors. Every failure prints exactly one line
starting with ``error:`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import hilbert as hb
from . import metrics
from .cavity import CavityParams, ReflectionPair, reflection_coefficient, resonant_pair
from .gate import GateFailure, ScriptError, computational_basis, ideal_transfer_matrix, reference_truth_table, run
from .hilbert import StateError
from .netlist import NetlistError, load_netlist, parse_netlist, shipped_netlist_text
from .svg import line_chart

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(v: float) -> str:
    """Twelve significant digits; negative zero is printed as 0."""
    v = float(v)
    if v == 0:
        v = 0.0
    return f"{v:.12g}"


def _write_csv(rows, header, out) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- truth-table -----------------------------------------------------------------


def _basis_label(conf: dict) -> str:
    return " ".join(f"{pol}{mode}" for pol, mode in conf.values())


def cmd_truth_table(args) -> int:
    try:
        got = ideal_transfer_matrix(atol=args.atol)
    except ScriptError as exc:
        print(f"error: branches disagree: {exc}", file=sys.stderr)
        print("FAIL")
        return EXIT_FAIL
    ref = reference_truth_table()
    for conf, d in zip(computational_basis(), np.diag(got)):
        print(f"{_basis_label(conf)}  {fmt(d.real)} {fmt(d.imag)}")
    err = float(np.max(np.abs(got - ref)))
    ok = err <= args.atol
    print(f"{'PASS' if ok else 'FAIL'} max_abs_error={err:.3e}")
    if not ok:
        print(f"error: truth table differs from two C^2Z gates by {err:.3e}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


# -- sweep -----------------------------------------------------------------------


def cmd_sweep(args) -> int:
    if args.points < 1:
        raise UsageError("--points must be at least 1")
    if args.points == 1:
        if args.xmin != args.xmax:
            raise UsageError("a single point needs --xmin equal to --xmax")
        xs = [args.xmin]
    else:
        if not args.xmax > args.xmin:
            raise UsageError("--xmax must exceed --xmin")
        xs = list(np.linspace(args.xmin, args.xmax, args.points))
    if args.seed is None and os.environ.get("CI") and args.sampler == "mc":
        raise UsageError("--seed is required for Monte Carlo sweeps when CI is set")
    seed = 0 if args.seed is None else args.seed
    if args.sampler == "mc":
        sampler = metrics.MonteCarlo(args.samples or 100_000, seed)
    else:
        sampler = metrics.ProductQuadrature(args.samples or 8, None)
    try:
        table = metrics.sweep(xs, sampler, args.workers, args.definition, args.fidelity_mode)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = [
        (r.x, r.r, r.f_mean, r.f_se, r.eta_numeric, r.eta_numeric_se, r.eta_closed) for r in table.rows
    ]
    _write_csv(rows, table.COLUMNS, args.out)
    if args.svg:
        xs = [r.x for r in table.rows]
        svg = line_chart(
            xs,
            {
                "fidelity": [r.f_mean for r in table.rows],
                "efficiency": [r.eta_numeric for r in table.rows],
                "closed form": [r.eta_closed for r in table.rows],
            },
            xlabel="g / sqrt(kappa gamma)",
            dashed=("closed form",),
        )
        Path(args.svg).write_text(svg, encoding="utf-8")
    return EXIT_OK


# -- scan-reflection -------------------------------------------------------------


def cmd_scan_reflection(args) -> int:
    lo, hi = args.detuning_range
    if args.points < 1:
        raise UsageError("--points must be at least 1")
    if args.points > 1 and not hi > lo:
        raise UsageError("detuning range must be increasing")
    try:
        base = CavityParams(args.g, args.kappa, args.gamma)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    dets = [lo] if args.points == 1 else list(np.linspace(lo, hi, args.points))
    rows = []
    for d in dets:
        # detuning is omega_p - omega_c with the cavity and the NV transition at 0
        r = reflection_coefficient(CavityParams(base.g, base.kappa, base.gamma, omega_p=d))
        rows.append((d, r.real, r.imag, abs(r), math.atan2(r.imag, r.real)))
    _write_csv(rows, ("detuning", "re_r", "im_r", "abs_r", "arg_r"), args.out)
    return EXIT_OK


# -- simulate --------------------------------------------------------------------

_PAIR_RE = re.compile(r"r=([^,]+),([^,]+),r0=([^,]+),([^,]+)$")


def parse_pair(text: str) -> ReflectionPair:
    text = text.strip()
    try:
        if text == "ideal":
            return ReflectionPair.ideal_pair()
        if text.startswith("x="):
            return resonant_pair(float(text[2:]))
        m = _PAIR_RE.match(text)
        if m:
            re_r, im_r, re_0, im_0 = (float(v) for v in m.groups())
            return ReflectionPair(complex(re_r, im_r), complex(re_0, im_0))
    except ValueError as exc:
        raise UsageError(f"bad --pair {text!r}: {exc}") from exc
    raise UsageError(f"bad --pair {text!r}; expected ideal, x=<val> or r=<re>,<im>,r0=<re>,<im>")


def parse_input(text: str, layout) -> hb.HyperState:
    """``angles=t1,...`` (polarization angles of every photon, then spatial) or ``basis=a:R:a1,b:L:b2,...``."""
    kind, _, body = text.partition("=")
    names = [p.name for p in layout.photons]
    try:
        if kind == "angles":
            angles = [float(v) for v in body.split(",")]
            return hb.product_input(hb.InputSpec.from_angles(angles, names), layout)
        if kind == "basis":
            conf = {}
            for item in body.split(","):
                photon, pol, mode = item.split(":")
                conf[photon] = (pol, mode)
            if set(conf) != set(names):
                raise UsageError(f"basis input must name every photon ({', '.join(names)})")
            return hb.basis_state(layout, conf)
    except (ValueError, StateError) as exc:
        raise UsageError(f"bad --input {text!r}: {exc}") from exc
    raise UsageError(f"bad --input {text!r}; expected angles=... or basis=...")


def parse_branch(text: str, measurements):
    if text == "enumerate":
        return "enumerate"
    if text == "sample" or text.startswith("sample="):
        try:
            return ("sample", int(text.partition("=")[2] or 0))
        except ValueError:
            raise UsageError(f"bad --branch {text!r}; the sample seed must be an integer") from None
    if text.startswith("fixed="):
        signs = text[len("fixed=") :].split(",")
        outcomes = tuple(s + "'" if not s.endswith("'") else s for s in signs)
        if len(outcomes) != len(measurements) or any(o not in hb.PRIME_BASIS for o in outcomes):
            raise UsageError(f"--branch fixed= needs {len(measurements)} outcomes from +,- in measurement order")
        return ("fixed", outcomes)
    raise UsageError(f"bad --branch {text!r}")


def cmd_simulate(args) -> int:
    try:
        script = load_netlist(args.netlist) if args.netlist else parse_netlist(shipped_netlist_text())
    except OSError as exc:
        raise UsageError(f"cannot read netlist: {exc}") from exc
    pair = parse_pair(args.pair)
    state = parse_input(args.input, script.layout)
    policy = parse_branch(args.branch, script.measurements)
    outcome = run(state, script, pair, policy)
    if args.dump_checkpoints:
        out = Path(args.dump_checkpoints)
        out.mkdir(parents=True, exist_ok=True)
        for name, st in outcome.checkpoints.items():
            (out / f"step_{name}.json").write_text(json.dumps(hb.snapshot(st)) + "\n", encoding="utf-8")
    report = {
        "pre_measurement_norm2": float(hb.norm(outcome.pre_measurement) ** 2),
        "branches": [
            {
                "outcomes": b.record.outcomes,
                "probability": b.record.probability,
                "photonic": hb.snapshot(b.photonic) if b.photonic is not None else None,
            }
            for b in outcome.branches
        ],
    }
    if not script.measurements:
        report["state"] = hb.snapshot(outcome.pre_measurement)
    print(json.dumps(report))
    return EXIT_OK


# -- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hyperc2pf", description="Hyper-parallel C^2PF gate simulator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("truth-table", help="check the ideal gate against two C^2Z gates")
    t.add_argument("--atol", type=float, default=1e-10)
    t.set_defaults(func=cmd_truth_table)

    s = sub.add_parser("sweep", help="average fidelity and efficiency versus coupling ratio")
    s.add_argument("--xmin", type=float, default=0.5)
    s.add_argument("--xmax", type=float, default=5.0)
    s.add_argument("--points", type=int, default=10)
    s.add_argument("--sampler", choices=("mc", "quad"), default="mc")
    s.add_argument("--samples", type=int, default=None, help="MC samples (default 1e5) or quadrature points per angle (default 8)")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--definition", choices=metrics.DEFINITIONS, default="all_survive")
    s.add_argument("--fidelity-mode", choices=("pre", "post"), default="pre")
    s.add_argument("--out", default="-")
    s.add_argument("--svg", default=None)
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser("scan-reflection", help="reflection coefficient versus probe detuning")
    r.add_argument("--g", type=float, required=True)
    r.add_argument("--kappa", type=float, required=True)
    r.add_argument("--gamma", type=float, required=True)
    r.add_argument("--detuning-range", type=float, nargs=2, metavar=("LO", "HI"), default=(-1.0, 1.0))
    r.add_argument("--points", type=int, default=201)
    r.add_argument("--out", default="-")
    r.set_defaults(func=cmd_scan_reflection)

    m = sub.add_parser("simulate", help="run a netlist on one input")
    m.add_argument("--netlist", default=None, help="defaults to the bundled gate")
    m.add_argument("--pair", default="ideal")
    m.add_argument("--input", required=True)
    m.add_argument("--dump-checkpoints", default=None)
    m.add_argument("--branch", default="enumerate")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NetlistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GateFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
