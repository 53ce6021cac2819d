"""Command-line front-end: compute, certify, sample, povm, fixture.

Exit codes: 0 success, 1 runtime failure (bad file, bad data), 2 usage errors.
Human-readable numbers use 6 significant digits; JSON carries full precision.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .assist import (
    _complex_matrix_json,
    cflat,
    csharp,
    locality_certificate,
    report,
)
from .mc import McConfig, run_batch
from .povm import povm_optimize
from .state import (
    FIXTURE_NAMES,
    FourQubitPure,
    fixture,
    load_state,
    pair_permutation,
    permute_parties,
    save_state,
)

_PAIR_CHOICES = ("AB", "AC", "AD", "BC", "BD", "CD")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _load(state_arg: str) -> FourQubitPure:
    """Resolve --state: an existing file first, then a fixture name."""
    if os.path.exists(state_arg):
        return load_state(state_arg)
    if state_arg in FIXTURE_NAMES:
        return fixture(state_arg)
    raise ValueError(
        f"state {state_arg!r} is neither a readable file nor one of {FIXTURE_NAMES}"
    )


def _print_matrix(name: str, m: np.ndarray) -> None:
    rows = []
    for row in np.asarray(m):
        rows.append("[" + ", ".join(f"{c.real:.6g}{c.imag:+.6g}j" for c in row) + "]")
    print(f"{name} = [{', '.join(rows)}]")


def cmd_compute(args) -> int:
    psi = _load(args.state)
    if args.pair:
        psi = permute_parties(psi, pair_permutation(args.pair))
    rep = report(psi)
    if args.json:
        print(json.dumps(rep))
        return 0
    print(f"csharp = {_fmt(rep['csharp'])}")
    print(f"cflat = {_fmt(rep['cflat'])}")
    gain = rep["relative_gain"]
    print(f"relative_gain = {_fmt(gain) if gain is not None else 'n/a'}")
    print(f"verdict = {rep['verdict']}")
    return 0


def _certificate_json(cert) -> dict:
    out = {
        "rank_class": cert.rank_class,
        "sigma": [float(s) for s in cert.sigma],
        "phi": cert.phi,
        "pattern_residual": None if np.isinf(cert.pattern_residual) else cert.pattern_residual,
        "f_phases": None if cert.f_phases is None else [float(p) for p in cert.f_phases],
        "verdict": cert.verdict,
    }
    basis = cert.local_basis
    if basis is not None:
        b = {"w_c": _complex_matrix_json(basis.w_c)}
        if basis.w_d is not None:
            b["w_d"] = _complex_matrix_json(basis.w_d)
        else:
            v0, v1 = basis.feed_forward
            b["v_d0"] = _complex_matrix_json(v0)
            b["v_d1"] = _complex_matrix_json(v1)
        out["basis"] = b
    return out


def cmd_certify(args) -> int:
    psi = _load(args.state)
    cert = locality_certificate(psi)
    if args.json:
        print(json.dumps(_certificate_json(cert)))
        return 0
    print(f"rank_class = {cert.rank_class}")
    print(f"phi = {_fmt(cert.phi) if cert.phi is not None else 'n/a'}")
    print(f"pattern_residual = {_fmt(cert.pattern_residual)}")
    print(f"verdict = {cert.verdict}")
    basis = cert.local_basis
    if basis is not None:
        _print_matrix("w_c", basis.w_c)
        if basis.w_d is not None:
            _print_matrix("w_d", basis.w_d)
        else:
            v0, v1 = basis.feed_forward
            _print_matrix("v_d0", v0)
            _print_matrix("v_d1", v1)
    return 0


def cmd_sample(args) -> int:
    cfg = McConfig(
        n_states=args.n,
        seed=args.seed,
        six_pair=args.six_pair,
        hist_bins=args.bins,
        workers=args.workers,
    )
    stats = run_batch(cfg, out_dir=args.out)
    print(f"mean_csharp = {_fmt(stats.mean_csharp)}")
    print(f"mean_cflat = {_fmt(stats.mean_cflat)}")
    print(f"mean_relative_gain = {_fmt(stats.mean_relative_gain)}")
    return 0


def cmd_povm(args) -> int:
    psi = _load(args.state)
    res = povm_optimize(psi, party=args.party, restarts=args.restarts, seed=args.seed)
    base = cflat(psi).value
    if args.json:
        print(
            json.dumps(
                {
                    "value": res.value,
                    "party": args.party,
                    "cflat": base,
                    "gap_over_cflat": res.value - base,
                    "elements": res.povm.to_json(),
                }
            )
        )
        return 0
    print(f"value = {_fmt(res.value)} (lower bound, party {args.party} first)")
    print(f"cflat = {_fmt(base)}")
    print(f"gap_over_cflat = {_fmt(res.value - base)}")
    for k, e in enumerate(res.povm.elements):
        _print_matrix(f"E{k + 1}", e)
    return 0


def cmd_fixture(args) -> int:
    save_state(args.out, fixture(args.name))
    print(f"wrote {args.name} to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coassist",
        description="Assisted-concurrence calculations for four-qubit pure states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="csharp, cflat, gain, and verdict for a state")
    p.add_argument("--state", required=True, help="state file, or a fixture name")
    p.add_argument("--pair", choices=_PAIR_CHOICES, help="keeper pair (default AB)")
    p.add_argument("--json", action="store_true", help="emit the full report as JSON")
    p.set_defaults(fn=cmd_compute)

    p = sub.add_parser("certify", help="locality certificate for a state")
    p.add_argument("--state", required=True, help="state file, or a fixture name")
    p.add_argument("--json", action="store_true", help="emit the certificate as JSON")
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("sample", help="Monte-Carlo campaign over random states")
    p.add_argument("--n", type=int, required=True, help="number of states")
    p.add_argument("--seed", type=int, required=True, help="campaign seed")
    p.add_argument("--six-pair", action="store_true", help="also average over keeper pairs")
    p.add_argument("--out", help="directory for records.csv, stats.json, histograms")
    p.add_argument("--bins", type=int, default=60, help="histogram bins (default 60)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("povm", help="four-outcome POVM search on one assistant")
    p.add_argument("--state", required=True, help="state file, or a fixture name")
    p.add_argument("--party", choices=("C", "D"), default="C", help="measuring party")
    p.add_argument("--restarts", type=int, default=64, help="optimizer restarts")
    p.add_argument("--seed", type=int, default=0, help="restart seed")
    p.add_argument("--json", action="store_true", help="emit the result as JSON")
    p.set_defaults(fn=cmd_povm)

    p = sub.add_parser("fixture", help="write a named example state to a file")
    p.add_argument("name", choices=FIXTURE_NAMES, help="fixture name")
    p.add_argument("--out", required=True, help="output state file")
    p.set_defaults(fn=cmd_fixture)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
