"""
Command-line entry point.

    dampedeuler simulate CONFIG [--out DIR] [--snapshots t1,t2,...] [--quiet]
    dampedeuler criterion CONFIG
    dampedeuler spectrum --a A --k2 K --eta H[,H2,...]

``simulate`` exits 0 for status ``ok`` or ``singularity`` and 1 for
``FAILED-INVARIANT``; invalid configs exit 2.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ConfigError, parse_config
from .diagnostics import linear_spectrum
from .runner import _fmt, criterion_entries, run_scenario


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _load(path):
    with open(path) as fh:
        return parse_config(fh.read())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dampedeuler", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and write its artifacts")
    sim.add_argument("config")
    sim.add_argument("--out", default="out", help="output directory (default: out)")
    sim.add_argument("--snapshots", type=_floats, default=[], help="snapshot times t1,t2,...")
    sim.add_argument("--quiet", action="store_true", help="do not print the summary")

    crit = sub.add_parser("criterion", help="evaluate the blow-up criterion only")
    crit.add_argument("config")

    spec = sub.add_parser("spectrum", help="eigenvalues of the linearized system")
    spec.add_argument("--a", type=float, required=True, help="friction coefficient")
    spec.add_argument("--k2", type=float, required=True, help="sound speed of the equilibrium")
    spec.add_argument("--eta", type=_floats, required=True,
                      help="wave vector, one component per dimension")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "spectrum":
        for lam in linear_spectrum(np.array(args.eta), a=args.a, k2=args.k2):
            print(f"{lam.real:.17g} {lam.imag:+.17g}j")
        return 0
    try:
        config = _load(args.config)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "criterion":
        entries = criterion_entries(config)
        for key, value in entries.items():
            print(f"{key}={_fmt(value)}")
        return 0
    outcome = run_scenario(config, args.out, snapshot_times=args.snapshots, quiet=args.quiet)
    return 1 if outcome.status == "FAILED-INVARIANT" else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
