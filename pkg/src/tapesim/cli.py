"""Command-line front end: ``tapesim ber`` and ``tapesim cfr`` sweeps."""

from __future__ import annotations

import argparse
import sys

from . import harness


def _add_common(sub):
    sub.add_argument("--config", required=True, help="YAML experiment config")
    sub.add_argument("--outdir", default=".", help="directory for CSV/SVG output")
    sub.add_argument("--seed", type=int, default=None, help="master seed override")
    sub.add_argument("--variants", default=None,
                     help="comma-separated variant name filter")
    sub.add_argument("--plot", action="store_true", help="also emit an SVG plot")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="tapesim",
                                     description="Read-channel sweep harness")
    subs = parser.add_subparsers(dest="command", required=True)
    _add_common(subs.add_parser("ber", help="pre-ECC bit error rate sweep"))
    _add_common(subs.add_parser("cfr", help="post-ECC codeword failure rate sweep"))
    args = parser.parse_args(argv)

    cfg = harness.load_config(args.config)
    if args.seed is not None:
        from dataclasses import replace
        cfg = replace(cfg, master_seed=args.seed)
    names = args.variants.split(",") if args.variants else None

    if args.command == "ber":
        points = harness.run_ber_sweep(cfg, variant_filter=names)
    else:
        points = harness.run_cfr_sweep(cfg, variant_filter=names)
    paths = harness.emit_report(points, args.outdir, plot=args.plot)
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
