"""Command-line entry point: ``gamespace <stage> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

from . import __version__
from .config import SCALES, ConfigError, load_config

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

COMMANDS = ("attributes", "fingerprint", "performance", "roundrobin", "analyze", "plot")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment config")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--scale", choices=SCALES, default="desk", help="preset the config overlays")
    common.add_argument("--resume", action="store_true", help="skip units and stages already completed")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="gamespace", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("attributes", parents=[common], help="game-attribute feature rows")
    sub.add_parser("fingerprint", parents=[common], help="NTBEA fingerprints and their feature rows")
    sub.add_parser("performance", parents=[common], help="win rates of the roster against fixed opponents")
    sub.add_parser("roundrobin", parents=[common], help="round-robin win rates among the roster")
    an = sub.add_parser("analyze", parents=[common], help="statistics, report CSVs and plots")
    an.add_argument("--spaces", nargs="+", choices=("attributes", "ntbea", "performance", "roundrobin"),
                    help="feature spaces to analyse (default: all present)")
    an.add_argument("--cca", nargs=2, action="append", metavar=("SPACE_A", "SPACE_B"),
                    help="CCA between two spaces (repeatable; default: pairs from the config)")
    an.add_argument("--no-plots", action="store_true")
    sub.add_parser("plot", parents=[common], help="re-render SVG figures from analysis outputs")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.scale, args.seed, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    from . import pipeline

    try:
        ctx = pipeline.Context(cfg, resume=args.resume)
        with warnings.catch_warnings():
            if not args.verbose:
                warnings.simplefilter("ignore")
            if args.command == "attributes":
                out = pipeline.run_attributes(ctx)
            elif args.command == "fingerprint":
                out = pipeline.run_fingerprint(ctx)
            elif args.command == "performance":
                out = pipeline.run_performance(ctx)
            elif args.command == "roundrobin":
                out = pipeline.run_roundrobin(ctx)
            elif args.command == "analyze":
                pairs = [list(p) for p in args.cca] if args.cca else None
                out = pipeline.run_analyze(ctx, args.spaces, pairs, plots=not args.no_plots)
            else:
                out = pipeline.run_plot(ctx)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if isinstance(out, list):
        print(f"{args.command}: wrote {len(out)} files under {ctx.out}")
    else:
        print(f"{args.command}: {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
