"""Command-line entry point: ``crowdcharge`` / ``python -m crowdcharge``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, SimConfig, load_config
from .engine import HEADLINE_ITERATIONS, run_batch
from .protocols import PROTOCOLS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="crowdcharge",
        description="Simulate peer-to-peer wireless crowd charging with battery-aging accounting.",
    )
    p.add_argument("--config", metavar="PATH", help="key = value config file")
    p.add_argument("--protocol", action="append", choices=PROTOCOLS,
                   help="protocol to run; repeat to compare several (default: from config)")
    p.add_argument("--seed", type=int, help="first seed of the batch")
    p.add_argument("--runs", type=int, help="number of replicate runs")
    p.add_argument("--iterations", type=int, help="iterations per run")
    p.add_argument("--out", metavar="DIR", default="out", help="output directory (default: %(default)s)")
    p.add_argument("--emit-contacts", action="store_true", help="also write contacts_<seed>.csv")
    p.add_argument("--summary", action="store_true", help="write summary.csv (and comparison.csv)")
    p.add_argument("--workers", type=int, default=1, help="parallel processes for replicate runs")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config) if args.config else SimConfig()
        overrides = {k: v for k, v in (("seed", args.seed), ("runs", args.runs),
                                       ("iterations", args.iterations)) if v is not None}
        if args.protocol:
            overrides["protocol"] = args.protocol[0]
        config = config.replace(**overrides)
    except ConfigError as exc:
        print(f"crowdcharge: {exc}", file=sys.stderr)
        return 2
    protocols = list(dict.fromkeys(args.protocol or [config.protocol]))
    try:
        batch = run_batch(config, protocols, args.out, emit_contacts=args.emit_contacts,
                          summary=args.summary, workers=args.workers)
    except OSError as exc:
        print(f"crowdcharge: {exc}", file=sys.stderr)
        return 3
    for name, s in batch.protocols.items():
        line = f"{name}: capacity reduction over iterations 1-{HEADLINE_ITERATIONS} = {s.headline:.6f}"
        if name != "balance" and "balance" in batch.protocols:
            line += f" ({100 * batch.reduction_vs(name):.2f}% less than balance)"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
