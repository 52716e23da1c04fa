"""Command-line entry point: ``hmimo <subcommand> --config FILE``.

On failure a single JSON object ``{"error": <category>, "message": ...}`` is
written to stderr and the process exits with the category's code.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import experiments, plotting
from .config import load_config, preset_names
from .errors import HmimoError


def _common(p):
    p.add_argument("--config", required=True, help="TOML config file or preset name (see `hmimo presets`)")
    p.add_argument("--seed", type=int, help="master RNG seed (overrides config)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per point (overrides config)")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--workers", type=int, help="worker processes; results do not depend on this")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hmimo", description="Wavenumber-domain multi-user HMIMOS simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("eig-spectrum", "receive correlation eigenvalues per spacing"),
        ("se-sweep", "MRT/ZF/MMSE spectral efficiency against SNR"),
        ("theory-vs-sim", "Monte Carlo ZF against the closed-form ZF rate"),
    ]:
        _common(sub.add_parser(name, help=text))
    dump = sub.add_parser("channel-dump", help="write channel realizations in the HCH1 format")
    _common(dump)
    dump.add_argument("-n", "--count", type=int, help="number of realizations (default: dump_count)")
    rp = sub.add_parser("replot", help="re-render a figure from an experiment CSV")
    rp.add_argument("csv")
    rp.add_argument("--output", help="figure path (default: CSV path with .svg suffix)")
    sub.add_parser("presets", help="list shipped configs")
    return parser


def _run(args) -> dict:
    if args.command == "presets":
        return {"presets": preset_names()}
    if args.command == "replot":
        return {"figure": str(plotting.replot(args.csv, args.output))}
    cfg = load_config(args.config).with_overrides(args.seed, args.trials, args.out, args.workers)
    if args.command == "channel-dump":
        return {"dump": str(experiments.channel_dump(cfg, args.count))}
    result = experiments.RUNNERS[args.command](cfg)
    return {"csv": str(result["csv"]), "figure": str(result["figure"]), "skipped": result.get("skipped", [])}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        summary = _run(args)
    except HmimoError as exc:
        print(json.dumps({"error": exc.category, "message": str(exc)}), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(json.dumps({"error": "io", "message": str(exc)}), file=sys.stderr)
        return 4
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
