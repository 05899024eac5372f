"""Command-line entry point: ``fracvolterra run|validate <config>``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import ConfigError
from .config import load_config
from .runner import run_experiment


def _u64(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("need at least one worker")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracvolterra",
                                     description="Monte Carlo experiments for fBm-driven Volterra equations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run an experiment and write its results"),
                        ("validate", "check a config file without running it")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", type=Path)
        p.add_argument("--seed", type=_u64, default=None, help="override the seed in the file")
        if name == "run":
            p.add_argument("--out", type=Path, default=None, help="output directory")
            p.add_argument("--workers", type=_positive, default=1, help="worker processes")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_overrides(seed=args.seed)
    except ConfigError as exc:
        print(f"{args.config}: invalid configuration", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print(f"{args.config}: ok ({cfg.kind.value}, {cfg.paths} paths, config hash {cfg.config_hash()[:12]})")
        return 0
    out = args.out if args.out is not None else Path(cfg.out_dir)
    try:
        manifest = run_experiment(cfg, out, workers=args.workers)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    print(json.dumps(summary, indent=2, sort_keys=True))
    if not manifest.complete:
        print(f"run incomplete: {manifest.error}", file=sys.stderr)
        return 1
    print(f"results written to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
