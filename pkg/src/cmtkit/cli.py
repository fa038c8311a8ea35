"""Command-line interface: stage-wise pipeline runner.

Subcommands mirror the pipeline stages (construct, stopsets,
design-sampling, align, build-cmt, attack) plus `reproduce`, which runs
everything and writes the report tables, curve CSVs, and figures.  Exit
codes: 0 success, otherwise one code per failing stage class.
"""

from __future__ import annotations

import argparse
import sys

from .errors import CmtkitError, StageError
from .experiments import Pipeline, load_config

STAGE_EXIT_CODES = {
    "config": 2,
    "construct": 3,
    "stopsets": 4,
    "design": 5,
    "align": 6,
    "build-cmt": 7,
    "attack": 8,
    "report": 9,
}


def _common(parser) -> None:
    parser.add_argument("--config", required=True, help="experiment config JSON")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override master seed")
    parser.add_argument("--trials", type=int, default=None,
                        help="override Monte Carlo trial count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmtkit",
        description="Stopping-set-aware LDPC codes and sampling for coded Merkle trees",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("construct", "build the configured LDPC codes"),
        ("stopsets", "enumerate stopping-set catalogs below the bounds"),
        ("design-sampling", "compute greedy orders and LP/greedy strategies"),
        ("align", "write aligned parity-check matrices"),
        ("build-cmt", "build a coded Merkle tree and self-check decode"),
        ("attack", "run Monte Carlo attacks against the analytic values"),
        ("reproduce", "run every stage and write tables, curves, figures"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _common(p)
        if name == "build-cmt":
            p.add_argument("--alg", default=None, help="construction to build the tree from")
            p.add_argument("--block", default=None, help="block file (default: seeded bytes)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.trials is not None:
            cfg["monte_carlo"]["trials"] = args.trials
        pipe = Pipeline(cfg, args.out)
        if args.command == "construct":
            pipe.stage_construct()
        elif args.command == "stopsets":
            pipe.stage_stopsets()
        elif args.command == "design-sampling":
            pipe.stage_design()
        elif args.command == "align":
            pipe.stage_align()
        elif args.command == "build-cmt":
            block = None
            if args.block:
                with open(args.block, "rb") as f:
                    block = f.read()
            pipe.stage_build_cmt(alg=args.alg, block=block)
        elif args.command == "attack":
            pipe.stage_attack()
        elif args.command == "reproduce":
            pipe.run()
    except StageError as e:
        print(f"error: {e}", file=sys.stderr)
        return STAGE_EXIT_CODES.get(e.stage, 1)
    except CmtkitError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"{args.command}: ok ({args.out})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
