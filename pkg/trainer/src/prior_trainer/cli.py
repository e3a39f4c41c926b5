"""Command line front end: train on a pair file, export dense priors.

Exit codes: 0 success, 1 bad input or usage, 2 training divergence.
"""

from __future__ import annotations

import argparse
import json
import sys

import yaml

from .data import PairFormatError, load_bfft, read_pair_file
from .export import export_prior
from .maps import MapError, load_map
from .training import (
    TrainConfig,
    TrainingDivergedError,
    load_checkpoint,
    load_config,
    save_checkpoint,
    train,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _emit(args, stats: dict) -> None:
    if args.json_stats:
        print(json.dumps(stats))
    else:
        for key, value in stats.items():
            print(f"{key}: {value}")


def _cmd_train(args) -> int:
    config = load_config(args.config) if args.config else TrainConfig()
    pairs = load_bfft(args.pairs)
    _, _, pair_resolution, _ = read_pair_file(args.pairs)
    if abs(pair_resolution - config.resolution) > 1e-9:
        print(f"warning: pair file resolution {pair_resolution} differs "
              f"from config resolution {config.resolution}", file=sys.stderr)
    result = train(pairs, config)
    save_checkpoint(result, args.out)
    _emit(args, {"command": "train", "pairs": len(pairs),
                 "epochs": config.epochs, "final_loss": result.losses[-1],
                 "out": str(args.out)})
    return 0


def _cmd_export_prior(args) -> int:
    result = load_checkpoint(args.model)
    occupancy = load_map(args.map)
    resolution = (args.resolution if args.resolution is not None
                  else result.config.resolution)
    width, height = export_prior(result.model, occupancy, resolution,
                                 args.out)
    _emit(args, {"command": "export-prior", "width": width, "height": height,
                 "resolution": resolution, "out": str(args.out)})
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="prior-trainer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit the prior network to a pair file")
    p.set_defaults(handler=_cmd_train)
    p.add_argument("--pairs", required=True, help="BFFT pair container")
    p.add_argument("--config", help="YAML: epochs, lr, seed, k, resolution")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--json-stats", action="store_true")

    p = sub.add_parser("export-prior",
                       help="run the network over every cell of a map")
    p.set_defaults(handler=_cmd_export_prior)
    p.add_argument("--model", required=True, help="checkpoint from train")
    p.add_argument("--map", required=True, help="occupancy map YAML or image")
    p.add_argument("--resolution", type=float,
                   help="override the checkpoint's grid resolution")
    p.add_argument("--out", required=True, help="BFF1 output path")
    p.add_argument("--json-stats", action="store_true")

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except TrainingDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, PairFormatError, MapError, yaml.YAMLError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
