"""Batch command-line front end.

Subcommands mirror the library workflows: build frequency or posterior
grids from trajectories, trace data-efficiency curves, evaluate models,
and export visualization or training artifacts. Exit codes: 0 success,
1 input error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np
import yaml

from . import formats
from .evaluate import (
    DEFAULT_CHUNK,
    EvaluationError,
    dataset_likelihood,
    likelihood_curve,
    upper_bound,
    write_curve_csv,
)
from .grids import Geometry, MapFormatError, OccupancyGrid, load_occupancy_map
from .model import (
    CountGrid,
    FusionParams,
    GeometryMismatchError,
    accumulate_set,
    build_bff,
    floor_field,
)
from .priors import GridValidationError, load_prior, uniform_prior, write_prior
from .render import curve_svg, quiver_entries, quiver_svg
from .synth import sample_walks
from .trajectories import (
    AdapterConfig,
    ObservationSet,
    TrajectoryParseError,
    derive_headings,
    load_adapter_config,
    parse_atc,
    parse_canonical,
    write_canonical,
)
from .training_data import DEFAULT_MIN_COUNT, export_pairs

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VALIDATION = 2


class UsageError(Exception):
    """Flag combination or file naming the front end cannot act on."""


_INPUT_ERRORS = (OSError, MapFormatError, formats.FormatError,
                 TrajectoryParseError, yaml.YAMLError, UsageError)
_VALIDATION_ERRORS = (GeometryMismatchError, EvaluationError,
                      GridValidationError)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; here 2 means a validation
    failure, so usage problems are remapped to the input-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _emit(args, stats: dict) -> None:
    if args.json_stats:
        print(json.dumps(stats))
    else:
        for key, value in stats.items():
            print(f"{key}: {value}")


def _add_traj_flags(parser, required: bool = True) -> None:
    parser.add_argument("--traj", action="append", metavar="CSV",
                        required=required, default=None if required else [],
                        help="trajectory file (repeatable)")
    parser.add_argument("--traj-format", choices=("canonical", "atc"),
                        default="canonical")
    parser.add_argument("--adapter-config", metavar="YAML",
                        help="column layout for --traj-format atc")
    parser.add_argument("--derive-headings", action="store_true",
                        help="compute headings from consecutive positions")
    parser.add_argument("--min-step", type=float, default=0.05,
                        help="minimum displacement for derived headings (m)")


def _load_observations(args) -> ObservationSet:
    config = None
    if args.adapter_config:
        config = load_adapter_config(args.adapter_config)
    sets = []
    for path in args.traj:
        if args.traj_format == "atc" or config is not None:
            sets.append(parse_atc(path, config or AdapterConfig()))
        else:
            sets.append(parse_canonical(path))
    for parsed in sets:
        for message in parsed.warnings:
            _warn(message)
    observations = ObservationSet.concat(sets)
    if args.derive_headings:
        observations = derive_headings(observations, min_step=args.min_step)
    if len(observations) and bool(observations.missing_delta.any()):
        raise UsageError(
            "observations lack headings; pass --derive-headings"
        )
    return observations


def _model_geometry(occupancy: OccupancyGrid, resolution: float) -> Geometry:
    return Geometry.covering(occupancy.geometry, resolution)


def _accumulate(geometry: Geometry, observations: ObservationSet) -> CountGrid:
    counts = CountGrid.empty(geometry)
    accumulate_set(counts, observations)
    if len(observations) and counts.skipped == len(observations):
        raise EvaluationError(
            f"all {len(observations)} observations fall outside the grid; "
            f"map and trajectory frames probably disagree"
        )
    return counts


def _count_stats(counts: CountGrid, observations: ObservationSet) -> dict:
    return {
        "cells": counts.geometry.width * counts.geometry.height,
        "visited_cells": int(np.count_nonzero(counts.totals())),
        "observations": len(observations),
        "scored": len(observations) - counts.skipped,
        "skipped": counts.skipped,
    }


def _write_grid_outputs(args, grid, counts: CountGrid) -> None:
    write_prior(grid, args.out)
    formats.write_bfc1(f"{args.out}.counts", counts.geometry, counts.counts,
                       annotations={"skipped": str(counts.skipped)})


def _cmd_build_ff(args) -> int:
    occupancy = load_occupancy_map(args.map)
    geometry = _model_geometry(occupancy, args.resolution)
    observations = _load_observations(args)
    if not len(observations):
        _warn("no observations; writing a uniform grid")
    counts = _accumulate(geometry, observations)
    _write_grid_outputs(args, floor_field(counts), counts)
    _emit(args, {"command": "build-ff", **_count_stats(counts, observations),
                 "out": str(args.out)})
    return EXIT_OK


def _resolve_prior(args, occupancy: OccupancyGrid | None):
    """Prior grid (or None) plus the geometry counting happens on."""
    if args.prior:
        prior = load_prior(args.prior)
        if prior.repaired_cells:
            _warn(f"prior: renormalized {prior.repaired_cells} cells")
        if args.resolution is not None and occupancy is not None:
            expected = _model_geometry(occupancy, args.resolution)
            if prior.geometry != expected:
                raise GeometryMismatchError(
                    f"prior geometry {prior.geometry} does not match map "
                    f"frame {expected}"
                )
        return prior, prior.geometry
    if occupancy is None or args.resolution is None:
        raise UsageError("--map and --resolution are required without --prior")
    geometry = _model_geometry(occupancy, args.resolution)
    if args.uniform_prior:
        return uniform_prior(geometry), geometry
    return None, geometry


def _cmd_build_bff(args) -> int:
    if bool(args.prior) == args.uniform_prior:
        raise UsageError("pass exactly one of --prior, --uniform-prior")
    occupancy = load_occupancy_map(args.map)
    prior, geometry = _resolve_prior(args, occupancy)
    observations = _load_observations(args)
    counts = _accumulate(geometry, observations)
    grid = build_bff(counts, prior, FusionParams(alpha=args.alpha))
    _write_grid_outputs(args, grid, counts)
    _emit(args, {"command": "build-bff", "alpha": args.alpha,
                 **_count_stats(counts, observations), "out": str(args.out)})
    return EXIT_OK


def _cmd_curve(args) -> int:
    if sum((bool(args.prior), args.uniform_prior, args.no_prior)) != 1:
        raise UsageError(
            "pass exactly one of --prior, --uniform-prior, --no-prior"
        )
    occupancy = load_occupancy_map(args.map) if args.map else None
    prior, geometry = _resolve_prior(args, occupancy)
    observations = _load_observations(args)
    dataset = args.dataset or os.path.basename(args.traj[0])
    if prior is not None:
        result = likelihood_curve(observations, prior=prior,
                                  params=FusionParams(alpha=args.alpha),
                                  chunk_size=args.chunk, dataset=dataset)
    else:
        result = likelihood_curve(observations, geometry=geometry,
                                  chunk_size=args.chunk, dataset=dataset)
    write_curve_csv(result, args.out)
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(curve_svg(result))
    _emit(args, {"command": "curve", "points": len(result.points),
                 "final_likelihood": result.points[-1][1],
                 "upper_bound": result.upper_bound,
                 "skipped": result.skipped, "out": str(args.out)})
    return EXIT_OK


def _cmd_eval(args) -> int:
    model = load_prior(args.model)
    observations = _load_observations(args)
    result = dataset_likelihood(model, observations)
    _emit(args, {"command": "eval", "likelihood": result.value,
                 "scored": result.scored, "skipped": result.skipped})
    return EXIT_OK


def _cmd_upper_bound(args) -> int:
    occupancy = load_occupancy_map(args.map)
    geometry = _model_geometry(occupancy, args.resolution)
    observations = _load_observations(args)
    result = upper_bound(observations, geometry)
    _emit(args, {"command": "upper-bound", "likelihood": result.value,
                 "scored": result.scored, "skipped": result.skipped})
    return EXIT_OK


def _cmd_export_quiver(args) -> int:
    model = load_prior(args.model)
    entries = quiver_entries(model, args.min_prob)
    suffix = os.path.splitext(str(args.out))[1].lower()
    if suffix == ".csv":
        with open(args.out, "w") as fh:
            fh.write("x,y,direction_index,angle,probability\n")
            for x, y, index, angle, prob in entries:
                fh.write(f"{x!r},{y!r},{index},{angle!r},{prob!r}\n")
    elif suffix == ".svg":
        occupancy = load_occupancy_map(args.map) if args.map else None
        with open(args.out, "w") as fh:
            fh.write(quiver_svg(model, occupancy, args.min_prob))
    else:
        raise UsageError(f"{args.out}: output must end in .csv or .svg")
    _emit(args, {"command": "export-quiver", "entries": len(entries),
                 "out": str(args.out)})
    return EXIT_OK


def _cmd_make_training_data(args) -> int:
    occupancy = load_occupancy_map(args.map)
    if args.counts:
        geometry, raw, _ = formats.read_bfc1(args.counts)
        counts = CountGrid(geometry, raw)
    elif args.traj:
        if args.resolution is None:
            raise UsageError("--traj accumulation needs --resolution")
        observations = _load_observations(args)
        counts = _accumulate(_model_geometry(occupancy, args.resolution),
                             observations)
    else:
        raise UsageError("make-training-data needs --counts or --traj")
    pairs = export_pairs(counts, occupancy, args.out, args.window_resolution,
                         min_count=args.min_count)
    _emit(args, {"command": "make-training-data", "pairs": pairs,
                 "min_count": args.min_count, "out": str(args.out)})
    return EXIT_OK


def _cmd_synth(args) -> int:
    occupancy = load_occupancy_map(args.map)
    model = load_prior(args.model)
    observations = sample_walks(model, occupancy, args.walkers, args.steps,
                                args.seed)
    write_canonical(observations, args.out)
    _emit(args, {"command": "synth", "walkers": args.walkers,
                 "observations": len(observations), "out": str(args.out)})
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="pedflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, handler, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(handler=handler)
        p.add_argument("--json-stats", action="store_true",
                       help="print stats as one JSON object")
        return p

    p = command("build-ff", _cmd_build_ff,
                help="accumulate trajectories into a frequency grid")
    p.add_argument("--map", required=True)
    p.add_argument("--resolution", type=float, required=True)
    p.add_argument("--out", required=True)
    _add_traj_flags(p)

    p = command("build-bff", _cmd_build_bff,
                help="fuse trajectories with a prior into a posterior grid")
    p.add_argument("--map", required=True)
    p.add_argument("--prior")
    p.add_argument("--uniform-prior", action="store_true")
    p.add_argument("--resolution", type=float)
    p.add_argument("--alpha", type=float, default=5.0)
    p.add_argument("--out", required=True)
    _add_traj_flags(p)

    p = command("curve", _cmd_curve,
                help="likelihood of prefix-trained models on the full set")
    p.add_argument("--map")
    p.add_argument("--prior")
    p.add_argument("--uniform-prior", action="store_true")
    p.add_argument("--no-prior", action="store_true")
    p.add_argument("--resolution", type=float)
    p.add_argument("--alpha", type=float, default=5.0)
    p.add_argument("--chunk", type=int, default=DEFAULT_CHUNK)
    p.add_argument("--dataset", default="")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    _add_traj_flags(p)

    p = command("eval", _cmd_eval, help="score a model on a trajectory set")
    p.add_argument("--model", required=True)
    _add_traj_flags(p)

    p = command("upper-bound", _cmd_upper_bound,
                help="score the set under its own frequency model")
    p.add_argument("--map", required=True)
    p.add_argument("--resolution", type=float, required=True)
    _add_traj_flags(p)

    p = command("export-quiver", _cmd_export_quiver,
                help="export per-cell arrows as CSV or SVG")
    p.add_argument("--model", required=True)
    p.add_argument("--map", help="grayscale underlay for SVG output")
    p.add_argument("--min-prob", type=float, default=0.0)
    p.add_argument("--out", required=True)

    p = command("make-training-data", _cmd_make_training_data,
                help="export (window, direction target) training pairs")
    p.add_argument("--map", required=True)
    p.add_argument("--counts", help="counts sidecar from build-ff")
    p.add_argument("--resolution", type=float)
    p.add_argument("--window-resolution", type=float, required=True)
    p.add_argument("--min-count", type=int, default=DEFAULT_MIN_COUNT)
    p.add_argument("--out", required=True)
    _add_traj_flags(p, required=False)

    p = command("synth", _cmd_synth,
                help="sample synthetic walkers from a model")
    p.add_argument("--map", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--walkers", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
