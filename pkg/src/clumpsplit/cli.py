"""Command-line interface.

Subcommands::

    clumpsplit segment IMAGE     grey image -> threshold -> separated cells
    clumpsplit split MASK        binary mask -> separated cells
    clumpsplit evaluate PRED TRUTH
    clumpsplit synth             synthetic overlapping-ellipse scene

Every option can also be given through an environment variable named
``CLUMPSPLIT_<OPTION>`` (upper case, dashes as underscores); command-line
values win. Exit codes: 0 ok, 1 I/O error, 2 bad configuration,
3 unimodal histogram.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import files
from .evaluation import EmptyEvaluation, VacReport, match
from .pipeline import PipelineConfig, run
from .splitter import SplitConfig
from .synthetic import PackingError, generate_scene
from .thresholding import UnimodalHistogram

log = logging.getLogger("clumpsplit")

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_UNIMODAL = 0, 1, 2, 3
ENV_PREFIX = "CLUMPSPLIT_"


class ConfigError(ValueError):
    pass


def _split_options(p):
    g = p.add_argument_group("splitting")
    d = SplitConfig()
    g.add_argument("--bandwidth", type=int, default=d.bandwidth, help="boundary low-pass bins W (default %(default)s)")
    g.add_argument("--half-window", type=int, default=d.half_window, help="SDD half window N (default %(default)s)")
    g.add_argument("--prominence-floor", type=float, default=d.prominence_floor)
    g.add_argument("--min-concave-area", type=int, default=d.min_concave_area)
    g.add_argument("--min-concave-fraction", type=float, default=d.min_concave_fraction)
    g.add_argument("--min-concave-depth", type=float, default=d.min_concave_depth)
    g.add_argument("--concave-connectivity", type=int, default=d.concave_connectivity)
    g.add_argument("--min-piece-fraction", type=float, default=d.min_piece_fraction)
    g.add_argument("--min-alignment", type=float, default=d.min_alignment)
    g.add_argument("--max-depth", type=int, default=d.max_depth)
    g.add_argument("--workers", type=int, default=1, help="threads across clumps")


def _output_options(p):
    p.add_argument("-o", "--output-dir", default=".", help="directory for results (default: cwd)")
    p.add_argument("--prefix", default=None, help="file name prefix (default: input stem)")
    p.add_argument("--format", choices=("png", "csv"), default="png", help="label map format")
    p.add_argument("--overlay", action="store_true", help="also write an RGB overlay PNG")
    p.add_argument("--invert", action="store_true", help="cells are darker than the background")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clumpsplit", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", parents=[common], help="threshold a grey image and separate its cells")
    p.add_argument("image")
    p.add_argument("--threshold", type=int, default=None, help="fixed grey threshold instead of SDD selection")
    p.add_argument("--hist-bandwidth", type=int, default=16)
    p.add_argument("--hist-half-window", type=int, default=5)
    _output_options(p)
    _split_options(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("split", parents=[common], help="separate the clumps of a binary mask")
    p.add_argument("mask")
    p.add_argument("--threshold", type=int, default=None, help="binarise a non-binary input as value > T")
    _output_options(p)
    _split_options(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("evaluate", parents=[common], help="score a predicted label map against the truth")
    p.add_argument("pred", nargs="?")
    p.add_argument("truth", nargs="?")
    p.add_argument(
        "--counts", type=int, nargs=5, metavar=("SEG", "SPLIT", "MERGE", "ADD", "MISSING"),
        help="score given counts instead of label maps",
    )
    p.add_argument("-o", "--output", default=None, help="JSON file (default: stdout)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic scene and its truth labels")
    p.add_argument("--count", type=int, default=3)
    p.add_argument("--size", type=int, nargs=2, default=(512, 512), metavar=("H", "W"))
    p.add_argument("--semi-axes", type=float, nargs=2, default=(15.0, 40.0), metavar=("MIN", "MAX"))
    p.add_argument("--overlap", type=float, nargs=2, default=(0.8, 1.2), metavar=("MIN", "MAX"))
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output-dir", default=".")
    p.add_argument("--prefix", default="scene")
    p.set_defaults(func=cmd_synth)
    return parser


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices.values()
    return ()


def apply_env_defaults(parser, environ=None):
    """Take option defaults from ``CLUMPSPLIT_*`` variables."""
    environ = os.environ if environ is None else environ
    for p in [parser, *_subparsers(parser)]:
        for action in p._actions:
            if not action.option_strings or action.dest in ("help", "version"):
                continue
            raw = environ.get(ENV_PREFIX + action.dest.upper())
            if raw is None:
                continue
            if isinstance(action, argparse._StoreTrueAction):
                value = raw.strip().lower() in ("1", "true", "yes", "on")
            elif isinstance(action, argparse._CountAction):
                value = int(raw)
            elif action.nargs not in (None, "?"):
                conv = action.type or str
                try:
                    value = [conv(v) for v in raw.replace(",", " ").split()]
                except ValueError as exc:
                    p.error(f"{ENV_PREFIX}{action.dest.upper()}: {exc}")
            else:
                value = raw  # argparse converts string defaults with action.type
            p.set_defaults(**{action.dest: value})


def split_config(args) -> SplitConfig:
    try:
        return SplitConfig(
            bandwidth=args.bandwidth,
            half_window=args.half_window,
            prominence_floor=args.prominence_floor,
            min_concave_area=args.min_concave_area,
            min_concave_fraction=args.min_concave_fraction,
            min_concave_depth=args.min_concave_depth,
            concave_connectivity=args.concave_connectivity,
            min_piece_fraction=args.min_piece_fraction,
            min_alignment=args.min_alignment,
            max_depth=args.max_depth,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _check_workers(args):
    if args.workers < 1:
        raise ConfigError("workers must be >= 1")


def _outputs(args, source):
    out = Path(args.output_dir)
    if not out.is_dir():
        raise OSError(f"output directory {out} does not exist")
    prefix = args.prefix or Path(source).stem
    ext = "png" if args.format == "png" else "csv"
    return {
        "labels": out / f"{prefix}_labels.{ext}",
        "cells": out / f"{prefix}_cells.csv",
        "report": out / f"{prefix}_report.json",
        "overlay": out / f"{prefix}_overlay.png",
    }


def _write_result(args, source, background, result, extra=None):
    paths = _outputs(args, source)
    files.write_labels(paths["labels"], result.label_map, args.format)
    files.write_cells_csv(paths["cells"], result.cells)
    report = {"input": str(source), **result.to_dict(), **(extra or {})}
    report["config"]["workers"] = args.workers
    report["config"]["format"] = args.format
    reasons = {}
    for rec in result.traces:
        if rec.reason:
            reasons[rec.reason] = reasons.get(rec.reason, 0) + 1
    report["reasons"] = reasons
    paths["report"].write_text(json.dumps(report, indent=2))
    written = [paths["labels"], paths["cells"], paths["report"]]
    if args.overlay:
        files.overlay(background, result.cells, result.traces).save(paths["overlay"])
        written.append(paths["overlay"])
    for p in written:
        log.info("wrote %s", p)
    print(f"{source}: {result.n_clumps} clumps -> {len(result.cells)} cells")
    return EXIT_OK


def cmd_segment(args) -> int:
    cfg = split_config(args)
    _check_workers(args)
    try:
        pcfg = PipelineConfig(cfg, args.threshold, args.hist_bandwidth, args.hist_half_window, args.invert)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    img = files.read_gray8(args.image)
    result = run(img, pcfg, workers=args.workers)
    return _write_result(args, args.image, img, result)


def binarize(img, threshold=None) -> np.ndarray:
    """Boolean mask from a two-valued image, or ``img > threshold``."""
    img = np.asarray(img)
    if threshold is not None:
        if not 0 <= threshold <= np.iinfo(np.uint16).max:
            raise ConfigError("threshold out of range")
        return img > threshold
    if img.dtype == bool:
        return img
    values = np.unique(img)
    if len(values) > 2 or (len(values) == 2 and values[0] != 0):
        raise ConfigError("mask is not binary; pass --threshold to binarise it")
    return img > 0


def cmd_split(args) -> int:
    cfg = split_config(args)
    _check_workers(args)
    img = files.read_image(args.mask)
    mask = binarize(img, args.threshold)
    if args.invert:
        mask = ~mask
    result = run(mask, PipelineConfig(cfg), workers=args.workers)
    return _write_result(args, args.mask, mask, result, {"threshold": args.threshold})


def cmd_evaluate(args) -> int:
    if args.counts is not None:
        if args.pred or args.truth:
            raise ConfigError("give either label maps or --counts, not both")
        if min(args.counts) < 0:
            raise ConfigError("counts must be non-negative")
        report = VacReport(*args.counts)
    else:
        if not (args.pred and args.truth):
            raise ConfigError("evaluate needs PRED and TRUTH label maps (or --counts)")
        pred = files.read_labels(args.pred)
        truth = files.read_labels(args.truth)
        if pred.shape != truth.shape:
            raise ConfigError(f"shape mismatch: {pred.shape} vs {truth.shape}")
        report = match(pred, truth)
    try:
        text = json.dumps(report.to_dict(), indent=2)
    except EmptyEvaluation as exc:
        raise ConfigError(f"{exc}: no cells in either input") from exc
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    out = Path(args.output_dir)
    if not out.is_dir():
        raise OSError(f"output directory {out} does not exist")
    try:
        scene = generate_scene(
            args.count, tuple(args.size), tuple(args.semi_axes), tuple(args.overlap),
            seed=args.seed, noise=args.noise,
        )
    except (ValueError, PackingError) as exc:
        raise ConfigError(str(exc)) from exc
    files.write_labels(out / f"{args.prefix}_truth.png", scene.labels)
    files.write_gray8(out / f"{args.prefix}_image.png", scene.image)
    meta = {
        "count": args.count,
        "size": list(scene.shape),
        "semi_axes": list(scene.semi_axes),
        "overlap": list(scene.overlap),
        "noise": args.noise,
        "seed": args.seed,
        "ellipses": [
            {"cx": e.cx, "cy": e.cy, "a": e.a, "b": e.b, "theta": e.theta} for e in scene.ellipses
        ],
    }
    (out / f"{args.prefix}_scene.json").write_text(json.dumps(meta, indent=2))
    print(f"wrote {args.prefix}_image.png, {args.prefix}_truth.png, {args.prefix}_scene.json")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    apply_env_defaults(parser)
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.func(args)
    except UnimodalHistogram as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNIMODAL
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
